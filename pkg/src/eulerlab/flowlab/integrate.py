"""Orbit integration on identification atlases."""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from scipy.integrate import RK45, solve_ivp

from ..chartcalc import VectorField
from ..models.atlas import Atlas, OutsideAtlasError, Point


class OrbitLeftDomainError(RuntimeError):
    """The orbit left a bounded chart."""


@dataclass
class OrbitSegment:
    times: np.ndarray
    points: List[Point]
    cover: np.ndarray  # unnormalized coordinates (N, 3)
    tol: float
    order: int = 8
    dense: Optional[object] = None

    def end(self) -> Point:
        return self.points[-1]

    def to_rows(self):
        return [(float(t), p.chart_id, *p.coords) for t, p in zip(self.times, self.points)]


def vector_rhs(X: VectorField):
    def rhs(t, y):
        return X(y[None, :3])[0]

    return rhs


def _check_domain(atlas: Atlas, chart_id, cover: np.ndarray):
    ch = atlas.chart(chart_id)
    for i, per in enumerate(ch.periods):
        if per is None and ch.twist is None:
            if np.any(cover[:, i] < ch.lo[i] - 1e-12) or np.any(cover[:, i] > ch.hi[i] + 1e-12):
                raise OrbitLeftDomainError(f"orbit leaves chart {ch.id!r} along axis {i}")
    if ch.radial is not None:
        r2 = cover[:, 0] ** 2 + cover[:, 1] ** 2
        if np.any(r2 > ch.radial**2 * (1 + 1e-12)):
            raise OrbitLeftDomainError(f"orbit leaves the disk of chart {ch.id!r}")


def integrate(X: VectorField, atlas: Atlas, p0, t_final: float, tol: float = 1e-10,
              chart_id: Optional[str] = None, n_out: int = 101) -> OrbitSegment:
    """Flow p0 for time t_final with DOP853 (rtol = atol = tol) and normalize the samples."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    p0 = np.asarray(p0.coords if isinstance(p0, Point) else p0, dtype=float)
    t_eval = np.linspace(0.0, t_final, n_out)
    sol = solve_ivp(vector_rhs(X), (0.0, t_final), p0, method="DOP853", rtol=tol, atol=tol,
                    t_eval=t_eval, dense_output=True)
    if not sol.success:
        raise RuntimeError(f"integration failed: {sol.message}")
    cover = sol.y.T
    _check_domain(atlas, chart_id, cover)
    try:
        pts = [atlas.normalize(c, chart_id)[0] for c in cover]
    except OutsideAtlasError as exc:
        raise OrbitLeftDomainError(str(exc)) from exc
    return OrbitSegment(sol.t, pts, cover, tol, 8, sol.sol)


def integrate_fixed(X: VectorField, p0, t_final: float, n_steps: int) -> np.ndarray:
    """Fixed-step Dormand-Prince order-5 integration in cover coordinates; returns the endpoint."""
    A, B, C = RK45.A, RK45.B, RK45.C
    f = vector_rhs(X)
    y = np.asarray(p0, dtype=float).copy()
    h = t_final / n_steps
    t = 0.0
    K = np.empty((len(C), 3))
    for _ in range(n_steps):
        for s in range(len(C)):
            K[s] = f(t + C[s] * h, y + h * (A[s, :s] @ K[:s]))
        y = y + h * (B @ K)
        t += h
    return y
