"""Constructing stabilizing 1-forms: primitives, interpolation, averaging, normalization."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp

from .chartcalc import (
    Jet,
    OneForm,
    ScalarField,
    VectorField,
    constant,
    exterior_derivative,
    interior_product,
    lift,
)
from .chartcalc.profiles import PiecewisePolynomial
from .currents import IntegrableRegion
from .models.glued import pp_field
from .verify import check_stabilizing

_GL_NODES = 32


class NotClosedError(ValueError):
    """A form expected to be closed has d-residual above tolerance."""


class CohomologyObstruction(ValueError):
    """The form has nonzero torus periods, so it has no primitive."""

    def __init__(self, periods):
        self.periods = tuple(float(p) for p in periods)
        super().__init__(f"form is not exact: torus periods {self.periods}")


class PreconditionError(ValueError):
    """i_X dnu = 0 fails on the region."""


class NotTransverseError(ValueError):
    """nu(X) is not positive on the neighborhood."""


def _max_d(nu: OneForm, pts) -> float:
    return float(np.abs(exterior_derivative(nu)(pts)).max())


def _segment_integral(nu: OneForm, a: np.ndarray, b: np.ndarray, nodes: int = _GL_NODES) -> np.ndarray:
    """int of nu along straight segments a[k] -> b[k] (cover coordinates)."""
    xg, wg = np.polynomial.legendre.leggauss(nodes)
    t = 0.5 * (xg + 1.0)
    d = b - a
    pts = (a[:, None, :] + t[None, :, None] * d[:, None, :]).reshape(-1, 3)
    vals = nu(pts).reshape(len(a), nodes, 3)
    return 0.5 * np.einsum("knc,kc,n->k", vals, d, wg)


def torus_periods(nu: OneForm, r: float, n: int = 256):
    """(int over the theta-loop, int over the phi-loop) at (r, 0, 0)."""
    t = np.arange(n) / n
    zero = np.zeros(n)
    loop_t = np.column_stack([np.full(n, r), t, zero])
    loop_p = np.column_stack([np.full(n, r), zero, t])
    return float(nu(loop_t)[:, 1].mean()), float(nu(loop_p)[:, 2].mean())


@dataclass
class PrimitiveReport:
    closed_residual: float
    periods: tuple
    loop_defect: float
    base: tuple


def find_primitive(delta: OneForm, region: IntegrableRegion, tol: float = 1e-9, n_loops: int = 10,
                   seed: int = 0, return_report: bool = False):
    """g with dg = delta on [a, d] x T^2, by line integrals from the base (r_mid, 0, 0)."""
    a, d = region.interval
    pts = region.samples(1000, seed)
    res = _max_d(delta, pts)
    if res > tol:
        raise NotClosedError(f"d(delta) residual {res:.3g} exceeds {tol:g}")
    r0 = 0.5 * (a + d)
    periods = torus_periods(delta, r0)
    if max(abs(p) for p in periods) > tol:
        raise CohomologyObstruction(periods)
    base = np.array([r0, 0.0, 0.0])

    def value(p):
        p = np.asarray(p, dtype=float)
        n = len(p)
        b0 = np.repeat(base[None], n, axis=0)
        p1 = b0.copy()
        p1[:, 0] = p[:, 0]
        p2 = p1.copy()
        p2[:, 1] = p[:, 1]
        return (_segment_integral(delta, b0, p1) + _segment_integral(delta, p1, p2)
                + _segment_integral(delta, p2, p))

    def fn(p, k):
        first = delta(p) if k >= 1 else None
        second = None
        if k >= 2:
            _, dd, _ = delta.jets(p, 1)
            second = 0.5 * (dd + np.swapaxes(dd, 1, 2))
        return Jet(value(p), first, second)

    g = ScalarField(fn, 2, "primitive", lambda i: delta.comps[i])
    # path independence on random closed triangles
    rng = np.random.default_rng(seed)
    lo, hi = np.array([a, -1.0, -1.0]), np.array([d, 2.0, 2.0])
    tri = lo + (hi - lo) * rng.random((n_loops, 3, 3))
    loop = sum(_segment_integral(delta, tri[:, i], tri[:, (i + 1) % 3]) for i in range(3))
    defect = float(np.abs(loop).max())
    if defect > tol:
        raise NotClosedError(f"line integrals depend on the path: loop defect {defect:.3g}")
    if return_report:
        return g, PrimitiveReport(res, periods, defect, tuple(base))
    return g


def _as_field(cut) -> tuple:
    if isinstance(cut, PiecewisePolynomial):
        f = pp_field(cut, 0, "phi")
    else:
        f = lift(cut)
    return f, f.partial(0)


def interpolate_closed(nu0: OneForm, nu1: OneForm, cut, region: IntegrableRegion,
                       tol: float = 1e-9, check: bool = True) -> OneForm:
    """nu0 + d(phi(r) g) with dg = nu1 - nu0; phi = 0 near r = a, 1 near r = d."""
    delta = nu1 - nu0
    g = find_primitive(delta, region, tol)
    phi, dphi = _as_field(cut)
    comps = [nu0[i] + phi * delta[i] for i in range(3)]
    comps[0] = comps[0] + g * dphi
    out = OneForm(comps, "interpolated")
    if check:
        pts = region.samples(1000, seed=3)
        ok, rep = check_stabilizing(out, region.X, pts, tol)
        assert ok, f"interpolated form not stabilizing: {rep.max_residual:.3g}"
    return out


def _torus_mean_field(f: ScalarField, n: int) -> ScalarField:
    t = np.arange(n) / n
    th, ph = (a.ravel() for a in np.meshgrid(t, t, indexing="ij"))
    m = n * n

    def block(p, k):
        q = np.column_stack([np.repeat(p[:, 0], m), np.tile(th, len(p)), np.tile(ph, len(p))])
        j = f.jet(q, k)
        val = j.value.reshape(len(p), m).mean(axis=1)
        first = second = None
        if k >= 1:
            first = np.zeros((len(p), 3))
            first[:, 0] = j.first[:, 0].reshape(len(p), m).mean(axis=1)
        if k >= 2:
            second = np.zeros((len(p), 3, 3))
            second[:, 0, 0] = j.second[:, 0, 0].reshape(len(p), m).mean(axis=1)
        return val, first, second

    def fn(p, k):
        p = np.asarray(p, dtype=float)
        # only the radius matters; evaluate each distinct radius once, in blocks
        rs, inv = np.unique(p[:, 0], return_inverse=True)
        step = max(1, 65536 // m)
        parts = [block(rs[i:i + step, None], k) for i in range(0, len(rs), step)]
        val = np.concatenate([a[0] for a in parts])[inv]
        first = np.concatenate([a[1] for a in parts])[inv] if k >= 1 else None
        second = np.concatenate([a[2] for a in parts])[inv] if k >= 2 else None
        return Jet(val, first, second)

    def dfn(i):
        return _torus_mean_field(f.partial(0), n) if i == 0 else constant(0.0)

    return ScalarField(fn, min(f.order, 2), f"<{f.label}>", dfn)


def torus_average(nu: OneForm, n: int = 32) -> OneForm:
    """Coefficient-wise mean over the tori {r} x T^2."""
    comps = [c if c.const is not None else _torus_mean_field(c, n) for c in nu.comps]
    return OneForm(comps, f"<{nu.label}>")


def normalized_orbit_form(X: VectorField, d_gamma: int, axis: int = 2, coordinate_period: float = 1.0,
                          pts=None, scale: float = 1.0) -> OneForm:
    """scale * d(coordinate) / (d_gamma * coordinate_period).

    The coordinate along ``axis`` advances by ``coordinate_period`` along the
    orbit, so the period over the orbit is scale / d_gamma.  ``scale`` is the
    free positive constant; keep it 1 for the normalized form.
    """
    if d_gamma < 1 or scale <= 0:
        raise ValueError("need d_gamma >= 1 and scale > 0")
    comps = [0.0, 0.0, 0.0]
    comps[axis] = scale / (d_gamma * coordinate_period)
    nu = OneForm(comps, f"d{'xyz'[axis]}/{d_gamma * coordinate_period:g}")
    if pts is not None:
        pair = interior_product(X, nu)(pts)
        if pair.min() <= 0:
            raise NotTransverseError(f"nu(X) reaches {pair.min():.3g} on the neighborhood")
    return nu


def period_integral(nu: OneForm, X: VectorField, p0, period: float, tol: float = 1e-12) -> float:
    """int_0^T nu(X)(flow_t p0) dt in cover coordinates."""
    pair = interior_product(X, nu)

    def rhs(t, y):
        p = y[None, :3]
        return np.concatenate([X(p)[0], pair(p)])

    sol = solve_ivp(rhs, (0.0, period), np.concatenate([np.asarray(p0, float), [0.0]]),
                    method="DOP853", rtol=tol, atol=tol)
    return float(sol.y[3, -1])


@dataclass
class ObservationReport:
    spread: float
    integrals: np.ndarray
    precondition_residual: float

    def to_dict(self):
        return {"spread": self.spread, "n": int(len(self.integrals)),
                "min": float(self.integrals.min()), "max": float(self.integrals.max()),
                "precondition_residual": self.precondition_residual}


def verify_observation_O(nu: OneForm, X: VectorField, base_pts, fiber_axis: int = 2, n: int = 256,
                         tol: float = 1e-9, require_precondition: bool = True) -> ObservationReport:
    """Spread (max - min) of the fiber integrals of nu over {p} x S^1 for p in ``base_pts``.

    ``base_pts`` are full chart points; their fiber coordinate is ignored.
    """
    base = np.asarray(base_pts, dtype=float)
    t = np.arange(n) / n
    q = np.repeat(base, n, axis=0)
    q[:, fiber_axis] = np.tile(t, len(base))
    iXdnu = interior_product(X, exterior_derivative(nu))
    res = float(np.abs(iXdnu(q[:: max(1, n // 16)])).max())
    if require_precondition and res > tol:
        raise PreconditionError(f"i_X dnu residual {res:.3g} exceeds {tol:g}")
    integrals = nu(q)[:, fiber_axis].reshape(len(base), n).mean(axis=1)
    return ObservationReport(float(np.ptp(integrals)), integrals, res)


def stabilizer_for_klein(model) -> OneForm:
    """dx: invariant under the deck generators and dual to X = d/dx."""
    if model.params.get("ell", None) != 0 or not model.params.get("reflect", False):
        raise ValueError("model is not the Klein mapping torus")
    nu = OneForm([1.0, 0.0, 0.0], "dx")
    for gmap in model.atlas.generators:
        if not np.allclose(gmap.A.T @ np.array([1.0, 0.0, 0.0]), [1.0, 0.0, 0.0], atol=0):
            raise ValueError(f"dx does not descend along {gmap.name}")
    return nu


__all__ = [
    "CohomologyObstruction", "NotClosedError", "NotTransverseError", "ObservationReport",
    "PreconditionError", "PrimitiveReport", "find_primitive", "interpolate_closed",
    "normalized_orbit_form", "period_integral", "stabilizer_for_klein", "torus_average",
    "torus_periods", "verify_observation_O",
]
