"""Residual checks for stationary Euler data, stable Hamiltonian structures and stabilizing forms."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from .chartcalc import (
    MetricField,
    OneForm,
    TwoForm,
    VectorField,
    as_points,
    covariant_derivative,
    cross,
    curl,
    exterior_derivative,
    gradient,
    interior_product,
    musical_flat,
)
from .models.solution import ModelSolution, pairing_metric

DEFAULT_TOL = 1e-9
EULER_TAGS = ("momentum", "volume", "curlform", "dualform")
EXTRA_TAGS = ("flat", "omega")


class MissingDataError(ValueError):
    """The solution lacks a field the requested check needs."""


class NotStabilizingError(ValueError):
    """The 1-form fails i_X d nu = 0 or nu(X) > 0."""


@dataclass
class ResidualReport:
    tag: str
    max_residual: float
    worst_point: Tuple[float, float, float]
    n: int
    tol: float
    chart: str = ""
    seed: Optional[int] = None
    details: Dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.max_residual < self.tol

    def to_dict(self):
        out = {
            "tag": self.tag,
            "max": self.max_residual,
            "argmax": list(self.worst_point),
            "n": self.n,
            "tol": self.tol,
            "chart": self.chart,
            "passed": self.passed,
        }
        if self.seed is not None:
            out["seed"] = self.seed
        if self.details:
            out["details"] = dict(self.details)
        return out


def _report(tag, res, pts, tol, chart="", seed=None, details=None) -> ResidualReport:
    res = np.asarray(res, dtype=float)
    k = int(np.argmax(res))
    return ResidualReport(tag, float(res[k]), tuple(float(v) for v in pts[k]), len(res), tol,
                          chart, seed, details or {})


def _norm(v):
    v = np.asarray(v)
    return np.abs(v) if v.ndim == 1 else np.linalg.norm(v, axis=1)


def _need(sol, *names):
    for n in names:
        if getattr(sol, n) is None:
            raise MissingDataError(f"solution {sol.name!r} has no {n}")


def residual_values(sol: ModelSolution, pts, which: str) -> np.ndarray:
    pts = as_points(pts)
    if which == "momentum":
        _need(sol, "metric", "pressure")
        acc = covariant_derivative(sol.metric, sol.X, sol.X, pts)
        return _norm(acc + gradient(sol.metric, sol.pressure)(pts))
    if which == "volume":
        return _norm(exterior_derivative(interior_product(sol.X, sol.mu))(pts))
    if which == "curlform":
        _need(sol, "metric")
        c = cross(sol.metric, sol.mu, curl(sol.metric, sol.mu, sol.X, pts), sol.X, pts)
        return _norm(c(pts) + gradient(sol.metric, sol.bernoulli)(pts))
    if which == "dualform":
        iX = interior_product(sol.X, exterior_derivative(sol.lam))
        return _norm(iX(pts) + exterior_derivative(sol.bernoulli)(pts))
    if which == "flat":
        _need(sol, "metric")
        return _norm(sol.lam(pts) - musical_flat(sol.metric, sol.X)(pts))
    if which == "omega":
        return _norm(sol.omega(pts) - interior_product(sol.X, sol.mu)(pts))
    raise ValueError(f"unknown residual tag {which!r}")


def euler_residuals(sol: ModelSolution, pts, which: str, tol: float = DEFAULT_TOL,
                    seed: Optional[int] = None) -> ResidualReport:
    pts = as_points(pts)
    return _report(which, residual_values(sol, pts, which), pts, tol, sol.chart.id, seed)


def euler_suite(sol: ModelSolution, pts, tol: float = DEFAULT_TOL, seed=None,
                tags=EULER_TAGS) -> Dict[str, ResidualReport]:
    return {t: euler_residuals(sol, pts, t, tol, seed) for t in tags}


def check_shs(omega: TwoForm, lam: OneForm, X: VectorField, pts, tol: float = DEFAULT_TOL) -> ResidualReport:
    pts = as_points(pts)
    r1 = _norm(interior_product(X, exterior_derivative(lam))(pts))
    r2 = _norm(interior_product(X, omega)(pts))
    r3 = np.abs(interior_product(X, lam)(pts) - 1.0)
    total = np.maximum(np.maximum(r1, r2), r3)
    return _report("shs", total, pts, tol, details={
        "i_X dlam": float(r1.max()), "i_X omega": float(r2.max()), "lam(X)-1": float(r3.max())})


def check_stabilizing(nu: OneForm, X: VectorField, pts, tol: float = DEFAULT_TOL):
    pts = as_points(pts)
    res = _norm(interior_product(X, exterior_derivative(nu))(pts))
    pair = interior_product(X, nu)(pts)
    rep = _report("stabilizing", res, pts, tol, details={"min nu(X)": float(pair.min())})
    return bool(rep.passed and pair.min() > 0), rep


def bernoulli(sol: ModelSolution, pts) -> np.ndarray:
    """p + |X|^2 / 2."""
    _need(sol, "metric", "pressure")
    pts = as_points(pts)
    return sol.pressure(pts) + 0.5 * sol.metric.inner(sol.X, sol.X)(pts)


def rescale_to_reeb(sol: ModelSolution, nu: OneForm, pts, tol: float = DEFAULT_TOL):
    """(X / nu(X), nu, i_X mu) after checking that nu stabilizes X on ``pts``."""
    ok, rep = check_stabilizing(nu, sol.X, pts, tol)
    if not ok:
        raise NotStabilizingError(
            f"nu does not stabilize X: max |i_X dnu| = {rep.max_residual:.3g}, "
            f"min nu(X) = {rep.details['min nu(X)']:.3g}")
    Xt = sol.X / interior_product(sol.X, nu)
    return Xt, nu, interior_product(sol.X, sol.mu)


def metric_from_pairing(lam: OneForm, X: VectorField, pts) -> MetricField:
    """Positive definite metric with i_X g = lam (Euclidean on ker lam)."""
    pts = as_points(pts)
    if np.min(interior_product(X, lam)(pts)) <= 0:
        raise ValueError("lambda(X) must be positive")
    return pairing_metric(lam, X)
