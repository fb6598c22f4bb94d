"""Foliation currents on integrable regions (a, d) x T^2.

A region is described in its own chart with coordinates (r, theta, phi),
theta and phi of period 1, and a vector field X = rho(r) Xbar with Xbar a
constant direction (a, b) on the torus factor.  The current of a 1-form
alpha at level r is the torus mean of alpha(Xbar).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import quad

from .chartcalc import (
    OneForm,
    ScalarField,
    VectorField,
    coordinate,
    exterior_derivative,
    interior_product,
    lift,
    pullback,
)
from .flowlab.combinatorics import rotation_number
from .sampling import halton_box
from .verify import NotStabilizingError


class IrrationalDirectionError(ValueError):
    """A rational-orbit estimator was asked for an irrational direction."""


class PremiseError(ValueError):
    """Region fields do not satisfy the premise of an identity."""


@dataclass
class IntegrableRegion:
    name: str
    interval: tuple
    direction: tuple  # (a, b): Xbar = a d/dtheta + b d/dphi
    rho: ScalarField  # function of r
    X: VectorField
    lam: Optional[OneForm] = None
    h: Optional[ScalarField] = None
    extras: dict = field(default_factory=dict)

    @property
    def xbar(self) -> np.ndarray:
        return np.array([0.0, *self.direction], dtype=float)

    def torus(self, r: float, n: int = 256) -> np.ndarray:
        t = np.arange(n) / n
        th, ph = np.meshgrid(t, t, indexing="ij")
        return np.column_stack([np.full(n * n, float(r)), th.ravel(), ph.ravel()])

    def samples(self, n: int = 1000, seed: int = 0, margin: float = 0.0) -> np.ndarray:
        a, d = self.interval
        return halton_box(n, (a + margin, 0.0, 0.0), (d - margin, 1.0, 1.0), seed)

    def check(self, n: int = 1000, seed: int = 0) -> float:
        """max |X - rho Xbar| on samples."""
        pts = self.samples(n, seed)
        res = np.abs(self.X(pts) - self.rho(pts)[:, None] * self.xbar[None]).max()
        return float(res)


def linear_region(direction, rho=1.0, interval=(0.0, 1.0), name="linear") -> IntegrableRegion:
    rho = lift(rho)
    a, b = (float(v) for v in direction)
    X = VectorField([0.0, rho * a, rho * b], "rho Xbar")
    return IntegrableRegion(name, tuple(interval), (a, b), rho, X)


def extension_region(region) -> IntegrableRegion:
    """The glued region (s, psi, z): Xbar = d/dz, rho = g, lambda = b dz + G dpsi."""
    tri = region.triple
    return IntegrableRegion(region.name, (tri.s0, tri.s0 + 1.0), (0.0, 1.0), tri.X[2], tri.X,
                            tri.lam, tri.h, {"b": tri.b, "g": tri.g})


# (r, theta, phi) -> (x, y, z) = (2 phi, theta, r) on the double cover
_KLEIN_A = np.array([[0.0, 0.0, 2.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]])


def klein_region(model, interval=(0.0, 0.5)) -> IntegrableRegion:
    """A region between the Klein levels, as a torus bundle over z with Xbar = d/dphi."""
    b = np.zeros(3)
    X = pullback(model.X, _KLEIN_A, b)
    lam = pullback(model.lam, _KLEIN_A, b)
    h = pullback(model.bernoulli, _KLEIN_A, b)
    reg = IntegrableRegion("klein", tuple(interval), (0.0, 1.0), lift(0.5), X, lam, h)
    reg.extras["to_model"] = (_KLEIN_A, b)
    return reg


def klein_form(region: IntegrableRegion, nu: OneForm) -> OneForm:
    """A 1-form given in the model's (x, y, z) coordinates, in region coordinates."""
    A, b = region.extras["to_model"]
    return pullback(nu, A, b)


@dataclass
class CurrentEstimate:
    value: float
    method: str
    samples: float  # grid size, horizon or orbit count
    error_bound: float
    note: str = ""

    def to_dict(self):
        return {"value": self.value, "method": self.method, "samples": self.samples,
                "error_bound": self.error_bound, "note": self.note}


def _pairing(alpha: OneForm, vec, pts):
    return alpha(pts) @ vec


def current_space_average(alpha: OneForm, region: IntegrableRegion, r: float, n: int = 256) -> CurrentEstimate:
    """Trapezoid mean of alpha(Xbar) over {r} x T^2; error from the half grid."""
    vals = _pairing(alpha, region.xbar, region.torus(r, n)).reshape(n, n)
    full = float(vals.mean())
    half = float(vals[::2, ::2].mean())
    return CurrentEstimate(full, "space_average", n * n, abs(full - half))


def _integer_direction(direction):
    a, b = direction
    if a == 0.0:
        return (0, int(np.sign(b))), abs(1.0 / b)
    rot = rotation_number((a, b))
    if not rot.rational:
        raise IrrationalDirectionError(f"direction slope {rot.value!r} is not rational")
    q, p = rot.q, rot.p
    if a < 0:
        q, p = -q, -p
    return (q, p), q / a


def current_rational(alpha: OneForm, region: IntegrableRegion, r: float, n: int = 256,
                     n_orbits: Optional[int] = None) -> CurrentEstimate:
    """Mean over a transversal of closed-orbit line integrals, each divided by the orbit period."""
    (q, p), period = _integer_direction(region.direction)
    # unimodular frame: (q, p) along the orbit, (u, v) across
    g, u0, v0 = _ext_gcd(q, p)
    u, v = -v0, u0
    m = n if n_orbits is None else n_orbits
    s = np.arange(n) / n
    sig = np.arange(m) / m
    S, Sg = np.meshgrid(s, sig, indexing="ij")
    th = S * q + Sg * u
    ph = S * p + Sg * v
    pts = np.column_stack([np.full(th.size, float(r)), th.ravel() % 1.0, ph.ravel() % 1.0])
    vals = _pairing(alpha, np.array([0.0, q, p], dtype=float), pts).reshape(n, m)
    value = float(vals.mean()) / period
    coarse = float(vals[::2, ::2].mean()) / period if m > 1 else float(vals[::2].mean()) / period
    method = "rational_orbit" if m > 1 else "single_orbit"
    return CurrentEstimate(value, method, m, abs(value - coarse), f"closed orbits of class ({q}, {p})")


def _ext_gcd(a, b):
    """(g, x, y) with a x + b y = g = gcd >= 0."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        k = a // b
        a, b = b, a - k * b
        x0, x1 = x1, x0 - k * x1
        y0, y1 = y1, y0 - k * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def current_birkhoff(alpha: OneForm, region: IntegrableRegion, r: float, horizon: float,
                     base=(0.0, 0.0), nodes: int = 8) -> CurrentEstimate:
    """Time average of alpha(Xbar) along the Xbar-orbit from ``base`` up to ``horizon``.

    Gauss-Legendre with ``nodes`` points per unit time.  The error bound is
    the empirical two-horizon estimate |A_T - A_{T/2}|, not a rigorous bound.
    """
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    xg, wg = np.polynomial.legendre.leggauss(nodes)
    m = int(np.ceil(horizon))
    edges = np.linspace(0.0, horizon, m + 1)
    h = np.diff(edges)
    t = (edges[:-1, None] + 0.5 * h[:, None] * (xg[None] + 1.0)).ravel()
    w = (0.5 * h[:, None] * wg[None]).ravel()
    a, b = region.direction
    pts = np.column_stack([np.full(t.size, float(r)), (base[0] + a * t) % 1.0, (base[1] + b * t) % 1.0])
    f = _pairing(alpha, region.xbar, pts)
    cum = np.cumsum(f * w)
    total = cum[-1] / horizon
    half_idx = np.searchsorted(t, 0.5 * horizon)
    if m % 2 == 0 and m > 1:
        half = cum[half_idx - 1] / (0.5 * horizon)
    else:
        half = total
    method = "birkhoff"
    try:
        if rotation_number((a, b)).rational:
            method = "birkhoff_single_orbit"
    except ValueError:
        pass
    return CurrentEstimate(float(total), method, horizon, float(abs(total - half)),
                           "empirical two-horizon bound")


def check_lambda_drift(region: IntegrableRegion, r1: float, r2: float, n: int = 256,
                       premise_tol: float = 1e-10, lam: Optional[OneForm] = None):
    """(lhs, rhs, |lhs - rhs|) for c_r2(lam) - c_r1(lam) = int_r1^r2 h'(r) / rho(r) dr.

    The premise i_X dlam = -dh with h = h(r) is checked on samples first.
    """
    lam = region.lam if lam is None else lam
    if lam is None or region.h is None:
        raise PremiseError("region needs lambda and h")
    pts = region.samples(500, seed=7)
    res = interior_product(region.X, exterior_derivative(lam))(pts) + exterior_derivative(region.h)(pts)
    dh = exterior_derivative(region.h)(pts)
    if np.abs(res).max() > premise_tol or np.abs(dh[:, 1:]).max() > premise_tol:
        raise PremiseError(f"i_X dlam + dh residual {np.abs(res).max():.3g}")
    if r1 == r2:
        return 0.0, 0.0, 0.0
    lhs = current_space_average(lam, region, r2, n).value - current_space_average(lam, region, r1, n).value
    dhr = region.h.partial(0)

    def integrand(r):
        p = np.array([[r, 0.0, 0.0]])
        return float(dhr(p)[0] / region.rho(p)[0])

    breaks = region.extras.get("b")
    points = None
    if breaks is not None:
        lo, hi = min(r1, r2), max(r1, r2)
        points = [x for x in np.union1d(breaks.breaks, region.extras["g"].breaks) if lo < x < hi]
    rhs, _ = quad(integrand, r1, r2, points=points or None, epsabs=1e-13, epsrel=1e-13, limit=200)
    return float(lhs), float(rhs), float(abs(lhs - rhs))


def _check_end_stabilizing(nu, region, r, tol, n=32):
    pts = region.torus(r, n)
    res = np.abs(interior_product(region.X, exterior_derivative(nu))(pts)).max()
    pair = interior_product(region.X, nu)(pts).min()
    if res > tol or pair <= 0:
        raise NotStabilizingError(
            f"nu not stabilizing at r={r:g}: |i_X dnu| = {res:.3g}, min nu(X) = {pair:.3g}")


def match_boundary_currents(region: IntegrableRegion, nu: OneForm, tol: float = 1e-8,
                            inset: float = 1e-3, n: int = 256, stab_tol: float = 1e-9):
    """(c_minus, c_plus, matched) from the tori next to both ends of the region."""
    a, d = region.interval
    ra, rd = a + inset * (d - a), d - inset * (d - a)
    for r in (ra, rd):
        _check_end_stabilizing(nu, region, r, stab_tol)
    cm = current_space_average(nu, region, ra, n).value
    cp = current_space_average(nu, region, rd, n).value
    return cm, cp, bool(abs(cm - cp) < tol)


def current_sweep(alpha: OneForm, region: IntegrableRegion, rs, n: int = 256):
    """Rows (r, c_r(alpha)) for plotting."""
    return [(float(r), current_space_average(alpha, region, r, n).value) for r in rs]


def homology_pair(region: IntegrableRegion, r: float, n: int = 64):
    """(c_r(dtheta), c_r(dphi))."""
    dth = OneForm([0.0, 1.0, 0.0], "dtheta")
    dph = OneForm([0.0, 0.0, 1.0], "dphi")
    return (current_space_average(dth, region, r, n).value,
            current_space_average(dph, region, r, n).value)


__all__ = [
    "CurrentEstimate", "IntegrableRegion", "IrrationalDirectionError", "PremiseError",
    "check_lambda_drift", "current_birkhoff", "current_rational", "current_space_average",
    "current_sweep", "extension_region", "homology_pair", "klein_form", "klein_region",
    "linear_region", "match_boundary_currents",
]
