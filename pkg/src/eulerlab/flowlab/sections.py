"""Poincare sections, return maps, periodic orbits and their classification."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from ..chartcalc import ScalarField, VectorField
from ..models.atlas import Atlas, OutsideAtlasError, Point
from .combinatorics import arc_permutation_covering

log = logging.getLogger(__name__)

MIN_TRANSVERSAL_SPEED = 1e-6


class NoReturnError(RuntimeError):
    """The orbit did not come back to the section before the time cap."""


class TangentialCrossingError(RuntimeError):
    """The vector field is (almost) tangent to the section."""


class NewtonFailure(RuntimeError):
    """Newton iteration for a periodic orbit failed."""


@dataclass(frozen=True)
class SectionMap:
    """The section {coordinate[axis] = level} of a chart, parametrized by the other two axes."""

    chart_id: Optional[str] = None
    axis: int = 2
    level: float = 0.0
    t_max: float = 100.0
    tol: float = 1e-12

    @property
    def transverse(self) -> Tuple[int, int]:
        return tuple(i for i in range(3) if i != self.axis)

    def lift(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        if w.shape == (3,):
            return w.copy()
        p = np.empty(3)
        p[self.axis] = self.level
        p[list(self.transverse)] = w
        return p


@dataclass
class PeriodicOrbit:
    base: Point
    period: float
    return_matrix: np.ndarray
    multipliers: np.ndarray
    klass: str
    covering_number: Optional[int] = None
    iterations: int = 0

    def to_dict(self):
        return {
            "base": {"chart": self.base.chart_id, "coords": list(self.base.coords)},
            "period": self.period,
            "return_matrix": self.return_matrix.tolist(),
            "det": float(np.linalg.det(self.return_matrix)),
            "multipliers": [{"re": float(z.real), "im": float(z.imag)} for z in self.multipliers],
            "klass": self.klass,
            "covering_number": self.covering_number,
        }


def _variational_rhs(X: VectorField):
    def rhs(t, y):
        p = y[None, :3]
        v, dv, _ = X.jets(p, 1)
        M = y[3:].reshape(3, 3)
        return np.concatenate([v[0], (dv[0] @ M).ravel()])

    return rhs


def _flow_to_section(X, atlas: Atlas, section: SectionMap, p, variational=False):
    ch = atlas.chart(section.chart_id)
    per = ch.periods[section.axis]
    if per is None:
        raise ValueError("section axis must be periodic")
    v0 = X(p[None])[0]
    if abs(v0[section.axis]) < MIN_TRANSVERSAL_SPEED:
        raise TangentialCrossingError(f"transversal speed {abs(v0[section.axis]):.3g} below threshold")
    sgn = np.sign(v0[section.axis])
    target = p[section.axis] + sgn * per

    def event(t, y):
        return y[section.axis] - target

    event.terminal = True
    event.direction = sgn
    if variational:
        y0 = np.concatenate([p, np.eye(3).ravel()])
        rhs = _variational_rhs(X)
    else:
        y0 = p
        rhs = lambda t, y: X(y[None, :3])[0]  # noqa: E731
    sol = solve_ivp(rhs, (0.0, section.t_max), y0, method="DOP853", rtol=section.tol,
                    atol=section.tol, events=event, dense_output=True)
    if sol.status != 1 or len(sol.t_events[0]) == 0:
        raise NoReturnError(f"no return to the section within t = {section.t_max:g}")
    t = float(sol.t_events[0][0])
    y = sol.y_events[0][0]
    for _ in range(3):  # polish the crossing on the dense interpolant
        r = y[section.axis] - target
        if abs(r) < 1e-15:
            break
        t -= r / X(y[None, :3])[0][section.axis]
        y = sol.sol(t)
    y = y.copy()
    y[section.axis] = target
    return t, y


def _wrap(d, periods):
    d = np.array(d, dtype=float)
    for i, per in enumerate(periods):
        if per is not None:
            d[i] = (d[i] + 0.5 * per) % per - 0.5 * per
    return d


def poincare_map(X: VectorField, atlas: Atlas, section: SectionMap, w) -> Tuple[Point, float]:
    """First return of w (section coordinates or a full point) and the return time."""
    t, y = _flow_to_section(X, atlas, section, section.lift(w))
    pt, _ = atlas.normalize(y[:3], section.chart_id)
    return pt, t


def _return_with_derivative(X, atlas, section, w):
    p = section.lift(w)
    t, y = _flow_to_section(X, atlas, section, p, variational=True)
    pt, L = atlas.normalize(y[:3], section.chart_id)
    M = y[3:].reshape(3, 3)
    v = X(y[None, :3])[0]
    k = section.axis
    e = np.zeros(3)
    e[k] = 1.0
    proj = np.eye(3) - np.outer(v, e) / v[k]
    D = L @ proj @ M
    tr = list(section.transverse)
    return pt, t, D[np.ix_(tr, tr)]


def linearized_return(X: VectorField, atlas: Atlas, section: SectionMap, w) -> np.ndarray:
    """Derivative of the return map at w from the variational equations."""
    return _return_with_derivative(X, atlas, section, w)[2]


def fd_return_jacobian(X, atlas, section, w, step=1e-6) -> np.ndarray:
    """Central-difference Jacobian of the return map (oracle)."""
    tr = list(section.transverse)
    ch = atlas.chart(section.chart_id)
    per = [ch.periods[i] for i in tr]
    w = np.asarray(section.lift(w)[tr], dtype=float)
    J = np.empty((2, 2))
    for j in range(2):
        e = np.zeros(2)
        e[j] = step
        fp = np.array(poincare_map(X, atlas, section, w + e)[0].coords)[tr]
        fm = np.array(poincare_map(X, atlas, section, w - e)[0].coords)[tr]
        J[:, j] = _wrap(fp - fm, per) / (2 * step)
    return J


def classify_orbit(return_matrix=None, hessian=None, tol: float = 1e-6) -> str:
    """elliptic / hyperbolic / degenerate from a Hessian (sign of det) or from multipliers."""
    if hessian is not None:
        d = float(np.linalg.det(np.asarray(hessian, dtype=float)))
        if abs(d) <= tol:
            return "degenerate"
        return "hyperbolic" if d < 0 else "elliptic"
    if return_matrix is None:
        raise ValueError("need a return matrix or a Hessian")
    mult = np.linalg.eigvals(np.asarray(return_matrix, dtype=float))
    real = np.all(np.abs(mult.imag) <= tol)
    on_circle = np.abs(np.abs(mult) - 1.0) <= tol
    if not real and np.all(on_circle):
        return "elliptic"
    if real and not np.all(on_circle):
        return "hyperbolic"
    return "degenerate"


def covering_number(X, atlas, section: SectionMap, w0, invariant: ScalarField, radius: float = 1e-3,
                    n: int = 720, rel_thresh: float = 0.05):
    """(m, p, n, d) from the permutation of level-set arcs at a fixed point of the return map.

    The m arcs of {invariant = invariant(w0)} leaving w0 are located as the
    minima of |invariant - invariant(w0)| on a small circle; the return map
    permutes them by a rotation i -> i + p.
    """
    tr = list(section.transverse)
    ch = atlas.chart(section.chart_id)
    per = [ch.periods[i] for i in tr]
    c0 = section.lift(w0)
    w0 = c0[tr]
    ang = 2 * np.pi * np.arange(n) / n
    circle = np.repeat(c0[None], n, axis=0)
    circle[:, tr[0]] += radius * np.cos(ang)
    circle[:, tr[1]] += radius * np.sin(ang)
    v = np.abs(invariant(circle) - invariant(c0[None])[0])
    scale = v.max()
    if scale == 0:
        raise ValueError("invariant is constant near the orbit; arcs undefined")
    is_min = (v <= np.roll(v, 1)) & (v < np.roll(v, -1)) & (v <= rel_thresh * scale)
    arcs = np.flatnonzero(is_min)
    m = len(arcs)
    if m == 0:
        raise ValueError("no level-set arcs through the orbit")
    targets = []
    for j in arcs:
        img, _ = poincare_map(X, atlas, section, circle[j])
        d = _wrap(np.array(img.coords)[tr] - w0, per)
        a = np.arctan2(d[1], d[0]) % (2 * np.pi)
        gaps = np.abs((ang[arcs] - a + np.pi) % (2 * np.pi) - np.pi)
        targets.append(int(np.argmin(gaps)))
    shifts = {(t - i) % m for i, t in enumerate(targets)}
    if len(shifts) != 1:
        raise ValueError(f"arc permutation {targets} is not a rotation")
    p = shifts.pop()
    nn, d = arc_permutation_covering(m, p)
    return m, p, nn, d


def find_periodic(X: VectorField, atlas: Atlas, section: SectionMap, guess, max_iter: int = 30,
                  tol: float = 1e-10, invariant: Optional[ScalarField] = None) -> PeriodicOrbit:
    """Newton iteration on the wrapped displacement phi(w) - w."""
    tr = list(section.transverse)
    ch = atlas.chart(section.chart_id)
    per = [ch.periods[i] for i in tr]
    w = np.asarray(guess, dtype=float)
    if w.shape == (3,):
        w = w[tr]
    for it in range(1, max_iter + 1):
        try:
            pt, T, D = _return_with_derivative(X, atlas, section, w)
        except OutsideAtlasError as exc:
            raise NewtonFailure(f"iterate left the domain: {exc}") from exc
        F = _wrap(np.array(pt.coords)[tr] - w, per)
        if np.linalg.norm(F) < tol:
            base, _ = atlas.normalize(section.lift(w), section.chart_id)
            klass = classify_orbit(D)
            d_gamma = None
            if invariant is not None:
                try:
                    d_gamma = covering_number(X, atlas, section, w, invariant)[3]
                except ValueError as exc:
                    log.info("covering number unavailable: %s", exc)
            return PeriodicOrbit(base, T, D, np.linalg.eigvals(D), klass, d_gamma, it)
        J = D - np.eye(2)
        if abs(np.linalg.det(J)) < 1e-10:
            raise NewtonFailure("return map minus identity is singular (non-isolated orbit family)")
        step = np.linalg.solve(J, F)
        w = w - step
        if not np.all(np.isfinite(w)) or np.linalg.norm(step) > 10.0:
            raise NewtonFailure("Newton iteration diverged")
        try:
            w = np.array(atlas.normalize(section.lift(w), section.chart_id)[0].coords)[tr]
        except OutsideAtlasError as exc:
            raise NewtonFailure(f"iterate left the domain: {exc}") from exc
    raise NewtonFailure(f"no convergence in {max_iter} iterations")


def detect_period(X: VectorField, atlas: Atlas, section: SectionMap, w, max_returns: int = 8,
                  tol: float = 1e-8) -> Tuple[int, float]:
    """Smallest k with phi^k(w) = w, and the total flow time."""
    tr = list(section.transverse)
    ch = atlas.chart(section.chart_id)
    per = [ch.periods[i] for i in tr]
    w0 = section.lift(w)[tr]
    cur = w0.copy()
    total = 0.0
    for k in range(1, max_returns + 1):
        pt, t = poincare_map(X, atlas, section, cur)
        total += t
        cur = np.array(pt.coords)[tr]
        if np.linalg.norm(_wrap(cur - w0, per)) < tol:
            return k, total
    raise NoReturnError(f"orbit not periodic within {max_returns} returns")
