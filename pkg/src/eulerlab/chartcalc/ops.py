"""Exterior and Riemannian operations on chart fields."""
from __future__ import annotations

import numpy as np

from .fields import MetricField, OneForm, ThreeForm, TwoForm, VectorField
from .jets import DegenerateDivisionError, Jet, ScalarField, as_points, constant, lift

DEGENERATE_VOLUME = 1e-12


class DegreeError(TypeError):
    """Operation applied to a field of unsupported degree."""


def _sum(terms):
    out = constant(0.0)
    for t in terms:
        out = out + t
    return out


def exterior_derivative(f):
    if isinstance(f, ScalarField):
        return OneForm([f.partial(i) for i in range(3)], f"d{f.label}")
    if isinstance(f, OneForm):
        a = f.comps
        return TwoForm(
            [
                a[2].partial(1) - a[1].partial(2),
                a[0].partial(2) - a[2].partial(0),
                a[1].partial(0) - a[0].partial(1),
            ],
            f"d{f.label}",
        )
    if isinstance(f, TwoForm):
        b = f.comps
        return ThreeForm(_sum(b[i].partial(i) for i in range(3)), f"d{f.label}")
    raise DegreeError(f"exterior derivative not defined for {type(f).__name__}")


def interior_product(X: VectorField, alpha):
    x = X.comps
    if isinstance(alpha, OneForm):
        return _sum(alpha[i] * x[i] for i in range(3))
    if isinstance(alpha, TwoForm):
        b = alpha.comps
        # coefficients of i_X beta are b x X
        return OneForm(
            [b[1] * x[2] - b[2] * x[1], b[2] * x[0] - b[0] * x[2], b[0] * x[1] - b[1] * x[0]],
            f"i_{X.label}{alpha.label}",
        )
    if isinstance(alpha, ThreeForm):
        return TwoForm([alpha.coef * x[i] for i in range(3)], f"i_{X.label}{alpha.label}")
    raise DegreeError(f"interior product not defined for {type(alpha).__name__}")


def musical_flat(g: MetricField, X: VectorField) -> OneForm:
    return OneForm(g.apply(X), f"flat({X.label})")


def musical_sharp(g: MetricField, alpha: OneForm) -> VectorField:
    return VectorField(g.inverse().apply(VectorField(alpha.comps)), f"sharp({alpha.label})")


def _check_volume(mu: ThreeForm, pts):
    if pts is None:
        return
    m = mu.coef(as_points(pts))
    if np.any(np.abs(m) < DEGENERATE_VOLUME):
        raise DegenerateDivisionError("volume form vanishes at an evaluation point")


def curl(g: MetricField, mu: ThreeForm, X: VectorField, pts=None) -> VectorField:
    """The field with ``d(flat X) = i_{curl X} mu``."""
    _check_volume(mu, pts)
    w = exterior_derivative(musical_flat(g, X))
    inv = 1.0 / mu.coef
    return VectorField([c * inv for c in w.comps], f"curl({X.label})")


def cross(g: MetricField, mu: ThreeForm, X: VectorField, Y: VectorField, pts=None) -> VectorField:
    """The field with ``flat(X x Y) = i_Y i_X mu``."""
    _check_volume(mu, pts)
    x, y, m = X.comps, Y.comps, mu.coef
    lowered = VectorField(
        [m * (x[1] * y[2] - x[2] * y[1]), m * (x[2] * y[0] - x[0] * y[2]), m * (x[0] * y[1] - x[1] * y[0])]
    )
    return VectorField(g.inverse().apply(lowered), f"{X.label}x{Y.label}")


def divergence(mu: ThreeForm, X: VectorField, pts=None) -> ScalarField:
    """The function with ``L_X mu = (div X) mu``."""
    _check_volume(mu, pts)
    flux = exterior_derivative(interior_product(X, mu)).coef
    return flux / mu.coef


def lie_derivative_volume(mu: ThreeForm, X: VectorField) -> ThreeForm:
    return exterior_derivative(interior_product(X, mu))


def gradient(g: MetricField, f: ScalarField) -> VectorField:
    f = lift(f)
    return VectorField(g.inverse().apply(VectorField([f.partial(i) for i in range(3)])),
                       f"grad({f.label})")


def covariant_derivative(g: MetricField, X: VectorField, Y: VectorField, pts) -> np.ndarray:
    """(nabla_X Y)^k at each point, shape (N, 3)."""
    pts = as_points(pts)
    gm = g.matrix(pts)
    if np.any(np.linalg.eigvalsh(gm)[:, 0] <= 0):
        from .fields import NotPositiveDefiniteError

        raise NotPositiveDefiniteError("metric not positive definite at an evaluation point")
    Gam = g.christoffel(pts)
    xv = X(pts)
    yv, dy, _ = Y.jets(pts, 1)
    return np.einsum("nkj,nj->nk", dy, xv) + np.einsum("nkij,ni,nj->nk", Gam, xv, yv)


def fd_jet(field: ScalarField, pts, step: float = 1e-4, box=None) -> Jet:
    """Central-difference value, gradient and Hessian of a scalar field.

    ``box`` = (lo, hi) arrays marks the chart domain; points closer than
    ``2*step`` to its boundary are rejected.
    """
    pts = as_points(pts)
    if box is not None:
        lo, hi = (np.asarray(v, dtype=float) for v in box)
        if np.any(pts - 2 * step < lo) or np.any(pts + 2 * step > hi):
            raise ValueError("step too large for the chart domain at some point")
    n = pts.shape[0]
    f0 = field(pts)
    grad = np.empty((n, 3))
    hess = np.empty((n, 3, 3))
    E = np.eye(3) * step
    for i in range(3):
        fp = field(pts + E[i])
        fm = field(pts - E[i])
        grad[:, i] = (fp - fm) / (2 * step)
        hess[:, i, i] = (fp - 2 * f0 + fm) / step**2
        for j in range(i + 1, 3):
            fpp = field(pts + E[i] + E[j])
            fpm = field(pts + E[i] - E[j])
            fmp = field(pts - E[i] + E[j])
            fmm = field(pts - E[i] - E[j])
            hess[:, i, j] = hess[:, j, i] = (fpp - fpm - fmp + fmm) / (4 * step**2)
    return Jet(f0, grad, hess)
