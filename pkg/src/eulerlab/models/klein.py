"""Mapping tori of linear maps of T^2 carrying X = d/dx.

The Klein-type example is the mapping torus of (y, z) -> (-y, -z) with
metric g = h(z) dx^2 + dy^2 + h(z)^-1 dz^2.  Lowering X with this metric
gives lambda = h(z) dx; the Bernoulli function is h and the pressure h/2.
"""
from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from ..chartcalc import (
    MetricField,
    OneForm,
    ScalarField,
    ThreeForm,
    TwoForm,
    VectorField,
    constant,
    coordinate,
    cos,
    pullback,
)
from .atlas import AffineMap, mapping_torus_atlas
from .solution import ModelSolution


class IncompatibleProfileError(ValueError):
    """h is not compatible with the identifications of the atlas."""


def cosine_profile(coeffs: Sequence[float] = (2.0, -1.0)) -> ScalarField:
    """h(z) = c0 + sum_k c_k cos(2 pi k z); default 2 - cos(2 pi z)."""
    z = coordinate(2, "z")
    h = constant(float(coeffs[0]))
    for k, c in enumerate(coeffs[1:], start=1):
        if c:
            h = h + cos(z * (2 * np.pi * k)) * float(c)
    h.label = "h"
    return h


def _check_profile(h: ScalarField, z_sign: int, n: int = 257, tol: float = 1e-12):
    zs = np.linspace(-1.0, 1.0, n)
    rng = np.random.default_rng(1)
    xy = rng.random((n, 2))
    pts = np.column_stack([xy, zs])
    base = h(np.column_stack([np.zeros((n, 2)), zs]))
    vals = h(pts)
    if np.max(np.abs(vals - base)) > tol:
        raise IncompatibleProfileError("h must depend on z only")
    if np.min(base) <= 0:
        raise IncompatibleProfileError("h must be positive")
    shifted = h(np.column_stack([np.zeros((n, 2)), zs + 1.0]))
    if np.max(np.abs(shifted - base)) > tol * max(1.0, np.max(np.abs(base))):
        raise IncompatibleProfileError("h must be 1-periodic in z")
    if z_sign < 0:
        flipped = h(np.column_stack([np.zeros((n, 2)), -zs]))
        if np.max(np.abs(flipped - base)) > tol * max(1.0, np.max(np.abs(base))):
            raise IncompatibleProfileError("h must be even in z for a reflecting monodromy")


def _fiber_metric(M: np.ndarray, h: ScalarField):
    """x-dependent fiber metric G(x) = (N^-x)^T diag(1, 1/h) N^-x, with M = +-N unipotent."""
    sign = np.sign(M[0, 0])
    ell = M[0, 1] * sign  # N = [[1, ell], [0, 1]]
    x = coordinate(0, "x")
    ih = 1.0 / h
    if ell == 0:
        return [[constant(1.0), constant(0.0)], [constant(0.0), ih]]
    # N^-x = [[1, -x ell], [0, 1]]
    a = x * (-ell)
    return [[constant(1.0), a], [a, a * a + ih]]


def shear_mapping_torus(ell: int = 0, reflect: bool = True, h_fun: Optional[ScalarField] = None,
                        check: bool = True) -> ModelSolution:
    """Mapping torus of (y,z) -> (y + ell z, z), or (-y + ell z, -z) when ``reflect``."""
    s = -1.0 if reflect else 1.0
    M = np.array([[s, float(ell)], [0.0, s]])
    h = cosine_profile() if h_fun is None else h_fun
    if check:
        _check_profile(h, int(s))
    name = "klein" if (reflect and ell == 0) else f"shear(l={ell},reflect={reflect})"
    atlas = mapping_torus_atlas(M, "klein" if name == "klein" else "shear")
    G = _fiber_metric(M, h)
    z0 = constant(0.0)
    metric = MetricField([[h, z0, z0], [z0, G[0][0], G[0][1]], [z0, G[1][0], G[1][1]]], "g")
    X = VectorField([1.0, 0.0, 0.0], "d/dx")
    lam = OneForm([h, 0.0, 0.0], "h dx")
    omega = TwoForm([1.0, 0.0, 0.0], "dy^dz")
    mu = ThreeForm(constant(1.0), "dx^dy^dz")
    return ModelSolution(
        atlas=atlas,
        X=X,
        lam=lam,
        omega=omega,
        mu=mu,
        bernoulli=h,
        metric=metric,
        pressure=h * 0.5,
        name=name,
        params={"ell": ell, "reflect": reflect},
        extras={"first_integral": h},
    )


def klein_mapping_torus(h_fun: Optional[ScalarField] = None, variant: str = "corrected",
                        check: bool = True) -> ModelSolution:
    """The Klein-bottle mapping torus with X = d/dx.

    ``variant="printed"`` swaps in lambda = h dz, omega = dx^dy and
    p = h'/2 so that the residual checker can show these fail.
    """
    sol = shear_mapping_torus(0, True, h_fun, check)
    if variant == "corrected":
        return sol
    if variant != "printed":
        raise ValueError(f"unknown variant {variant!r}")
    h = sol.bernoulli
    sol.lam = OneForm([0.0, 0.0, h], "h dz")
    sol.omega = TwoForm([0.0, 0.0, 1.0], "dx^dy")
    sol.pressure = h.partial(2) * 0.5
    sol.name = "klein-printed"
    sol.params["variant"] = "printed"
    return sol


def double_cover_pullback(sol: ModelSolution) -> dict:
    """Pull the fields back along T^3 -> M, [x,y,z] -> [2x,y,z]."""
    A = np.diag([2.0, 1.0, 1.0])
    b = np.zeros(3)
    out = {}
    for key in ("X", "lam", "omega", "mu", "metric", "bernoulli", "pressure"):
        obj = getattr(sol, key)
        out[key] = None if obj is None else pullback(obj, A, b)
    return out


def generator_maps(sol: ModelSolution):
    return [AffineMap(g.A, g.b, g.name) for g in sol.atlas.generators]
