"""S^1-invariant contact forms lambda = H(x,y) dz + lambda_D on D x S^1."""
from __future__ import annotations

from typing import Optional, Tuple

import numpy as np

from ..chartcalc import (
    OneForm,
    PiecewisePolynomial,
    ScalarField,
    ThreeForm,
    VectorField,
    compose,
    constant,
    coordinate,
    exterior_derivative,
    interior_product,
)
from ..chartcalc.profiles import smoothstep_poly
from numpy.polynomial import Polynomial
from .atlas import Atlas, Chart
from .solution import ModelSolution, pairing_metric


class ContactConditionError(ValueError):
    """lambda ^ d lambda fails to be positive, or H fails to be positive."""


class CutoffProfile:
    """Monotone cutoff chi on [0, eps]: 0 on [0, lo], 1 on [hi, eps], C^order in between."""

    def __init__(self, eps: float = 0.25, lo: float = 0.1, hi: float = 0.2, order: int = 2):
        if not (0.0 <= lo < hi <= eps):
            raise ValueError("need 0 <= lo < hi <= eps")
        self.eps, self.lo, self.hi, self.order = float(eps), float(lo), float(hi), int(order)
        self.pp = PiecewisePolynomial.from_knots(
            [(min(0.0, lo - 1.0), 0.0), (lo, 0.0), (hi, 1.0), (max(eps, hi) + 1.0, 1.0)], order
        )
        self._constant = None

    @classmethod
    def constant_profile(cls, value: float = 1.0, eps: float = 0.25) -> "CutoffProfile":
        """Degenerate profile chi == value (not a cutoff; used for the pure normal form)."""
        obj = cls.__new__(cls)
        obj.eps, obj.lo, obj.hi, obj.order = float(eps), 0.0, 0.0, 0
        obj.pp = PiecewisePolynomial([-1.0, eps + 1.0], [Polynomial([float(value)])])
        obj._constant = float(value)
        return obj

    def __call__(self, u):
        return self.pp.eval(u)

    def deriv(self, u, nu: int = 1):
        return self.pp.eval(u, nu)

    def univariate(self):
        return self.pp.as_univariate("chi")

    def max_deriv(self) -> float:
        u = np.linspace(0.0, self.eps, 20001)
        return float(np.max(self.deriv(u)))

    def to_dict(self):
        return {"eps": self.eps, "lo": self.lo, "hi": self.hi, "order": self.order,
                "constant": self._constant}


def _disk_atlas(radius: float, name: str) -> Atlas:
    chart = Chart(
        id=name,
        lo=(-radius, -radius, 0.0),
        hi=(radius, radius, 1.0),
        periods=(None, None, 1.0),
        radial=radius,
    )
    return Atlas({name: chart}, name=name)


def reeb_components(H: ScalarField, lam_D: Tuple[ScalarField, ScalarField]):
    """(T, f, R) with f = d lambda_D / dx^dy and R the Reeb field of H dz + lambda_D."""
    lx, ly = lam_D
    Hx, Hy = H.partial(0), H.partial(1)
    f = ly.partial(0) - lx.partial(1)
    T = H + (lx * Hy - ly * Hx) / f
    invTf = 1.0 / (T * f)
    R = VectorField([Hy * invTf, (Hx * invTf) * -1.0, 1.0 / T], "R")
    return T, f, R


def solid_torus_invariant_contact(H: ScalarField, lam_D: Tuple[ScalarField, ScalarField],
                                  radius: float = 0.5, name: str = "contact",
                                  n_check: int = 2001) -> ModelSolution:
    """Contact solution on the disk of given radius times S^1 with Reeb field as velocity."""
    T, f, R = reeb_components(H, lam_D)
    # contact condition on a polar grid covering the closed disk
    rr = radius * np.sqrt(np.linspace(0.0, 1.0, 41))
    th = np.linspace(0.0, 2 * np.pi, max(8, n_check // 40), endpoint=False)
    Rg, Tg = np.meshgrid(rr, th)
    pts = np.column_stack([(Rg * np.cos(Tg)).ravel(), (Rg * np.sin(Tg)).ravel(),
                           np.zeros(Rg.size)])
    if np.min(H(pts)) <= 0:
        raise ContactConditionError("H must be positive on the disk")
    if np.min(f(pts)) <= 0:
        raise ContactConditionError("d lambda_D must be a positive area form")
    if np.min(T(pts)) <= 0:
        raise ContactConditionError("lambda ^ d lambda is not positive (T <= 0)")
    lam = OneForm([lam_D[0], lam_D[1], H], "H dz + lam_D")
    dlam = exterior_derivative(lam)
    # lam ^ dlam coefficient is sum lam_i (dlam)_i
    mu = ThreeForm(sum((lam[i] * dlam[i] for i in range(3)), constant(0.0)), "lam^dlam")
    omega = interior_product(R, mu)
    metric = pairing_metric(lam, R)
    zero = constant(0.0)
    sol = ModelSolution(
        atlas=_disk_atlas(radius, name),
        X=R,
        lam=lam,
        omega=omega,
        mu=mu,
        bernoulli=zero,
        metric=metric,
        pressure=zero - interior_product(R, lam) * 0.5,
        name=name,
        params={"radius": radius},
        extras={"first_integral": H, "T": T, "f": f, "lam_D": lam_D},
    )
    return sol


def standard_lambda_D():
    """(x dy - y dx)/2, i.e. (r^2/2) dtheta."""
    x, y = coordinate(0, "x"), coordinate(1, "y")
    return (y * -0.5, x * 0.5)


def standardized_orbit_neighborhood(T0: float = 1.0, eps: float = 0.25) -> ModelSolution:
    """Normal form H = T0 + y^2 - x^2 on the disk r^2 < eps."""
    if T0 <= 0:
        raise ValueError("T0 must be positive")
    if not (0 < eps < T0):
        raise ContactConditionError("need 0 < eps < T0 so that H stays positive")
    x, y = coordinate(0, "x"), coordinate(1, "y")
    H = constant(T0) + y * y - x * x
    sol = solid_torus_invariant_contact(H, standard_lambda_D(), np.sqrt(eps), "standardized")
    sol.params.update({"T0": T0, "eps": eps})
    sol.extras["hessian"] = np.diag([-2.0, 2.0])
    return sol


def modified_contact(T0: float = 1.0, chi: Optional[CutoffProfile] = None) -> ModelSolution:
    """H_chi = T0 + chi(r^2)(y^2 - x^2) on the disk r^2 < eps."""
    chi = CutoffProfile() if chi is None else chi
    if not (0 < chi.eps < T0):
        raise ContactConditionError("need 0 < eps < T0 so that H_chi stays positive")
    x, y = coordinate(0, "x"), coordinate(1, "y")
    u = x * x + y * y
    H = constant(T0) + compose(chi.univariate(), u) * (y * y - x * x)
    sol = solid_torus_invariant_contact(H, standard_lambda_D(), np.sqrt(chi.eps), "modified")
    sol.params.update({"T0": T0, "chi": chi.to_dict()})
    sol.extras["chi"] = chi
    return sol
