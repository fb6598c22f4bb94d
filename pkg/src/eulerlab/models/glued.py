"""Cut-and-paste model: two solid-torus cores glued along annular bands.

Each core V_i carries polar coordinates (r, phi, z), phi and z of period 1.
On r <= R_i the contact form is T_i dz + F_i(r) dphi with X = T_i^-1 d/dz.
F_i' = 2 pi r away from the gluing band and F_i' = 1 on the band
[r_i, r_i + delta], so that the gluing map

    Phi: (r, phi, z) -> (r_j + delta + r_i - r, -phi, z)

preserves dF_i = dr^dphi there.  The glued region M_ij is parametrized by
(s, psi, z) with s in [s0, s0 + 1], s0 = 1 or 3.  On it the fields are

    lambda = b(s) dz + G(s) dpsi,  X = g(s) d/dz,  h(s) = int g b',
    omega = w(s) ds^dpsi,          mu = (w/g) ds^dpsi^dz,

with b, g constant near both ends so they match the cores.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import Polynomial

from ..chartcalc import (
    OneForm,
    PiecewisePolynomial,
    ThreeForm,
    TwoForm,
    VectorField,
    bump,
    compose,
    constant,
    coordinate,
    interior_product,
)
from ..chartcalc.profiles import concatenate, smoothstep_poly
from .atlas import AffineMap, Atlas, Chart
from .contact import CutoffProfile, modified_contact
from .solution import ModelSolution, pairing_metric

EDGE = 0.1  # width of the constant collars of b and g at each end of [s0, s0+1]


class ProfileError(ValueError):
    """Profiles violate positivity, boundary or balance conditions."""


class UnbalanceableProfileError(ProfileError):
    """b' never takes the sign needed to cancel the balance integral."""


class GluingError(ValueError):
    """Gluing parameters are inconsistent."""


def pp_field(pp: PiecewisePolynomial, axis: int = 0, name: str = "pp"):
    return compose(pp.as_univariate(name), coordinate(axis))


def default_b(T1: float, T2: float, s0: float = 1.0, order: int = 2) -> PiecewisePolynomial:
    """T1 near s0, overshoot to max(T1,T2)+1 in the middle, T2 near s0+1."""
    if T1 == T2:
        return PiecewisePolynomial.constant(T1, s0, s0 + 1.0)
    P = max(T1, T2) + 1.0
    return PiecewisePolynomial.from_knots(
        [(s0, T1), (s0 + EDGE, T1), (s0 + 0.4, P), (s0 + 0.6, P), (s0 + 1 - EDGE, T2), (s0 + 1.0, T2)],
        order,
    )


def _base_gfun(T1, T2, s0, order=2):
    if T1 == T2:
        return PiecewisePolynomial.constant(1.0 / T1, s0, s0 + 1.0)
    return PiecewisePolynomial.from_knots(
        [(s0, 1.0 / T1), (s0 + EDGE, 1.0 / T1), (s0 + 1 - EDGE, 1.0 / T2), (s0 + 1.0, 1.0 / T2)],
        order,
    )


def balance_integral(b: PiecewisePolynomial, g: PiecewisePolynomial, s0: float = 1.0) -> float:
    return (g * b.deriv()).integral(s0, s0 + 1.0)


def make_balanced_gfun(b: PiecewisePolynomial, T1: float, T2: float, s0: float = 1.0,
                       tol: float = 1e-12, max_iter: int = 200):
    """g = base + kappa * bump with int g b' = 0; kappa found by bisection.

    The base interpolates T1^-1 to T2^-1; the bump sits in the middle of the
    longest run where b' has the sign opposite to the base integral, so
    kappa > 0 and g stays positive.  Returns (g, kappa).
    """
    db = b.deriv()
    base = _base_gfun(T1, T2, s0)
    I0 = balance_integral(b, base, s0)
    if abs(I0) <= tol:
        return base, 0.0
    need = -int(np.sign(I0))
    runs = db.sign_runs(need, s0, s0 + 1.0)
    if not runs:
        raise UnbalanceableProfileError("b' does not change sign; no balanced g in this family")
    a, c = max(runs, key=lambda r: r[1] - r[0])
    q = 0.25 * (c - a)
    w = bump(a + q, c - q).restrict(s0, s0 + 1.0)

    def F(kappa):
        return balance_integral(b, base + w * kappa, s0)

    lo, hi = 0.0, 1.0
    while np.sign(F(hi)) == np.sign(I0):
        hi *= 2.0
        if hi > 1e12:
            raise UnbalanceableProfileError("bisection bracket not found")
    kappa = hi
    for _ in range(max_iter):
        kappa = 0.5 * (lo + hi)
        val = F(kappa)
        if abs(val) < tol and (hi - lo) < 1e-15 * max(1.0, hi):
            break
        if np.sign(val) == np.sign(I0):
            lo = kappa
        else:
            hi = kappa
        if hi - lo <= np.spacing(hi):
            break
    g = base + w * kappa
    if abs(F(kappa)) >= tol:
        raise UnbalanceableProfileError(f"bisection stalled at |int g b'| = {abs(F(kappa)):.3g}")
    return g, kappa


@dataclass
class ExtensionTriple:
    lam: OneForm
    X: VectorField
    h: object  # ScalarField
    b: PiecewisePolynomial
    g: PiecewisePolynomial
    h_pp: PiecewisePolynomial
    s0: float


def extension_profile(b: PiecewisePolynomial, gfun: PiecewisePolynomial, T1: float, T2: float,
                      s0: float = 1.0, G: Optional[PiecewisePolynomial] = None,
                      balance_tol: float = 1e-10, n_check: int = 10001) -> ExtensionTriple:
    """lambda = b dz + G dpsi, X = g d/dz, h = int_{s0}^s g b' on [s0, s0+1] x T^2."""
    s = np.linspace(s0, s0 + 1.0, n_check)
    if np.min(b(s)) <= 0 or np.min(gfun(s)) <= 0:
        raise ProfileError("b and g must be positive")
    for where, T in ((np.linspace(s0, s0 + 0.5 * EDGE, 11), T1),
                     (np.linspace(s0 + 1 - 0.5 * EDGE, s0 + 1.0, 11), T2)):
        if np.max(np.abs(b(where) - T)) > 1e-12 or np.max(np.abs(gfun(where) - 1.0 / T)) > 1e-12:
            raise ProfileError("profiles must equal T and 1/T near the ends")
    bal = balance_integral(b, gfun, s0)
    if abs(bal) > balance_tol:
        raise ProfileError(f"balance integral int g b' = {bal:.3g} is not zero")
    h_pp = (gfun * b.deriv()).antiderivative(s0)
    G = PiecewisePolynomial.constant(0.0, s0, s0 + 1.0) if G is None else G
    lam = OneForm([0.0, pp_field(G, 0, "G"), pp_field(b, 0, "b")], "b dz + G dpsi")
    X = VectorField([0.0, 0.0, pp_field(gfun, 0, "g")], "g d/dz")
    h = pp_field(h_pp, 0, "h")
    return ExtensionTriple(lam, X, h, b, gfun, h_pp, s0)


# -- cores and gluing --------------------------------------------------------
@dataclass
class Core:
    index: int
    T: float
    r_in: float
    R: float
    sigma: PiecewisePolynomial
    dF: PiecewisePolynomial
    F: PiecewisePolynomial
    chi: CutoffProfile


def _core(i, T, r_in, delta, chi: CutoffProfile) -> Core:
    R = float(np.sqrt(chi.lo))
    if not (0 < r_in and r_in + delta < R):
        raise GluingError(f"need 0 < r_{i} and r_{i} + delta < R_{i} = {R:g}")
    gap = 0.5 * (R - r_in - delta)
    sigma = PiecewisePolynomial.from_knots(
        [(0.0, 0.0), (0.5 * r_in, 0.0), (r_in, 1.0), (r_in + delta, 1.0),
         (r_in + delta + gap, 0.0), (R, 0.0)]
    )
    two_pi_r = PiecewisePolynomial([0.0, R], [Polynomial([0.0, 2 * np.pi])])
    dF = two_pi_r * (1.0 - sigma) + sigma
    F = dF.antiderivative(0.0)
    return Core(i, T, r_in, R, sigma, dF, F, chi)


def core_solution(core: Core) -> ModelSolution:
    """Fields on the annulus r_i <= r <= R_i of V_i in (r, phi, z)."""
    T = core.T
    F = pp_field(core.F, 0, "F")
    dF = pp_field(core.dF, 0, "F'")
    lam = OneForm([0.0, F, T], "T dz + F dphi")
    X = VectorField([0.0, 0.0, 1.0 / T], "d/dz / T")
    mu = ThreeForm(dF * T, "lam^dlam")
    omega = TwoForm([0.0, 0.0, dF], "F' dr^dphi")
    chart = Chart(f"V{core.index}", (core.r_in, 0.0, 0.0), (core.R, 1.0, 1.0), (None, 1.0, 1.0),
                  ("r", "phi", "z"))
    zero = constant(0.0)
    return ModelSolution(
        atlas=Atlas({chart.id: chart}, name=chart.id),
        X=X, lam=lam, omega=omega, mu=mu, bernoulli=zero,
        metric=pairing_metric(lam, X), pressure=zero - interior_product(X, lam) * 0.5,
        name=chart.id, chart_id=chart.id, params={"T": T},
    )


@dataclass
class GluedRegion:
    name: str
    s0: float
    cores: Tuple[Core, Core]
    L: float
    to_region: Tuple[AffineMap, AffineMap]  # V_a -> M, V_b -> M
    gluing: AffineMap  # Phi: V_a -> V_b on the band
    band: Tuple[float, float]  # band in s
    triple: ExtensionTriple
    solution: ModelSolution
    w: PiecewisePolynomial


def _glue_pair(name, s0, ca: Core, cb: Core, delta, b=None, g=None) -> GluedRegion:
    L = (ca.R - ca.r_in) + (cb.R - cb.r_in) - delta
    off = ca.R - ca.r_in - cb.r_in - delta
    # r on each side as a function of s
    ra = (ca.R + L * s0, -L)  # r = ra0 + ra1 * s
    rb = (-L * s0 - off, L)
    band = (s0 + (ca.R - ca.r_in - delta) / L, s0 + (ca.R - ca.r_in) / L)
    s_mid = 0.5 * (band[0] + band[1])
    dFa = ca.dF.affine_compose(ra[1], ra[0])
    dFb = cb.dF.affine_compose(rb[1], rb[0])
    w = concatenate([dFa.restrict(s0, s_mid), dFb.restrict(s_mid, s0 + 1.0)]) * L
    Fa = ca.F.affine_compose(ra[1], ra[0])
    Fb = cb.F.affine_compose(rb[1], rb[0])
    D = float(Fb.eval(s_mid) + Fa.eval(s_mid))
    S = smoothstep_poly(2)
    theta = S(Polynomial([0.0, 1.0 / (band[1] - band[0])]))
    G = concatenate([
        (-Fa).restrict(s0, band[0]),
        PiecewisePolynomial([band[0], band[1]], [theta * D]) + (-Fa).restrict(band[0], band[1]),
        Fb.restrict(band[1], s0 + 1.0),
    ])
    b = default_b(ca.T, cb.T, s0) if b is None else b
    if g is None:
        g, _ = make_balanced_gfun(b, ca.T, cb.T, s0)
    tri = extension_profile(b, g, ca.T, cb.T, s0, G)
    wf = pp_field(w, 0, "w")
    gf = tri.X[2]
    mu = ThreeForm(wf / gf, "(w/g) ds^dpsi^dz")
    omega = TwoForm([0.0, 0.0, wf], "w ds^dpsi")
    chart = Chart(name, (s0, 0.0, 0.0), (s0 + 1.0, 1.0, 1.0), (None, 1.0, 1.0), ("s", "psi", "z"))
    to_a = AffineMap(np.diag([-1.0 / L, -1.0, 1.0]), [s0 + ca.R / L, 0.0, 0.0], f"V{ca.index}->{name}")
    to_b = AffineMap(np.diag([1.0 / L, 1.0, 1.0]), [s0 + off / L, 0.0, 0.0], f"V{cb.index}->{name}")
    phi = AffineMap(np.diag([-1.0, -1.0, 1.0]), [cb.r_in + delta + ca.r_in, 0.0, 0.0],
                    f"Phi{ca.index}{cb.index}")
    for m in (to_a, to_b, phi):
        if m.orientation <= 0:
            raise GluingError(f"{m.name} reverses orientation")
    metric = pairing_metric(tri.lam, tri.X)
    sol = ModelSolution(
        atlas=Atlas({name: chart}, name=name),
        X=tri.X, lam=tri.lam, omega=omega, mu=mu, bernoulli=tri.h,
        metric=metric, pressure=tri.h - interior_product(tri.X, tri.lam) * 0.5,
        name=name, chart_id=name,
        params={"T": (ca.T, cb.T), "L": L, "band": band},
        extras={"b": b, "g": g, "h": tri.h_pp, "w": w, "G": G},
    )
    return GluedRegion(name, s0, (ca, cb), L, (to_a, to_b), phi, band, tri, sol, w)


@dataclass
class GluedCounterexample:
    atlas: Atlas
    regions: Dict[str, GluedRegion]
    cores: List[Core]
    collars: Dict[str, ModelSolution]
    T: Tuple[float, float, float, float]
    delta: float
    params: Dict[str, object] = field(default_factory=dict)

    def outer_model(self, i: int) -> ModelSolution:
        """The modified contact model of core i (Cartesian chart)."""
        c = self.cores[i - 1]
        return modified_contact(c.T, c.chi)


def default_glue_cutoff() -> CutoffProfile:
    return CutoffProfile(eps=0.6, lo=0.2025, hi=0.6)


def glued_counterexample(T: Sequence[float] = (1.0, 2.0, 1.0, 3.0), delta: float = 0.1,
                         r_core=0.3, chi: Optional[Sequence[CutoffProfile]] = None,
                         b_profiles=None, g_profiles=None,
                         allow_equal_differences: bool = False) -> GluedCounterexample:
    T = tuple(float(t) for t in T)
    if len(T) != 4 or min(T) <= 0:
        raise GluingError("T must be four positive numbers")
    if T[1] - T[0] == T[3] - T[2] and not allow_equal_differences:
        raise GluingError("T2 - T1 == T4 - T3; pass allow_equal_differences=True to build anyway")
    radii = [float(r_core)] * 4 if np.isscalar(r_core) else [float(r) for r in r_core]
    chi = [default_glue_cutoff()] * 4 if chi is None else list(chi)
    for t, c in zip(T, chi):
        if c.eps >= t:
            raise GluingError("cutoff radius must satisfy eps < T_i")
    cores = [_core(i + 1, T[i], radii[i], delta, chi[i]) for i in range(4)]
    bp = b_profiles or (None, None)
    gp = g_profiles or (None, None)
    m12 = _glue_pair("M12", 1.0, cores[0], cores[1], delta, bp[0], gp[0])
    m34 = _glue_pair("M34", 3.0, cores[2], cores[3], delta, bp[1], gp[1])
    charts = {r.name: r.solution.chart for r in (m12, m34)}
    collars = {}
    transitions = {}
    for reg in (m12, m34):
        for core, amap in zip(reg.cores, reg.to_region):
            cs = core_solution(core)
            collars[cs.name] = cs
            charts[cs.name] = cs.chart
            transitions[(cs.name, reg.name)] = amap
        transitions[(f"V{reg.cores[0].index}", f"V{reg.cores[1].index}")] = reg.gluing
    atlas = Atlas(charts, transitions=transitions, name="glued")
    return GluedCounterexample(atlas, {"M12": m12, "M34": m34}, cores, collars, T, delta,
                               {"r_core": radii, "chi": [c.to_dict() for c in chi]})
