"""Certifying that the glued example admits no stabilizing form of the ansatz c*lam + beta."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .chartcalc import OneForm, coords, exterior_derivative, sin
from .flowlab.critical import critical_points
from .models.contact import CutoffProfile, modified_contact
from .models.glued import glued_counterexample
from .sampling import chart_samples, halton_box
from .serialization import write_json
from .stabilize import verify_observation_O
from .verify import EULER_TAGS, euler_suite


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")


# -- homology data -------------------------------------------------------------
@dataclass(frozen=True)
class HomologyData:
    """Integer relations among the cycle classes, as constant data."""

    generators: tuple = ("gamma1'", "gamma2'", "gamma3'", "gamma4'", "F")
    relations: tuple = ((-1, 1, 0, 0, 2), (0, 0, -1, 1, 2))
    genus: int = 5

    def to_dict(self):
        return {"generators": list(self.generators), "relations": [list(r) for r in self.relations],
                "genus": self.genus}


HOMOLOGY = HomologyData()


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x)
    return Fraction(float(x))


# -- feasibility ---------------------------------------------------------------
@dataclass
class FeasibilityCertificate:
    T: tuple
    matrix: list  # 2x2 Fractions, unknowns (c, F)
    solution: str  # infeasible_nonzero_c | one_parameter_family | trivial_all
    witness: Fraction  # determinant of the system
    kernel: list = field(default_factory=list)  # basis vectors (c, F)
    fiber_coeff: int = 2

    @property
    def obstructed(self) -> bool:
        return self.solution == "infeasible_nonzero_c"

    def to_dict(self):
        return {
            "T": [str(t) for t in self.T],
            "matrix": [[str(v) for v in row] for row in self.matrix],
            "solution": self.solution,
            "witness": str(self.witness),
            "kernel": [[str(v) for v in vec] for vec in self.kernel],
            "fiber_coeff": self.fiber_coeff,
        }


def system_matrix(T, fiber_coeff: int = 2, homology: HomologyData = HOMOLOGY):
    """Rows c * sum(e_i T_i) - k * F from the homology relations (e_1..e_4, k)."""
    T = [_frac(t) for t in T]
    rows = []
    for rel in homology.relations:
        e, k = rel[:4], rel[4]
        scale = Fraction(fiber_coeff, k)
        rows.append([sum(ei * ti for ei, ti in zip(e, T)), -k * scale])
    return rows


def gluing_feasibility(T: Sequence, fiber_coeff: int = 2) -> FeasibilityCertificate:
    """Solve c (T2 - T1) - k F = 0, c (T4 - T3) - k F = 0 exactly for (c, F)."""
    if len(T) != 4:
        raise ValueError("T must have four entries")
    if fiber_coeff == 0:
        raise ValueError("fiber_coeff must be nonzero")
    Tf = tuple(_frac(t) for t in T)
    if min(Tf) <= 0:
        raise ValueError("T must be positive")
    M = system_matrix(Tf, fiber_coeff)
    det = M[0][0] * M[1][1] - M[0][1] * M[1][0]
    k = Fraction(fiber_coeff)
    if det != 0:
        sol, kernel = "infeasible_nonzero_c", []
    elif M[0][0] == 0 and M[1][0] == 0:
        sol, kernel = "trivial_all", [[Fraction(1), Fraction(0)]]
    else:
        sol, kernel = "one_parameter_family", [[Fraction(1), M[0][0] / k]]
    return FeasibilityCertificate(Tf, M, sol, det, kernel, fiber_coeff)


# -- ansatz fit ------------------------------------------------------------------
def ansatz_decompose(nu: OneForm, lam_tilde: OneForm, pts, degenerate: float = 1e-12):
    """Least-squares c in d(nu) = c d(lam_tilde); returns (c, max |d nu - c d lam_tilde|)."""
    pts = np.asarray(pts, dtype=float)
    dn = exterior_derivative(nu)(pts).ravel()
    dl = exterior_derivative(lam_tilde)(pts).ravel()
    nrm = float(dl @ dl)
    if nrm <= degenerate**2 * dl.size:
        raise ValueError("d(lam_tilde) vanishes on the samples; fit is ill-posed")
    c = float(dn @ dl) / nrm
    return c, float(np.abs(dn - c * dl).max())


# -- critical set of H_chi ---------------------------------------------------------
def critical_set_scan(chi: Optional[CutoffProfile] = None, T0: float = 1.0, resolution: int = 512,
                      tol: float = 1e-13) -> dict:
    """Critical points of H_chi and the two nonnegative terms (y^2-x^2)^2 chi'(r^2), r^2 chi(r^2)."""
    chi = CutoffProfile() if chi is None else chi
    sol = modified_contact(T0, chi)
    H = sol.extras["first_integral"]
    radius = float(np.sqrt(chi.eps)) * (1 - 1e-9)
    crit = critical_points(H, radius, resolution, tol)
    P = crit.points
    u = P[:, 0] ** 2 + P[:, 1] ** 2
    q = P[:, 1] ** 2 - P[:, 0] ** 2
    t1 = q**2 * chi.deriv(u)
    t2 = u * chi(u)
    # nonnegativity on the whole grid
    g = np.linspace(-radius, radius, resolution)
    xx, yy = np.meshgrid(g, g)
    uu = (xx**2 + yy**2).ravel()
    inside = uu <= radius**2
    uu, qq = uu[inside], ((yy**2 - xx**2).ravel())[inside]
    g1 = qq**2 * chi.deriv(uu)
    g2 = uu * chi(uu)
    return {
        "n_critical": len(crit),
        "n_seeds": crit.n_seeds,
        "n_failed": crit.n_failed,
        "max_chi": float(chi(u).max()) if len(crit) else 0.0,
        "critical_values": [float(crit.values.min()), float(crit.values.max())] if len(crit) else [],
        "max_value_offset": float(np.abs(crit.values - T0).max()) if len(crit) else 0.0,
        "max_identity_terms": [float(t1.max()), float(t2.max())] if len(crit) else [0.0, 0.0],
        "n_in_chi_one": int(np.sum(u >= chi.hi)),
        "min_grid_terms": [float(g1.min()), float(g2.min())],
        "classes": crit.to_dict()["classes"],
        "points": P,
    }


# -- full pipeline --------------------------------------------------------------------
def _closed_test_form():
    s, psi, z = coords(("s", "psi", "z"))
    return OneForm([0.0, 0.7, 1.0]) + exterior_derivative(s * sin((psi + z) * (2 * np.pi))), OneForm([0.0, 0.0, s])


def counterexample_report(T: Sequence[float] = (1, 2, 1, 3), delta: float = 0.1, out=None,
                          samples: int = 2000, seed: int = 0, n_fibers: int = 100,
                          tol: float = 1e-9, **build_kw) -> dict:
    """Build, verify and certify; optionally write the JSON report to ``out``."""
    T = tuple(T)
    stage = "build"
    try:
        build_kw.setdefault("allow_equal_differences", True)
        ce = glued_counterexample(tuple(float(t) for t in T), delta, **build_kw)
        stage = "residuals"
        residuals = []
        for name, reg in ce.regions.items():
            sol = reg.solution
            pts = chart_samples(sol.chart, samples, seed)
            for tag, rep in euler_suite(sol, pts, tol, seed, EULER_TAGS).items():
                residuals.append({"region": name, **rep.to_dict()})
            lx = float(sol.invariant_residuals(pts)["min_lambda_X"])
            residuals.append({"region": name, "tag": "min_lambda_X", "value": lx, "passed": lx > 0})
        stage = "observation"
        closed, bad = _closed_test_form()
        obs = {}
        for name, reg in ce.regions.items():
            s0 = reg.s0
            base = halton_box(n_fibers, (s0, 0.0, 0.0), (s0 + 1.0, 1.0, 0.0), seed)
            good = verify_observation_O(closed, reg.solution.X, base, tol=tol)
            viol = verify_observation_O(bad, reg.solution.X, base, require_precondition=False)
            obs[name] = {"closed": good.to_dict(), "s_dz": viol.to_dict(),
                         "s_range": float(np.ptp(base[:, 0]))}
        stage = "certificate"
        cert = gluing_feasibility(T)
    except Exception as exc:  # noqa: BLE001 - tag and re-raise
        raise StageError(stage, exc) from exc
    report = {
        "params": {"T": [float(t) for t in T], "delta": delta, "samples": samples, "seed": seed,
                   **ce.params},
        "residuals": residuals,
        "residuals_pass": all(r["passed"] for r in residuals),
        "observation_O": obs,
        "certificate": cert.to_dict(),
        "homology": HOMOLOGY.to_dict(),
    }
    if out is not None:
        write_json(report, out)
    return report


__all__ = [
    "FeasibilityCertificate", "HOMOLOGY", "HomologyData", "StageError", "ansatz_decompose",
    "counterexample_report", "critical_set_scan", "gluing_feasibility", "system_matrix",
]
