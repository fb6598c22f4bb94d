import json
from fractions import Fraction

import numpy as np
import pytest

from eulerlab.chartcalc import OneForm, coords, exterior_derivative, sin, sqrt
from eulerlab.models import standardized_orbit_neighborhood
from eulerlab.models.contact import CutoffProfile
from eulerlab.obstruction import (
    HOMOLOGY,
    StageError,
    ansatz_decompose,
    counterexample_report,
    critical_set_scan,
    gluing_feasibility,
    system_matrix,
)
from eulerlab.sampling import chart_samples

x, y, z = coords(("x", "y", "z"))


@pytest.fixture(scope="module")
def std():
    sol = standardized_orbit_neighborhood()
    return sol, chart_samples(sol.chart, 800, seed=1)


def test_ansatz_examples(std):
    sol, pts = std
    c, defect = ansatz_decompose(sol.lam * 3.0 + OneForm([0.0, 0.0, 1.0]), sol.lam, pts)
    assert c == pytest.approx(3.0, abs=1e-12) and defect < 1e-12
    closed = exterior_derivative(sin((x + z) * 2.0 * np.pi) * y)
    c, defect = ansatz_decompose(closed, sol.lam, pts)
    assert abs(c) < 1e-12 and defect < 1e-10


def test_ansatz_detects_non_ansatz(std):
    sol, pts = std
    rr = np.hypot(pts[:, 0], pts[:, 1])
    ann = pts[rr > 0.2]
    rad = sqrt(x * x + y * y)
    nu = sol.lam + OneForm([-y / rad, x / rad, 0.0])
    c, defect = ansatz_decompose(nu, sol.lam, ann)
    assert defect > 0.1


def test_ansatz_random(std, rng):
    sol, pts = std
    for _ in range(50):
        c0 = rng.uniform(-5, 5)
        a, b = rng.integers(-3, 4, size=2)
        beta = OneForm([0.0, 0.0, rng.uniform(-1, 1)]) + exterior_derivative(
            sin((x * float(a) + z * float(b)) * 2.0 * np.pi) * rng.uniform(-1, 1))
        c, defect = ansatz_decompose(sol.lam * c0 + beta, sol.lam, pts)
        assert c == pytest.approx(c0, abs=1e-9) and defect < 1e-8


def test_ansatz_degenerate(std):
    sol, pts = std
    with pytest.raises(ValueError):
        ansatz_decompose(sol.lam, OneForm([0.0, 0.0, 1.0]), pts)


def test_certificate_categories():
    cert = gluing_feasibility((1, 2, 1, 3))
    assert cert.obstructed and cert.witness == Fraction(2)
    eq = gluing_feasibility((1, 2, 1, 2))
    assert eq.solution == "one_parameter_family" and eq.kernel == [[1, Fraction(1, 2)]]
    flat = gluing_feasibility((1, 1, 1, 1))
    assert flat.solution == "trivial_all" and flat.kernel == [[1, 0]]
    for bad in ((1, 2, 3), (0, 1, 1, 1), (1, -2, 1, 1)):
        with pytest.raises(ValueError):
            gluing_feasibility(bad)
    with pytest.raises(ValueError):
        gluing_feasibility((1, 2, 1, 3), fiber_coeff=0)


def test_certificate_invariances():
    T = (Fraction(1, 3), Fraction(5, 2), 2, 7)
    base = gluing_feasibility(T)
    shifted = gluing_feasibility(tuple(Fraction(t) + Fraction(7, 5) for t in T))
    assert shifted.witness == base.witness and shifted.solution == base.solution
    for k in (1, 3, -2):
        assert gluing_feasibility(T, fiber_coeff=k).solution == base.solution
    # matrix rows come from the relations
    M = system_matrix((1, 2, 1, 3))
    assert M == [[1, -2], [2, -2]]
    assert HOMOLOGY.genus == 5 and len(HOMOLOGY.generators) == 5


def test_certificate_json_roundtrip():
    d = gluing_feasibility((1, 2, 1, 3)).to_dict()
    assert json.loads(json.dumps(d)) == d
    assert d["witness"] == "2" and d["solution"] == "infeasible_nonzero_c"


def test_critical_scan_default():
    scan = critical_set_scan(resolution=256)
    assert scan["max_chi"] < 1e-10
    assert scan["max_value_offset"] < 1e-12
    assert scan["n_in_chi_one"] == 0
    assert min(scan["min_grid_terms"]) >= 0


def test_critical_scan_constant_profile():
    """chi = 1 everywhere recovers the single hyperbolic point at the origin."""
    flat = CutoffProfile.constant_profile(1.0)
    scan = critical_set_scan(flat, resolution=128)
    assert scan["n_critical"] == 1
    assert np.abs(scan["points"][0, :2]).max() < 1e-8
    assert dict(scan["classes"]) == {"hyperbolic": 1}


def test_report_structure(tmp_path):
    out = tmp_path / "r.json"
    rep = counterexample_report(samples=300, n_fibers=20, out=out)
    assert rep["residuals_pass"]
    assert rep["certificate"]["solution"] == "infeasible_nonzero_c"
    assert json.loads(out.read_text())["certificate"] == rep["certificate"]
    for name, obs in rep["observation_O"].items():
        assert obs["closed"]["spread"] < 1e-8
        assert obs["s_dz"]["spread"] == pytest.approx(obs["s_range"], rel=1e-6)


def test_report_equal_differences():
    rep = counterexample_report((1, 2, 1, 2), samples=200, n_fibers=10)
    assert rep["certificate"]["solution"] == "one_parameter_family"
    sym = counterexample_report((1, 3, 1, 3), samples=200, n_fibers=10)
    assert sym["certificate"]["kernel"] == [["1", "1"]]


def test_report_stage_tag():
    with pytest.raises(StageError) as exc:
        counterexample_report((1, 2, 1, 3), delta=-1.0, samples=50)
    assert exc.value.stage == "build"
