import numpy as np
import pytest

from eulerlab.chartcalc import OneForm, coords, cos, exterior_derivative, interior_product, sin
from eulerlab.currents import (
    IrrationalDirectionError,
    PremiseError,
    check_lambda_drift,
    current_birkhoff,
    current_rational,
    current_space_average,
    current_sweep,
    extension_region,
    homology_pair,
    klein_form,
    klein_region,
    linear_region,
    match_boundary_currents,
)
from eulerlab.chartcalc import PiecewisePolynomial
from eulerlab.models.glued import pp_field
from eulerlab.verify import NotStabilizingError

TWO_PI = 2 * np.pi
GOLDEN = (np.sqrt(5) - 1) / 2
r, th, ph = coords(("r", "theta", "phi"))


def test_space_average_examples():
    reg = linear_region((0.0, 1.0))
    b = 1.0 + r * r
    alpha = OneForm([0.0, 0.0, b])
    assert current_space_average(alpha, reg, 0.4).value == pytest.approx(1.16, abs=1e-14)
    assert abs(current_space_average(OneForm([0.0, sin(th * TWO_PI), 0.0]), linear_region((1.0, 0.0)), 0.5).value) < 1e-15
    tilted = linear_region((0.3, 1.0))
    assert current_space_average(OneForm([0.0, 0.0, 1.0]), tilted, 0.5).value == pytest.approx(1.0)


def test_rational_matches_space_average():
    alpha = OneForm([0.0, 1.0 + 0.3 * sin((th + ph * 2.0) * TWO_PI), cos(th * TWO_PI) * 0.5 + r])
    for d in ((0.0, 1.0), (2.0, 3.0), (1.0, 0.0), (-1.0, 2.0)):
        reg = linear_region(d)
        a = current_rational(alpha, reg, 0.3).value
        b = current_space_average(alpha, reg, 0.3).value
        assert abs(a - b) < 1e-9, d


def test_rational_closed_and_exact():
    reg = linear_region((0.0, 1.0))
    closed = OneForm([0.0, 0.0, 1.0]) + exterior_derivative(sin((th + ph) * TWO_PI))
    single = [current_rational(closed, reg, 0.5, n_orbits=1).value]
    assert single[0] == pytest.approx(1.0, abs=1e-13)
    exact = exterior_derivative(sin((th + 2.0 * ph) * TWO_PI) * r)
    assert abs(current_rational(exact, reg, 0.5).value) < 1e-13
    with pytest.raises(IrrationalDirectionError):
        current_rational(closed, linear_region((1.0, GOLDEN)), 0.5)


def test_birkhoff_rational_flags_single_orbit():
    reg = linear_region((0.0, 1.0))
    alpha = OneForm([0.0, 0.0, cos(th * TWO_PI)])
    est = current_birkhoff(alpha, reg, 0.5, 100.0, base=(0.0, 0.0))
    assert est.method == "birkhoff_single_orbit"
    assert est.value == pytest.approx(1.0, abs=1e-12)  # the orbit theta = 0, not the mean 0
    assert current_space_average(alpha, reg, 0.5).value == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(ValueError):
        current_birkhoff(alpha, reg, 0.5, 0.0)


def test_estimator_bounds_nonnegative():
    reg = linear_region((1.0, GOLDEN))
    alpha = OneForm([0.0, 1.0, sin(ph * TWO_PI)])
    for est in (current_space_average(alpha, reg, 0.5), current_birkhoff(alpha, reg, 0.5, 1000.0)):
        assert est.error_bound >= 0


def test_homology_pair_constant():
    reg = linear_region((0.4, 1.0), rho=1.0 + r)
    pairs = np.array([homology_pair(reg, x) for x in np.linspace(0.05, 0.95, 10)])
    assert np.ptp(pairs, axis=0).max() < 1e-8
    assert np.allclose(pairs[0], (0.4, 1.0))


def test_boundedness_transfer():
    rho = 1.0 + r * 0.5
    reg = linear_region((0.0, 1.0), rho=rho)
    nu = OneForm([0.0, 0.0, 2.0 + 0.5 * sin(th * TWO_PI)])
    pts = reg.samples(2000)
    vals = interior_product(reg.X, nu)(pts)
    lo, hi = vals.min(), vals.max()
    for x in np.linspace(0.05, 0.95, 7):
        c = current_space_average(nu, reg, x).value * (1 + 0.5 * x)
        assert lo - 1e-12 <= c <= hi + 1e-12


def test_drift_on_extension(glued):
    for name in ("M12", "M34"):
        reg = extension_region(glued.regions[name])
        assert reg.check() < 1e-10
        a, d = reg.interval
        lhs, rhs, diff = check_lambda_drift(reg, a + 0.1, d - 0.1)
        assert diff < 1e-6
        assert check_lambda_drift(reg, a + 0.3, a + 0.3) == (0.0, 0.0, 0.0)


def test_drift_constant_h():
    from eulerlab.chartcalc import constant

    reg = linear_region((0.0, 1.0))
    reg.lam = OneForm([0.0, 0.0, 1.0])
    reg.h = constant(0.0)
    lhs, rhs, diff = check_lambda_drift(reg, 0.2, 0.8)
    assert lhs == pytest.approx(0.0, abs=1e-15) and rhs == 0.0


def test_drift_premise_checked(glued):
    reg = extension_region(glued.regions["M12"])
    bad = OneForm([0.0, 0.0, r])  # i_X d(r dz) = -g dr, h' = g b'
    with pytest.raises(PremiseError):
        check_lambda_drift(reg, 1.2, 1.8, lam=bad)
    reg2 = linear_region((0.0, 1.0))
    with pytest.raises(PremiseError):
        check_lambda_drift(reg2, 0.2, 0.4)


def test_match_boundary_currents():
    reg = linear_region((0.0, 1.0))
    closed = OneForm([0.0, 0.3, 1.0]) + exterior_derivative(sin((th + ph) * TWO_PI) * r * 0.1)
    cm, cp, ok = match_boundary_currents(reg, closed)
    assert ok and cm == pytest.approx(1.0)
    step = PiecewisePolynomial.from_knots([(-1.0, 1.0), (0.2, 1.0), (0.8, 2.0), (2.0, 2.0)])
    nu = OneForm([0.0, 0.0, pp_field(step, 0)])
    cm, cp, ok = match_boundary_currents(reg, nu)
    assert (cm, cp, ok) == (pytest.approx(1.0), pytest.approx(2.0), False)
    with pytest.raises(NotStabilizingError):
        match_boundary_currents(reg, OneForm([0.0, 0.0, -1.0]))


def test_klein_normalized_currents(klein):
    reg = klein_region(klein)
    assert reg.check() < 1e-10
    nu = klein_form(reg, OneForm([0.5, 0.0, 0.0]))
    cm, cp, ok = match_boundary_currents(reg, nu)
    assert ok and cm == pytest.approx(1.0, abs=1e-14) and cp == pytest.approx(1.0, abs=1e-14)


def test_sweep_rows(glued):
    reg = extension_region(glued.regions["M12"])
    rows = current_sweep(reg.lam, reg, [1.02, 1.5, 1.98])
    assert rows[0] == (1.02, pytest.approx(1.0)) and rows[-1][1] == pytest.approx(2.0)
