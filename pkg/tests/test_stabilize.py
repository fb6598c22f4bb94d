import numpy as np
import pytest

from eulerlab.chartcalc import OneForm, PiecewisePolynomial, coords, exterior_derivative, interior_product, sin
from eulerlab.currents import linear_region
from eulerlab.models import klein_mapping_torus, standardized_orbit_neighborhood
from eulerlab.stabilize import (
    CohomologyObstruction,
    NotClosedError,
    NotTransverseError,
    PreconditionError,
    find_primitive,
    interpolate_closed,
    normalized_orbit_form,
    period_integral,
    stabilizer_for_klein,
    torus_average,
    torus_periods,
    verify_observation_O,
)
from eulerlab.models.glued import pp_field
from eulerlab.sampling import chart_samples, halton_box
from eulerlab.verify import check_shs, check_stabilizing, rescale_to_reeb

TWO_PI = 2 * np.pi
r, th, z = coords(("r", "theta", "z"))
CUT = PiecewisePolynomial.from_knots([(-1.0, 0.0), (0.2, 0.0), (0.8, 1.0), (2.0, 1.0)])


@pytest.fixture
def region():
    return linear_region((0.0, 1.0), rho=1.0 + r * r)


def test_find_primitive(region):
    f = sin((th + z) * TWO_PI)
    g, rep = find_primitive(exterior_derivative(f), region, return_report=True)
    pts = region.samples(500)
    diff = g(pts) - f(pts)
    assert np.ptp(diff) < 1e-12
    assert np.abs(exterior_derivative(g)(pts) - exterior_derivative(f)(pts)).max() < 1e-9
    assert rep.loop_defect < 1e-9
    zero = find_primitive(OneForm([0.0, 0.0, 0.0]), region)
    assert np.abs(zero(pts)).max() == 0.0


def test_primitive_obstructions(region):
    with pytest.raises(CohomologyObstruction) as exc:
        find_primitive(OneForm([0.0, 1.0, 0.0]), region)
    assert exc.value.periods == pytest.approx((1.0, 0.0))
    with pytest.raises(NotClosedError):
        find_primitive(OneForm([0.0, r, 0.0]), region)


def test_interpolate_closed(region):
    nu0 = OneForm([0.0, 0.0, 1.0])
    nu1 = nu0 + exterior_derivative(sin(th * TWO_PI) * 0.3)
    out = interpolate_closed(nu0, nu1, CUT, region)
    pts = region.samples(1000, seed=2)
    assert np.abs(exterior_derivative(out)(pts)).max() < 1e-10
    lo = pts.copy()
    lo[:, 0] *= 0.2
    hi = pts.copy()
    hi[:, 0] = 0.8 + 0.2 * hi[:, 0]
    assert np.abs(out(lo) - nu0(lo)).max() < 1e-12
    assert np.abs(out(hi) - nu1(hi)).max() < 1e-12
    phi = pp_field(CUT, 0)(pts)
    direct = interior_product(region.X, out)(pts)
    mix = (1 - phi) * interior_product(region.X, nu0)(pts) + phi * interior_product(region.X, nu1)(pts)
    assert np.abs(direct - mix).max() < 1e-10
    assert np.allclose(direct, region.rho(pts))
    same = interpolate_closed(nu0, nu0, CUT, region)
    assert np.array_equal(same(pts), nu0(pts))


def test_interpolate_class_mismatch(region):
    with pytest.raises(CohomologyObstruction):
        interpolate_closed(OneForm([0.0, 0.0, 1.0]), OneForm([0.0, 0.0, 2.0]), CUT, region)


def test_torus_average(region):
    nu = OneForm([sin(th * TWO_PI) * r, sin(th * TWO_PI), 1.0 + r])
    av = torus_average(nu)
    pts = region.samples(300)
    assert np.abs(av(pts)[:, 1]).max() < 1e-15
    assert np.allclose(av(pts)[:, 2], 1.0 + pts[:, 0])
    twice = torus_average(av)
    assert np.abs(twice(pts) - av(pts)).max() < 1e-12
    inv = OneForm([0.0, r, 1.0])
    assert np.abs(torus_average(inv)(pts) - inv(pts)).max() < 1e-15


def test_torus_average_keeps_periods_and_closedness(region):
    nu = OneForm([0.0, 0.4, 1.0]) + exterior_derivative(sin((th + 2.0 * z) * TWO_PI) * (1.0 + r))
    av = torus_average(nu)
    for x in (0.2, 0.7):
        assert np.allclose(torus_periods(av, x), torus_periods(nu, x), atol=1e-10)
    pts = region.samples(1000)
    assert np.abs(exterior_derivative(av)(pts)).max() < 1e-10
    assert interior_product(region.X, av)(pts).min() > 0


def test_normalized_orbit_forms(klein):
    std = standardized_orbit_neighborhood(1.0)
    nu = normalized_orbit_form(std.X, 1, axis=2, pts=chart_samples(std.chart, 500))
    assert period_integral(nu, std.X, [0, 0, 0], 1.0) == pytest.approx(1.0, abs=1e-10)
    pts = chart_samples(klein.chart, 500)
    nu = normalized_orbit_form(klein.X, 2, axis=0, pts=pts)
    assert period_integral(nu, klein.X, [0, 0, 0], 1.0) == pytest.approx(0.5, abs=1e-12)
    assert period_integral(nu, klein.X, [0, 0.3, 0.2], 2.0) == pytest.approx(1.0, abs=1e-12)
    # coordinate z' = 2 z: same form
    a = normalized_orbit_form(std.X, 1, axis=2, coordinate_period=2.0)
    assert np.allclose(a(pts) * 2.0, normalized_orbit_form(std.X, 1, axis=2)(pts))
    with pytest.raises(NotTransverseError):
        normalized_orbit_form(klein.X, 1, axis=1, pts=pts)
    with pytest.raises(ValueError):
        normalized_orbit_form(std.X, 0)


def test_observation_O_requires_precondition(glued):
    reg = glued.regions["M12"]
    s = coords(("s", "psi", "z"))[0]
    base = halton_box(50, (1, 0, 0), (2, 1, 0))
    with pytest.raises(PreconditionError):
        verify_observation_O(OneForm([0.0, 0.0, s]), reg.solution.X, base)


def test_observation_O_non_closed_form(glued):
    """dnu = f(s) ds ^ dpsi is not zero but i_X dnu = 0."""
    reg = glued.regions["M12"]
    s = coords(("s", "psi", "z"))[0]
    nu = OneForm([0.0, s * s, 1.0])
    base = halton_box(100, (1, 0, 0), (2, 1, 0))
    rep = verify_observation_O(nu, reg.solution.X, base)
    assert rep.spread < 1e-8
    assert np.abs(exterior_derivative(nu)(base)).max() > 0.5


def test_stabilizer_for_klein(klein):
    nu = stabilizer_for_klein(klein)
    pts = chart_samples(klein.chart, 2000)
    assert np.allclose(interior_product(klein.X, nu)(pts), 1.0)
    assert np.abs(exterior_derivative(nu)(pts)).max() == 0.0
    ok, _ = check_stabilizing(nu, klein.X, pts)
    assert ok
    Xt, lam, om = rescale_to_reeb(klein, nu, pts)
    assert check_shs(om, lam, Xt, pts).max_residual < 1e-9
    with pytest.raises(ValueError):
        stabilizer_for_klein(standardized_orbit_neighborhood())
