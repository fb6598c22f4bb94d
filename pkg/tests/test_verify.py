import numpy as np
import pytest

from eulerlab.chartcalc import OneForm, TwoForm, VectorField, constant, interior_product, volume_form
from eulerlab.models import ModelSolution, klein_mapping_torus, modified_contact, standardized_orbit_neighborhood
from eulerlab.models.atlas import Atlas, Chart
from eulerlab.sampling import chart_samples
from eulerlab.verify import (
    MissingDataError,
    NotStabilizingError,
    bernoulli,
    check_shs,
    check_stabilizing,
    euler_residuals,
    euler_suite,
    metric_from_pairing,
    rescale_to_reeb,
)
from eulerlab.chartcalc import MetricField


def test_printed_pressure_flags_momentum():
    sol = klein_mapping_torus()
    sol.pressure = sol.bernoulli.partial(2) * 0.5
    rep = euler_residuals(sol, [[0.3, 0.2, 0.25]], "momentum")
    assert rep.max_residual > 0.1
    assert not rep.passed


def test_zero_solution():
    chart = Chart("t3", (0, 0, 0), (1, 1, 1), (1.0, 1.0, 1.0))
    z = constant(0.0)
    sol = ModelSolution(Atlas({"t3": chart}), VectorField([0.0, 0.0, 0.0]), OneForm([0.0, 0.0, 0.0]),
                        TwoForm([0.0, 0.0, 0.0]), volume_form(), z, MetricField.euclidean(), z, "zero", "t3")
    pts = chart_samples(chart, 100)
    for rep in euler_suite(sol, pts).values():
        assert rep.max_residual == 0.0


def test_missing_data():
    sol = klein_mapping_torus()
    sol.metric = None
    with pytest.raises(MissingDataError):
        euler_residuals(sol, [[0.1, 0.1, 0.1]], "momentum")
    with pytest.raises(ValueError):
        euler_residuals(klein_mapping_torus(), [[0.1, 0.1, 0.1]], "nonsense")


def test_report_records_seed_and_chart(klein):
    pts = chart_samples(klein.chart, 50, seed=11)
    d = euler_residuals(klein, pts, "volume", seed=11).to_dict()
    assert d["seed"] == 11 and d["chart"] == "klein" and d["n"] == 50


def test_check_shs_cases(klein):
    pts = chart_samples(klein.chart, 1000)
    unscaled = check_shs(klein.omega, klein.lam, klein.X, pts)
    assert unscaled.details["lam(X)-1"] == pytest.approx(np.abs(klein.bernoulli(pts) - 1).max())
    c = standardized_orbit_neighborhood(1.0)
    p2 = chart_samples(c.chart, 1000)
    assert check_shs(c.omega, c.lam, c.X, p2).max_residual < 1e-9


def test_check_stabilizing(klein):
    pts = chart_samples(klein.chart, 500)
    ok, _ = check_stabilizing(OneForm([1.0, 0.0, 0.0]), klein.X, pts)
    assert ok
    ok, rep = check_stabilizing(OneForm([0.0, 1.0, 0.0]), klein.X, pts)
    assert not ok and rep.details["min nu(X)"] == 0.0
    m = modified_contact()
    ok, _ = check_stabilizing(m.lam, m.X, chart_samples(m.chart, 1000))
    assert ok


def test_bernoulli_values(klein):
    assert bernoulli(klein, [[0.1, 0.2, 0.0]])[0] == pytest.approx(1.0)
    assert bernoulli(klein, [[0.1, 0.2, 0.5]])[0] == pytest.approx(3.0)
    flat = klein_mapping_torus(constant(1.0))
    assert np.allclose(bernoulli(flat, chart_samples(flat.chart, 100)), 1.0)


def test_rescale_to_reeb(klein):
    pts = chart_samples(klein.chart, 1000)
    Xt, lam, om = rescale_to_reeb(klein, OneForm([1.0, 0.0, 0.0]), pts)
    assert np.allclose(Xt(pts), [1.0, 0.0, 0.0])
    Xt2, lam2, om2 = rescale_to_reeb(klein, OneForm([2.0, 0.0, 0.0]), pts)
    assert np.allclose(Xt2(pts), [0.5, 0.0, 0.0])
    assert np.abs(interior_product(Xt2, lam2)(pts) - 1).max() < 1e-14
    for a, b, c in ((om, lam, Xt), (om2, lam2, Xt2)):
        assert check_shs(a, b, c, pts).max_residual < 1e-9
    with pytest.raises(NotStabilizingError):
        rescale_to_reeb(klein, OneForm([0.0, 1.0, 0.0]), pts)


def test_metric_from_pairing(klein):
    pts = chart_samples(klein.chart, 1000)
    g = metric_from_pairing(klein.lam, klein.X, pts)
    G = g.matrix(pts)
    assert np.allclose(G[:, 0, 0], klein.bernoulli(pts))
    assert np.abs(G[:, 0, 1:]).max() < 1e-15
    flat = np.einsum("nij,j->ni", G, [1.0, 0.0, 0.0])
    assert np.abs(flat - klein.lam(pts)).max() < 1e-10
    e = metric_from_pairing(OneForm([0.0, 0.0, 1.0]), VectorField([0.0, 0.0, 1.0]), pts)
    assert np.allclose(e.matrix(pts), np.eye(3))
    with pytest.raises(ValueError):
        metric_from_pairing(OneForm([0.0, 0.0, -1.0]), VectorField([0.0, 0.0, 1.0]), pts)


def test_reeb_pipeline_constant_bernoulli(klein):
    """With a stabilizing nu, (metric_from_pairing(nu, X~), X~) solves Euler with constant h."""
    pts = chart_samples(klein.chart, 2000, seed=2)
    nu = OneForm([1.0, 0.0, 0.0])
    Xt, lam, om = rescale_to_reeb(klein, nu, pts)
    g = metric_from_pairing(nu, Xt, pts)
    sol = ModelSolution(klein.atlas, Xt, nu, om, klein.mu, constant(1.0), g, constant(0.5), "reeb")
    reps = euler_suite(sol, pts)
    assert max(r.max_residual for r in reps.values()) < 1e-8
    assert np.abs(bernoulli(sol, pts) - 1.0).max() < 1e-10


def test_representations_agree():
    """momentum, curlform and dualform pass or fail together."""
    for sol in (klein_mapping_torus(), klein_mapping_torus(variant="printed"), modified_contact()):
        pts = chart_samples(sol.chart, 500, seed=1)
        flags = {t: euler_residuals(sol, pts, t, 1e-8).passed for t in ("momentum", "curlform", "dualform")}
        if sol.name == "klein-printed":
            assert not flags["momentum"] and not flags["dualform"]
        else:
            assert all(flags.values())
