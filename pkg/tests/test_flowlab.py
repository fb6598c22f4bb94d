import csv
import io

import numpy as np
import pytest

from eulerlab.chartcalc import VectorField, constant, coordinate
from eulerlab.flowlab import (
    NewtonFailure,
    NoReturnError,
    OrbitLeftDomainError,
    SectionMap,
    TangentialCrossingError,
    arc_permutation_covering,
    classify_orbit,
    covering_number,
    critical_points,
    fd_return_jacobian,
    find_periodic,
    integrate,
    integrate_fixed,
    linearized_return,
    poincare_map,
    rotation_number,
)
from eulerlab.models import klein_mapping_torus, modified_contact, standardized_orbit_neighborhood
from eulerlab.models.contact import CutoffProfile
from eulerlab.models.atlas import Atlas, Chart


def test_integrate_klein(klein):
    seg = integrate(klein.X, klein.atlas, (0.0, 0.3, 0.4), 1.0)
    end = seg.end().coords
    assert np.allclose(end, (0.0, 0.7, 0.6), atol=1e-12)
    assert np.all(np.diff(seg.times) > 0)
    seg = integrate(klein.X, klein.atlas, (0.0, 0.3, 0.4), 2.0)
    assert np.allclose(seg.end().coords, (0.0, 0.3, 0.4), atol=1e-12)


def test_integrate_leaves_disk():
    sol = standardized_orbit_neighborhood(1.0)
    with pytest.raises(OrbitLeftDomainError):
        integrate(sol.X, sol.atlas, (0.3, 0.01, 0.0), 5.0)
    with pytest.raises(ValueError):
        integrate(sol.X, sol.atlas, (0.0, 0.0, 0.0), 1.0, tol=0.0)


def test_fixed_step_order():
    sol = standardized_orbit_neighborhood(1.0)
    p0 = np.array([0.01, 0.02, 0.0])
    ref = integrate(sol.X, sol.atlas, p0, 1.0, tol=1e-13).cover[-1]
    e1 = np.linalg.norm(integrate_fixed(sol.X, p0, 1.0, 10) - ref)
    e2 = np.linalg.norm(integrate_fixed(sol.X, p0, 1.0, 20) - ref)
    assert e1 / e2 >= 4.0  # order at least 2; order 5 gives about 32
    assert e1 / e2 > 16.0


def test_adaptive_tolerance_controls_error():
    sol = standardized_orbit_neighborhood(1.0)
    p0 = np.array([0.01, 0.02, 0.0])
    ref = integrate(sol.X, sol.atlas, p0, 1.0, tol=1e-13).cover[-1]
    errs = [np.linalg.norm(integrate(sol.X, sol.atlas, p0, 1.0, tol=t).cover[-1] - ref) for t in (1e-6, 1e-8, 1e-10)]
    assert errs[0] > errs[1] > errs[2]
    assert all(e < 10 * t for e, t in zip(errs, (1e-6, 1e-8, 1e-10)))


def test_poincare_map_klein(klein):
    pt, t = poincare_map(klein.X, klein.atlas, SectionMap(axis=0), (0.3, 0.4))
    assert np.allclose(pt.coords, (0.0, 0.7, 0.6), atol=1e-12)
    assert t == pytest.approx(1.0, abs=1e-12)


def test_tangential_section(klein):
    with pytest.raises(TangentialCrossingError):
        poincare_map(klein.X, klein.atlas, SectionMap(axis=2), (0.3, 0.4))


def test_no_return():
    chart = Chart("t3", (0, 0, 0), (1, 1, 1), (1.0, 1.0, 1.0))
    atlas = Atlas({"t3": chart})
    X = VectorField([0.0, 1.0, 1e-3])
    with pytest.raises(NoReturnError):
        poincare_map(X, atlas, SectionMap(axis=2, t_max=50.0), (0.1, 0.1))


def test_variational_matches_differences():
    sol = modified_contact(1.0)
    sec = SectionMap(axis=2)
    w = (0.33, 0.0)
    D = linearized_return(sol.X, sol.atlas, sec, w)
    F = fd_return_jacobian(sol.X, sol.atlas, sec, w)
    assert np.abs(D - F).max() < 1e-6
    assert abs(np.linalg.det(D) - 1.0) < 1e-6


def test_newton_failure_on_degenerate_family():
    # a linear flow with a nonzero shift: the return map is a translation, D = I
    chart = Chart("t3", (0, 0, 0), (1, 1, 1), (1.0, 1.0, 1.0))
    X = VectorField([0.1, 0.0, 1.0])
    with pytest.raises(NewtonFailure):
        find_periodic(X, Atlas({"t3": chart}), SectionMap(axis=2), (0.2, 0.2))


def test_periodic_family_converges_at_guess():
    sol = modified_contact(1.0)
    orbit = find_periodic(sol.X, sol.atlas, SectionMap(axis=2), (0.05, 0.05))
    assert orbit.iterations == 1 and np.allclose(orbit.return_matrix, np.eye(2), atol=1e-9)
    assert orbit.klass == "degenerate"


def test_classify_routes():
    assert classify_orbit(hessian=np.diag([-2.0, 2.0])) == "hyperbolic"
    assert classify_orbit(hessian=np.diag([2.0, 2.0])) == "elliptic"
    assert classify_orbit(hessian=np.diag([0.0, 2.0])) == "degenerate"
    c, s = np.cos(0.4), np.sin(0.4)
    assert classify_orbit(np.array([[c, -s], [s, c]])) == "elliptic"
    assert classify_orbit(np.diag([3.0, 1 / 3.0])) == "hyperbolic"
    assert classify_orbit(np.array([[1.0, 1.0], [0.0, 1.0]])) == "degenerate"
    with pytest.raises(ValueError):
        classify_orbit()


def test_elliptic_orbit_routes_agree():
    from eulerlab.chartcalc import coordinate as co
    from eulerlab.models import solid_torus_invariant_contact
    from eulerlab.models.contact import standard_lambda_D

    x, y = co(0), co(1)
    H = constant(1.0) + x * x + y * y
    sol = solid_torus_invariant_contact(H, standard_lambda_D(), 0.4)
    orbit = find_periodic(sol.X, sol.atlas, SectionMap(axis=2), (0.0, 0.0))
    assert orbit.klass == "elliptic" == classify_orbit(hessian=np.diag([2.0, 2.0]))
    assert abs(np.linalg.det(orbit.return_matrix) - 1) < 1e-6


def test_rotation_numbers():
    r = rotation_number((1.0, 0.0))
    assert r.value == 0.0 and r.rational
    g = rotation_number((1.0, (np.sqrt(5) - 1) / 2))
    assert g.value == pytest.approx(0.6180339887498949) and not g.rational
    h = rotation_number((2.0, 3.0))
    assert h.rational and (h.p, h.q) == (3, 2)
    assert rotation_number((0.0, 1.0)).value == float("inf")
    with pytest.raises(ValueError):
        rotation_number((0.0, 0.0))


def test_arc_permutation_examples():
    assert arc_permutation_covering(4, 2) == (2, 2)
    assert arc_permutation_covering(7, 0) == (7, 1)
    assert arc_permutation_covering(6, 4) == (2, 3)
    with pytest.raises(ValueError):
        arc_permutation_covering(3, 3)


def test_covering_number_hyperbolic():
    sol = standardized_orbit_neighborhood(1.0)
    m, p, n, d = covering_number(sol.X, sol.atlas, SectionMap(axis=2), (0.0, 0.0), sol.extras["first_integral"])
    assert (m, p, n, d) == (4, 0, 4, 1)


def test_critical_points_examples():
    sol = standardized_orbit_neighborhood(1.0)
    cs = critical_points(sol.extras["first_integral"], 0.45, resolution=64)
    assert len(cs) == 1
    assert np.allclose(cs.points[0], 0.0, atol=1e-12) and cs.klass[0] == "hyperbolic"
    flat = critical_points(constant(2.0), 0.45, resolution=16)
    assert len(flat) == flat.n_seeds and set(flat.klass) == {"degenerate"}


def test_critical_points_modified():
    chi = CutoffProfile()
    sol = modified_contact(1.0, chi)
    cs = critical_points(sol.extras["first_integral"], np.sqrt(chi.eps) * 0.999, resolution=128)
    u = cs.points[:, 0] ** 2 + cs.points[:, 1] ** 2
    assert len(cs) > 0 and np.max(chi(u)) < 1e-12


def test_orbit_rows(klein):
    seg = integrate(klein.X, klein.atlas, (0.0, 0.1, 0.2), 0.5, n_out=6)
    rows = seg.to_rows()
    assert len(rows) == 6 and rows[0][1] == "klein"
