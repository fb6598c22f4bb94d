import json
from fractions import Fraction
from math import gcd

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from eulerlab.chartcalc import (
    MetricField,
    OneForm,
    coords,
    cos,
    exterior_derivative,
    fd_jet,
    gradient,
    musical_flat,
    pullback,
    sin,
)
from eulerlab.flowlab import arc_permutation_covering, rotation_number
from eulerlab.obstruction import gluing_feasibility
from eulerlab.serialization import dumps

x, y, z = coords(("x", "y", "z"))
TWO_PI = 2 * np.pi
small_int = st.integers(-3, 3)
coef = st.floats(-2, 2, allow_nan=False)
settings.register_profile("lab", max_examples=40, deadline=None)
settings.load_profile("lab")


def trig(k, a):
    """a0 sin(2pi k.p) + a1 cos(2pi k.p) * x."""
    arg = (x * float(k[0]) + y * float(k[1]) + z * float(k[2])) * TWO_PI
    return sin(arg) * a[0] + cos(arg) * x * a[1]


trig_field = st.builds(trig, st.tuples(small_int, small_int, small_int), st.tuples(coef, coef))
points = st.lists(st.tuples(*[st.floats(-1, 1, allow_nan=False)] * 3), min_size=1, max_size=8).map(np.array)


@given(trig_field, trig_field, trig_field, points)
def test_d_squared_zero(f, g, h, pts):
    assert np.abs(exterior_derivative(exterior_derivative(f))(pts)).max() < 1e-9
    alpha = OneForm([f, g, h])
    assert np.abs(exterior_derivative(exterior_derivative(alpha))(pts)).max() < 1e-8


@given(trig_field, points)
def test_analytic_jets_match_finite_differences(f, pts):
    j = f.jet(pts, 2)
    fd = fd_jet(f, pts, step=1e-4)
    scale = 1 + np.abs(j.second).max()
    assert np.abs(j.first - fd.first).max() < 1e-5 * scale * 10
    assert np.abs(j.second - fd.second).max() < 1e-3 * scale * 10


@given(trig_field, st.tuples(*[st.floats(0.5, 3)] * 3), points)
def test_flat_of_gradient_is_differential(f, d, pts):
    g = MetricField.diagonal(d[0] + x * x, d[1], d[2] + y * y * 0.5)
    lhs = musical_flat(g, gradient(g, f))(pts)
    rhs = exterior_derivative(f)(pts)
    assert np.abs(lhs - rhs).max() < 1e-9 * (1 + np.abs(rhs).max())


@given(trig_field, st.lists(st.floats(-2, 2), min_size=9, max_size=9), points)
def test_pullback_commutes_with_d(f, entries, pts):
    A = np.array(entries).reshape(3, 3) + 3 * np.eye(3)
    b = np.array([0.1, -0.2, 0.3])
    lhs = exterior_derivative(pullback(f, A, b))(pts)
    rhs = pullback(exterior_derivative(f), A, b)(pts)
    assert np.abs(lhs - rhs).max() < 1e-8 * (1 + np.abs(rhs).max())


@given(st.integers(1, 200), st.data())
def test_arc_covering(m, data):
    p = data.draw(st.integers(0, m - 1))
    n, d = arc_permutation_covering(m, p)
    assert n * d == m and n == gcd(p, m)
    # direct orbit length of 0 under i -> i + p
    i, length = p % m, 1
    while i != 0:
        i, length = (i + p) % m, length + 1
    assert length == d


@given(st.integers(1, 1000), st.integers(-1000, 1000))
def test_integer_directions_are_rational(a, b):
    rn = rotation_number((a, b))
    assert rn.rational
    assert Fraction(rn.p, rn.q) == Fraction(b, a)


@given(st.lists(st.fractions(Fraction(1, 10), 20), min_size=4, max_size=4), st.fractions(0, 5),
       st.sampled_from([1, 2, 3, -1]))
def test_certificate_shift_and_scale(T, s, k):
    base = gluing_feasibility(T)
    moved = gluing_feasibility([t + s for t in T], fiber_coeff=k)
    assert moved.solution == base.solution
    assert (moved.witness == 0) == (base.witness == 0)
    if k == 2:
        assert moved.witness == base.witness


json_values = st.recursive(
    st.none() | st.booleans() | st.integers(-10**6, 10**6) | st.floats(allow_nan=False, allow_infinity=False)
    | st.text(max_size=8),
    lambda kids: st.lists(kids, max_size=4) | st.dictionaries(st.text(max_size=5), kids, max_size=4),
    max_leaves=12,
)


@given(json_values)
def test_serialization_roundtrip(obj):
    assert json.loads(dumps(obj)) == obj
