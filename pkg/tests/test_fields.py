import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wallachflow.curvature import kahler_residual, lambda_residual, omega_residual
from wallachflow.fields import (
    REDUCED_TIME_FACTOR,
    consistency_check,
    einstein_spread,
    field_w,
    field_x,
    field_x_reduced,
    first_integral_residual,
    induced_w_velocity,
    jacobian_w,
    kahler_defect,
    reduced_factor,
    w_system,
    x2_system,
    x_system,
)
from wallachflow.space import Metric3, PhasePoint, make_space, normalize_volume, to_scale_invariant

W = st.floats(0.1, 20.0)
X = st.floats(0.05, 20.0)
A = st.sampled_from(["1/9", "1/8", "1/6", "0.2", "0.3"])


# --- examples ----------------------------------------------------------------


@pytest.mark.parametrize("m", [(1, 1, 1), (3, 1, 1)])
def test_field_x_vanishes_at_einstein_metrics(m):
    assert field_x(make_space("1/8"), Metric3(*m)) == pytest.approx((0, 0, 0), abs=1e-15)


@pytest.mark.parametrize("x", [(1, 1), (3, 1)])
def test_reduced_vanishes(x):
    # (3, 1) in reduced coordinates is the Einstein metric proportional to (3, 1, 1)
    s = make_space("1/8")
    m = normalize_volume(Metric3(3, 1, 1))
    pt = (1.0, 1.0) if x == (1, 1) else (m.x1, m.x2)
    assert field_x_reduced(s, *pt) == pytest.approx((0, 0), abs=1e-14)


@pytest.mark.parametrize(
    "p,fg", [((1, 1), (0, 0)), ((2, 3), (-0.25, 2)), ((1 / 3, 1), (0, 0))]
)
def test_field_w_examples(p, fg):
    assert field_w(make_space("1/8"), PhasePoint(*p)) == pytest.approx(fg, abs=1e-15)


@pytest.mark.parametrize("a,diag", [("1/8", 0.5), ("1/6", 1 / 3)])
def test_jacobian_at_e0(a, diag):
    J = jacobian_w(make_space(a), PhasePoint(1, 1))
    assert np.allclose(J, diag * np.eye(2), atol=1e-15)


@given(A, W, W)
def test_jacobian_matches_finite_differences(a, w1, w2):
    s = make_space(a)
    J = jacobian_w(s, PhasePoint(w1, w2))
    for j, (e1, e2) in enumerate(((1, 0), (0, 1))):
        h = 1e-6 * (w1 if j == 0 else w2)
        fp = np.array(field_w(s, PhasePoint(w1 + h * e1, w2 + h * e2)))
        fm = np.array(field_w(s, PhasePoint(w1 - h * e1, w2 - h * e2)))
        fd = (fp - fm) / (2 * h)
        scale = 1 + np.abs(J).max()
        assert np.allclose(J[:, j], fd, rtol=1e-6, atol=1e-6 * scale)


@pytest.mark.parametrize("m", [(1, 1, 1), (0.5, 1 / 3, 1)])
def test_consistency_examples(m):
    assert consistency_check(make_space("1/8"), Metric3(*m)) <= 1e-12


@given(X, X, X)
def test_consistency_w24(x1, x2, x3):
    m = normalize_volume(Metric3(x1, x2, x3))
    fw = field_w(make_space("1/9"), to_scale_invariant(m))
    assert consistency_check(make_space("1/9"), m) <= 1e-10 * (1 + math.hypot(*fw))


@given(A, X, X, X)
def test_rescaled_w_velocity_is_x3_times_chain_rule(a, x1, x2, x3):
    s = make_space(a)
    m = Metric3(x1, x2, x3)
    F = field_x(s, m)
    # plain chain rule for w_i = x3 / x_i
    dw1 = (F[2] * x1 - x3 * F[0]) / (x1 * x1)
    dw2 = (F[2] * x2 - x3 * F[1]) / (x2 * x2)
    got = induced_w_velocity(s, m)
    assert got == pytest.approx((x3 * dw1, x3 * dw2), rel=1e-9, abs=1e-9 * (1 + abs(x3 * dw1) + abs(x3 * dw2)))


# --- reduced system ----------------------------------------------------------


@given(A, st.floats(0.3, 3.0), st.floats(0.3, 3.0))
def test_reduced_system_is_fixed_multiple_of_restriction(a, x1, x2):
    s = make_space(a)
    F = field_x(s, Metric3(x1, x2, 1 / (x1 * x2)))
    red = field_x_reduced(s, x1, x2)
    if math.hypot(F[0], F[1]) > 1e-6:
        assert red == pytest.approx((REDUCED_TIME_FACTOR * F[0], REDUCED_TIME_FACTOR * F[1]), rel=1e-9, abs=1e-12)
        assert reduced_factor(s, x1, x2) == pytest.approx(REDUCED_TIME_FACTOR, rel=1e-9)


def test_reduced_factor_example():
    assert reduced_factor(make_space("1/8"), 1.2, 0.9) == pytest.approx(3.0, rel=1e-12)


def test_reduced_factor_nan_at_rest():
    assert math.isnan(reduced_factor(make_space("1/8"), 1.0, 1.0))


# --- invariants --------------------------------------------------------------


@given(A, X, X, X)
def test_first_integral(a, x1, x2, x3):
    s = make_space(a)
    m = Metric3(x1, x2, x3)
    scale = sum(abs(v) / x for v, x in zip(field_x(s, m), m))
    assert abs(first_integral_residual(s, m)) <= 1e-12 * (1 + scale)


@given(A, st.floats(0.05, 50.0))
def test_zero_sets_c1_c2(a, t):
    s = make_space(a)
    assert field_w(s, PhasePoint(1.0, t))[0] == 0.0
    assert field_w(s, PhasePoint(t, 1.0))[1] == 0.0


@given(A, st.floats(0.05, 50.0))
def test_zero_sets_omega_lambda(a, w1):
    s = make_space(a)
    # omega: w2 = w1 / (2a (w1 + 1)); lambda is its mirror image
    w2 = w1 / (2 * s.a * (w1 + 1))
    assert abs(field_w(s, PhasePoint(w1, w2))[0]) <= 1e-12 * (1 + w1 * w2)
    assert abs(field_w(s, PhasePoint(w2, w1))[1]) <= 1e-12 * (1 + w1 * w2)


@given(A, st.floats(0.05, 50.0))
def test_diagonal_invariant(a, t):
    f, g = field_w(make_space(a), PhasePoint(t, t))
    assert f == g


@given(A, W, W)
def test_sign_structure_in_omega(a, w1, w2):
    s = make_space(a)
    p = PhasePoint(w1, w2)
    if not (w2 > w1 > 1):
        return
    f, g = field_w(s, p)
    om, la = omega_residual(s, p), lambda_residual(s, p)
    tol = 1e-12 * (1 + w1 * w2)
    if abs(om) < tol or abs(la) < tol:
        return
    if om > 0:
        assert f > 0
    elif la > 0:
        assert f < 0 and g > 0
    else:
        assert f < 0 and g < 0


@given(st.floats(1.01, 100.0))
def test_kahler_curve_tangency(w1):
    s = make_space("1/6")
    w2 = w1 / (w1 - 1)
    p = PhasePoint(w1, w2)
    assert abs(kahler_residual(p)) <= 1e-14
    f, g = field_w(s, p)
    # gradient of 1/w1 + 1/w2 - 1
    dd = -f / (w1 * w1) - g / (w2 * w2)
    assert abs(dd) <= 1e-10 * (1 + abs(f) + abs(g))


@given(st.floats(0.05, 20.0), st.floats(0.05, 20.0))
def test_kahler_defect_at_one_sixth(x1, x2):
    assert abs(kahler_defect(make_space("1/6"), Metric3(x1, x2, x1 + x2))) <= 1e-12 * (1 + (x1 + x2) ** 2 / (x1 * x2))


def test_kahler_defect_example():
    assert kahler_defect(make_space("1/6"), Metric3(1, 1, 2)) == pytest.approx(0.0, abs=1e-15)
    assert abs(kahler_defect(make_space("1/8"), Metric3(1, 1, 2))) > 1e-3


@pytest.mark.parametrize("m", [(1, 1, 1), (3, 1, 1)])
def test_einstein_spread(m):
    assert einstein_spread(make_space("1/8"), Metric3(*m)) <= 1e-15


# --- array adapters ----------------------------------------------------------


@given(A, X, X, X)
def test_array_adapters(a, x1, x2, x3):
    s = make_space(a)
    assert np.allclose(x_system(s)(0, np.array([x1, x2, x3])), field_x(s, Metric3(x1, x2, x3)), rtol=1e-12, atol=1e-12)
    assert np.array_equal(w_system(s)(0, np.array([x1, x2])), np.array(field_w(s, PhasePoint(x1, x2))))
    assert np.array_equal(x2_system(s)(0, np.array([x1, x2])), np.array(field_x_reduced(s, x1, x2)))
