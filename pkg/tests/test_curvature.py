import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from wallachflow.curvature import (
    CURVE_IDS,
    NotWallachError,
    Sign,
    boundary_residuals,
    classify_metric,
    curve_residual,
    gammas,
    grad_l3,
    grad_rho1,
    in_region,
    l_residuals,
    principal_ricci,
    rho_residuals,
    ricci_numerators,
    ricci_signature,
    sample_boundary_curve,
    scalar_curvature,
    scalar_curve_residual,
    scalar_signature,
    sectional_signature,
    submersion_critical_points,
)
from wallachflow.space import (
    SYMMETRY_GROUP,
    Metric3,
    PhasePoint,
    from_scale_invariant,
    make_space,
    submersion_metric,
)

W = st.floats(0.1, 20.0)
X = st.floats(0.05, 20.0)
A = st.sampled_from(["1/9", "1/8", "1/6"])


# --- oracle: symbolic forms --------------------------------------------------

_w1, _w2, _a = sp.symbols("w1 w2 a", positive=True)


def _sym_gamma(xi, xj, xk):
    return (xj - xk) ** 2 + 2 * xi * (xj + xk) - 3 * xi**2


def _sym_k(xi, xj, xk):
    return xj * xk + _a * (xi**2 - xj**2 - xk**2)


_X = (1 / _w1, 1 / _w2, sp.Integer(1))
_ORDER = ((0, 1, 2), (1, 0, 2), (2, 0, 1))
_L_SYM = [sp.lambdify((_w1, _w2), sp.expand(_sym_gamma(*(_X[i] for i in o)) * _w1**2 * _w2**2)) for o in _ORDER]
_RHO_SYM = [
    sp.lambdify((_a, _w1, _w2), sp.expand(_sym_k(*(_X[i] for i in o)) * _w1**2 * _w2**2)) for o in _ORDER
]


@given(W, W)
def test_l_polynomials_match_cleared_gammas(w1, w2):
    for got, ref in zip(l_residuals(PhasePoint(w1, w2)), _L_SYM):
        assert got == pytest.approx(ref(w1, w2), rel=1e-10, abs=1e-9)


@given(A, W, W)
def test_rho_polynomials_match_cleared_ricci(a, w1, w2):
    s = make_space(a)
    for got, ref in zip(rho_residuals(s, PhasePoint(w1, w2)), _RHO_SYM):
        assert got == pytest.approx(ref(s.a, w1, w2), rel=1e-10, abs=1e-9)


# --- worked examples ---------------------------------------------------------


@pytest.mark.parametrize(
    "m,r",
    [((1, 1, 1), (7 / 16,) * 3), ((3, 1, 1), (5 / 16,) * 3)],
)
def test_principal_ricci_examples(m, r):
    assert principal_ricci(make_space("1/8"), Metric3(*m)) == pytest.approx(r, abs=1e-15)


def test_negative_ricci_example():
    s = make_space("1/8")
    k1 = ricci_numerators(s, Metric3(0.5, 0.05, 1))[0]
    assert k1 == pytest.approx(-0.0440625, abs=1e-15)
    assert principal_ricci(s, Metric3(0.5, 0.05, 1))[0] < 0


@pytest.mark.parametrize("a,d,S", [("1/8", 4, 21 / 4), ("1/6", 2, 5 / 2)])
def test_scalar_normal_metric(a, d, S):
    assert scalar_curvature(make_space(a, d), Metric3(1, 1, 1)) == pytest.approx(S, rel=1e-15)


@given(A, st.integers(1, 8), X, X, X)
def test_scalar_is_trace(a, d, x1, x2, x3):
    s = make_space(a, d)
    m = Metric3(x1, x2, x3)
    S = scalar_curvature(s, m)
    assert S == pytest.approx(d * sum(principal_ricci(s, m)), rel=1e-12, abs=1e-12 * (1 + abs(S)))


@pytest.mark.parametrize(
    "m,sign", [((1, 1, 1), Sign.BOUNDARY), ((0.5, 0.5, 1), Sign.MIXED), ((0.9, 1.0, 1.1), Sign.POSITIVE)]
)
def test_sectional_examples(m, sign):
    assert sectional_signature(Metric3(*m)) is sign


def test_gamma3_example():
    assert gammas(Metric3(0.5, 0.5, 1))[2] == pytest.approx(-1.0)


def test_sectional_boundary_when_gamma_vanishes():
    # x1 = x2 = 1: gamma_3 = 4 x3 - 3 x3^2 vanishes at x3 = 4/3
    assert sectional_signature(Metric3(1.0, 1.0, 4.0 / 3.0)) is Sign.BOUNDARY


def test_sectional_refused_outside_presets():
    with pytest.raises(NotWallachError):
        sectional_signature(Metric3(1, 1, 1), make_space(0.2))
    assert classify_metric(make_space(0.2), Metric3(1, 1, 1)).sectional is None


@pytest.mark.parametrize(
    "m,sign", [((1, 1, 1), Sign.POSITIVE), ((0.5, 0.5, 1), Sign.POSITIVE), ((0.5, 0.05, 1), Sign.MIXED)]
)
def test_ricci_examples(m, sign):
    assert ricci_signature(make_space("1/8"), Metric3(*m)) is sign


def test_ricci_values_example():
    assert ricci_numerators(make_space("1/8"), Metric3(0.5, 0.5, 1)) == pytest.approx((0.375, 0.375, 0.3125))


def test_ricci_boundary():
    s = make_space("1/8")
    cs = sample_boundary_curve(s, "r1", (1.5, 3.0), 5)
    for p in cs.points:
        assert ricci_signature(s, from_scale_invariant(p)) is Sign.BOUNDARY


def test_scalar_examples():
    s = make_space("1/8")
    assert scalar_signature(s, Metric3(1, 1, 1)) is Sign.POSITIVE
    p = PhasePoint(2, 20)
    assert scalar_curve_residual(s, p) == pytest.approx(-669.5)
    assert scalar_signature(s, from_scale_invariant(p)) is Sign.POSITIVE


@pytest.mark.parametrize("x", [1e2, 1e4, 1e6])
def test_scalar_negative_far_along_submersion(x):
    s = make_space("1/8")
    assert scalar_signature(s, submersion_metric(x)) is Sign.NEGATIVE


@pytest.mark.parametrize("w2", [1.5, 1e3, 1e7])
def test_scalar_positive_along_c2(w2):
    # on w1 = 1 the curve expression is (2a - 1) w2^2 - 2 w2 + a < 0
    s = make_space("1/8")
    assert scalar_signature(s, from_scale_invariant(PhasePoint(1.0, w2))) is Sign.POSITIVE


@given(A, W, W)
def test_scalar_sign_matches_curve_expression(a, w1, w2):
    s = make_space(a)
    p = PhasePoint(w1, w2)
    res = scalar_curve_residual(s, p)
    S = scalar_curvature(s, from_scale_invariant(p))
    if abs(res) > 1e-9 * (1 + (w1 * w2) ** 2):
        assert (S > 0) == (res < 0)


def test_boundary_residual_examples():
    s = make_space("1/8")
    assert boundary_residuals(s, PhasePoint(1, 1)).l[2] == pytest.approx(1.0)
    assert boundary_residuals(s, PhasePoint(2, 20)).rho[0] == pytest.approx(-70.5)


# --- invariants --------------------------------------------------------------


def _sign(v, scale):
    return 0 if abs(v) <= 1e-9 * scale else (1 if v > 0 else -1)


@given(A, W, W)
def test_coordinate_sign_consistency(a, w1, w2):
    s = make_space(a)
    p = PhasePoint(w1, w2)
    m = Metric3(1 / w1, 1 / w2, 1.0)
    sc = 1 + (w1 * w2) ** 2
    for g, l in zip(gammas(m), l_residuals(p)):
        assert _sign(g * w1 * w1 * w2 * w2, sc) == _sign(l, sc)
    for k, r in zip(ricci_numerators(s, m), rho_residuals(s, p)):
        assert _sign(k * w1 * w1 * w2 * w2, sc) == _sign(r, sc)


@pytest.mark.parametrize("a", ["1/9", "1/8", "1/6"])
def test_cone_nesting(a):
    s = make_space(a)
    rng = np.random.default_rng(7)
    z = rng.normal(scale=0.6, size=(10_000, 3))
    z -= z.mean(axis=1, keepdims=True)
    counts = {"sec": 0, "ric": 0}
    for x in np.exp(z):
        sig = classify_metric(s, Metric3(*x))
        if sig.sectional is Sign.POSITIVE:
            counts["sec"] += 1
            assert sig.ricci is Sign.POSITIVE
        if sig.ricci is Sign.POSITIVE:
            counts["ric"] += 1
            assert sig.scalar is Sign.POSITIVE
    # the samples exercise both implications
    assert counts["sec"] > 100 and counts["ric"] > counts["sec"]


@given(A, W, W)
def test_signatures_permutation_invariant(a, w1, w2):
    s = make_space(a)
    p = PhasePoint(w1, w2)
    ref = classify_metric(s, from_scale_invariant(p))
    for g in SYMMETRY_GROUP:
        assert classify_metric(s, from_scale_invariant(g.apply(p))) == ref


@given(A, X, X, X)
def test_ricci_permutation_equivariant(a, x1, x2, x3):
    s = make_space(a)
    m = Metric3(x1, x2, x3)
    r = principal_ricci(s, m)
    for g in SYMMETRY_GROUP:
        rg = principal_ricci(s, g.apply_metric(m))
        assert rg == pytest.approx(tuple(r[i] for i in g.perm), rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("region", ["D", "R", "S"])
def test_region_at_normal_side(region):
    s = make_space("1/8")
    # close to the normal point but off the rays
    assert in_region(s, region, PhasePoint(1.05, 1.1))


def test_region_unknown():
    with pytest.raises(ValueError):
        in_region(make_space("1/8"), "Q", PhasePoint(2, 3))


# --- gradients (finite differences) -----------------------------------------


@given(A, W, W)
def test_gradients_match_finite_differences(a, w1, w2):
    s = make_space(a)
    h = 1e-6
    for fun, grad in (
        (lambda u, v: l_residuals(PhasePoint(u, v))[2], grad_l3(PhasePoint(w1, w2))),
        (lambda u, v: rho_residuals(s, PhasePoint(u, v))[0], grad_rho1(s, PhasePoint(w1, w2))),
    ):
        d1 = (fun(w1 + h * w1, w2) - fun(w1 - h * w1, w2)) / (2 * h * w1)
        d2 = (fun(w1, w2 + h * w2) - fun(w1, w2 - h * w2)) / (2 * h * w2)
        scale = 1 + abs(w1 * w2) * (w1 + w2)
        assert grad[0] == pytest.approx(d1, rel=1e-5, abs=1e-6 * scale)
        assert grad[1] == pytest.approx(d2, rel=1e-5, abs=1e-6 * scale)


# --- curve sampling ----------------------------------------------------------


@pytest.mark.parametrize("cid", [c for c in CURVE_IDS if c != "c2"])
@pytest.mark.parametrize("branch", ["upper", "lower"])
def test_sampled_curves_have_small_residuals(wallach, cid, branch):
    cs = sample_boundary_curve(wallach, cid, (0.2, 8.0), 200, branch=branch, spacing="log")
    for p in cs.points:
        res = curve_residual(wallach, cid, p)
        assert abs(res) <= 1e-9 * (1 + (p.w1 * p.w2) ** 2)
    assert len(cs) + len(cs.missing) == 200


@pytest.mark.parametrize("eps", [1e-3, 1e-4, 1e-5])
def test_s3_asymptote(eps):
    s = make_space("1/8")
    cs = sample_boundary_curve(s, "s3", (1 + eps, 1 + eps), 1, branch="upper")
    assert cs.w2[0] * math.sqrt(eps) == pytest.approx(0.5, rel=5 * math.sqrt(eps))


@pytest.mark.parametrize("eps", [1e-3, 1e-4, 1e-5])
def test_r1_upper_asymptote(wallach, eps):
    a = wallach.a
    cs = sample_boundary_curve(wallach, "r1", (1 + eps, 1 + eps), 1, branch="upper")
    assert cs.w2[0] * eps == pytest.approx(1 / (2 * a), rel=10 * eps)


def test_r1_lower_branch_ends_at_p2(wallach):
    cs = sample_boundary_curve(wallach, "r1", (1 + 1e-6, 1.1), 20, branch="lower")
    assert cs.w2[0] == pytest.approx(wallach.a, abs=1e-5)


def test_c2_sampling_is_vertical():
    cs = sample_boundary_curve(make_space("1/8"), "c2", (1.0, 5.0), 5)
    assert np.all(cs.w1 == 1.0) and cs.w2[-1] == 5.0


def test_missing_abscissae_reported():
    # lambda: w2 (1 - 2 a w1) = 2 a w1 has no positive root once w1 > 1/(2a) = 4
    cs = sample_boundary_curve(make_space("1/8"), "lambda", (3.0, 6.0), 10)
    assert cs.missing and len(cs) + len(cs.missing) == 10


def test_unknown_curve():
    with pytest.raises(ValueError):
        sample_boundary_curve(make_space("1/8"), "zz", (1, 2), 3)


@pytest.mark.parametrize("a", ["1/9", "1/8", "1/6"])
def test_r1_disjoint_from_s3(a):
    s = make_space(a)
    cs = sample_boundary_curve(s, "s3", (1 + 1e-6, 1e3), 4000, spacing="log")
    rho = np.array([rho_residuals(s, p)[0] / (1 + (p.w1 * p.w2) ** 2) for p in cs.points])
    assert np.all(rho > 0) or np.all(rho < 0)
    assert np.min(np.abs(rho)) > 1e-6


def test_submersion_critical_points_w12():
    # S along (x^-1/3, x^-1/3, x^2/3) has a maximum at the normal metric x = 1 and another
    # critical point at the Einstein metric with x3 / x1 = 1/q (E3 side), x^(1) = 3
    pts = submersion_critical_points(make_space("1/8", 4))
    xs = [round(x, 6) for x, _ in pts]
    assert 1.0 in xs
    assert any(abs(x - 3.0) < 1e-6 for x in xs)
