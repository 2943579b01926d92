import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sympeps import exterior as ex
from sympeps import polyform as pf
from sympeps.suite import random_polyform


def half(m, expts):
    return {tuple(expts): Fraction(1, 2)}


def test_poly_arithmetic_basics():
    m = 3
    p = pf.poly_add(pf.poly_var(m, 1), pf.poly_const(m, Fraction(2, 3)))
    q = pf.poly_mul(p, pf.poly_var(m, 2))
    assert q == {(1, 1, 0): Fraction(1), (0, 1, 0): Fraction(2, 3)}
    assert pf.poly_diff(q, 1) == {(0, 1, 0): Fraction(1)}
    assert pf.poly_total_degree(q) == 2
    assert pf.poly_add(p, pf.poly_neg(p)) == {}


def test_d_of_coordinate_function():
    f = pf.PolyForm.function(2, pf.poly_var(2, 1))
    assert pf.d(f) == pf.PolyForm.basis(2, (1,))


def test_d_sign_from_reordering():
    f = pf.PolyForm.term(2, (1,), pf.poly_var(2, 2))  # x2 dx1
    expected = pf.PolyForm(2, 2, {(1, 2): pf.poly_const(2, -1)})
    assert pf.d(f) == expected


def test_d_squared_is_zero():
    rng = np.random.default_rng(1)
    for _ in range(50):
        f = random_polyform(rng)
        if f.k + 2 > f.m:
            continue
        assert pf.d(pf.d(f)).is_zero()


def test_d_rejects_top_degree():
    top = pf.PolyForm.basis(3, (1, 2, 3))
    with pytest.raises(ValueError, match="top-degree"):
        pf.d(top)


def test_alpha_constant_two_form():
    f = pf.PolyForm.basis(4, (1, 3))
    assert pf.alpha(f) == f.scale(Fraction(1, 2))


def test_alpha_linear_coefficient():
    f = pf.PolyForm.term(2, (1,), pf.poly_var(2, 2))  # x2 dx1
    assert pf.alpha(f) == f.scale(Fraction(1, 2))


def test_alpha_zero_form_and_divergence():
    assert pf.alpha(pf.PolyForm.zero(3, 2)).is_zero()
    const = pf.PolyForm.function(3, pf.poly_const(3, 1))
    with pytest.raises(ValueError, match="diverges"):
        pf.alpha(const)


def test_iota_radial_examples():
    assert pf.iota_radial(pf.PolyForm.basis(2, (1,))) == pf.PolyForm.function(
        2, pf.poly_var(2, 1)
    )
    expanded = pf.iota_radial(pf.PolyForm.basis(2, (1, 2)))
    expected = pf.PolyForm(
        2, 1, {(2,): pf.poly_var(2, 1), (1,): pf.poly_neg(pf.poly_var(2, 2))}
    )
    assert expanded == expected
    assert pf.iota_radial(expanded).is_zero()
    with pytest.raises(ValueError, match="degree"):
        pf.iota_radial(pf.PolyForm.function(2, pf.poly_var(2, 1)))


def test_h_area_form():
    hf = pf.h(pf.PolyForm.basis(4, (1, 2)))
    expected = pf.PolyForm(
        4,
        1,
        {
            (2,): {(1, 0, 0, 0): Fraction(1, 2)},
            (1,): {(0, 1, 0, 0): Fraction(-1, 2)},
        },
    )
    assert hf == expected


def test_h_one_form_examples():
    assert pf.h(pf.PolyForm.basis(2, (1,))) == pf.PolyForm.function(2, pf.poly_var(2, 1))
    hf = pf.h(pf.PolyForm.term(2, (1,), pf.poly_var(2, 2)))
    assert hf == pf.PolyForm.function(2, {(1, 1): Fraction(1, 2)})


def test_h_factorizations_agree():
    rng = np.random.default_rng(3)
    for _ in range(100):
        f = random_polyform(rng)
        lhs = pf.iota_radial(pf.alpha(f))
        if f.k > 1:
            rhs = pf.alpha(pf.iota_radial(f))
            assert lhs == rhs
        assert pf.h(f) == lhs


def test_homotopy_identity_hand_expansion():
    # f = x2 dx1 on R^2: h f = x1 x2 / 2, d(h f) = (x2 dx1 + x1 dx2)/2,
    # h(d f) = (x2 dx1 - x1 dx2)/2, and the two sum back to f.
    f = pf.PolyForm.term(2, (1,), pf.poly_var(2, 2))
    hf = pf.h(f)
    assert hf == pf.PolyForm.function(2, {(1, 1): Fraction(1, 2)})
    dhf = pf.d(hf)
    hdf = pf.h(pf.d(f))
    assert dhf == pf.PolyForm(
        2, 1, {(1,): {(0, 1): Fraction(1, 2)}, (2,): {(1, 0): Fraction(1, 2)}}
    )
    assert hdf == pf.PolyForm(
        2, 1, {(1,): {(0, 1): Fraction(1, 2)}, (2,): {(1, 0): Fraction(-1, 2)}}
    )
    assert (dhf + hdf) == f
    assert pf.homotopy_identity_check(f)


def test_homotopy_identity_random_forms():
    rng = np.random.default_rng(5)
    for _ in range(200):
        assert pf.homotopy_identity_check(random_polyform(rng))


def test_closed_forms_have_exact_primitives():
    rng = np.random.default_rng(7)
    for _ in range(50):
        g = random_polyform(rng)
        if g.k + 1 >= g.m:
            continue
        closed = pf.d(g)
        if closed.is_zero():
            continue
        assert pf.d(pf.h(closed)) == closed


@settings(max_examples=40, deadline=None, derandomize=True)
@given(
    st.integers(2, 4),
    st.integers(-6, 6),
    st.integers(1, 5),
    st.integers(0, 3),
    st.integers(0, 3),
)
def test_homotopy_identity_hypothesis_one_forms(m, num, den, p1, p2):
    exp = [0] * m
    exp[0] = p1
    exp[m - 1] = p2
    poly = {tuple(exp): Fraction(num, den)} if num else {}
    f = pf.PolyForm(m, 1, {(1,): poly} if poly else {})
    assert pf.homotopy_identity_check(f)


def test_homotopy_identity_check_domain():
    with pytest.raises(ValueError, match="1 <= k < m"):
        pf.homotopy_identity_check(pf.PolyForm.basis(2, (1, 2)))


def test_dilation_equivariance_exact():
    rng = np.random.default_rng(9)
    for _ in range(50):
        f = random_polyform(rng)
        for r in (Fraction(2), Fraction(1, 3), Fraction(-5, 7)):
            assert pf.h(pf.dilate(f, r)) == pf.dilate(pf.h(f), r)


def test_h_degree_bookkeeping():
    rng = np.random.default_rng(11)
    for _ in range(50):
        f = random_polyform(rng)
        hf = pf.h(f)
        assert hf.k == f.k - 1
        if not hf.is_zero():
            assert hf.coefficient_degree() <= f.coefficient_degree() + 1
    # no cancellation on a single term: the degree gain is exactly one
    single = pf.PolyForm.term(3, (1, 2), {(2, 1, 0): Fraction(5, 3)})
    assert pf.h(single).coefficient_degree() == single.coefficient_degree() + 1


def test_h_cancellation_can_lower_degree():
    # rotational one-form: the radial primitive collapses to a lower degree
    f = pf.PolyForm(
        2,
        1,
        {(1,): pf.poly_add(pf.poly_var(2, 2), pf.poly_const(2, 3)),
         (2,): pf.poly_neg(pf.poly_var(2, 1))},
    )
    hf = pf.h(f)
    assert hf.coefficient_degree() == 1  # (x2 + 3) x1 / ... - x1 x2 / ... leaves 3 x1
    assert pf.homotopy_identity_check(f)


def test_evaluate():
    f = pf.PolyForm.basis(3, (1, 2))
    c = pf.evaluate(f, np.array([5.0, -1.0, 2.0]))
    assert c == ex.Covector(3, 2, {(1, 2): 1.0})
    hf = pf.h(pf.PolyForm.basis(4, (1, 2)))
    at_e1 = pf.evaluate(hf, np.array([1.0, 0.0, 0.0, 0.0]))
    assert at_e1.coeffs == {(2,): 0.5}
    assert pf.evaluate(pf.PolyForm.zero(3, 1), np.zeros(3)).coeffs == {}
    with pytest.raises(ValueError, match="dimension"):
        pf.evaluate(f, np.zeros(2))


def test_h_bound_constant_two_form():
    f = pf.PolyForm.basis(4, (1, 2))
    report = pf.h_bound_check(f, [np.array([1.0, 0.0, 0.0, 0.0])], s=2.0)
    assert report.ray_constant
    assert report.lhs[0] == pytest.approx(0.5, abs=1e-15)
    assert report.ray_rhs[0] == pytest.approx(1.0 / math.sqrt(2.0), rel=1e-12)
    assert report.passed


def test_h_bound_general_forms():
    rng = np.random.default_rng(13)
    for _ in range(20):
        f = random_polyform(rng)
        pts = rng.normal(size=(5, f.m)) * 0.4
        radius = float(np.max(np.linalg.norm(pts, axis=1))) + 0.1
        report = pf.h_bound_check(f, pts, s=radius, t_samples=400)
        assert report.passed
        assert min(report.margins) >= -1e-9


def test_h_bound_zero_form_margins_equal_rhs():
    f = pf.PolyForm.zero(4, 2)
    report = pf.h_bound_check(f, [np.array([0.5, 0.0, 0.0, 0.0])], s=1.0)
    assert report.margins[0] == report.rhs[0] == 0.0
    assert report.passed


def test_h_bound_rejects_points_outside_domain():
    f = pf.PolyForm.basis(2, (1,))
    with pytest.raises(ValueError, match="radius"):
        pf.h_bound_check(f, [np.array([2.0, 0.0])], s=1.0)


def test_polyform_json_round_trip():
    f = pf.PolyForm(
        3,
        1,
        {
            (1,): {(0, 1, 0): Fraction(-7, 3)},
            (3,): {(2, 0, 0): Fraction(1, 2), (0, 0, 0): Fraction(4)},
        },
    )
    data = f.to_json_dict()
    assert data["terms"][0]["poly"][0]["num"] == "-7"
    assert pf.PolyForm.from_json_dict(data) == f


def test_polyform_json_big_integers_survive():
    big = Fraction(10**40 + 1, 3**30)
    f = pf.PolyForm(2, 1, {(1,): {(5, 0): big}})
    assert pf.PolyForm.from_json_dict(f.to_json_dict()) == f


def test_polyform_validation():
    with pytest.raises(ValueError, match="strictly increasing"):
        pf.PolyForm(3, 2, {(2, 1): pf.poly_const(3, 1)})
    with pytest.raises(ValueError, match="exponent"):
        pf.PolyForm(3, 1, {(1,): {(0, 0): Fraction(1)}})
    # zero polynomials are dropped
    assert pf.PolyForm(3, 1, {(1,): {}}).is_zero()
