import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from exppoly import indexsets as ix
from exppoly.errors import ParseError
from exppoly.poly import (
    FALLING,
    Poly,
    L_apply,
    L_inverse,
    derivative,
    derivative_span,
    difference,
    evaluate,
    format_poly,
    parse_poly,
    poly_from_json,
    poly_to_json,
    scale_argument,
    shift,
    shift_span,
    theta_apply,
    theta_apply_diagonal,
    theta_equals_scaled_derivative_check,
)

from helpers import L_oracle, random_poly, scaled_derivative_oracle, theta_oracle

x = Poly.variable(1, 0)
x1, x2 = Poly.variable(2, 0), Poly.variable(2, 1)


def close(p, q, tol=1e-12):
    return (p - q).norm() <= tol * max(1.0, q.norm())


def test_zero_terms_pruned_and_degree():
    p = Poly(2, {(1, 0): 0.0, (0, 2): 3.0})
    assert list(p.terms) == [(0, 2)]
    assert p.degree == 2
    assert Poly.zero(2).degree == -1


def test_immutable():
    with pytest.raises(AttributeError):
        x.terms = {}


def test_evaluate_examples():
    assert evaluate(x**2, [3]) == 9
    assert evaluate(Poly(1, {(2,): 1}, FALLING), [3]) == 6
    assert evaluate(x1 * x2 + 1, [2, 1j]) == 1 + 2j
    with pytest.raises(ValueError):
        evaluate(x, [1, 2])


def test_shift_and_difference_examples():
    assert shift(x**2, (1,)) == x**2 + 2 * x + 1
    assert difference(x**2, (1,)) == 2 * x + 1
    assert difference(x1 * x2, (1, 1)) == Poly.constant(2)


def test_derivative_examples():
    assert derivative(x**3, (2,)) == 6 * x
    assert derivative(x1**2 * x2, (1, 1)) == 2 * x1
    assert derivative(Poly.constant(2), (1, 0)).is_zero()


def test_theta_examples():
    assert theta_apply(x, x**3) == 3 * x**3
    assert theta_apply(x**2, x**3) == 9 * x**3
    p = x1**2 * x2 + 3 * x2
    assert theta_apply(Poly.constant(2), p) == p


def test_L_examples():
    assert L_apply(x**2) == x + x**2
    assert L_apply(Poly.constant(1)) == Poly.constant(1)
    assert close(L_inverse(x + x**2), x**2)


def test_scaled_derivative_examples():
    assert theta_equals_scaled_derivative_check(x, x**2, [2]) == pytest.approx(0, abs=1e-12)
    assert theta_equals_scaled_derivative_check(x**2, x**3, [1]) == pytest.approx(0, abs=1e-12)
    p = x1**3 * x2 + 2j * x2**2
    assert theta_equals_scaled_derivative_check(Poly.constant(2), p, [0.7, -1.2j]) == pytest.approx(0, abs=1e-12)


def test_scale_argument():
    assert scale_argument(x**2, [2]) == 4 * x**2
    assert scale_argument(x1 + x2, [1, 1j]) == x1 + 1j * x2
    assert scale_argument(Poly.constant(1), [5]) == Poly.constant(1)
    with pytest.raises(ValueError):
        scale_argument(x1, [1, 0])


def test_span_examples():
    sx = shift_span(x)
    assert sx.dimension == 2
    assert sx.basis[0] == x and sx.basis[1] == Poly.constant(1)
    assert derivative_span(x1 * x2).dimension == 4
    assert shift_span(x**3).dimension == 4
    for q in (Poly.constant(2), x1, x2, x1 * x2):
        assert derivative_span(x1 * x2).contains(q)
    with pytest.raises(ValueError):
        shift_span(Poly.zero(1))


def test_falling_basis_round_trip():
    p = Poly(2, {(2, 1): 1.0}, FALLING)
    m = p.to_monomial()
    for pt in ([3, 4], [0.5, -2]):
        assert evaluate(p, pt) == pytest.approx(evaluate(m, pt))


def test_text_and_json_formats():
    p = Poly(2, {(0, 0): 1.5, (1, 0): -2j, (0, 2): 0.25 + 1j})
    text = format_poly(p)
    assert text.startswith("1.5,0.0:0,0;")
    assert parse_poly(text) == p
    assert poly_from_json(poly_to_json(p), 2) == p
    assert poly_from_json(text, 2) == p
    with pytest.raises(ParseError):
        parse_poly("1,0:1;2")
    with pytest.raises(ParseError):
        poly_from_json({"terms": [{"exp": [1], "re": "a"}]})


# ---------------------------------------------------------------- properties

@pytest.mark.parametrize("seed", range(40))
def test_L_matches_finite_difference_oracle(seed):
    rng = np.random.default_rng(seed)
    s = int(rng.integers(1, 4))
    p = random_poly(rng, s, int(rng.integers(0, 5)))
    assert close(L_apply(p), L_oracle(p), 1e-11)


@pytest.mark.parametrize("seed", range(40))
def test_L_round_trip(seed):
    rng = np.random.default_rng(seed)
    s = int(rng.integers(1, 4))
    p = random_poly(rng, s, int(rng.integers(0, 7)), dense=False)
    back = L_inverse(L_apply(p))
    idx = p.support().union(back.support())
    assert np.max(np.abs(back.coefficient_vector(idx) - p.coefficient_vector(idx))) <= 1e-9
    assert L_apply(p).degree == p.degree


@pytest.mark.parametrize("seed", range(30))
def test_theta_against_literal_operator(seed):
    rng = np.random.default_rng(1000 + seed)
    s = int(rng.integers(1, 4))
    q = random_poly(rng, s, int(rng.integers(0, 4)))
    p = random_poly(rng, s, int(rng.integers(0, 4)))
    ref = theta_oracle(q, p)
    assert close(theta_apply(q, p), ref, 1e-11)
    assert close(theta_apply_diagonal(q, p), ref, 1e-11)


@pytest.mark.parametrize("s", [1, 2, 3])
def test_theta_eigenrelation(s):
    for alpha in ix.box([4] * s):
        q = Poly.monomial(alpha)
        for beta in ix.box([4] * s):
            val = np.prod([b**a for a, b in zip(alpha, beta)])
            assert theta_apply(q, Poly.monomial(beta)) == Poly.monomial(beta, float(val))


@pytest.mark.parametrize("seed", range(30))
def test_theta_identity_against_oracle(seed):
    rng = np.random.default_rng(2000 + seed)
    s = int(rng.integers(1, 4))
    q = random_poly(rng, s, int(rng.integers(0, 5)))
    p = random_poly(rng, s, int(rng.integers(0, 5)))
    xi = rng.uniform(0.5, 2, s) * np.exp(2j * np.pi * rng.random(s))
    lhs = evaluate(theta_apply(q, p), xi)
    ref = scaled_derivative_oracle(q, p, xi)
    assert abs(lhs - ref) <= 1e-9 * max(1.0, abs(ref))


@pytest.mark.parametrize("seed", range(20))
def test_L_intertwines_invariant_spans(seed):
    rng = np.random.default_rng(3000 + seed)
    s = int(rng.integers(1, 3))
    p = random_poly(rng, s, int(rng.integers(0, 4)), dense=False)
    assert shift_span(p).dimension == derivative_span(L_apply(p)).dimension


@pytest.mark.parametrize("seed", range(20))
def test_shift_span_contains_shifts(seed):
    rng = np.random.default_rng(4000 + seed)
    s = int(rng.integers(1, 3))
    p = random_poly(rng, s, int(rng.integers(1, 4)), scale=1.0)
    span = shift_span(p)
    assert span.basis[0] == p
    assert Poly.constant(s) in span.basis
    for _ in range(3):
        a = tuple(int(v) for v in rng.integers(-3, 4, s))
        assert span.contains(shift(p, a), 1e-8)


small = st.integers(-3, 3)


@settings(max_examples=60, deadline=None)
@given(st.lists(small, min_size=4, max_size=4), st.lists(small, min_size=4, max_size=4))
def test_difference_leibniz(fc, gc):
    f = Poly(2, dict(zip([(0, 0), (1, 0), (0, 1), (1, 1)], map(float, fc))))
    g = Poly(2, dict(zip([(0, 0), (2, 0), (0, 1), (1, 1)], map(float, gc))))
    for e in ((1, 0), (0, 1)):
        df, dg = difference(f, e), difference(g, e)
        assert close(difference(f * g, e), df * g + f * dg + df * dg)


@settings(max_examples=60, deadline=None)
@given(st.lists(small, min_size=3, max_size=3), st.integers(0, 3), st.integers(0, 3))
def test_shift_matches_evaluation(coeffs, a, b):
    p = Poly(2, dict(zip([(0, 0), (2, 1), (0, 3)], map(float, coeffs))))
    sp = shift(p, (a, b))
    for pt in ([0.5, -1.0], [2.0, 3.0]):
        assert evaluate(sp, pt) == pytest.approx(evaluate(p, [pt[0] + a, pt[1] + b]))
