from __future__ import annotations

import random
from itertools import product

import pytest

from fanolines.field import PrimeField
from fanolines.poly import WeightedPoly, jacobian, monomial_exponents

NAMES3 = ("x0", "x1", "x2")
W3 = (1, 1, 1)
NAMESW = ("x0", "x1", "y")
WW = (1, 1, 2)


def random_poly(rng: random.Random, names, weights, field, degree) -> WeightedPoly:
    terms = {}
    for e in monomial_exponents(weights, degree):
        c = rng.randrange(field.p)
        if c:
            terms[e] = c
    return WeightedPoly(names, weights, field, terms)


def test_constructors_and_zero() -> None:
    F = PrimeField(7)
    z = WeightedPoly.zero(NAMES3, W3, F)
    assert z.is_zero()
    c = WeightedPoly.constant(NAMES3, W3, 10, F)
    assert c.evaluate((1, 2, 3)) == 3
    x1 = WeightedPoly.variable(NAMES3, W3, 1, F)
    assert x1.evaluate((4, 5, 6)) == 5
    assert x1.weighted_degree() == 1


def test_ring_axioms_on_random_polys() -> None:
    rng = random.Random("poly-ring")
    for _ in range(40):
        p = rng.choice([5, 7, 11])
        F = PrimeField(p)
        a = random_poly(rng, NAMES3, W3, F, rng.randrange(1, 4))
        b = random_poly(rng, NAMES3, W3, F, rng.randrange(1, 4))
        c = random_poly(rng, NAMES3, W3, F, rng.randrange(1, 4))
        assert a + b == b + a
        assert (a + b) + c == a + (b + c)
        assert a * b == b * a
        assert a * (b + c) == a * b + a * c
        assert a - a == WeightedPoly.zero(NAMES3, W3, F)
        pt = tuple(rng.randrange(p) for _ in NAMES3)
        assert (a * b).evaluate(pt) == (a.evaluate(pt) * b.evaluate(pt)) % p


def test_pow_matches_repeated_product() -> None:
    rng = random.Random("poly-pow")
    F = PrimeField(5)
    f = random_poly(rng, NAMES3, W3, F, 2)
    assert f**0 == WeightedPoly.constant(NAMES3, W3, 1, F)
    assert f**1 == f
    assert f**3 == f * f * f


def test_weighted_degree_and_homogeneity() -> None:
    F = PrimeField(7)
    f = WeightedPoly(NAMESW, WW, F, {(2, 0, 1): 1, (0, 4, 0): 3})
    assert f.weighted_degree() == 4
    assert f.is_homogeneous()
    assert f.is_homogeneous(4)
    assert not f.is_homogeneous(3)
    g = WeightedPoly(NAMESW, WW, F, {(1, 0, 0): 1, (0, 0, 1): 1})
    assert not g.is_homogeneous()


def test_evaluate_respects_weighted_scaling() -> None:
    rng = random.Random("poly-weighted")
    for _ in range(60):
        p = rng.choice([5, 7, 11])
        F = PrimeField(p)
        d = rng.randrange(2, 7)
        f = random_poly(rng, NAMESW, WW, F, d)
        pt = tuple(rng.randrange(p) for _ in NAMESW)
        lam = rng.randrange(1, p)
        scaled = tuple((pow(lam, w, p) * x) % p for w, x in zip(WW, pt))
        assert f.evaluate(scaled) == (pow(lam, d, p) * f.evaluate(pt)) % p


def test_partial_derivative_linearity_check() -> None:
    F = PrimeField(11)
    # f = x0^2 x1 + 3 y, weights (1,1,2)
    f = WeightedPoly(NAMESW, WW, F, {(2, 1, 0): 1, (0, 0, 1): 3})
    assert f.partial(0) == WeightedPoly(NAMESW, WW, F, {(1, 1, 0): 2})
    assert f.partial(1) == WeightedPoly(NAMESW, WW, F, {(2, 0, 0): 1})
    assert f.partial(2) == WeightedPoly.constant(NAMESW, WW, 3, F)


def test_partial_product_rule_random() -> None:
    rng = random.Random("poly-leibniz")
    F = PrimeField(7)
    for _ in range(30):
        a = random_poly(rng, NAMES3, W3, F, rng.randrange(1, 3))
        b = random_poly(rng, NAMES3, W3, F, rng.randrange(1, 3))
        for i in range(3):
            assert (a * b).partial(i) == a.partial(i) * b + a * b.partial(i)


def test_substitute_agrees_with_pointwise_composition() -> None:
    rng = random.Random("poly-subst")
    for _ in range(30):
        p = rng.choice([5, 7])
        F = PrimeField(p)
        f = random_poly(rng, NAMES3, W3, F, rng.randrange(1, 4))
        images = [random_poly(rng, NAMES3, W3, F, 1) for _ in range(3)]
        g = f.substitute(images)
        for _ in range(5):
            pt = tuple(rng.randrange(p) for _ in NAMES3)
            mapped = tuple(im.evaluate(pt) for im in images)
            assert g.evaluate(pt) == f.evaluate(mapped)


def test_substitute_variable_single_slot() -> None:
    F = PrimeField(7)
    f = WeightedPoly(NAMES3, W3, F, {(1, 1, 0): 1, (0, 0, 2): 1})
    x2 = WeightedPoly.variable(NAMES3, W3, 2, F)
    g = f.substitute_variable(1, x2)
    assert g == WeightedPoly(NAMES3, W3, F, {(1, 0, 1): 1, (0, 0, 2): 1})


def test_apply_linear_change_matches_evaluation() -> None:
    rng = random.Random("poly-linchg")
    for _ in range(30):
        p = rng.choice([5, 7, 11])
        F = PrimeField(p)
        f = random_poly(rng, NAMES3, W3, F, rng.randrange(1, 4))
        mat = [[rng.randrange(p) for _ in range(3)] for _ in range(3)]
        g = f.apply_linear_change(F, mat)
        for _ in range(5):
            pt = [rng.randrange(p) for _ in range(3)]
            image = tuple(sum(mat[i][j] * pt[j] for j in range(3)) % p for i in range(3))
            assert g.evaluate(tuple(pt)) == f.evaluate(image)


def test_graded_slice_decomposes_by_variable_degree() -> None:
    rng = random.Random("poly-slice")
    F = PrimeField(7)
    f = random_poly(rng, NAMESW, WW, F, 4)
    top = f.degree_in(2)
    # slices live in the ring without y; lift back and re-assemble
    rebuilt = WeightedPoly.zero(NAMESW, WW, F)
    yvar = WeightedPoly.variable(NAMESW, WW, 2, F)
    for e in range(top + 1):
        piece = f.graded_slice(2, e).lift_to(NAMESW, WW, F)
        rebuilt = rebuilt + piece * yvar**e
    assert rebuilt == f


def test_reduce_mod_and_integer_polys() -> None:
    f = WeightedPoly(NAMES3, W3, None, {(1, 0, 0): 9, (0, 1, 0): -2})
    F = PrimeField(7)
    g = f.reduce_mod(F)
    assert g.field == F
    assert g == WeightedPoly(NAMES3, W3, F, {(1, 0, 0): 2, (0, 1, 0): 5})


def test_lift_and_restrict_roundtrip() -> None:
    F = PrimeField(7)
    f = WeightedPoly(("x0", "x1"), (1, 1), F, {(1, 1): 3, (2, 0): 1})
    big = f.lift_to(NAMESW, WW, F)
    assert big.restrict_to(("x0", "x1")) == f
    # lifted poly ignores the new variable
    assert big.evaluate((2, 3, 5)) == f.evaluate((2, 3))


def test_mixed_ring_operations_raise() -> None:
    F7, F5 = PrimeField(7), PrimeField(5)
    a = WeightedPoly.variable(NAMES3, W3, 0, F7)
    b = WeightedPoly.variable(NAMES3, W3, 0, F5)
    with pytest.raises(ValueError):
        _ = a + b
    c = WeightedPoly.variable(("u", "v"), (1, 1), 0, F7)
    with pytest.raises(ValueError):
        _ = a * c


def test_monomial_exponents_counts() -> None:
    # plain degree-d monomials in 3 variables: binomial(d+2, 2)
    for d in range(1, 6):
        assert len(monomial_exponents((1, 1, 1), d)) == (d + 2) * (d + 1) // 2
    # weighted count agrees with a direct walk
    for d in range(1, 9):
        direct = [
            (a, b, c)
            for a, b, c in product(range(d + 1), repeat=3)
            if a + b + 2 * c == d
        ]
        got = monomial_exponents((1, 1, 2), d)
        assert sorted(got) == sorted(direct)
        for e in got:
            assert sum(x * w for x, w in zip(e, (1, 1, 2))) == d


def test_to_arrays_and_sorted_terms_are_stable() -> None:
    rng = random.Random("poly-arrays")
    F = PrimeField(11)
    f = random_poly(rng, NAMES3, W3, F, 3)
    assert f.sorted_terms() == f.sorted_terms()
    exps, coeffs = f.to_arrays()
    assert len(exps) == len(coeffs) == len(f.terms)
    for e, c in zip(exps, coeffs):
        assert f.terms[tuple(e)] == c


def test_to_text_mentions_each_variable_with_nonzero_exponent() -> None:
    F = PrimeField(7)
    f = WeightedPoly(NAMESW, WW, F, {(2, 0, 1): 3})
    text = f.to_text()
    assert "x0" in text and "y" in text and "x1" not in text


def test_jacobian_shape_and_entries() -> None:
    F = PrimeField(7)
    f = WeightedPoly(NAMES3, W3, F, {(2, 0, 0): 1})
    g = WeightedPoly(NAMES3, W3, F, {(0, 1, 1): 1})
    jac = jacobian([f, g])
    assert len(jac) == 2 and len(jac[0]) == 3
    assert jac[0][0] == f.partial(0)
    assert jac[1][2] == g.partial(2)
