from __future__ import annotations

import random

import pytest

from fanolines.census import count_fiber_scheme, enumerate_points
from fanolines.field import PrimeField
from fanolines.fibers import (
    FiberScheme,
    classified_line_count,
    compose_on_base_line,
    cone_point_test_dp2,
    direction_to_line_dp2,
    eliminate_even_sextic,
    fiber_scheme,
    random_model_point,
    taylor_layers,
)
from fanolines.models import generate_instance, named_instance
from fanolines.oracle import oracle_lines_direct, oracle_lines_through
from fanolines.poly import WeightedPoly, monomial_exponents


def random_homogeneous(rng, names, field, degree):
    terms = {}
    for e in monomial_exponents((1,) * len(names), degree):
        c = rng.randrange(field.p)
        if c:
            terms[e] = c
    return WeightedPoly(names, (1,) * len(names), field, terms)


def test_taylor_layers_expansion_identity() -> None:
    rng = random.Random("fibers-taylor")
    names = ("x0", "x1", "x2", "x3")
    for _ in range(25):
        p = rng.choice([5, 7, 11])
        F = PrimeField(p)
        f = random_homogeneous(rng, names, F, rng.randrange(1, 5))
        q = tuple(rng.randrange(p) for _ in names)
        layers = taylor_layers(f, q)
        assert len(layers) == f.weighted_degree() + 1
        assert layers[0].evaluate((0,) * 4) == f.evaluate(q)
        for k, g in enumerate(layers):
            assert g.is_zero() or g.is_homogeneous(k)
        for _ in range(6):
            v = tuple(rng.randrange(p) for _ in names)
            t = rng.randrange(p)
            moved = tuple((a + t * b) % p for a, b in zip(q, v))
            total = sum(
                pow(t, k, p) * g.evaluate(v) for k, g in enumerate(layers)
            ) % p
            assert f.evaluate(moved) == total


def test_taylor_layers_reject_weighted_rings() -> None:
    F = PrimeField(7)
    f = WeightedPoly(("x", "y"), (1, 2), F, {(2, 1): 1})
    with pytest.raises(ValueError):
        taylor_layers(f, (1, 1))


def scheme_degree_profile(scheme: FiberScheme) -> tuple:
    return tuple(sorted(f.weighted_degree() for f in scheme.equations))


def test_fiber_scheme_shapes_per_kind() -> None:
    expected = {
        "dp3": (1, 2, 3),
        "dp4": (1, 1, 2, 2),
        "dp2": (3, 4),
        "dp1": (4, 5, 6),
    }
    for kind, n, p in [("dp3", 3, 7), ("dp4", 3, 7), ("dp2", 3, 7), ("dp1", 3, 7)]:
        inst_p = generate_instance(kind, n, seed=11).reduce_mod(p)
        q = random_model_point(inst_p, seed=0)
        scheme = fiber_scheme(inst_p, q)
        assert scheme.kind == kind
        assert scheme.prime == p
        assert scheme_degree_profile(scheme) == expected[kind], kind
        for f in scheme.equations:
            assert f.is_homogeneous()
        desc = scheme.describe()
        assert desc["kind"] == kind and desc["p"] == p
        assert len(desc["equations"]) == len(scheme.equations)
    # the on-branch dp2 scheme trades the pair for a tangent line and a sextic
    inst_p = generate_instance("dp2", 3, seed=11).reduce_mod(7)
    q = random_model_point(inst_p, seed=0, on_branch=True)
    scheme = fiber_scheme(inst_p, q)
    assert scheme.validity == "on_branch"
    assert scheme_degree_profile(scheme) == (1, 6)


def test_dp3_classification_matches_oracle() -> None:
    rng = random.Random("fibers-dp3")
    for n, primes in [(2, (5, 7, 11)), (3, (5, 7))]:
        inst = generate_instance("dp3", n, seed=7)
        for p in primes:
            inst_p = inst.reduce_mod(p)
            for k in range(6):
                q = random_model_point(inst_p, seed=rng.randrange(10**6))
                scheme = fiber_scheme(inst_p, q)
                cls = classified_line_count(inst_p, scheme)
                lines, tally = oracle_lines_through(inst_p, q)
                assert tally is None
                assert cls.predicted_on_x == len(lines), (n, p, q)


def test_dp4_classification_matches_oracle() -> None:
    rng = random.Random("fibers-dp4")
    for n, primes in [(2, (5, 7)), (3, (5,))]:
        inst = generate_instance("dp4", n, seed=7)
        for p in primes:
            inst_p = inst.reduce_mod(p)
            for k in range(5):
                q = random_model_point(inst_p, seed=rng.randrange(10**6))
                scheme = fiber_scheme(inst_p, q)
                cls = classified_line_count(inst_p, scheme)
                lines, _ = oracle_lines_through(inst_p, q)
                assert cls.predicted_on_x == len(lines), (n, p, q)


def test_dp2_off_branch_classification_matches_oracle() -> None:
    # the cover oracle interpolates quartics, so it wants p >= 7
    rng = random.Random("fibers-dp2-off")
    for n, primes in [(2, (7, 11)), (3, (7,))]:
        inst = generate_instance("dp2", n, seed=7)
        for p in primes:
            inst_p = inst.reduce_mod(p)
            for k in range(5):
                q = random_model_point(inst_p, seed=rng.randrange(10**6))
                assert inst_p.polys["F"].evaluate(q) != 0
                scheme = fiber_scheme(inst_p, q)
                assert scheme.validity == "general"
                cls = classified_line_count(inst_p, scheme)
                lines, tally = oracle_lines_through(inst_p, q)
                assert tally is not None
                assert cls.predicted_on_x == len(lines), (n, p, q)
                assert tally.lines_through_point == len(lines)


def test_dp2_on_branch_classification_matches_oracle() -> None:
    rng = random.Random("fibers-dp2-on")
    for n, primes in [(2, (7, 11)), (3, (7,))]:
        inst = generate_instance("dp2", n, seed=7)
        for p in primes:
            inst_p = inst.reduce_mod(p)
            for k in range(4):
                q = random_model_point(
                    inst_p, seed=rng.randrange(10**6), on_branch=True
                )
                assert inst_p.polys["F"].evaluate(q) == 0
                scheme = fiber_scheme(inst_p, q)
                assert scheme.validity == "on_branch"
                cls = classified_line_count(inst_p, scheme)
                lines, tally = oracle_lines_through(inst_p, q, lift=0)
                assert cls.predicted_on_x == len(lines), (n, p, q)
                assert tally.branch_lines == cls.breakdown["branch_lines"]
                assert tally.lifted_twice == cls.breakdown["lifted_twice"]


def test_dp1_classification_matches_oracle() -> None:
    # the cover oracle interpolates sextics, so it wants p >= 11
    rng = random.Random("fibers-dp1")
    inst = generate_instance("dp1", 2, seed=7)
    for p in (11, 13):
        inst_p = inst.reduce_mod(p)
        for k in range(4):
            q = random_model_point(inst_p, seed=rng.randrange(10**6))
            scheme = fiber_scheme(inst_p, q)
            cls = classified_line_count(inst_p, scheme)
            lines, tally = oracle_lines_through(inst_p, q)
            assert cls.predicted_on_x == len(lines), (p, q)


def test_dp2_off_branch_lift_counts_are_lift_free() -> None:
    inst_p = generate_instance("dp2", 2, seed=13).reduce_mod(7)
    q = random_model_point(inst_p, seed=1)
    val = inst_p.polys["F"].evaluate(q)
    r = inst_p.field.sqrt((-val) % 7)
    lines_a, _ = oracle_lines_through(inst_p, q, lift=r)
    lines_b, _ = oracle_lines_through(inst_p, q, lift=(7 - r) % 7)
    assert len(lines_a) == len(lines_b)


def test_cone_point_detector_on_fixture() -> None:
    inst_p = named_instance("cone-dp2", 3).reduce_mod(7)
    res = cone_point_test_dp2(inst_p, (1, 0, 0, 0))
    assert res.is_cone
    assert res.residual_quadratic_zero and res.residual_cubic_zero
    # a generic branch point of the Fermat quartic is not a cone point
    fer = named_instance("fermat-dp2", 3).reduce_mod(7)
    f = fer.polys["F"]
    q = next(
        pt for pt in enumerate_points(f.weights, 7) if f.evaluate(pt) == 0
        and sum(1 for c in pt if c) > 1
    )
    assert not cone_point_test_dp2(fer, q).is_cone


def test_compose_on_base_line_restricts_the_branch_form() -> None:
    rng = random.Random("fibers-compose")
    inst_p = generate_instance("dp2", 3, seed=5).reduce_mod(7)
    f = inst_p.polys["F"]
    q = random_model_point(inst_p, seed=2)
    for _ in range(8):
        v = tuple(rng.randrange(7) for _ in range(4))
        if all(c == 0 for c in v):
            continue
        g = compose_on_base_line(inst_p, q, v)
        assert g.degree == 4
        for s in range(7):
            for t in (0, 1, 3):
                pt = tuple((s * a + t * b) % 7 for a, b in zip(q, v))
                assert g.evaluate(s, t) == f.evaluate(pt)


def test_direction_to_line_dp2_returns_point_and_direction() -> None:
    inst_p = generate_instance("dp2", 2, seed=5).reduce_mod(7)
    q = random_model_point(inst_p, seed=3)
    scheme = fiber_scheme(inst_p, q)
    directions = [
        a
        for a in enumerate_points(scheme.weights, 7)
        if all(f.evaluate(a) == 0 for f in scheme.equations)
    ]
    for a in directions:
        base, v = direction_to_line_dp2(scheme, a)
        assert base == scheme.base_point
        g = compose_on_base_line(inst_p, scheme.base_point, v)
        # scheme directions compose to even-multiplicity quartics
        from fanolines.binform import square_part

        if not g.is_zero():
            _, _, exact = square_part(g)
            assert exact


def test_eliminate_even_sextic_matches_square_detector() -> None:
    # the three residual forms vanish exactly when the unit-lead sextic is a
    # scalar times a perfect square; square_part decides that independently
    from fanolines.binform import BinaryForm, square_part

    rng = random.Random("fibers-eliminate")
    names, weights = ("u",), (1,)
    for _ in range(200):
        p = rng.choice([11, 13])
        F = PrimeField(p)
        if rng.random() < 0.5:
            g0 = rng.randrange(1, p)
            h = [1] + [rng.randrange(p) for _ in range(3)]
            coeffs = [0] * 7
            for i, a in enumerate(h):
                for j, b in enumerate(h):
                    coeffs[i + j] = (coeffs[i + j] + g0 * a * b) % p
        else:
            coeffs = [rng.randrange(1, p)] + [rng.randrange(p) for _ in range(6)]
        layers = [WeightedPoly.constant(names, weights, v, F) for v in coeffs]
        out = eliminate_even_sextic(layers, F)
        assert [f.weighted_degree() is None or f.weighted_degree() == 0 for f in out]
        residual_zero = all(f.is_zero() for f in out)
        _, _, exact = square_part(BinaryForm(F, 6, coeffs))
        assert residual_zero == exact, coeffs


def test_eliminate_even_sextic_needs_unit_leading_layer() -> None:
    F = PrimeField(7)
    names, weights = ("u",), (1,)
    layers = [WeightedPoly.zero(names, weights, F) for _ in range(7)]
    with pytest.raises(ValueError):
        eliminate_even_sextic(layers, F)


def test_random_model_point_contracts() -> None:
    for kind in ("dp1", "dp2", "dp3", "dp4"):
        inst_p = generate_instance(kind, 3, seed=1).reduce_mod(11)
        a = random_model_point(inst_p, seed=42)
        b = random_model_point(inst_p, seed=42)
        assert a == b
        field = inst_p.field
        if kind in ("dp3", "dp4"):
            assert all(f.evaluate(a) == 0 for f in inst_p.polys.values())
        elif kind == "dp2":
            val = inst_p.polys["F"].evaluate(a)
            assert val != 0 and field.chi((-val) % 11) == 1
            on = random_model_point(inst_p, seed=42, on_branch=True)
            assert inst_p.polys["F"].evaluate(on) == 0
        else:
            val = inst_p.cover_form().evaluate(a)
            assert val != 0 and field.chi((-val) % 11) == 1
            assert inst_p.branch_loci()["cubic_discriminant"].evaluate(a[:3]) != 0
            assert any(c for c in a[:3])
        seeds = {random_model_point(inst_p, seed=s) for s in range(8)}
        assert len(seeds) > 1
