from __future__ import annotations

import random

import pytest

from fanolines.census import canonical_rep, enumerate_points
from fanolines.fibers import random_model_point
from fanolines.models import generate_instance, named_instance
from fanolines.oracle import (
    hom_count_additive,
    oracle_hom_count,
    oracle_lines_direct,
    oracle_lines_through,
)


def line_points_from_record(inst_p, rec):
    # direct records key by the sorted indices of the p + 1 rational points
    return rec.key


def test_direct_line_records_are_genuine_lines() -> None:
    rng = random.Random("oracle-direct")
    for kind in ("dp3", "dp4"):
        inst_p = generate_instance(kind, 2, seed=21).reduce_mod(7)
        polys = list(inst_p.polys.values())
        weights = polys[0].weights
        field = inst_p.field
        for k in range(4):
            q = random_model_point(inst_p, seed=rng.randrange(10**6))
            lines = oracle_lines_direct(inst_p, q)
            assert len({rec.key for rec in lines}) == len(lines)
            from fanolines.census import index_to_point

            for rec in lines:
                pts = [index_to_point(i, weights, 7) for i in rec.key]
                # a projective line carries exactly p + 1 rational points
                assert len(pts) == 8
                assert canonical_rep(q, weights, field) in pts
                for pt in pts:
                    assert all(f.evaluate(pt) == 0 for f in polys)


def test_direct_oracle_is_deterministic() -> None:
    inst_p = generate_instance("dp3", 2, seed=22).reduce_mod(7)
    q = random_model_point(inst_p, seed=5)
    a = oracle_lines_direct(inst_p, q)
    b = oracle_lines_direct(inst_p, q)
    assert {r.key for r in a} == {r.key for r in b}


def test_cover_tally_internal_identities_dp2() -> None:
    rng = random.Random("oracle-dp2")
    inst_p = generate_instance("dp2", 2, seed=21).reduce_mod(11)
    for k in range(4):
        q = random_model_point(inst_p, seed=rng.randrange(10**6))
        lines, tally = oracle_lines_through(inst_p, q)
        assert (
            tally.lines_through_point
            == tally.branch_lines + tally.lifted_once + 2 * tally.lifted_twice
        )
        assert len(lines) == tally.lines_through_point
        assert tally.even_mult_lines >= (
            tally.lifted_once + tally.lifted_twice + tally.nonsquare_excluded
        )
    on = random_model_point(inst_p, seed=3, on_branch=True)
    lines, tally = oracle_lines_through(inst_p, on, lift=0)
    assert tally.lines_through_point == len(lines)
    # through a branch point both lifts of a bitangent pass at once
    assert tally.lifted_once == 0


def test_cover_tally_internal_identities_dp1() -> None:
    rng = random.Random("oracle-dp1")
    inst_p = generate_instance("dp1", 2, seed=21).reduce_mod(11)
    for k in range(3):
        q = random_model_point(inst_p, seed=rng.randrange(10**6))
        lines, tally = oracle_lines_through(inst_p, q)
        assert (
            tally.lines_through_point
            == tally.branch_lines + tally.lifted_once + 2 * tally.lifted_twice
        )
        assert len(lines) == tally.lines_through_point


def test_oracle_lift_defaults_to_smaller_root() -> None:
    inst_p = generate_instance("dp2", 2, seed=23).reduce_mod(11)
    q = random_model_point(inst_p, seed=4)
    field = inst_p.field
    val = inst_p.polys["F"].evaluate(q)
    r = field.sqrt((-val) % 11)
    auto_lines, auto_tally = oracle_lines_through(inst_p, q)
    expl_lines, expl_tally = oracle_lines_through(inst_p, q, lift=r)
    assert {x.key for x in auto_lines} == {x.key for x in expl_lines}
    assert auto_tally.as_dict() == expl_tally.as_dict()


def test_oracle_rejects_points_without_lifts() -> None:
    inst_p = generate_instance("dp2", 2, seed=23).reduce_mod(11)
    f = inst_p.polys["F"]
    field = inst_p.field
    bad = next(
        pt
        for pt in enumerate_points(f.weights, 11)
        if f.evaluate(pt) != 0 and field.chi((-f.evaluate(pt)) % 11) == -1
    )
    with pytest.raises(ValueError):
        oracle_lines_through(inst_p, bad)


def test_cover_oracles_need_interpolation_room() -> None:
    dp2_small = generate_instance("dp2", 2, seed=23).reduce_mod(5)
    q = random_model_point(dp2_small, seed=0)
    with pytest.raises(ValueError):
        oracle_lines_through(dp2_small, q)
    dp1_small = generate_instance("dp1", 2, seed=23).reduce_mod(7)
    q1 = random_model_point(dp1_small, seed=0)
    with pytest.raises(ValueError):
        oracle_lines_through(dp1_small, q1)


def test_hom_count_methods_and_metadata() -> None:
    expected_method = {"dp1": "cover6", "dp2": "cover4", "dp3": "pairs", "dp4": "pairs"}
    for kind in ("dp1", "dp2", "dp3", "dp4"):
        inst_p = generate_instance(kind, 2, seed=24).reduce_mod(3 if kind != "dp1" else 5)
        hc = oracle_hom_count(inst_p, 1, max_ops=1e12)
        assert hc.method == expected_method[kind]
        assert hc.d == 1
        assert hc.dim_target == (2 - 1) * 1 + 2 + 1
        assert hc.raw >= 0
        if kind in ("dp3", "dp4"):
            assert hc.degenerate is not None
            assert hc.raw >= hc.degenerate


def test_hom_count_guardrail() -> None:
    inst_p = generate_instance("dp3", 2, seed=24).reduce_mod(5)
    with pytest.raises(ValueError):
        oracle_hom_count(inst_p, 1, max_ops=10.0)
    with pytest.raises(ValueError):
        oracle_hom_count(inst_p, 3)
    with pytest.raises(ValueError):
        oracle_hom_count(generate_instance("dp4", 2, seed=24).reduce_mod(3), 2)


def test_hom_count_agrees_with_additive_oracle_on_diagonal_models() -> None:
    # two formulations of the same tuple count with disjoint implementations
    cases = [
        ("fermat-dp3", 2, (3, 5)),
        ("diagonal-dp4", 2, (3,)),
        ("fermat-dp2", 2, (3, 5)),
    ]
    for name, n, primes in cases:
        inst = named_instance(name, n)
        for p in primes:
            inst_p = inst.reduce_mod(p)
            hc = oracle_hom_count(inst_p, 1, max_ops=1e12)
            add = hom_count_additive(inst_p, 1)
            assert hc.raw == add, (name, p)


def test_hom_count_additive_rejects_non_diagonal() -> None:
    inst_p = generate_instance("dp3", 2, seed=25).reduce_mod(5)
    with pytest.raises(ValueError):
        hom_count_additive(inst_p, 1)


def test_hom_count_d2_trilinear_runs_small() -> None:
    inst_p = named_instance("fermat-dp3", 2).reduce_mod(3)
    hc = oracle_hom_count(inst_p, 2, max_ops=1e13)
    assert hc.method == "trilinear"
    assert hc.dim_target == (2 - 1) * 2 + 2 + 1
    add = hom_count_additive(inst_p, 2)
    assert hc.raw == add
