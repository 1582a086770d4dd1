from __future__ import annotations

import json
import random

import pytest

from fanolines.field import PrimeField
from fanolines.models import (
    DelPezzoInstance,
    ambient_ring,
    base_ring,
    check_admissible_prime,
    data_ring,
    generate_instance,
    kind_degree,
    make_instance,
    named_instance,
    parse,
    quasi_smoothness_screen,
    serialize,
)
from fanolines.poly import WeightedPoly

KINDS = ("dp1", "dp2", "dp3", "dp4")


def test_kind_degree_table() -> None:
    assert [kind_degree(k) for k in KINDS] == [1, 2, 3, 4]


def test_ring_shapes() -> None:
    # data ring: where the instance coefficients live
    names, weights = data_ring("dp3", 4)
    assert len(names) == 6 and weights == (1,) * 6
    names, weights = data_ring("dp4", 4)
    assert len(names) == 7 and weights == (1,) * 7
    names, weights = data_ring("dp2", 4)
    assert len(names) == 5 and weights == (1,) * 5
    names, weights = data_ring("dp1", 4)
    assert len(names) == 4 and weights == (1,) * 4
    # base ring of the covers carries the fiber variable
    names, weights = base_ring("dp2", 4)
    assert weights == (1, 1, 1, 1, 1)
    names, weights = base_ring("dp1", 4)
    assert weights == (1, 1, 1, 1, 2)
    # ambient adds the cover variable on top
    names, weights = ambient_ring("dp2", 4)
    assert weights == (1, 1, 1, 1, 1, 2)
    names, weights = ambient_ring("dp1", 4)
    assert weights == (1, 1, 1, 1, 2, 3)
    assert ambient_ring("dp3", 4) == data_ring("dp3", 4)


def test_generate_instance_is_deterministic() -> None:
    for kind in KINDS:
        a = generate_instance(kind, 3, seed=5)
        b = generate_instance(kind, 3, seed=5)
        assert serialize(a) == serialize(b)
        c = generate_instance(kind, 3, seed=6)
        assert serialize(a) != serialize(c)
        assert a.meta["seed"] == "5"
        assert a.meta["screen_primes"] == [5, 7, 11]


def test_generated_instances_have_the_right_polys() -> None:
    keys = {"dp1": {"F4", "F6"}, "dp2": {"F"}, "dp3": {"F"}, "dp4": {"Q1", "Q2"}}
    degs = {"dp1": {"F4": 4, "F6": 6}, "dp2": {"F": 4}, "dp3": {"F": 3}, "dp4": {"Q1": 2, "Q2": 2}}
    for kind in KINDS:
        inst = generate_instance(kind, 3, seed=0)
        assert inst.field is None
        assert set(inst.polys) == keys[kind]
        assert inst.degree == kind_degree(kind)
        for key, f in inst.polys.items():
            assert f.is_homogeneous(degs[kind][key])


def test_reduce_mod_sets_field_and_reduces() -> None:
    inst = generate_instance("dp3", 3, seed=1)
    inst_p = inst.reduce_mod(7)
    assert inst_p.field == PrimeField(7)
    for f in inst_p.polys.values():
        assert all(0 <= c < 7 for c in f.terms.values())
    with pytest.raises(ValueError):
        inst_p.reduce_mod(7)


def test_admissible_primes() -> None:
    check_admissible_prime("dp3", 5)
    check_admissible_prime("dp1", 5)
    with pytest.raises(ValueError):
        check_admissible_prime("dp3", 2)
    with pytest.raises(ValueError):
        check_admissible_prime("dp1", 3)
    with pytest.raises(ValueError):
        check_admissible_prime("dp3", 9)
    check_admissible_prime("dp2", 3)


def test_cover_form_and_cone_polys_dp1() -> None:
    inst = generate_instance("dp1", 3, seed=2).reduce_mod(7)
    cover = inst.cover_form()
    # cover = y^3 + F4 y + F6 on the weight-(1,..,1,2) base ring
    assert cover.weights[-1] == 2
    assert cover.is_homogeneous(6)
    cone = inst.cone_polys()[0]
    assert cone.weights[-1] == 3
    assert cone.is_homogeneous(6)
    rng = random.Random("cover-dp1")
    names = inst.polys["F4"].names
    for _ in range(10):
        x = tuple(rng.randrange(7) for _ in names)
        y = rng.randrange(7)
        z = rng.randrange(7)
        f4 = inst.polys["F4"].evaluate(x)
        f6 = inst.polys["F6"].evaluate(x)
        assert cover.evaluate(x + (y,)) == (y**3 + f4 * y + f6) % 7
        assert cone.evaluate(x + (y, z)) == (z * z + y**3 + f4 * y + f6) % 7


def test_cover_form_and_branch_loci_dp2() -> None:
    inst = generate_instance("dp2", 3, seed=2).reduce_mod(7)
    assert inst.cover_form() == inst.polys["F"]
    assert inst.branch_loci() == {"cover_branch": inst.polys["F"]}
    cone = inst.cone_polys()[0]
    rng = random.Random("cover-dp2")
    for _ in range(10):
        x = tuple(rng.randrange(7) for _ in inst.polys["F"].names)
        y = rng.randrange(7)
        assert cone.evaluate(x + (y,)) == (y * y + inst.polys["F"].evaluate(x)) % 7


def test_branch_loci_dp1_discriminant() -> None:
    inst = generate_instance("dp1", 3, seed=3).reduce_mod(11)
    loci = inst.branch_loci()
    disc = loci["cubic_discriminant"]
    f4, f6 = inst.polys["F4"], inst.polys["F6"]
    rng = random.Random("disc-dp1")
    for _ in range(10):
        x = tuple(rng.randrange(11) for _ in f4.names)
        a, b = f4.evaluate(x), f6.evaluate(x)
        assert disc.evaluate(x) == (4 * a**3 + 27 * b * b) % 11


def test_quasi_smoothness_screen_passes_fermat() -> None:
    inst = named_instance("fermat-dp3", 3).reduce_mod(7)
    rep = quasi_smoothness_screen(inst)
    assert rep.passed and rep.witness is None and rep.prime == 7


def test_quasi_smoothness_screen_finds_singular_witness() -> None:
    # a cubic cone: no dependence on the last variable
    names, _ = data_ring("dp3", 3)
    terms = {}
    for i in range(len(names) - 1):
        e = [0] * len(names)
        e[i] = 3
        terms[tuple(e)] = 1
    inst = make_instance("dp3", 3, {"F": terms})
    rep = quasi_smoothness_screen(inst.reduce_mod(7))
    assert not rep.passed
    w = rep.witness
    assert w is not None
    f = inst.reduce_mod(7).polys["F"]
    assert f.evaluate(w) == 0
    assert all(f.partial(i).evaluate(w) == 0 for i in range(len(names)))
    assert any(c % 7 for c in w)


def test_serialize_parse_roundtrip_and_stability() -> None:
    for kind in KINDS:
        inst = generate_instance(kind, 3, seed=4)
        text = serialize(inst)
        assert text == serialize(inst)
        back = parse(text)
        assert back.kind == inst.kind and back.n == inst.n
        assert back.polys == inst.polys
        assert serialize(back) == text


def test_serialize_rejects_reduced_instances() -> None:
    inst = generate_instance("dp3", 3, seed=4).reduce_mod(7)
    with pytest.raises(ValueError):
        serialize(inst)


def test_parse_rejects_malformed_input() -> None:
    bad_cases = [
        "not json",
        "[1,2]",
        json.dumps({"kind": "dp3", "n": 3}),
        json.dumps({"kind": "dp9", "n": 3, "polys": {}}),
        json.dumps({"kind": "dp3", "n": 1, "polys": {}}),
        json.dumps({"kind": "dp3", "n": 3, "polys": []}),
        json.dumps({"kind": "dp3", "n": 3, "polys": {"F": [[[3, 0, 0, 0, 0], "x"]]}}),
        json.dumps({"kind": "dp3", "n": 3, "polys": {"F": [[[3, 0, 0, 0, 0], 1], [[3, 0, 0, 0, 0], 2]]}}),
    ]
    for text in bad_cases:
        with pytest.raises(ValueError):
            parse(text)


def test_parse_rejects_wrong_poly_shape() -> None:
    # term exponent vector must match the ring width
    text = json.dumps({"kind": "dp3", "n": 3, "polys": {"F": [[[3, 0], 1]]}})
    with pytest.raises(ValueError):
        parse(text)


def test_named_instances() -> None:
    fer = named_instance("fermat-dp3", 4)
    names, _ = data_ring("dp3", 4)
    assert set(fer.polys["F"].terms) == {
        tuple(3 if j == i else 0 for j in range(6)) for i in range(6)
    }
    assert all(c == 1 for c in fer.polys["F"].terms.values())
    cone = named_instance("cone-dp2", 3)
    f = cone.polys["F"]
    assert f.is_homogeneous(4)
    # e0 sits on the branch quartic and its tangent cut there is a cone
    from fanolines.fibers import cone_point_test_dp2

    inst_p = cone.reduce_mod(7)
    vertex = (1, 0, 0, 0)
    assert inst_p.polys["F"].evaluate(vertex) == 0
    assert cone_point_test_dp2(inst_p, vertex).is_cone
    for name in ("fermat-dp2", "fermat-dp1", "diagonal-dp4"):
        inst = named_instance(name, 3)
        assert inst.meta["name"] == name
    with pytest.raises(ValueError):
        named_instance("no-such-model", 3)


def test_named_fermat_dp2_is_quasi_smooth_and_cone_dp2_too() -> None:
    for name in ("fermat-dp2", "cone-dp2"):
        rep = quasi_smoothness_screen(named_instance(name, 3).reduce_mod(7))
        assert rep.passed, name


def test_make_instance_validates_degrees() -> None:
    names, _ = data_ring("dp3", 3)
    bad = {tuple([2] + [0] * (len(names) - 1)): 1}  # degree 2, not 3
    with pytest.raises(ValueError):
        make_instance("dp3", 3, {"F": bad})
    with pytest.raises(ValueError):
        make_instance("dp3", 3, {"Q1": {}})
