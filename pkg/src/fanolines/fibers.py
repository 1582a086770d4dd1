"""Closed-form equations for the space of lines through a rational point.

For the hypersurface and complete-intersection kinds the equations are the
Taylor layers of the defining forms along a line q + t v. For the cover
kinds they are even-multiplicity conditions on the composed binary form,
written after normalizing the base point to a standard position; the
normalization transcript is kept so directions map back to ambient lines.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field as dc_field

from .binform import BinaryForm, compose_on_line, square_part
from .field import PrimeField, matrix_inverse, matrix_mul, matrix_vec
from .models import DelPezzoInstance, base_ring
from .poly import WeightedPoly


@dataclass
class Transcript:
    """Composite linear change on the weight-1 block: original = A @ new."""

    field: PrimeField
    matrix: list
    inverse: list
    moves: list = dc_field(default_factory=list)

    def to_original_direction(self, v):
        return tuple(matrix_vec(self.field, self.matrix, list(v)))

    def to_normalized_point(self, x):
        return tuple(matrix_vec(self.field, self.inverse, list(x)))


@dataclass
class FiberScheme:
    kind: str
    names: tuple
    weights: tuple
    field: PrimeField
    equations: list
    base_point: tuple
    prime: int
    validity: str
    transversal_var: int | None = None
    line_pivots: list | None = None
    notes: dict = dc_field(default_factory=dict)
    transcript: Transcript | None = None

    def describe(self) -> dict:
        return {
            "kind": self.kind,
            "validity": self.validity,
            "variables": list(self.names),
            "weights": list(self.weights),
            "equations": [f.to_text() for f in self.equations],
            "base_point": list(self.base_point),
            "p": self.prime,
            "notes": {
                k: (int(v) if isinstance(v, int) else v) for k, v in self.notes.items()
            },
        }


def _rename(f: WeightedPoly, names) -> WeightedPoly:
    if len(names) != len(f.names):
        raise ValueError("rename needs the same number of variables")
    return WeightedPoly(tuple(names), f.weights, f.field, dict(f.terms))


def _completion_matrix(field: PrimeField, column, pivot: int):
    """Invertible matrix with the given first column; pivot entry nonzero."""
    m = len(column)
    cols = [list(column)]
    for i in range(m):
        if i == pivot:
            continue
        e = [0] * m
        e[i] = 1
        cols.append(e)
    return [[cols[k][i] for k in range(m)] for i in range(m)]


def taylor_layers(f: WeightedPoly, point, names=None):
    """Homogeneous layers G_k of f(q + v) in the direction variables v.

    f must live on an unweighted ring; returns WeightedPolys over a fresh
    v-ring, G_k of degree k, k = 0..deg(f). G_0 is the constant f(q).
    """
    if any(w != 1 for w in f.weights):
        raise ValueError("layers need an unweighted ring")
    nv = len(f.names)
    if names is None:
        names = tuple(f"v{i}" for i in range(nv))
    p = f.field.p
    deg = f.weighted_degree() if not f.is_zero() else 0
    layers = [dict() for _ in range(deg + 1)]
    q = [x % p for x in point]
    for alpha, c in f.sorted_terms():
        combos = [((), 1, 0)]
        for i in range(nv):
            nxt = []
            for exp_part, coeff, k in combos:
                for j in range(alpha[i] + 1):
                    cc = coeff * math.comb(alpha[i], j) * pow(q[i], alpha[i] - j, p)
                    if cc % p == 0 and (alpha[i] - j) > 0 and q[i] == 0:
                        continue
                    nxt.append((exp_part + (j,), cc % p, k + j))
            combos = nxt
        for exp_part, coeff, k in combos:
            cc = (coeff * c) % p
            if cc:
                layers[k][exp_part] = (layers[k].get(exp_part, 0) + cc) % p
    out = []
    for k in range(deg + 1):
        terms = {e: v for e, v in layers[k].items() if v}
        out.append(WeightedPoly(names, (1,) * nv, f.field, terms))
    return out


def _normalize_dp2(inst: DelPezzoInstance, q):
    """Move q to e0; returns (moved F, transcript)."""
    field = inst.field
    fpoly = inst.polys["F"]
    nv = len(fpoly.names)
    pivot = next(i for i in range(nv) if q[i] % field.p != 0)
    a1 = _completion_matrix(field, [x % field.p for x in q], pivot)
    a1_inv = matrix_inverse(field, a1)
    f1 = fpoly.apply_linear_change(field, a1)
    tr = Transcript(
        field=field,
        matrix=a1,
        inverse=a1_inv,
        moves=[{"move": "point_to_e0", "pivot": pivot}],
    )
    return f1, tr


def _compose_transcript(tr: Transcript, a2, move: dict) -> Transcript:
    field = tr.field
    new_mat = matrix_mul(field, tr.matrix, a2)
    return Transcript(
        field=field,
        matrix=new_mat,
        inverse=matrix_inverse(field, new_mat),
        moves=tr.moves + [move],
    )


def fiber_dp2_off_branch(inst: DelPezzoInstance, q) -> FiberScheme:
    """Line conditions through a base point not on the branch quartic."""
    if inst.kind != "dp2":
        raise ValueError("needs a dp2 instance")
    field = inst.field
    p = field.p
    n = inst.n
    c = inst.polys["F"].evaluate(q)
    if c == 0:
        raise ValueError("base point lies on the branch quartic; use the on-branch form")
    f1, tr = _normalize_dp2(inst, q)
    lin_slice = f1.graded_slice(0, 3)
    if not lin_slice.is_zero():
        # shear x0 by the tangent form to kill the cubic layer
        u = lin_slice.lift_to(f1.names, f1.weights, field)
        x0 = WeightedPoly.variable(f1.names, f1.weights, 0, field)
        inv4c = field.inv((4 * c) % p)
        image = x0 - u * inv4c
        f1 = f1.substitute_variable(0, image)
        shear = [[0] * (n + 1) for _ in range(n + 1)]
        for i in range(n + 1):
            shear[i][i] = 1
        coeffs = [0] * (n + 1)
        for e, cc in lin_slice.sorted_terms():
            j = next(k for k, ee in enumerate(e) if ee)
            coeffs[j + 1] = cc
        for j in range(1, n + 1):
            shear[0][j] = (-coeffs[j] * inv4c) % p
        tr = _compose_transcript(tr, shear, {"move": "tangent_shear"})
    assert f1.graded_slice(0, 3).is_zero()
    top = f1.graded_slice(0, 4)
    assert top.weighted_degree() is None or top.weighted_degree() == 0
    names = tuple(f"a{i}" for i in range(1, n + 1))
    f2 = _rename(f1.graded_slice(0, 2), names)
    f3 = _rename(f1.graded_slice(0, 1), names)
    f4 = _rename(f1.graded_slice(0, 0), names)
    eq2 = f2 * f2 - f4 * (4 * c)
    return FiberScheme(
        kind="dp2",
        names=names,
        weights=(1,) * n,
        field=field,
        equations=[f3, eq2],
        base_point=tuple(x % p for x in q),
        prime=p,
        validity="general",
        notes={"leading_scalar": c},
        transcript=tr,
    )


def _on_branch_normal_form(inst: DelPezzoInstance, q):
    """Normalize a branch point: q at e0, tangent layer equal to the last
    coordinate. Returns (moved F, transcript)."""
    field = inst.field
    p = field.p
    n = inst.n
    f1, tr = _normalize_dp2(inst, q)
    lin_slice = f1.graded_slice(0, 3)
    if lin_slice.is_zero():
        raise ValueError("branch quartic is singular at the base point")
    coeffs = [0] * n
    for e, cc in lin_slice.sorted_terms():
        j = next(k for k, ee in enumerate(e) if ee)
        coeffs[j] = cc
    istar = next(j for j in range(n) if coeffs[j])
    inv_l = field.inv(coeffs[istar])
    cols = []
    for j in range(n):
        if j == istar:
            continue
        col = [0] * n
        col[j] = 1
        col[istar] = (-coeffs[j] * inv_l) % p
        cols.append(col)
    last = [0] * n
    last[istar] = inv_l
    cols.append(last)
    a2 = [[0] * (n + 1) for _ in range(n + 1)]
    a2[0][0] = 1
    for colk in range(n):
        for rowi in range(n):
            a2[rowi + 1][colk + 1] = cols[colk][rowi]
    f2 = f1.apply_linear_change(field, a2)
    tr = _compose_transcript(tr, a2, {"move": "tangent_to_last"})
    return f2, tr


def fiber_dp2_on_branch(inst: DelPezzoInstance, q) -> FiberScheme:
    """Line conditions through a branch point of the quartic double cover."""
    if inst.kind != "dp2":
        raise ValueError("needs a dp2 instance")
    field = inst.field
    p = field.p
    n = inst.n
    if inst.polys["F"].evaluate(q) != 0:
        raise ValueError("base point is off the branch quartic; use the general form")
    f2, tr = _on_branch_normal_form(inst, q)
    assert f2.graded_slice(0, 4).is_zero()
    names = tuple(f"a{i}" for i in range(1, n + 1))
    tangent = _rename(f2.graded_slice(0, 3), names)
    expected = WeightedPoly.variable(names, (1,) * n, n - 1, field)
    assert tangent == expected, "tangent layer should be the last coordinate"
    q2 = _rename(f2.graded_slice(0, 2), names)
    q3 = _rename(f2.graded_slice(0, 1), names)
    q4 = _rename(f2.graded_slice(0, 0), names)
    eq2 = q3 * q3 - q2 * q4 * 4
    return FiberScheme(
        kind="dp2",
        names=names,
        weights=(1,) * n,
        field=field,
        equations=[tangent, eq2],
        base_point=tuple(x % p for x in q),
        prime=p,
        validity="on_branch",
        notes={"leading_scalar": 0},
        transcript=tr,
    )


@dataclass
class ConeTest:
    is_cone: bool
    residual_quadratic_zero: bool
    residual_cubic_zero: bool


def cone_point_test_dp2(inst: DelPezzoInstance, q) -> ConeTest:
    """Exact test whether a branch point is a cone vertex of its tangent cut.

    After on-branch normalization the tangent hyperplane section is a cone
    with vertex at the point iff both lower layers vanish on the hyperplane.
    """
    field = inst.field
    n = inst.n
    f2, _ = _on_branch_normal_form(inst, q)
    names = tuple(f"a{i}" for i in range(1, n + 1))
    q2 = _rename(f2.graded_slice(0, 2), names)
    q3 = _rename(f2.graded_slice(0, 1), names)
    zero = WeightedPoly.zero(names, (1,) * n, field)
    r2 = q2.substitute_variable(n - 1, zero)
    r3 = q3.substitute_variable(n - 1, zero)
    return ConeTest(
        is_cone=r2.is_zero() and r3.is_zero(),
        residual_quadratic_zero=r2.is_zero(),
        residual_cubic_zero=r3.is_zero(),
    )


def fiber_dp3(inst: DelPezzoInstance, q) -> FiberScheme:
    """Taylor-layer equations for lines on a cubic through an ambient point."""
    if inst.kind != "dp3":
        raise ValueError("needs a dp3 instance")
    field = inst.field
    f = inst.polys["F"]
    if f.evaluate(q) != 0:
        raise ValueError("point is not on the cubic")
    layers = taylor_layers(f, q)
    pivot = next(i for i in range(len(q)) if q[i] % field.p != 0)
    return FiberScheme(
        kind="dp3",
        names=layers[1].names,
        weights=layers[1].weights,
        field=field,
        equations=[layers[1], layers[2], layers[3]],
        base_point=tuple(x % field.p for x in q),
        prime=field.p,
        validity="general",
        transversal_var=pivot,
        notes={},
    )


def fiber_dp4(inst: DelPezzoInstance, q) -> FiberScheme:
    """Layer equations for lines on an intersection of two quadrics."""
    if inst.kind != "dp4":
        raise ValueError("needs a dp4 instance")
    field = inst.field
    q1, q2 = inst.polys["Q1"], inst.polys["Q2"]
    if q1.evaluate(q) != 0 or q2.evaluate(q) != 0:
        raise ValueError("point is not on the intersection of the quadrics")
    l1 = taylor_layers(q1, q)
    l2 = taylor_layers(q2, q)
    pivot = next(i for i in range(len(q)) if q[i] % field.p != 0)
    return FiberScheme(
        kind="dp4",
        names=l1[1].names,
        weights=l1[1].weights,
        field=field,
        equations=[l1[1], l1[2], l2[1], l2[2]],
        base_point=tuple(x % field.p for x in q),
        prime=field.p,
        validity="general",
        transversal_var=pivot,
        notes={},
    )


def _dp1_family_layers(f: WeightedPoly, b0: int):
    """Coefficients G_k of F(s, a t, b0 s^2 + b1 s t + b2 t^2) by t-degree.

    f lives on the dp1 base ring (x0..x_{n-1}, y); the output ring is
    (a1..a_{n-1}, b1, b2) with weights (1,...,1, 1, 2).
    """
    field = f.field
    p = field.p
    nx = len(f.names) - 1
    names = tuple(f"a{i}" for i in range(1, nx)) + ("b1", "b2")
    weights = (1,) * (nx - 1) + (1, 2)
    nv = len(names)
    layers = [dict() for _ in range(7)]
    for alpha, c in f.sorted_terms():
        e0 = alpha[0]
        a_exps = alpha[1:nx]
        ey = alpha[nx]
        t_from_a = sum(a_exps)
        base_exp = tuple(a_exps)
        for j0 in range(ey + 1):
            for j1 in range(ey - j0 + 1):
                j2 = ey - j0 - j1
                mult = math.factorial(ey) // (
                    math.factorial(j0) * math.factorial(j1) * math.factorial(j2)
                )
                coeff = (c * mult * pow(b0, j0, p)) % p
                if coeff == 0:
                    continue
                k = t_from_a + j1 + 2 * j2
                if k > 6:
                    raise AssertionError("layer degree exceeded the sextic bound")
                exps = base_exp + (j1, j2)
                layers[k][exps] = (layers[k].get(exps, 0) + coeff) % p
    out = []
    for k in range(7):
        terms = {e: v for e, v in layers[k].items() if v}
        out.append(WeightedPoly(names, weights, field, terms))
    return out


def eliminate_even_sextic(layers, field: PrimeField):
    """Even-multiplicity conditions for a sextic family with unit lead.

    layers = [G0..G6], G0 a nonzero constant: the family is a perfect
    square times G0 iff the three returned forms (degrees 4, 5, 6) vanish.
    """
    g0_poly = layers[0]
    if g0_poly.is_zero() or g0_poly.weighted_degree() != 0:
        raise ValueError("leading layer must be a nonzero constant")
    g0 = next(iter(g0_poly.terms.values()))
    p = field.p
    inv2g0 = field.inv((2 * g0) % p)
    inv4g0sq = field.inv((4 * g0 * g0) % p)
    inv8g0sq = field.inv((8 * g0 * g0) % p)
    inv16g0cb = field.inv((16 * pow(g0, 3, p)) % p)
    g1, g2, g3, g4, g5, g6 = layers[1:7]
    beta = g1 * inv2g0
    gamma = g2 * inv2g0 - (g1 * g1) * inv8g0sq
    delta = g3 * inv2g0 - (g1 * g2) * inv4g0sq + (g1 * g1 * g1) * inv16g0cb
    e4 = g4 - (gamma * gamma + beta * delta * 2) * g0
    e5 = g5 - (gamma * delta) * (2 * g0)
    e6 = g6 - (delta * delta) * g0
    return [e4, e5, e6]


def fiber_dp1(inst: DelPezzoInstance, q) -> FiberScheme:
    """Even-multiplicity equations for horizontal lines through a dp1 point.

    q = (x..., y) on the cover base, x-part nonzero, cover form nonzero at
    q, and the depressed cubic in y squarefree over the x-part.
    """
    if inst.kind != "dp1":
        raise ValueError("needs a dp1 instance")
    field = inst.field
    p = field.p
    n = inst.n
    x_part = [v % p for v in q[:n]]
    if all(v == 0 for v in x_part):
        raise ValueError("vertex-fiber points have no horizontal line chart")
    cover = inst.cover_form()
    g0 = cover.evaluate(q)
    if g0 == 0:
        raise ValueError("point lies on the cover branch; no general fiber form there")
    disc = inst.branch_loci()["cubic_discriminant"].evaluate(x_part)
    if disc == 0:
        raise ValueError(
            "the depressed cubic has a multiple root over this x-direction "
            "(vertical-line locus); the horizontal fiber form is not valid"
        )
    pivot = next(i for i in range(n) if x_part[i] != 0)
    a1 = _completion_matrix(field, x_part, pivot)
    a1_inv = matrix_inverse(field, a1)
    moved = cover.apply_linear_change(field, a1)
    b0 = q[n] % p
    tr = Transcript(
        field=field,
        matrix=a1,
        inverse=a1_inv,
        moves=[{"move": "x_part_to_e0", "pivot": pivot}],
    )
    layers = _dp1_family_layers(moved, b0)
    assert not layers[0].is_zero() and layers[0].weighted_degree() == 0
    assert next(iter(layers[0].terms.values())) == g0
    eqs = eliminate_even_sextic(layers, field)
    nv = len(eqs[0].names)
    return FiberScheme(
        kind="dp1",
        names=eqs[0].names,
        weights=eqs[0].weights,
        field=field,
        equations=eqs,
        base_point=tuple(v % p for v in q),
        prime=p,
        validity="general",
        line_pivots=list(range(n - 1)),
        notes={"leading_scalar": g0, "b0": b0},
        transcript=tr,
    )


def fiber_scheme(inst: DelPezzoInstance, q) -> FiberScheme:
    """Dispatch on kind and branch position."""
    if inst.kind == "dp3":
        return fiber_dp3(inst, q)
    if inst.kind == "dp4":
        return fiber_dp4(inst, q)
    if inst.kind == "dp2":
        if inst.polys["F"].evaluate(q) == 0:
            return fiber_dp2_on_branch(inst, q)
        return fiber_dp2_off_branch(inst, q)
    return fiber_dp1(inst, q)


def direction_to_line_dp2(scheme: FiberScheme, a):
    """Map a normalized direction to (point, direction) in original coords."""
    v_norm = (0,) + tuple(a)
    v = scheme.transcript.to_original_direction(v_norm)
    return scheme.base_point, v


def compose_on_base_line(inst: DelPezzoInstance, q, v) -> BinaryForm:
    """Composite of the dp2 branch quartic along the line through q, v."""
    field = inst.field
    f = inst.polys["F"]
    images = [BinaryForm(field, 1, [q[i] % field.p, v[i] % field.p]) for i in range(len(q))]
    return compose_on_line(f, images)


@dataclass
class LineClassification:
    scheme_count: int
    line_count: int
    predicted_on_x: int
    breakdown: dict


def classified_line_count(inst: DelPezzoInstance, scheme: FiberScheme):
    """Scheme counts with the cover-lift bookkeeping applied.

    predicted_on_x is the number of lines on the model through a fixed
    model point above the base point (any lift: the count is lift-free).
    """
    from .census import count_fiber_scheme, count_scheme_points, enumerate_points

    field = scheme.field
    p = field.p
    if scheme.kind in ("dp3", "dp4"):
        cnt = count_fiber_scheme(scheme)
        return LineClassification(
            scheme_count=cnt,
            line_count=cnt,
            predicted_on_x=cnt,
            breakdown={"transversal": cnt},
        )
    if scheme.kind == "dp2" and scheme.validity == "general":
        cnt = count_scheme_points(scheme.equations, scheme.names, scheme.weights, field)
        return LineClassification(
            scheme_count=cnt,
            line_count=cnt,
            predicted_on_x=cnt,
            breakdown={"even_multiplicity": cnt, "lift_per_direction": 1},
        )
    if scheme.kind == "dp2":
        # on-branch: enumerate directions, classify composed forms
        cnt = 0
        lifted = branch_lines = excluded = 0
        for a in enumerate_points(scheme.weights, p):
            if any(f.evaluate(a) != 0 for f in scheme.equations):
                continue
            cnt += 1
            _, v = direction_to_line_dp2(scheme, a)
            g = compose_on_base_line(inst, scheme.base_point, v)
            if g.is_zero():
                branch_lines += 1
                continue
            c, _, exact = square_part(g)
            assert exact, "scheme direction must compose to an even-multiplicity form"
            if field.chi((-c) % p) == 1:
                lifted += 1
            else:
                excluded += 1
        return LineClassification(
            scheme_count=cnt,
            line_count=cnt,
            predicted_on_x=2 * lifted + branch_lines,
            breakdown={
                "even_multiplicity": cnt,
                "lifted_twice": lifted,
                "branch_lines": branch_lines,
                "nonsquare_excluded": excluded,
            },
        )
    # dp1: horizontal charts only
    from ._kernels import impl
    from ._kernels.plans import poly_arrays

    arrays = [poly_arrays(f) for f in scheme.equations]
    nv = len(scheme.names)
    line_count = impl.staged_zero_count(
        arrays, nv, scheme.weights, p, pivots=scheme.line_pivots
    )
    full = count_scheme_points(scheme.equations, scheme.names, scheme.weights, field)
    return LineClassification(
        scheme_count=full,
        line_count=line_count,
        predicted_on_x=line_count,
        breakdown={
            "horizontal": line_count,
            "non_line_solutions": full - line_count,
            "lift_per_family": 1,
        },
    )


def random_model_point(inst: DelPezzoInstance, seed, on_branch: bool = False):
    """Deterministic seeded sampling of a usable base/ambient point."""
    field = inst.field
    p = field.p
    rng = random.Random(f"fanolines:point:{inst.kind}:{p}:{seed}")
    from .census import index_to_point, space_size

    if inst.kind in ("dp3", "dp4"):
        polys = list(inst.polys.values())
        names, weights = polys[0].names, polys[0].weights
        size = space_size(weights, p)
        for _ in range(20000):
            pt = index_to_point(rng.randrange(size), weights, p)
            if all(f.evaluate(pt) == 0 for f in polys):
                return pt
        raise RuntimeError("no rational point found (very unlikely)")
    if inst.kind == "dp2":
        f = inst.polys["F"]
        names, weights = f.names, f.weights
        size = space_size(weights, p)
        for _ in range(20000):
            pt = index_to_point(rng.randrange(size), weights, p)
            val = f.evaluate(pt)
            if on_branch and val == 0:
                return pt
            if not on_branch and val != 0 and field.chi((-val) % p) == 1:
                return pt
        raise RuntimeError("no usable base point found")
    cover = inst.cover_form()
    disc_poly = inst.branch_loci()["cubic_discriminant"]
    names, weights = base_ring(inst.kind, inst.n)
    size = space_size(weights, p)
    n = inst.n
    for _ in range(20000):
        pt = index_to_point(rng.randrange(size), weights, p)
        if all(v == 0 for v in pt[:n]):
            continue
        val = cover.evaluate(pt)
        if val == 0 or field.chi((-val) % p) != 1:
            continue
        if disc_poly.evaluate(pt[:n]) == 0:
            continue
        return pt
    raise RuntimeError("no usable base point found")
