"""Brute-force ground truth for lines and parameterized curves.

Everything here re-derives line sets from scratch: hypersurface kinds by
sampled vanishing along candidate lines, cover kinds by interpolating the
composed form and factoring its square part. None of it touches the
fiber-scheme constructors, so agreement between the two is a real check.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from itertools import product

import numpy as np

from .binform import BinaryForm, cubic_multiple_root, square_part
from .census import canonical_rep, point_to_index
from .field import PrimeField, matrix_inverse
from .models import DelPezzoInstance, base_ring
from ._kernels import impl
from ._kernels.plans import (
    eval_on_points,
    hom_plan_cover_quartic,
    hom_plan_cover_sextic,
    hom_plan_pairs,
    hom_plan_trilinear,
    poly_arrays,
    pow_table,
)


@dataclass(frozen=True)
class LineRecord:
    kind: str
    key: tuple
    data: tuple = ()


def _line_key(field: PrimeField, weights, points) -> tuple:
    """Reparameterization-invariant key: the sorted rational point set."""
    idx = sorted(
        point_to_index(canonical_rep(pt, weights, field), weights, field.p)
        for pt in points
    )
    return tuple(idx)


def _directions_mod_point(nvars: int, pivot: int, p: int) -> np.ndarray:
    """One representative per line through the base point: directions with
    the point's pivot coordinate forced to zero."""
    rows = []
    sub = nvars - 1
    for lead in range(sub):
        count = p ** (sub - lead - 1)
        block = np.zeros((count, sub), dtype=np.int64)
        block[:, lead] = 1
        for j in range(lead + 1, sub):
            period = p ** (sub - j - 1)
            block[:, j] = (np.arange(count) // period) % p
        rows.append(block)
    sub_reps = np.concatenate(rows, axis=0)
    out = np.zeros((sub_reps.shape[0], nvars), dtype=np.int64)
    keep = [i for i in range(nvars) if i != pivot]
    out[:, keep] = sub_reps
    return out


def oracle_lines_direct(inst: DelPezzoInstance, q) -> set:
    """All lines on a dp3/dp4 model through q, by sampled vanishing."""
    if inst.kind not in ("dp3", "dp4"):
        raise ValueError("direct line enumeration needs dp3 or dp4")
    field = inst.field
    p = field.p
    polys = list(inst.polys.values())
    deg = max(f.weighted_degree() for f in polys)
    if p < deg + 2:
        raise ValueError(f"p = {p} has too few sample values for degree {deg}")
    nvars = len(polys[0].names)
    weights = (1,) * nvars
    q = canonical_rep(q, weights, field)
    if any(f.evaluate(q) != 0 for f in polys):
        raise ValueError("base point is not on the model")
    pivot = next(i for i in range(nvars) if q[i])
    dirs = _directions_mod_point(nvars, pivot, p)
    powtab = pow_table(p, deg)
    qarr = np.array(q, dtype=np.int64)
    alive = np.arange(dirs.shape[0])
    for f in polys:
        exps, coeffs = poly_arrays(f)
        exps = np.array(exps, dtype=np.int64)
        coeffs = np.array(coeffs, dtype=np.int64)
        for t in range(1, f.weighted_degree() + 2):
            if alive.size == 0:
                break
            pts = (qarr[None, :] + t * dirs[alive]) % p
            vals = eval_on_points(exps, coeffs, pts, p, powtab)
            alive = alive[vals == 0]
    records = set()
    for i in alive:
        v = tuple(int(x) for x in dirs[i])
        pts = [q, v] + [
            tuple((q[j] + t * v[j]) % p for j in range(nvars)) for t in range(1, p)
        ]
        records.add(
            LineRecord(kind="direct", key=_line_key(field, weights, pts), data=v)
        )
    return records


def _interp_matrix(field: PrimeField, ts) -> list:
    """Inverse Vandermonde: maps sampled values to coefficients."""
    k = len(ts)
    vm = [[pow(t, j, field.p) for j in range(k)] for t in ts]
    return matrix_inverse(field, vm)


@dataclass
class CoverTally:
    lines_through_point: int = 0
    even_mult_lines: int = 0
    lifted_once: int = 0
    lifted_twice: int = 0
    nonsquare_excluded: int = 0
    not_even: int = 0
    branch_lines: int = 0
    vertical_type2: int = 0
    cusp_flag: bool = False

    def as_dict(self) -> dict:
        return {
            "lines_through_point": self.lines_through_point,
            "even_mult_lines": self.even_mult_lines,
            "lifted_once": self.lifted_once,
            "lifted_twice": self.lifted_twice,
            "nonsquare_excluded": self.nonsquare_excluded,
            "not_even": self.not_even,
            "branch_lines": self.branch_lines,
            "vertical_type2": self.vertical_type2,
            "cusp_flag": self.cusp_flag,
        }


def _classify_cover_form(
    field: PrimeField,
    weights,
    g: BinaryForm,
    lift: int,
    records: set,
    tally: CoverTally,
    line_points,
    data,
) -> None:
    p = field.p
    if g.is_zero():
        # candidate inside the branch divisor: one reduced curve upstairs,
        # through the chosen point only at lift value zero
        if lift % p == 0:
            tally.branch_lines += 1
            tally.lines_through_point += 1
            records.add(
                LineRecord(
                    kind="branch_line",
                    key=_line_key(field, weights, line_points),
                    data=data,
                )
            )
        return
    c, h, exact = square_part(g)
    if not exact:
        tally.not_even += 1
        return
    tally.even_mult_lines += 1
    if field.chi((-c) % p) != 1:
        tally.nonsquare_excluded += 1
        return
    root = field.sqrt((-c) % p)
    lead = h.coeffs[0]
    # lift forms are +-root * h; a lift passes through the chosen point
    # when its value at (s,t) = (1,0), which is +-root * lead, equals lift
    hits = sum(1 for sign in (1, p - 1) if (sign * root * lead) % p == lift % p)
    if hits == 0:
        return
    base_key = _line_key(field, weights, line_points)
    if hits == 1:
        tally.lifted_once += 1
        tally.lines_through_point += 1
        records.add(LineRecord(kind="lift_of_bitangent", key=base_key, data=data))
    else:
        # ramification point: both lifts pass through it
        tally.lifted_twice += 1
        tally.lines_through_point += 2
        records.add(
            LineRecord(kind="lift_of_bitangent", key=base_key + ("+",), data=data)
        )
        records.add(
            LineRecord(kind="lift_of_bitangent", key=base_key + ("-",), data=data)
        )


def oracle_lines_cover_dp2(inst: DelPezzoInstance, base_point, lift: int):
    """Lines on a dp2 model through (base_point, lift), by interpolation."""
    field = inst.field
    p = field.p
    if p < 7:
        raise ValueError("quartic interpolation needs p >= 7")
    f = inst.polys["F"]
    nvars = len(f.names)
    weights = (1,) * nvars
    q = canonical_rep(base_point, weights, field)
    if tuple(q) != tuple(x % p for x in base_point):
        raise ValueError("base point must be its canonical representative")
    if (lift * lift + f.evaluate(q)) % p != 0:
        raise ValueError("lift value does not satisfy the cover equation")
    pivot = next(i for i in range(nvars) if q[i])
    dirs = _directions_mod_point(nvars, pivot, p)
    powtab = pow_table(p, 4)
    exps, coeffs = poly_arrays(f)
    exps = np.array(exps, dtype=np.int64)
    coeffs = np.array(coeffs, dtype=np.int64)
    qarr = np.array(q, dtype=np.int64)
    ts = list(range(5))
    samples = np.zeros((dirs.shape[0], 5), dtype=np.int64)
    for col, t in enumerate(ts):
        pts = (qarr[None, :] + t * dirs) % p
        samples[:, col] = eval_on_points(exps, coeffs, pts, p, powtab)
    inv_vm = np.array(_interp_matrix(field, ts), dtype=np.int64)
    coeff_rows = (samples @ inv_vm.T) % p
    records: set = set()
    tally = CoverTally()
    for i in range(dirs.shape[0]):
        v = tuple(int(x) for x in dirs[i])
        g = BinaryForm(field, 4, [int(c) for c in coeff_rows[i]])
        pts = [q, v] + [
            tuple((q[j] + t * v[j]) % p for j in range(nvars)) for t in range(1, p)
        ]
        _classify_cover_form(field, weights, g, lift, records, tally, pts, v)
    return records, tally


def oracle_lines_cover_dp1(inst: DelPezzoInstance, base_point, lift: int):
    """Horizontal lines on a dp1 model through ((x, y), lift) plus the
    vertical candidate over the x-direction."""
    field = inst.field
    p = field.p
    if p < 11:
        raise ValueError("sextic interpolation needs p >= 11")
    n = inst.n
    cover = inst.cover_form()
    bw = (1,) * n + (2,)
    q = tuple(x % p for x in base_point)
    if all(v == 0 for v in q[:n]):
        raise ValueError("vertex-fiber point: no line family to enumerate")
    if tuple(canonical_rep(q, bw, field)) != q:
        raise ValueError("base point must be its canonical representative")
    x_part = list(q[:n])
    b0 = q[n]
    if (lift * lift + cover.evaluate(q)) % p != 0:
        raise ValueError("lift value does not satisfy the cover equation")
    pivot = next(i for i in range(n) if x_part[i])
    dirs = _directions_mod_point(n, pivot, p)
    ndirs = dirs.shape[0]
    powtab = pow_table(p, 6)
    exps, coeffs = poly_arrays(cover)
    exps = np.array(exps, dtype=np.int64)
    coeffs = np.array(coeffs, dtype=np.int64)
    xarr = np.array(x_part, dtype=np.int64)
    ts = list(range(7))
    bpairs = [(b1, b2) for b1 in range(p) for b2 in range(p)]
    nb = len(bpairs)
    ncand = ndirs * nb
    samples = np.zeros((ncand, 7), dtype=np.int64)
    barr = np.array(bpairs, dtype=np.int64)
    for col, t in enumerate(ts):
        xpts = (xarr[None, :] + t * dirs) % p
        yvals = (b0 + barr[:, 0] * t + barr[:, 1] * t * t) % p
        pts = np.zeros((ncand, n + 1), dtype=np.int64)
        pts[:, :n] = np.repeat(xpts, nb, axis=0)
        pts[:, n] = np.tile(yvals, ndirs)
        samples[:, col] = eval_on_points(exps, coeffs, pts, p, powtab)
    inv_vm = np.array(_interp_matrix(field, ts), dtype=np.int64)
    coeff_rows = (samples @ inv_vm.T) % p
    records: set = set()
    tally = CoverTally()
    for i in range(ncand):
        v = dirs[i // nb]
        b1, b2 = bpairs[i % nb]
        g = BinaryForm(field, 6, [int(c) for c in coeff_rows[i]])
        pts = [q, tuple(int(x) for x in v) + (b2,)]
        for t in range(1, p):
            xt = tuple(int((x_part[j] + t * v[j]) % p) for j in range(n))
            pts.append(xt + ((b0 + b1 * t + b2 * t * t) % p,))
        data = tuple(int(x) for x in v) + (b1, b2)
        _classify_cover_form(field, bw, g, lift, records, tally, pts, data)
    # vertical candidate: the fiber direction doubles exactly when the
    # depressed cubic degenerates over the x-direction
    f4v = inst.polys["F4"].evaluate(x_part)
    f6v = inst.polys["F6"].evaluate(x_part)
    mult_root = cubic_multiple_root(field, [f6v, f4v, 0, 1])
    if mult_root is not None:
        root, is_triple = mult_root
        tally.vertical_type2 += 1
        tally.lines_through_point += 1
        if is_triple:
            tally.cusp_flag = True
        records.add(
            LineRecord(
                kind="vertical_type2",
                key=("vertical",) + tuple(x_part),
                data=(root, 3 if is_triple else 2),
            )
        )
    return records, tally


def oracle_lines_cover(inst: DelPezzoInstance, base_point, lift: int):
    if inst.kind == "dp2":
        return oracle_lines_cover_dp2(inst, base_point, lift)
    if inst.kind == "dp1":
        return oracle_lines_cover_dp1(inst, base_point, lift)
    raise ValueError("cover enumeration needs dp1 or dp2")


def oracle_lines_through(inst: DelPezzoInstance, point, lift: int | None = None):
    """Uniform entry: line records through a model point.

    For cover kinds the model point is (base point, lift value); lift=None
    picks the smaller square root of -F at the base point.
    """
    if inst.kind in ("dp3", "dp4"):
        return oracle_lines_direct(inst, point), None
    field = inst.field
    p = field.p
    names, weights = base_ring(inst.kind, inst.n)
    point = canonical_rep(point, weights, field)
    if lift is None:
        val = inst.cover_form().evaluate(point)
        if field.chi((-val) % p) == -1:
            raise ValueError("no model point above this base point")
        lift = field.sqrt((-val) % p)
    return oracle_lines_cover(inst, point, lift)


@dataclass
class HomCount:
    p: int
    d: int
    method: str
    raw: int
    degenerate: int | None
    dim_target: int
    notes: dict = dc_field(default_factory=dict)


def oracle_hom_count(inst: DelPezzoInstance, d: int, max_ops: float = 4e9) -> HomCount:
    """Count coefficient tuples composing all defining forms to zero.

    Excludes the all-zero tuple; degenerate tuples (a common root of all
    coordinate forms) stay included in raw and are reported separately
    when a closed count is available.
    """
    field = inst.field
    p = field.p
    n = inst.n
    kind = inst.kind
    if d not in (1, 2):
        raise ValueError("only d in {1, 2} is supported")
    if d == 2 and kind != "dp3":
        raise ValueError("d = 2 enumeration is only wired for dp3")
    nv = {"dp1": n, "dp2": n + 1, "dp3": n + 2, "dp4": n + 3}[kind]
    est = float(p) ** ((d + 1) * nv)
    if est > max_ops:
        raise ValueError(
            f"estimated enumeration size {est:.2e} exceeds the {max_ops:.0e} guardrail"
        )
    if kind == "dp3" and d == 1:
        plan = hom_plan_pairs([inst.polys["F"]], p, symmetric=False)
        raw = impl.hom_pairs(plan)
        s1 = int(plan["s_pts"].shape[0]) - 1  # grid zero set includes the origin
        degenerate = s1 * (p + 1)
        method = "pairs"
    elif kind == "dp4" and d == 1:
        plan = hom_plan_pairs([inst.polys["Q1"], inst.polys["Q2"]], p, symmetric=True)
        raw = impl.hom_pairs(plan)
        s1 = int(plan["s_pts"].shape[0]) - 1  # grid zero set includes the origin
        degenerate = s1 * (p + 1)
        method = "pairs"
    elif kind == "dp2" and d == 1:
        plan = hom_plan_cover_quartic(inst.polys["F"], p)
        raw = impl.hom_cover_quartic(plan)
        degenerate = None
        method = "cover4"
    elif kind == "dp1" and d == 1:
        plan = hom_plan_cover_sextic(inst.polys["F4"], inst.polys["F6"], p)
        raw = impl.hom_cover_sextic(plan)
        degenerate = None
        method = "cover6"
    else:
        plan = hom_plan_trilinear(inst.polys["F"], p)
        raw = impl.hom_trilinear(plan)
        degenerate = None
        method = "trilinear"
    slots = nv * (d + 1)
    if kind == "dp2":
        slots += 2 * d + 1
    if kind == "dp1":
        slots += (2 * d + 1) + (3 * d + 1)
    return HomCount(
        p=p,
        d=d,
        method=method,
        raw=int(raw),
        degenerate=degenerate,
        dim_target=(n - 1) * d + n + 1,
        notes={"tuple_slots": slots},
    )


def _diagonal_coeffs(f, deg: int) -> list | None:
    """Per-variable coefficients if every term is a pure power of degree deg."""
    out = [0] * len(f.names)
    for e, c in f.terms.items():
        hot = [i for i, k in enumerate(e) if k]
        if len(hot) != 1 or e[hot[0]] != deg:
            return None
        out[hot[0]] = c
    return out


def _compose_power_table(p: int, d: int, deg: int) -> dict:
    """coefficient tuple of a degree-d form -> slot vector of its deg-th power."""
    out = {}
    for cs in product(range(p), repeat=d + 1):
        cur = [1]
        for _ in range(deg):
            nxt = [0] * (len(cur) + d)
            for i, a in enumerate(cur):
                if a:
                    for j, c in enumerate(cs):
                        nxt[i + j] = (nxt[i + j] + a * c) % p
            cur = nxt
        out[cs] = tuple(cur)
    return out


def hom_count_additive(inst: DelPezzoInstance, d: int) -> int:
    """Independent tuple count for diagonal instances: convolve the
    distribution of composed-coefficient vectors variable by variable.
    Supports dp3/dp4 for d in {1, 2} and dp2 at d = 1."""
    field = inst.field
    p = field.p
    kind = inst.kind
    if kind == "dp3":
        specs = [(inst.polys["F"], 3)]
    elif kind == "dp4":
        specs = [(inst.polys["Q1"], 2), (inst.polys["Q2"], 2)]
    elif kind == "dp2":
        if d != 1:
            raise ValueError("dp2 additive count is wired for d = 1 only")
        specs = [(inst.polys["F"], 4)]
    else:
        raise ValueError("additive counting supports dp2/dp3/dp4")
    diags = []
    for f, deg in specs:
        cs = _diagonal_coeffs(f, deg)
        if cs is None:
            raise ValueError("instance is not diagonal")
        diags.append((cs, deg))
    nv = len(specs[0][0].names)
    tables = {deg: _compose_power_table(p, d, deg) for _, deg in diags}
    zero_state = tuple(0 for _, deg in diags for _ in range(d * deg + 1))
    dist = {zero_state: 1}
    for i in range(nv):
        per_var = []
        for cs in product(range(p), repeat=d + 1):
            vec = []
            for cvec, deg in diags:
                vec.extend((cvec[i] * x) % p for x in tables[deg][cs])
            per_var.append(tuple(vec))
        new: dict = {}
        for state, cnt in dist.items():
            for vec in per_var:
                key = tuple((a + b) % p for a, b in zip(state, vec))
                new[key] = new.get(key, 0) + cnt
        dist = new
    if kind in ("dp3", "dp4"):
        return dist.get(zero_state, 0) - 1
    # dp2: the composed cover is w^2 + G; count y-forms w with w^2 = -G
    sq_counter: dict = {}
    for w in product(range(p), repeat=2 * d + 1):
        vec = [0] * (4 * d + 1)
        for i, a in enumerate(w):
            for j, b in enumerate(w):
                vec[i + j] = (vec[i + j] + a * b) % p
        key = tuple(vec)
        sq_counter[key] = sq_counter.get(key, 0) + 1
    total = 0
    for state, cnt in dist.items():
        need = tuple((-x) % p for x in state)
        total += cnt * sq_counter.get(need, 0)
    return total - 1
