"""Shared precomputation for the counting backends.

Everything here is plain data (numpy arrays of exponents, coefficients,
index maps): the compiled and fallback backends consume identical plans,
which keeps their agreement tests meaningful.

Conventions used throughout:
- monomials of degree k in m variables are ordered as in
  poly.monomial_exponents, i.e. lexicographically by exponent tuple;
- projective representatives have first nonzero weight-1 coordinate 1,
  charts are enumerated by ascending pivot index, free coordinates run
  lexicographically with the last coordinate fastest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from functools import lru_cache

import numpy as np

from ..poly import WeightedPoly, monomial_exponents


@lru_cache(maxsize=None)
def mono_list(m: int, k: int):
    return monomial_exponents((1,) * m, k)


@lru_cache(maxsize=None)
def mono_index(m: int, k: int):
    return {e: i for i, e in enumerate(mono_list(m, k))}


@lru_cache(maxsize=None)
def mono_exps_array(m: int, k: int):
    return np.array(mono_list(m, k), dtype=np.int64)


@lru_cache(maxsize=None)
def conv_table(m: int, k1: int, k2: int):
    """Index triples (i, j, out) with mono_i * mono_j = mono_out."""
    l1, l2 = mono_list(m, k1), mono_list(m, k2)
    out_idx = mono_index(m, k1 + k2)
    rows = []
    for i, a in enumerate(l1):
        for j, b in enumerate(l2):
            rows.append((i, j, out_idx[tuple(x + y for x, y in zip(a, b))]))
    return np.array(rows, dtype=np.int64)


@lru_cache(maxsize=None)
def mono_build_recipe(m: int, k: int):
    """(var, sub) pairs building degree-k monomial values from degree k-1.

    mono_k[i] = v[var[i]] * mono_{k-1}[sub[i]], with var the first variable
    of nonzero exponent.
    """
    if k < 1:
        raise ValueError("recipe needs k >= 1")
    cur = mono_list(m, k)
    sub_idx = mono_index(m, k - 1)
    var = np.empty(len(cur), dtype=np.int64)
    sub = np.empty(len(cur), dtype=np.int64)
    for i, e in enumerate(cur):
        j = next(t for t in range(m) if e[t])
        red = list(e)
        red[j] -= 1
        var[i] = j
        sub[i] = sub_idx[tuple(red)]
    return var, sub


def poly_arrays(f: WeightedPoly):
    exps, coeffs = f.to_arrays()
    if not exps:
        return np.zeros((0, len(f.names)), dtype=np.int64), np.zeros(0, dtype=np.int64)
    return np.array(exps, dtype=np.int64), np.array(coeffs, dtype=np.int64)


def pow_table(p: int, max_e: int):
    tab = np.ones((p, max_e + 1), dtype=np.int64)
    v = np.arange(p, dtype=np.int64)
    for e in range(1, max_e + 1):
        tab[:, e] = (tab[:, e - 1] * v) % p
    return tab


def chi_table(p: int):
    tab = np.full(p, -1, dtype=np.int64)
    tab[0] = 0
    v = np.arange(1, p, dtype=np.int64)
    tab[(v * v) % p] = 1
    return tab


def projective_reps(m: int, p: int):
    """Representatives of P^(m-1) as an int64 array, canonical order."""
    blocks = []
    for pivot in range(m):
        nfree = m - 1 - pivot
        count = p**nfree
        pts = np.zeros((count, m), dtype=np.int64)
        pts[:, pivot] = 1
        if nfree:
            ranks = np.arange(count, dtype=np.int64)
            for j in range(nfree):
                pts[:, pivot + 1 + j] = (ranks // p ** (nfree - 1 - j)) % p
        blocks.append(pts)
    return np.concatenate(blocks, axis=0)


def prefix_reps(m: int, p: int):
    """Reps of P^(m-2) over the first m-1 coordinates, plus the zero prefix.

    Together with a free last coordinate (or last = 1 for the zero prefix)
    these cover every representative of P^(m-1) exactly once.
    """
    body = projective_reps(m - 1, p)
    zero = np.zeros((1, m - 1), dtype=np.int64)
    return np.concatenate([body, zero], axis=0)


def cubic_root_table(p: int):
    """Roots in F_p of c0 + c1 x + c2 x^2 + c3 x^3 for all coefficient tuples.

    Returns (counts, roots): counts[idx] in {0..3} for tuples that are not
    identically zero, -1 for the zero tuple (every x is a root);
    idx = ((c3 * p + c2) * p + c1) * p + c0.
    """
    size = p**4
    counts = np.zeros(size, dtype=np.int8)
    roots = np.zeros((size, 3), dtype=np.int8)
    # enumerate (c1, c2, c3) and x, scatter into c0 = -(c1 x + c2 x^2 + c3 x^3)
    c = np.arange(p, dtype=np.int64)
    c1, c2, c3 = np.meshgrid(c, c, c, indexing="ij")
    c1, c2, c3 = c1.ravel(), c2.ravel(), c3.ravel()
    base = (c3 * p + c2) * p * p + c1 * p
    for x in range(p):
        c0 = (-(c1 * x + c2 * x * x + c3 * x * x * x)) % p
        idx = base + c0
        cnt = counts[idx]
        roots[idx, np.minimum(cnt, 2)] = np.where(cnt < 3, x, roots[idx, np.minimum(cnt, 2)])
        counts[idx] = cnt + 1
    counts[0] = -1
    return counts, roots


@dataclass
class PolarChart:
    """Taylor-layer evaluation programs for one base-space chart.

    progs[k] = (exps, coeffs, slots): the degree-k layer of F at base point q
    has coefficient sum(coeffs[t] * q^exps[t]) in monomial slot slots[t],
    monomials taken over the transversal coordinates trans_idx in local order.
    """

    pivot: int
    trans_idx: list
    progs: dict = dc_field(default_factory=dict)
    const_top: np.ndarray = None


def build_polar_chart(f: WeightedPoly, pivot) -> PolarChart:
    """Layer programs at pivot, or full polarization programs if pivot is None.

    With pivot=None the layers are those of F(q + v) in v over all
    coordinates, used by the map-counting tables rather than chart scans.
    """
    nv = len(f.names)
    deg = f.weighted_degree()
    trans = [i for i in range(nv) if i != pivot]
    local = {g: i for i, g in enumerate(trans)}
    m = len(trans)
    rows = {k: [] for k in range(1, deg + 1)}
    for alpha, c in f.sorted_terms():
        ranges = [range(0, alpha[i] + 1) if i != pivot else range(0, 1) for i in range(nv)]

        def splits(i, gamma):
            if i == nv:
                yield tuple(gamma)
                return
            for g in ranges[i]:
                gamma.append(g)
                yield from splits(i + 1, gamma)
                gamma.pop()

        for gamma in splits(0, []):
            k = sum(gamma)
            if k == 0 or k > deg:
                continue
            coeff = c
            for a, g in zip(alpha, gamma):
                coeff *= math.comb(a, g)
            qexp = tuple(a - g for a, g in zip(alpha, gamma))
            gl = [0] * m
            for i, g in enumerate(gamma):
                if g:
                    gl[local[i]] = g
            slot = mono_index(m, k)[tuple(gl)]
            rows[k].append((qexp, coeff % f.field.p, slot))
    chart = PolarChart(pivot=pivot, trans_idx=trans)
    for k in range(1, deg + 1):
        if rows[k]:
            exps = np.array([r[0] for r in rows[k]], dtype=np.int64)
            coeffs = np.array([r[1] for r in rows[k]], dtype=np.int64)
            slots = np.array([r[2] for r in rows[k]], dtype=np.int64)
        else:
            exps = np.zeros((0, nv), dtype=np.int64)
            coeffs = np.zeros(0, dtype=np.int64)
            slots = np.zeros(0, dtype=np.int64)
        chart.progs[k] = (exps, coeffs, slots)
    # the top layer has no q-dependence: collapse it to a constant vector
    top = np.zeros(len(mono_list(m, deg)), dtype=np.int64)
    exps, coeffs, slots = chart.progs[deg]
    for t in range(len(coeffs)):
        top[slots[t]] = (top[slots[t]] + coeffs[t]) % f.field.p
    chart.const_top = top
    return chart


def affine_grid(nv: int, p: int):
    """All of F_p^nv, rank-ordered with the last coordinate fastest."""
    count = p**nv
    pts = np.empty((count, nv), dtype=np.int64)
    ranks = np.arange(count, dtype=np.int64)
    for j in range(nv):
        pts[:, j] = (ranks // p ** (nv - 1 - j)) % p
    return pts


def affine_rank(point, p: int) -> int:
    r = 0
    for x in point:
        r = r * p + int(x) % p
    return r


def eval_on_points(exps, coeffs, pts, p: int, powtab=None):
    """Values of a term-array polynomial on a point block, reduced mod p."""
    if powtab is None:
        powtab = pow_table(p, int(exps.max()) if exps.size else 1)
    acc = np.zeros(pts.shape[0], dtype=np.int64)
    for t in range(len(coeffs)):
        term = np.full(pts.shape[0], int(coeffs[t]) % p, dtype=np.int64)
        e = exps[t]
        for v in range(exps.shape[1]):
            if e[v]:
                term *= powtab[pts[:, v], e[v]]
                term %= p
        acc += term
    return acc % p


def eval_layer_program(prog, pts, p: int, nslots: int, powtab):
    """Evaluate one layer program on a point block: [npts, nslots] mod p."""
    exps, coeffs, slots = prog
    out = np.zeros((pts.shape[0], nslots), dtype=np.int64)
    for t in range(len(coeffs)):
        term = np.full(pts.shape[0], int(coeffs[t]) % p, dtype=np.int64)
        e = exps[t]
        for v in range(exps.shape[1]):
            if e[v]:
                term *= powtab[pts[:, v], e[v]]
                term %= p
        out[:, slots[t]] += term
    return out % p


def mono_matrix(pts, k: int, p: int):
    """Monomial value matrix [npts, #monos(m, k)] built by degree chaining."""
    m = pts.shape[1]
    cur = np.ones((pts.shape[0], 1), dtype=np.int64)
    for kk in range(1, k + 1):
        var, sub = mono_build_recipe(m, kk)
        cur = (pts[:, var] * cur[:, sub]) % p
    return cur


def inv_table(p: int):
    tab = np.zeros(p, dtype=np.int64)
    for v in range(1, p):
        tab[v] = pow(v, p - 2, p)
    return tab


def sqrt_table(p: int):
    """Smallest square root per residue, 0 for non-squares and for 0."""
    tab = np.zeros(p, dtype=np.int64)
    for v in range(1, p):
        sq = (v * v) % p
        if tab[sq] == 0:
            tab[sq] = v
        else:
            tab[sq] = min(tab[sq], v)
    return tab


@dataclass
class ScanPlan:
    """Everything a backend needs to scan fibers at every rational point."""

    kind: str
    p: int
    n: int
    nvars: int
    m: int
    defs: list  # [(exps, coeffs)] of the defining equations over the base
    charts: list  # list over defining equations of list-over-pivots PolarChart
    powtab: np.ndarray = None
    chitab: np.ndarray = None
    vreps: np.ndarray = None
    prefixes: np.ndarray = None
    root_counts: np.ndarray = None
    root_vals: np.ndarray = None
    extra: dict = dc_field(default_factory=dict)


def hom_plan_pairs(polys, p: int, symmetric: bool) -> dict:
    """Tables for degree-1 map counting on a zero set cut by polys.

    Pairs (A, B) of grid points solve the problem iff all polys vanish at A
    and B and the first polars pair to zero; symmetric=True means the polar
    pairing of each poly satisfies <grad f(A), B> = <grad f(B), A> (quadrics),
    so only one dot product per poly is needed.
    """
    nv = len(polys[0].names)
    grid = affine_grid(nv, p)
    powtab = pow_table(p, max(f.weighted_degree() for f in polys))
    mask = np.ones(grid.shape[0], dtype=bool)
    for f in polys:
        exps, coeffs = poly_arrays(f)
        mask &= eval_on_points(exps, coeffs, grid, p, powtab) == 0
    s_pts = grid[mask]
    grads = []
    for f in polys:
        g = np.empty((s_pts.shape[0], nv), dtype=np.int64)
        for i in range(nv):
            exps, coeffs = poly_arrays(f.partial(i))
            g[:, i] = eval_on_points(exps, coeffs, s_pts, p, powtab)
        grads.append(g)
    return {
        "method": "pairs",
        "p": p,
        "nv": nv,
        "s_pts": s_pts,
        "grads": grads,
        "symmetric": symmetric,
    }


def hom_plan_cover_quartic(f: WeightedPoly, p: int) -> dict:
    """Tables for degree-1 map counting into a double cover branched on f=0."""
    nv = len(f.names)
    grid = affine_grid(nv, p)
    powtab = pow_table(p, 4)
    exps, coeffs = poly_arrays(f)
    fval = eval_on_points(exps, coeffs, grid, p, powtab)
    chart = build_polar_chart(f, None)
    nq = len(mono_list(nv, 2))
    grad = eval_layer_program(chart.progs[1], grid, p, nv, powtab)
    qcoef = eval_layer_program(chart.progs[2], grid, p, nq, powtab)
    return {
        "method": "cover4",
        "p": p,
        "nv": nv,
        "grid": grid,
        "fval": fval,
        "grad": grad,
        "qcoef": qcoef,
        "monoq": mono_matrix(grid, 2, p),
        "chi": chi_table(p),
        "inv": inv_table(p),
        "sqrt": sqrt_table(p),
    }


def _pair_compose_arrays(f: WeightedPoly):
    """Coefficient polynomials of f(A s + B t) in the doubled variable ring.

    Returns a list over t-degree k of term arrays (exps over (a..., b...),
    coeffs), with a-variables first.
    """
    nv = len(f.names)
    deg = f.weighted_degree()
    out = {k: {} for k in range(deg + 1)}
    for alpha, c in f.sorted_terms():
        combos = [()]
        for i in range(nv):
            combos = [key + (j,) for key in combos for j in range(alpha[i] + 1)]
        for key in combos:
            k = sum(key)
            coeff = c
            aexp = [0] * nv
            bexp = [0] * nv
            for i in range(nv):
                coeff *= math.comb(alpha[i], key[i])
                aexp[i] = alpha[i] - key[i]
                bexp[i] = key[i]
            ek = tuple(aexp + bexp)
            out[k][ek] = out[k].get(ek, 0) + coeff
    field_p = f.field.p if f.field is not None else None
    arrays = []
    for k in range(deg + 1):
        items = sorted(out[k].items())
        exps = np.array([e for e, _ in items], dtype=np.int64).reshape(len(items), 2 * nv)
        coeffs = np.array([cc % field_p if field_p else cc for _, cc in items], dtype=np.int64)
        keep = coeffs != 0
        arrays.append((exps[keep], coeffs[keep]))
    return arrays


def hom_plan_cover_sextic(f4: WeightedPoly, f6: WeightedPoly, p: int) -> dict:
    """Pair tables for degree-1 maps into a weighted double cover (deg 6)."""
    nv = len(f4.names)
    grid = affine_grid(2 * nv, p)
    powtab = pow_table(p, 6)
    f4_arrays = _pair_compose_arrays(f4)
    f6_arrays = _pair_compose_arrays(f6)
    f4c = np.empty((grid.shape[0], 5), dtype=np.int64)
    for k in range(5):
        exps, coeffs = f4_arrays[k]
        f4c[:, k] = eval_on_points(exps, coeffs, grid, p, powtab) if len(coeffs) else 0
    f6c = np.empty((grid.shape[0], 7), dtype=np.int64)
    for k in range(7):
        exps, coeffs = f6_arrays[k]
        f6c[:, k] = eval_on_points(exps, coeffs, grid, p, powtab) if len(coeffs) else 0
    return {
        "method": "cover6",
        "p": p,
        "nv": nv,
        "f4c": f4c,
        "f6c": f6c,
        "chi": chi_table(p),
        "inv": inv_table(p),
        "sqrt": sqrt_table(p),
    }


def hom_plan_trilinear(f: WeightedPoly, p: int) -> dict:
    """Grid tables for degree-2 map counting into a cubic hypersurface."""
    nv = len(f.names)
    grid = affine_grid(nv, p)
    powtab = pow_table(p, 3)
    exps, coeffs = poly_arrays(f)
    fval = eval_on_points(exps, coeffs, grid, p, powtab)
    chart = build_polar_chart(f, None)
    nq = len(mono_list(nv, 2))
    grad = eval_layer_program(chart.progs[1], grid, p, nv, powtab)
    qcoef = eval_layer_program(chart.progs[2], grid, p, nq, powtab)
    pairs = [(i, j) for i in range(nv) for j in range(i, nv)]
    hlin = np.empty((grid.shape[0], len(pairs)), dtype=np.int64)
    for col, (i, j) in enumerate(pairs):
        hexps, hcoeffs = poly_arrays(f.partial(i).partial(j))
        hlin[:, col] = eval_on_points(hexps, hcoeffs, grid, p, powtab) if len(hcoeffs) else 0
    return {
        "method": "trilinear",
        "p": p,
        "nv": nv,
        "fval": fval,
        "grad": grad,
        "qcoef": qcoef,
        "hlin": hlin,
        "hpairs": np.array(pairs, dtype=np.int64),
        "monoq": mono_matrix(grid, 2, p),
        "grid": grid,
        "s_idx": np.nonzero(fval == 0)[0],
    }


def build_scan_plan(kind: str, polys, p: int, n: int, with_root_table=True) -> ScanPlan:
    nv = len(polys[0].names)
    m = nv - 1
    deg = max(f.weighted_degree() for f in polys)
    plan = ScanPlan(
        kind=kind,
        p=p,
        n=n,
        nvars=nv,
        m=m,
        defs=[poly_arrays(f) for f in polys],
        charts=[[build_polar_chart(f, piv) for piv in range(nv)] for f in polys],
        powtab=pow_table(p, deg + 1),
        chitab=chi_table(p),
        vreps=projective_reps(m, p),
        prefixes=prefix_reps(m, p),
    )
    if kind == "dp2":
        plan.extra["conv11"] = conv_table(m, 1, 1)
        plan.extra["conv12"] = conv_table(m, 1, 2)
        plan.extra["conv22"] = conv_table(m, 2, 2)
        plan.extra["conv33"] = conv_table(m, 3, 3)
        plan.extra["conv24"] = conv_table(m, 2, 4)
        for k in range(1, 7):
            plan.extra[f"mexp{k}"] = mono_exps_array(m, k)
        # slice the cubic/quartic monomials by the degree of the last coordinate
        for name, k in (("e3", 3), ("e4", 4)):
            monos = mono_list(m, k)
            degs = np.array([e[-1] for e in monos], dtype=np.int64)
            subs = np.empty(len(monos), dtype=np.int64)
            for i, e in enumerate(monos):
                subs[i] = mono_index(m - 1, k - e[-1])[e[:-1]]
            plan.extra[f"{name}_lastdeg"] = degs
            plan.extra[f"{name}_sub"] = subs
        for k in range(0, 5):
            plan.extra[f"pref_mexp{k}"] = mono_exps_array(m - 1, k)
        if with_root_table:
            plan.root_counts, plan.root_vals = cubic_root_table(p)
    else:
        for k in range(1, deg + 1):
            plan.extra[f"mexp{k}"] = mono_exps_array(m, k)
    return plan
