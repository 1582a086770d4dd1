# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled counting kernels.

The per-point direction loops of the hypersurface and intersection scans
run as typed C code here: pivot search, solution-plane parameterization,
and staged form evaluation never touch python objects. Monomial values
are chained degree by degree (one multiply each) and stay below p^3, so
accumulators fit int64 exactly without per-term reduction. Plan
construction and the already block-vectorized kernels are shared with
the numpy backend, so both backends return identical arrays for
identical plans.
"""

import numpy as np

cimport numpy as cnp

from . import plans
from .pyback import (
    BLOCK,
    chart_free_indices,
    chart_sizes,
    chi_cover_stats,
    dp2_scan,
    hom_cover_quartic,
    hom_cover_sextic,
    hom_trilinear,
    staged_find_zero,
    staged_zero_count,
    weight_one_pivots,
    _block_points,
)

cnp.import_array()

DEF MAXM = 12
DEF MAXN2 = 78
DEF MAXN3 = 364


cdef void _eval_terms_block(const long[:, ::1] pts,
                            const long[:, ::1] exps, const long[::1] coeffs,
                            const long[:, ::1] powtab, long p,
                            long[::1] out) nogil:
    """Values of a term-array polynomial on a point block, reduced mod p.

    Terms accumulate without intermediate reduction: each factor is a
    reduced power, so a term stays below p^(degree+1) and the point sum
    below nterms * p^(degree+1), checked against int64 by the caller.
    """
    cdef long i, t, k, e, term, acc
    cdef long npts = pts.shape[0]
    cdef long nt = exps.shape[0]
    cdef long nv = pts.shape[1]
    for i in range(npts):
        acc = 0
        for t in range(nt):
            term = coeffs[t]
            for k in range(nv):
                e = exps[t, k]
                if e:
                    term *= powtab[pts[i, k], e]
            acc += term
        out[i] = acc % p


cdef long _count_pair_on_reps(const long* reps, long nr,
                              const long* fill, long nfill, long piv,
                              const long* coeffs_lin, long scale,
                              const long* ca, const long* cb,
                              const long* var1,
                              const long* var2, const long* sub2,
                              const long* var3, const long* sub3,
                              bint second_is_cubic,
                              long m, long n2, long n3, long p) nogil:
    """Count directions where the staged forms both vanish.

    Directions come from reps (nr rows of width nfill): column j maps to
    coordinate fill[j], and coordinate piv (if >= 0) is solved from the
    linear relation coeffs_lin with inverse-pivot factor scale. ca is a
    quadric in slot order; cb is a cubic when second_is_cubic else
    another quadric.
    """
    cdef long r, j, s, acc, count = 0
    cdef const long* rep
    cdef long v[MAXM]
    cdef long vals1[MAXM]
    cdef long vals2[MAXN2]
    cdef long vals3[MAXN3]
    for r in range(nr):
        rep = reps + r * nfill
        for j in range(m):
            v[j] = 0
        for j in range(nfill):
            v[fill[j]] = rep[j]
        if piv >= 0:
            acc = 0
            for j in range(nfill):
                acc += rep[j] * coeffs_lin[fill[j]]
            acc %= p
            v[piv] = ((p - acc) * scale) % p
        for j in range(m):
            vals1[j] = v[var1[j]]
        for j in range(n2):
            vals2[j] = v[var2[j]] * vals1[sub2[j]]
        acc = 0
        for s in range(n2):
            if ca[s]:
                acc += ca[s] * vals2[s]
        if acc % p:
            continue
        acc = 0
        if second_is_cubic:
            for j in range(n3):
                vals3[j] = v[var3[j]] * vals2[sub3[j]]
            for s in range(n3):
                if cb[s]:
                    acc += cb[s] * vals3[s]
        else:
            for s in range(n2):
                if cb[s]:
                    acc += cb[s] * vals2[s]
        if acc % p == 0:
            count += 1
    return count


cdef long _count_pair_two_pivots(const long* reps, long nr,
                                 const long* fill, long nfill,
                                 long pa, const long* ra, long inv_ra,
                                 long pb, const long* rb, long inv_rb,
                                 const long* ca, const long* cb,
                                 const long* var1,
                                 const long* var2, const long* sub2,
                                 long m, long n2, long p) nogil:
    """Same count with two coordinates solved from two linear relations.

    rb must already be reduced so that rb[pa] == 0: coordinate pb is
    solved first from rb, then pa from ra using every other coordinate.
    Both forms are quadrics.
    """
    cdef long r, j, s, acc, count = 0
    cdef const long* rep
    cdef long v[MAXM]
    cdef long vals1[MAXM]
    cdef long vals2[MAXN2]
    for r in range(nr):
        rep = reps + r * nfill
        for j in range(m):
            v[j] = 0
        for j in range(nfill):
            v[fill[j]] = rep[j]
        acc = 0
        for j in range(nfill):
            acc += rep[j] * rb[fill[j]]
        acc %= p
        v[pb] = ((p - acc) * inv_rb) % p
        acc = 0
        for j in range(m):
            if j != pa:
                acc += v[j] * ra[j]
        acc %= p
        v[pa] = ((p - acc) * inv_ra) % p
        for j in range(m):
            vals1[j] = v[var1[j]]
        for j in range(n2):
            vals2[j] = v[var2[j]] * vals1[sub2[j]]
        acc = 0
        for s in range(n2):
            if ca[s]:
                acc += ca[s] * vals2[s]
        if acc % p:
            continue
        acc = 0
        for s in range(n2):
            if cb[s]:
                acc += cb[s] * vals2[s]
        if acc % p == 0:
            count += 1
    return count


cdef void _dp3_rows(const long[:, ::1] g1, const long[:, ::1] g2,
                    const long[::1] g3,
                    const long[:, ::1] reps_sub, const long[:, ::1] vreps,
                    const long[::1] var1,
                    const long[::1] var2, const long[::1] sub2,
                    const long[::1] var3, const long[::1] sub3,
                    const long[::1] inv,
                    long m, long p, long[::1] out) nogil:
    cdef long row, i, j, piv, scale
    cdef long c1[MAXM]
    cdef long fill[MAXM]
    cdef long nrows = g1.shape[0]
    cdef long n2 = var2.shape[0]
    cdef long n3 = var3.shape[0]
    for row in range(nrows):
        # degree-1 slots run opposite to coordinate order
        for i in range(m):
            c1[i] = g1[row, m - 1 - i]
        piv = -1
        for i in range(m):
            if c1[i]:
                piv = i
                break
        if piv < 0:
            for i in range(m):
                fill[i] = i
            out[row] = _count_pair_on_reps(
                &vreps[0, 0], vreps.shape[0], fill, m, -1, c1, 0,
                &g2[row, 0], &g3[0], &var1[0], &var2[0], &sub2[0],
                &var3[0], &sub3[0], True, m, n2, n3, p)
        else:
            j = 0
            for i in range(m):
                if i != piv:
                    fill[j] = i
                    j += 1
            scale = inv[c1[piv]]
            out[row] = _count_pair_on_reps(
                &reps_sub[0, 0], reps_sub.shape[0], fill, m - 1, piv, c1, scale,
                &g2[row, 0], &g3[0], &var1[0], &var2[0], &sub2[0],
                &var3[0], &sub3[0], True, m, n2, n3, p)


cdef void _dp4_rows(const long[:, ::1] b1, const long[:, ::1] b2,
                    const long[::1] q1, const long[::1] q2,
                    const long[:, ::1] reps4, const long[:, ::1] reps5,
                    const long[:, ::1] vreps,
                    const long[::1] var1,
                    const long[::1] var2, const long[::1] sub2,
                    const long[::1] inv,
                    long m, long p, long[::1] out) nogil:
    cdef long row, i, j, piv, pa, pb, fac, nlin, any1, any2
    cdef long ra[MAXM]
    cdef long rb[MAXM]
    cdef long fill[MAXM]
    cdef long nrows = b1.shape[0]
    cdef long n2 = var2.shape[0]
    for row in range(nrows):
        # degree-1 slots run opposite to coordinate order
        any1 = 0
        any2 = 0
        for i in range(m):
            ra[i] = b1[row, m - 1 - i]
            rb[i] = b2[row, m - 1 - i]
            if ra[i]:
                any1 = 1
            if rb[i]:
                any2 = 1
        if any1 == 0 and any2:
            # keep the nonzero relation first, matching list-filter order
            for i in range(m):
                ra[i] = rb[i]
            any1 = 1
            any2 = 0
        nlin = any1 + any2
        if nlin == 2:
            pa = -1
            for i in range(m):
                if ra[i]:
                    pa = i
                    break
            fac = (rb[pa] * inv[ra[pa]]) % p
            any2 = 0
            for i in range(m):
                rb[i] = (rb[i] - fac * ra[i]) % p
                if rb[i] < 0:
                    rb[i] += p
                if rb[i]:
                    any2 = 1
            if any2 == 0:
                nlin = 1
        if nlin == 2:
            pb = -1
            for i in range(m):
                if rb[i]:
                    pb = i
                    break
            j = 0
            for i in range(m):
                if i != pa and i != pb:
                    fill[j] = i
                    j += 1
            out[row] = _count_pair_two_pivots(
                &reps4[0, 0], reps4.shape[0], fill, m - 2,
                pa, ra, inv[ra[pa]], pb, rb, inv[rb[pb]],
                &q1[0], &q2[0], &var1[0], &var2[0], &sub2[0], m, n2, p)
        elif nlin == 1:
            piv = -1
            for i in range(m):
                if ra[i]:
                    piv = i
                    break
            j = 0
            for i in range(m):
                if i != piv:
                    fill[j] = i
                    j += 1
            out[row] = _count_pair_on_reps(
                &reps5[0, 0], reps5.shape[0], fill, m - 1, piv, ra, inv[ra[piv]],
                &q1[0], &q2[0], &var1[0], &var2[0], &sub2[0],
                &var2[0], &sub2[0], False, m, n2, n2, p)
        else:
            for i in range(m):
                fill[i] = i
            out[row] = _count_pair_on_reps(
                &vreps[0, 0], vreps.shape[0], fill, m, -1, ra, 0,
                &q1[0], &q2[0], &var1[0], &var2[0], &sub2[0],
                &var2[0], &sub2[0], False, m, n2, n2, p)


def _mono_chains(m, top_degree):
    """Contiguous (var, sub) recipes for degrees 1..top_degree."""
    out = []
    for k in range(1, top_degree + 1):
        var, sub = plans.mono_build_recipe(m, k)
        out.append((np.ascontiguousarray(var), np.ascontiguousarray(sub)))
    return out


def _check_limits(m, p, top_degree):
    if m > MAXM:
        raise ValueError(f"compiled scan supports at most {MAXM} coordinates")
    # exactness: slot count times p^(degree+1) must stay inside int64
    nslots = len(plans.mono_list(m, top_degree))
    if nslots * p ** (top_degree + 1) >= 2**62:
        raise ValueError("prime too large for mod-free accumulation")


def _surface_vals(exps, coeffs, pts, p, powtab):
    """Block values of one defining polynomial, compiled when exact."""
    nt = len(coeffs)
    deg = int(exps.sum(axis=1).max()) if nt else 0
    if nt and nt * p ** (deg + 1) < 2**62:
        out = np.empty(pts.shape[0], dtype=np.int64)
        _eval_terms_block(pts, exps, coeffs, powtab, p, out)
        return out
    return plans.eval_on_points(exps, coeffs, pts, p, powtab)


def dp3_scan(plan):
    """Fiber-size scan for cubic hypersurface models (compiled rows).

    Returns (on_x, counts): counts is -1 off the hypersurface; on it,
    counts is the number of projective directions solving all three layers.
    """
    p, nv, m = plan.p, plan.nvars, plan.m
    _check_limits(m, p, 3)
    powtab = plan.powtab
    fexps, fcoeffs = plan.defs[0]
    n2 = len(plans.mono_list(m, 2))
    (var1, _), (var2, sub2), (var3, sub3) = _mono_chains(m, 3)
    inv = plans.inv_table(p)
    reps_sub = np.ascontiguousarray(plans.projective_reps(m - 1, p))
    vreps = np.ascontiguousarray(plan.vreps)
    npts = sum(chart_sizes(nv, (1,) * nv, p))
    on_x = np.zeros(npts, dtype=bool)
    counts_all = np.full(npts, -1, dtype=np.int64)
    offset = 0
    for pivot in range(nv):
        chart = plan.charts[0][pivot]
        free = chart_free_indices(nv, (1,) * nv, pivot)
        size = p ** len(free)
        for start in range(0, size, BLOCK):
            stop = min(size, start + BLOCK)
            pts = _block_points(nv, free, pivot, p, start, stop)
            vals = _surface_vals(fexps, fcoeffs, pts, p, powtab)
            rows = np.nonzero(vals == 0)[0]
            on_x[offset + start + rows] = True
            if rows.size == 0:
                continue
            sub = pts[rows]
            g1 = np.ascontiguousarray(
                plans.eval_layer_program(chart.progs[1], sub, p, m, powtab))
            g2 = np.ascontiguousarray(
                plans.eval_layer_program(chart.progs[2], sub, p, n2, powtab))
            g3 = np.ascontiguousarray(chart.const_top)
            out = np.zeros(rows.size, dtype=np.int64)
            _dp3_rows(g1, g2, g3, reps_sub, vreps,
                      var1, var2, sub2, var3, sub3, inv, m, p, out)
            counts_all[offset + start + rows] = out
        offset += size
    return on_x, counts_all


def dp4_scan(plan):
    """Fiber-size scan for intersections of two quadrics (compiled rows)."""
    p, nv, m = plan.p, plan.nvars, plan.m
    _check_limits(m, p, 2)
    powtab = plan.powtab
    n2 = len(plans.mono_list(m, 2))
    (var1, _), (var2, sub2) = _mono_chains(m, 2)
    inv = plans.inv_table(p)
    reps4 = np.ascontiguousarray(plans.projective_reps(m - 2, p))
    reps5 = np.ascontiguousarray(plans.projective_reps(m - 1, p))
    vreps = np.ascontiguousarray(plan.vreps)
    npts = sum(chart_sizes(nv, (1,) * nv, p))
    on_x = np.zeros(npts, dtype=bool)
    counts_all = np.full(npts, -1, dtype=np.int64)
    offset = 0
    for pivot in range(nv):
        chart1 = plan.charts[0][pivot]
        chart2 = plan.charts[1][pivot]
        free = chart_free_indices(nv, (1,) * nv, pivot)
        size = p ** len(free)
        for start in range(0, size, BLOCK):
            stop = min(size, start + BLOCK)
            pts = _block_points(nv, free, pivot, p, start, stop)
            v1 = _surface_vals(plan.defs[0][0], plan.defs[0][1], pts, p, powtab)
            v2 = _surface_vals(plan.defs[1][0], plan.defs[1][1], pts, p, powtab)
            rows = np.nonzero((v1 == 0) & (v2 == 0))[0]
            on_x[offset + start + rows] = True
            if rows.size == 0:
                continue
            sub = pts[rows]
            b1 = np.ascontiguousarray(
                plans.eval_layer_program(chart1.progs[1], sub, p, m, powtab))
            b2 = np.ascontiguousarray(
                plans.eval_layer_program(chart2.progs[1], sub, p, m, powtab))
            q1 = np.ascontiguousarray(chart1.const_top)
            q2 = np.ascontiguousarray(chart2.const_top)
            out = np.zeros(rows.size, dtype=np.int64)
            _dp4_rows(b1, b2, q1, q2, reps4, reps5, vreps,
                      var1, var2, sub2, inv, m, p, out)
            counts_all[offset + start + rows] = out
        offset += size
    return on_x, counts_all


cdef long _hom_pairs_both_dots(const long* spts, const long* grads, long ng,
                               long ns, long nv, long p) nogil:
    """Ordered pair count when each poly checks both directed dot products.

    The condition set for (a, b) is then literally the same as for (b, a),
    so the diagonal plus twice the upper triangle gives the ordered total.
    Entries are reduced mod p, so each dot stays below nv * p**2 and needs a
    single final reduction.
    """
    cdef long a, b, k, j, acc, total = 0
    cdef const long* sa
    cdef const long* sb
    cdef const long* ga
    cdef const long* gb
    cdef bint ok
    for a in range(ns):
        sa = spts + a * nv
        ok = True
        for k in range(ng):
            ga = grads + (k * ns + a) * nv
            acc = 0
            for j in range(nv):
                acc += sa[j] * ga[j]
            if acc % p:
                ok = False
                break
        if ok:
            total += 1
        for b in range(a + 1, ns):
            sb = spts + b * nv
            ok = True
            for k in range(ng):
                ga = grads + (k * ns + a) * nv
                acc = 0
                for j in range(nv):
                    acc += sb[j] * ga[j]
                if acc % p:
                    ok = False
                    break
                gb = grads + (k * ns + b) * nv
                acc = 0
                for j in range(nv):
                    acc += gb[j] * sa[j]
                if acc % p:
                    ok = False
                    break
            if ok:
                total += 2
    return total


cdef long _hom_pairs_one_dot(const long* spts, const long* grads, long ng,
                             long ns, long nv, long p) nogil:
    """Ordered pair count when each poly checks only <grad f(A), B>."""
    cdef long a, b, k, j, acc, total = 0
    cdef const long* sb
    cdef const long* ga
    cdef bint ok
    for a in range(ns):
        for b in range(ns):
            sb = spts + b * nv
            ok = True
            for k in range(ng):
                ga = grads + (k * ns + a) * nv
                acc = 0
                for j in range(nv):
                    acc += sb[j] * ga[j]
                if acc % p:
                    ok = False
                    break
            if ok:
                total += 1
    return total


def hom_pairs(plan_dict):
    """Raw tuple count for degree-1 maps by pair enumeration on the zero set."""
    cdef long p = plan_dict["p"]
    s_pts = np.ascontiguousarray(plan_dict["s_pts"], dtype=np.int64)
    stacked = np.ascontiguousarray(
        np.stack(plan_dict["grads"], axis=0), dtype=np.int64)
    cdef bint symmetric = plan_dict["symmetric"]
    cdef long[:, ::1] sview = s_pts
    cdef long[:, :, ::1] gview = stacked
    cdef long ns = sview.shape[0]
    cdef long nv = sview.shape[1]
    cdef long ng = gview.shape[0]
    cdef long raw
    with nogil:
        if symmetric:
            raw = _hom_pairs_one_dot(&sview[0, 0], &gview[0, 0, 0], ng,
                                     ns, nv, p)
        else:
            raw = _hom_pairs_both_dots(&sview[0, 0], &gview[0, 0, 0], ng,
                                       ns, nv, p)
    return raw - 1
