"""Pure numpy counting backend.

Mirrors the compiled backend exactly: same plans in, same numbers out.
Matrix products run in float32 where the bound slot_count * (p-1)^2 stays
below 2^24, which keeps every intermediate integer exact.
"""

from __future__ import annotations

import numpy as np

from . import plans

BLOCK = 1 << 14


def weight_one_pivots(weights):
    return [i for i, w in enumerate(weights) if w == 1]


def chart_free_indices(nvars, weights, pivot):
    return [i for i in range(nvars) if (weights[i] == 1 and i > pivot) or weights[i] > 1]


def chart_sizes(nvars, weights, p):
    return [p ** len(chart_free_indices(nvars, weights, piv)) for piv in weight_one_pivots(weights)]


def _block_points(nvars, free, pivot, p, start, stop):
    pts = np.zeros((stop - start, nvars), dtype=np.int64)
    pts[:, pivot] = 1
    ranks = np.arange(start, stop, dtype=np.int64)
    nf = len(free)
    for j, v in enumerate(free):
        pts[:, v] = (ranks // p ** (nf - 1 - j)) % p
    return pts


def _max_exp(eqs):
    best = 1
    for exps, _ in eqs:
        if exps.size:
            best = max(best, int(exps.max()))
    return best


def staged_zero_count(eqs, nvars, weights, p, pivots=None, block=BLOCK):
    """Points in the chart cover with every equation zero, stage-filtered."""
    powtab = plans.pow_table(p, _max_exp(eqs))
    total = 0
    for pivot in pivots if pivots is not None else weight_one_pivots(weights):
        free = chart_free_indices(nvars, weights, pivot)
        size = p ** len(free)
        for start in range(0, size, block):
            pts = _block_points(nvars, free, pivot, p, start, min(size, start + block))
            alive = np.arange(pts.shape[0])
            for exps, coeffs in eqs:
                vals = plans.eval_on_points(exps, coeffs, pts[alive], p, powtab)
                alive = alive[vals == 0]
                if alive.size == 0:
                    break
            total += int(alive.size)
    return total


def staged_find_zero(eqs, nvars, weights, p, pivots=None, block=BLOCK):
    """First chart point (canonical order) where every equation vanishes."""
    powtab = plans.pow_table(p, _max_exp(eqs))
    for pivot in pivots if pivots is not None else weight_one_pivots(weights):
        free = chart_free_indices(nvars, weights, pivot)
        size = p ** len(free)
        for start in range(0, size, block):
            pts = _block_points(nvars, free, pivot, p, start, min(size, start + block))
            alive = np.arange(pts.shape[0])
            for exps, coeffs in eqs:
                vals = plans.eval_on_points(exps, coeffs, pts[alive], p, powtab)
                alive = alive[vals == 0]
                if alive.size == 0:
                    break
            if alive.size:
                return tuple(int(x) for x in pts[alive[0]])
    return None


def chi_cover_stats(fexps, fcoeffs, nvars, weights, p, block=BLOCK):
    """Tally of chi(-f) over the weight-1 chart cover: (plus, zero, minus)."""
    powtab = plans.pow_table(p, _max_exp([(fexps, fcoeffs)]))
    chitab = plans.chi_table(p)
    nplus = nzero = nminus = 0
    for pivot in weight_one_pivots(weights):
        free = chart_free_indices(nvars, weights, pivot)
        size = p ** len(free)
        for start in range(0, size, block):
            pts = _block_points(nvars, free, pivot, p, start, min(size, start + block))
            vals = plans.eval_on_points(fexps, fcoeffs, pts, p, powtab)
            chi = chitab[(-vals) % p]
            nplus += int(np.count_nonzero(chi == 1))
            nzero += int(np.count_nonzero(chi == 0))
            nminus += int(np.count_nonzero(chi == -1))
    return nplus, nzero, nminus


def _conv(table, a_mat, b_mat, nout, p):
    out = np.zeros((a_mat.shape[0], nout), dtype=np.int64)
    for i, j, o in table:
        out[:, o] += a_mat[:, i] * b_mat[:, j]
    return out % p


def _conv_const(table, a_mat, b_vec, nout, p):
    out = np.zeros((a_mat.shape[0], nout), dtype=np.int64)
    for i, j, o in table:
        if b_vec[j]:
            out[:, o] += a_mat[:, i] * int(b_vec[j])
    return out % p


def _zero_mask_matmul(vm_f32, coef_rows, p):
    """(vm @ coef.T) % p == 0 for small exact float32 products."""
    prod = vm_f32 @ coef_rows.astype(np.float32).T
    return (prod.astype(np.int64) % p) == 0


def _vm_cache(plan, degrees):
    cache = plan.extra.setdefault("_vm_cache", {})
    for k in degrees:
        if k not in cache:
            vm = plans.mono_matrix(plan.vreps, k, plan.p)
            cache[k] = vm.astype(np.float32)
    return cache


def dp2_scan(plan, block=BLOCK):
    """Fiber-size scan for quartic double covers.

    Returns (chi, counts) over the canonical base enumeration. Counts are
    direction counts of the even-multiplicity family through each base
    point, so they are defined for every base row, lift or no lift; chi
    records whether the base point carries 2, 1 or 0 surface points.
    """
    p, nv, m = plan.p, plan.nvars, plan.m
    powtab, chitab = plan.powtab, plan.chitab
    fexps, fcoeffs = plan.defs[0]
    n1 = m
    n2 = len(plans.mono_list(m, 2))
    n3 = len(plans.mono_list(m, 3))
    n4 = len(plans.mono_list(m, 4))
    n6 = len(plans.mono_list(m, 6))
    conv11 = plan.extra["conv11"]
    conv12 = plan.extra["conv12"]
    conv22 = plan.extra["conv22"]
    conv33 = plan.extra["conv33"]
    conv24 = plan.extra["conv24"]
    vm = _vm_cache(plan, (1, 3, 4, 6))
    npts = sum(chart_sizes(nv, (1,) * nv, p))
    chi_all = np.empty(npts, dtype=np.int8)
    counts_all = np.full(npts, -1, dtype=np.int64)
    offset = 0
    for pivot in range(nv):
        chart = plan.charts[0][pivot]
        free = chart_free_indices(nv, (1,) * nv, pivot)
        size = p ** len(free)
        for start in range(0, size, block):
            stop = min(size, start + block)
            pts = _block_points(nv, free, pivot, p, start, stop)
            g0 = plans.eval_on_points(fexps, fcoeffs, pts, p, powtab)
            chi = chitab[(-g0) % p]
            seg = slice(offset + start, offset + stop)
            chi_all[seg] = chi
            cb = np.full(stop - start, -1, dtype=np.int64)
            rows_off = np.nonzero(chi != 0)[0]
            rows_on = np.nonzero(chi == 0)[0]
            if rows_off.size:
                sub = pts[rows_off]
                c = g0[rows_off]
                g1 = plans.eval_layer_program(chart.progs[1], sub, p, n1, powtab)
                g2 = plans.eval_layer_program(chart.progs[2], sub, p, n2, powtab)
                g3 = plans.eval_layer_program(chart.progs[3], sub, p, n3, powtab)
                g4 = chart.const_top
                cc = (c * c) % p
                u2 = _conv(conv11, g1, g1, n2, p)
                c12 = _conv(conv12, g1, g2, n3, p)
                # the cube of the linear layer reuses the lin x quad table
                c111 = _conv(conv12, g1, u2, n3, p)
                e3 = (8 * cc[:, None] * g3 + (p - 4) * c[:, None] * c12 + c111) % p
                w = (4 * c[:, None] * g2 + (p - 1) * u2) % p
                ccc = (cc * c) % p
                e4 = (64 * ccc[:, None] * g4[None, :] + (p - 1) * _conv(conv22, w, w, n4, p)) % p
                z3 = _zero_mask_matmul(vm[3], e3, p)
                z4 = _zero_mask_matmul(vm[4], e4, p)
                cb[rows_off] = (z3 & z4).sum(axis=0)
            if rows_on.size:
                sub = pts[rows_on]
                g1 = plans.eval_layer_program(chart.progs[1], sub, p, n1, powtab)
                g2 = plans.eval_layer_program(chart.progs[2], sub, p, n2, powtab)
                g3 = plans.eval_layer_program(chart.progs[3], sub, p, n3, powtab)
                g4 = chart.const_top
                s33 = _conv(conv33, g3, g3, n6, p)
                s24 = _conv_const(conv24, g2, g4, n6, p)
                s = (s33 + (p - 4) * s24) % p
                z1 = _zero_mask_matmul(vm[1], g1, p)
                z6 = _zero_mask_matmul(vm[6], s, p)
                cb[rows_on] = (z1 & z6).sum(axis=0)
            counts_all[seg] = cb
        offset += size
    return chi_all, counts_all


def _first_nonzero(vec):
    nz = np.nonzero(vec)[0]
    return int(nz[0]) if nz.size else -1


def dp3_scan(plan):
    """Fiber-size scan for cubic hypersurface models.

    Returns (on_x, counts): counts is -1 off the hypersurface; on it,
    counts is the number of projective directions solving all three layers.
    """
    p, nv, m = plan.p, plan.nvars, plan.m
    powtab = plan.powtab
    fexps, fcoeffs = plan.defs[0]
    n2 = len(plans.mono_list(m, 2))
    n3 = len(plans.mono_list(m, 3))
    inv = plans.inv_table(p)
    reps_sub = plans.projective_reps(m - 1, p)
    npts = sum(chart_sizes(nv, (1,) * nv, p))
    on_x = np.zeros(npts, dtype=bool)
    counts_all = np.full(npts, -1, dtype=np.int64)
    vm_full = None
    offset = 0
    for pivot in range(nv):
        chart = plan.charts[0][pivot]
        free = chart_free_indices(nv, (1,) * nv, pivot)
        size = p ** len(free)
        for start in range(0, size, BLOCK):
            stop = min(size, start + BLOCK)
            pts = _block_points(nv, free, pivot, p, start, stop)
            vals = plans.eval_on_points(fexps, fcoeffs, pts, p, powtab)
            rows = np.nonzero(vals == 0)[0]
            on_x[offset + start + rows] = True
            if rows.size == 0:
                continue
            sub = pts[rows]
            g1 = plans.eval_layer_program(chart.progs[1], sub, p, m, powtab)
            g2 = plans.eval_layer_program(chart.progs[2], sub, p, n2, powtab)
            g3 = chart.const_top
            for rlocal, ridx in enumerate(rows):
                # degree-1 slots run opposite to coordinate order
                row1 = g1[rlocal][::-1]
                row2 = g2[rlocal]
                piv = _first_nonzero(row1)
                if piv < 0:
                    v_pts = plan.vreps
                else:
                    others = [i for i in range(m) if i != piv]
                    scale = int(inv[row1[piv]])
                    v_pts = np.zeros((reps_sub.shape[0], m), dtype=np.int64)
                    v_pts[:, others] = reps_sub
                    v_pts[:, piv] = (-(reps_sub @ row1[others]) * scale) % p
                vm2 = plans.mono_matrix(v_pts, 2, p)
                q_vals = (vm2 @ row2) % p
                hits = np.nonzero(q_vals == 0)[0]
                if hits.size:
                    vm3 = plans.mono_matrix(v_pts[hits], 3, p)
                    c_vals = (vm3 @ g3) % p
                    counts_all[offset + start + ridx] = int(np.count_nonzero(c_vals == 0))
                else:
                    counts_all[offset + start + ridx] = 0
        offset += size
    return on_x, counts_all


def dp4_scan(plan):
    """Fiber-size scan for intersections of two quadrics."""
    p, nv, m = plan.p, plan.nvars, plan.m
    powtab = plan.powtab
    inv = plans.inv_table(p)
    reps4 = plans.projective_reps(m - 2, p)
    reps5 = plans.projective_reps(m - 1, p)
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
            v1 = plans.eval_on_points(plan.defs[0][0], plan.defs[0][1], pts, p, powtab)
            v2 = plans.eval_on_points(plan.defs[1][0], plan.defs[1][1], pts, p, powtab)
            rows = np.nonzero((v1 == 0) & (v2 == 0))[0]
            on_x[offset + start + rows] = True
            if rows.size == 0:
                continue
            sub = pts[rows]
            b1 = plans.eval_layer_program(chart1.progs[1], sub, p, m, powtab)
            b2 = plans.eval_layer_program(chart2.progs[1], sub, p, m, powtab)
            q1 = chart1.const_top
            q2 = chart2.const_top
            for rlocal, ridx in enumerate(rows):
                # degree-1 slots run opposite to coordinate order
                rows_lin = [
                    r[::-1].copy() for r in (b1[rlocal], b2[rlocal]) if r.any()
                ]
                if len(rows_lin) == 2:
                    pa = _first_nonzero(rows_lin[0])
                    fac = (rows_lin[1][pa] * inv[rows_lin[0][pa]]) % p
                    rows_lin[1] = (rows_lin[1] - fac * rows_lin[0]) % p
                    if not rows_lin[1].any():
                        rows_lin = rows_lin[:1]
                if len(rows_lin) == 2:
                    ra, rb = rows_lin
                    pa = _first_nonzero(ra)
                    pb = _first_nonzero(rb)
                    others = [i for i in range(m) if i not in (pa, pb)]
                    v_pts = np.zeros((reps4.shape[0], m), dtype=np.int64)
                    v_pts[:, others] = reps4
                    v_pts[:, pb] = (-(reps4 @ rb[others]) * int(inv[rb[pb]])) % p
                    acc = (v_pts @ ra) % p
                    v_pts[:, pa] = (-(acc - v_pts[:, pa] * ra[pa]) * int(inv[ra[pa]])) % p
                elif len(rows_lin) == 1:
                    ra = rows_lin[0]
                    pa = _first_nonzero(ra)
                    others = [i for i in range(m) if i != pa]
                    v_pts = np.zeros((reps5.shape[0], m), dtype=np.int64)
                    v_pts[:, others] = reps5
                    v_pts[:, pa] = (-(reps5 @ ra[others]) * int(inv[ra[pa]])) % p
                else:
                    v_pts = plan.vreps
                vm2 = plans.mono_matrix(v_pts, 2, p)
                g1_vals = (vm2 @ q1) % p
                hits = np.nonzero(g1_vals == 0)[0]
                if hits.size:
                    g2_vals = (vm2[hits] @ q2) % p
                    counts_all[offset + start + ridx] = int(np.count_nonzero(g2_vals == 0))
                else:
                    counts_all[offset + start + ridx] = 0
        offset += size
    return on_x, counts_all


def hom_pairs(plan_dict):
    """Raw tuple count for degree-1 maps by pair enumeration on the zero set."""
    p = plan_dict["p"]
    s_pts = plan_dict["s_pts"]
    grads = plan_dict["grads"]
    symmetric = plan_dict["symmetric"]
    ns = s_pts.shape[0]
    raw = 0
    for a in range(ns):
        mask = np.ones(ns, dtype=bool)
        for g in grads:
            mask &= (s_pts @ g[a]) % p == 0
            if not symmetric:
                mask &= (g @ s_pts[a]) % p == 0
        raw += int(np.count_nonzero(mask))
    return raw - 1


def _sqrt_count_quartic(n_mat, chi, invt, sqrtt, p):
    """Solutions w (3 coeffs) of w*w = n for each quartic row of n_mat."""
    n0, n1, n2, n3, n4 = (n_mat[:, k] for k in range(5))
    counts = np.zeros(n_mat.shape[0], dtype=np.int64)
    allz = (n0 == 0) & (n1 == 0) & (n2 == 0) & (n3 == 0) & (n4 == 0)
    counts[allz] = 1
    m0 = n0 != 0
    if np.any(m0):
        w0 = sqrtt[n0[m0]]
        ok = w0 != 0
        iw = invt[(2 * w0) % p]
        w1 = (n1[m0] * iw) % p
        w2 = ((n2[m0] - w1 * w1) % p * iw) % p
        ok &= (2 * w1 * w2) % p == n3[m0]
        ok &= (w2 * w2) % p == n4[m0]
        counts[np.nonzero(m0)[0][ok]] = 2
    m1 = (~m0) & (n1 == 0) & (n2 != 0)
    if np.any(m1):
        w1 = sqrtt[n2[m1]]
        ok = w1 != 0
        iw = invt[(2 * w1) % p]
        w2 = (n3[m1] * iw) % p
        ok &= (w2 * w2) % p == n4[m1]
        counts[np.nonzero(m1)[0][ok]] = 2
    m2 = (n0 == 0) & (n1 == 0) & (n2 == 0) & (n3 == 0) & (n4 != 0)
    if np.any(m2):
        counts[np.nonzero(m2)[0][chi[n4[m2]] == 1]] = 2
    return counts


def hom_cover_quartic(plan_dict):
    """Raw tuple count for degree-1 maps into the quartic double cover."""
    p = plan_dict["p"]
    fval = plan_dict["fval"]
    grad = plan_dict["grad"]
    qcoef = plan_dict["qcoef"]
    monoq = plan_dict["monoq"]
    chi, invt, sqrtt = plan_dict["chi"], plan_dict["inv"], plan_dict["sqrt"]
    grid = plan_dict["grid"]
    na = fval.shape[0]
    raw = 0
    n_mat = np.empty((na, 5), dtype=np.int64)
    n_mat[:, 4] = (-fval) % p
    for a in range(na):
        # polar coefficients: G1 = <grad f(A), B>, G2 = q_A(B), G3 = <grad f(B), A>
        g1 = (grid @ grad[a]) % p
        g2 = (monoq @ qcoef[a]) % p
        g3 = (grad @ grid[a]) % p
        n_mat[:, 0] = (-int(fval[a])) % p
        n_mat[:, 1] = (-g1) % p
        n_mat[:, 2] = (-g2) % p
        n_mat[:, 3] = (-g3) % p
        raw += int(_sqrt_count_quartic(n_mat, chi, invt, sqrtt, p).sum())
    # the all-zero tuple contributes exactly once (w = 0); drop it
    return raw - 1


def _sqrt_count_sextic(n_mat, chi, invt, sqrtt, p):
    """Solutions w (4 coeffs) of w*w = n for each sextic row of n_mat."""
    cols = [n_mat[:, k] for k in range(7)]
    n0, n1, n2, n3, n4, n5, n6 = cols
    counts = np.zeros(n_mat.shape[0], dtype=np.int64)
    allz = np.ones(n_mat.shape[0], dtype=bool)
    for c in cols:
        allz &= c == 0
    counts[allz] = 1
    m0 = n0 != 0
    if np.any(m0):
        w0 = sqrtt[n0[m0]]
        ok = w0 != 0
        iw = invt[(2 * w0) % p]
        w1 = (n1[m0] * iw) % p
        w2 = ((n2[m0] - w1 * w1) % p * iw) % p
        w3 = ((n3[m0] - 2 * w1 * w2) % p * iw) % p
        ok &= (w2 * w2 + 2 * w1 * w3) % p == n4[m0]
        ok &= (2 * w2 * w3) % p == n5[m0]
        ok &= (w3 * w3) % p == n6[m0]
        counts[np.nonzero(m0)[0][ok]] = 2
    m1 = (~m0) & (n1 == 0) & (n2 != 0)
    if np.any(m1):
        w1 = sqrtt[n2[m1]]
        ok = w1 != 0
        iw = invt[(2 * w1) % p]
        w2 = (n3[m1] * iw) % p
        w3 = ((n4[m1] - w2 * w2) % p * iw) % p
        ok &= (2 * w2 * w3) % p == n5[m1]
        ok &= (w3 * w3) % p == n6[m1]
        counts[np.nonzero(m1)[0][ok]] = 2
    m2 = (n0 == 0) & (n1 == 0) & (n2 == 0) & (n3 == 0) & (n4 != 0)
    if np.any(m2):
        w2 = sqrtt[n4[m2]]
        ok = w2 != 0
        iw = invt[(2 * w2) % p]
        w3 = (n5[m2] * iw) % p
        ok &= (w3 * w3) % p == n6[m2]
        counts[np.nonzero(m2)[0][ok]] = 2
    m3 = (n0 == 0) & (n1 == 0) & (n2 == 0) & (n3 == 0) & (n4 == 0) & (n5 == 0) & (n6 != 0)
    if np.any(m3):
        counts[np.nonzero(m3)[0][chi[n6[m3]] == 1]] = 2
    return counts


def hom_cover_sextic(plan_dict):
    """Raw tuple count for degree-1 maps into the weighted sextic cover."""
    p = plan_dict["p"]
    f4c = plan_dict["f4c"]
    f6c = plan_dict["f6c"]
    chi, invt, sqrtt = plan_dict["chi"], plan_dict["inv"], plan_dict["sqrt"]
    npairs = f4c.shape[0]
    raw = 0
    for y0 in range(p):
        for y1 in range(p):
            for y2 in range(p):
                y = (y0, y1, y2)
                ysq = [0] * 5
                for i in range(3):
                    for j in range(3):
                        ysq[i + j] = (ysq[i + j] + y[i] * y[j]) % p
                ycb = [0] * 7
                for i in range(3):
                    for j in range(5):
                        ycb[i + j] = (ycb[i + j] + y[i] * ysq[j]) % p
                n_mat = np.empty((npairs, 7), dtype=np.int64)
                for k in range(7):
                    acc = np.full(npairs, ycb[k], dtype=np.int64)
                    acc += f6c[:, k]
                    for i in range(3):
                        j = k - i
                        if 0 <= j <= 4:
                            acc += y[i] * f4c[:, j]
                    n_mat[:, k] = (-acc) % p
                raw += int(_sqrt_count_sextic(n_mat, chi, invt, sqrtt, p).sum())
    return raw - 1


def hom_trilinear(plan_dict):
    """Raw tuple count for degree-2 maps into a cubic hypersurface."""
    p = plan_dict["p"]
    nv = plan_dict["nv"]
    grid = plan_dict["grid"]
    fval = plan_dict["fval"]
    grad = plan_dict["grad"]
    qcoef = plan_dict["qcoef"]
    hlin = plan_dict["hlin"]
    hpairs = plan_dict["hpairs"]
    monoq = plan_dict["monoq"]
    s_idx = plan_dict["s_idx"]
    raw = 0
    qa_cache = {}
    ga_cache = {}
    for a_i in s_idx:
        ga_cache[a_i] = (grid @ grad[a_i]) % p
        qa_cache[a_i] = (monoq @ qcoef[a_i]) % p
    for c_i in s_idx:
        hc = np.zeros((nv, nv), dtype=np.int64)
        for col, (i, j) in enumerate(hpairs):
            hc[i, j] = hlin[c_i, col]
            hc[j, i] = hlin[c_i, col]
        g_c = grad[c_i]
        c_pt = grid[c_i]
        mask_c5 = (grid @ g_c) % p == 0
        qc_b = qa_cache[c_i]
        for a_i in s_idx:
            a_pt = grid[a_i]
            sc2 = int((grad[a_i] @ c_pt) % p)
            sc4 = int((g_c @ a_pt) % p)
            row = (a_pt @ hc) % p
            mask = (ga_cache[a_i] == 0) & mask_c5
            mask &= (qa_cache[a_i] + sc2) % p == 0
            mask &= (qc_b + sc4) % p == 0
            mask &= (fval + grid @ row) % p == 0
            raw += int(np.count_nonzero(mask))
    return raw - 1
