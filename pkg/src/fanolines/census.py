"""Point counting and cross-prime slope estimation.

Canonical enumeration of a weighted projective space over F_p: charts by
the first nonzero weight-1 coordinate (set to 1, earlier weight-1
coordinates 0, later and heavier coordinates free), charts in ascending
pivot order, free coordinates odometer-style with the last one fastest.
Strata where every weight-1 coordinate vanishes come after all charts;
only the single-heavy-variable case (one extra point) is supported there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ._kernels import impl, pyback
from ._kernels.plans import build_scan_plan, poly_arrays
from .field import PrimeField
from .poly import WeightedPoly


def weight_one_pivots(weights):
    return [i for i, w in enumerate(weights) if w == 1]


def heavy_indices(weights):
    return [i for i, w in enumerate(weights) if w > 1]


def chart_free_indices(nvars, weights, pivot):
    return [i for i in range(nvars) if (weights[i] == 1 and i > pivot) or weights[i] > 1]


def heavy_tail_points(weights):
    """Points of the all-light-zero strata, for rings with one heavy variable."""
    heavy = heavy_indices(weights)
    if not heavy:
        return []
    if len(heavy) == 1:
        pt = [0] * len(weights)
        pt[heavy[0]] = 1
        return [tuple(pt)]
    raise NotImplementedError("enumeration with several heavy variables")


def space_size(weights, p: int) -> int:
    total = 0
    for pivot in weight_one_pivots(weights):
        total += p ** len(chart_free_indices(len(weights), weights, pivot))
    return total + len(heavy_tail_points(weights))


def enumerate_points(weights, p: int):
    """Yield canonical representatives in enumeration order."""
    nv = len(weights)
    for pivot in weight_one_pivots(weights):
        free = chart_free_indices(nv, weights, pivot)
        nf = len(free)
        for rank in range(p**nf):
            pt = [0] * nv
            pt[pivot] = 1
            r = rank
            for j in range(nf - 1, -1, -1):
                pt[free[j]] = r % p
                r //= p
            yield tuple(pt)
    for pt in heavy_tail_points(weights):
        yield pt


def index_to_point(idx: int, weights, p: int):
    nv = len(weights)
    for pivot in weight_one_pivots(weights):
        free = chart_free_indices(nv, weights, pivot)
        size = p ** len(free)
        if idx < size:
            pt = [0] * nv
            pt[pivot] = 1
            r = idx
            for j in range(len(free) - 1, -1, -1):
                pt[free[j]] = r % p
                r //= p
            return tuple(pt)
        idx -= size
    tail = heavy_tail_points(weights)
    if idx < len(tail):
        return tail[idx]
    raise IndexError("point index out of range")


def point_to_index(pt, weights, p: int) -> int:
    nv = len(weights)
    offset = 0
    for pivot in weight_one_pivots(weights):
        free = chart_free_indices(nv, weights, pivot)
        if pt[pivot] == 1 and all(
            pt[i] == 0 for i in range(nv) if weights[i] == 1 and i < pivot
        ):
            rank = 0
            for v in free:
                rank = rank * p + pt[v] % p
            return offset + rank
        offset += p ** len(free)
    tail = heavy_tail_points(weights)
    for k, t in enumerate(tail):
        if tuple(pt) == t:
            return offset + k
    raise ValueError(f"{pt} is not a canonical representative")


def canonical_rep(point, weights, field: PrimeField):
    """Scale a nonzero point to its canonical representative."""
    p = field.p
    pt = [x % p for x in point]
    piv = next(
        (i for i in weight_one_pivots(weights) if pt[i] != 0),
        None,
    )
    if piv is None:
        heavy = heavy_indices(weights)
        if len(heavy) == 1 and pt[heavy[0]] != 0:
            out = [0] * len(pt)
            out[heavy[0]] = 1
            return tuple(out)
        raise ValueError("no canonical representative (zero or deep stratum point)")
    lam = field.inv(pt[piv])
    return tuple(
        (x * pow(lam, weights[i], p)) % p for i, x in enumerate(pt)
    )


@dataclass
class ModelCount:
    p: int
    total: int
    detail: dict


def count_model_points(inst) -> ModelCount:
    """Rational points of the model itself, by cover character sums or
    direct staged counting."""
    if inst.field is None:
        raise ValueError("reduce the instance first")
    p = inst.field.p
    if inst.kind in ("dp3", "dp4"):
        eqs = [poly_arrays(f) for f in inst.cone_polys()]
        nv = len(inst.cone_polys()[0].names)
        total = impl.staged_zero_count(eqs, nv, (1,) * nv, p)
        return ModelCount(p=p, total=total, detail={"method": "staged"})
    cover = inst.cover_form()
    exps, coeffs = poly_arrays(cover)
    nplus, nzero, nminus = impl.chi_cover_stats(
        exps, coeffs, len(cover.names), cover.weights, p
    )
    total = 2 * nplus + nzero
    detail = {
        "method": "character-sum",
        "base_plus": nplus,
        "base_zero": nzero,
        "base_minus": nminus,
    }
    if inst.kind == "dp1":
        total += 1
        detail["vertex_fiber"] = 1
    return ModelCount(p=p, total=total, detail=detail)


def count_scheme_points(equations, names, weights, field: PrimeField) -> int:
    """Rational points of V(equations) in the weighted projective space.

    Degree-1 equations on unweighted rings are substituted away first (each
    one cuts the ambient space to a smaller projective space), so only
    genuinely nonlinear systems reach the counting kernels.
    """
    p = field.p
    eqs = [f for f in equations if not f.is_zero()]
    cur_names, cur_weights = tuple(names), tuple(weights)
    if all(w == 1 for w in cur_weights):
        while True:
            lin = next((f for f in eqs if f.weighted_degree() == 1), None)
            if lin is None:
                break
            piv = next(i for i in range(len(cur_names)) if lin.degree_in(i) > 0)
            coef = 0
            for e, c in lin.sorted_terms():
                if e[piv]:
                    coef = c
                    break
            x_piv = WeightedPoly.variable(cur_names, cur_weights, piv, field)
            image = x_piv - lin * field.inv(coef)
            keep = [nm for k, nm in enumerate(cur_names) if k != piv]
            new_eqs = []
            for f in eqs:
                if f is lin:
                    continue
                g = f.substitute_variable(piv, image)
                if keep:
                    g = g.restrict_to(keep)
                if not g.is_zero():
                    new_eqs.append(g)
            eqs = new_eqs
            cur_names = tuple(keep)
            cur_weights = (1,) * len(cur_names)
            if not cur_names:
                return 0
    if not eqs:
        return space_size(cur_weights, p)
    nv = len(eqs[0].names)
    cur_weights = eqs[0].weights
    arrays = [poly_arrays(f) for f in eqs]
    total = impl.staged_zero_count(arrays, nv, cur_weights, p)
    for pt in heavy_tail_points(cur_weights):
        if all(f.evaluate(pt) == 0 for f in eqs):
            total += 1
    return total


def count_fiber_scheme(scheme, p: int | None = None) -> int:
    """Line-space count of a fiber scheme, transversal slices included."""
    field = scheme.field
    eqs = list(scheme.equations)
    if scheme.transversal_var is not None:
        zero = WeightedPoly.zero(scheme.names, scheme.weights, field)
        eqs = [f.substitute_variable(scheme.transversal_var, zero) for f in eqs]
        keep = [n for i, n in enumerate(scheme.names) if i != scheme.transversal_var]
        eqs = [f.restrict_to(keep) for f in eqs]
        names = tuple(keep)
        weights = tuple(
            w for i, w in enumerate(scheme.weights) if i != scheme.transversal_var
        )
    else:
        names, weights = scheme.names, scheme.weights
    return count_scheme_points(eqs, names, weights, field)


@dataclass
class IncidenceCount:
    p: int
    incidences: int
    points_on_model: int
    per_line_unit: float

    def as_dict(self) -> dict:
        return {
            "p": self.p,
            "incidences": self.incidences,
            "points_on_model": self.points_on_model,
            "per_line_unit": self.per_line_unit,
        }


def count_line_incidences(inst) -> IncidenceCount:
    """Sum of per-point line counts over all rational points of the model.

    Every line carries p+1 points, so incidences/(p+1) estimates the
    number of lines; only the hypersurface and intersection kinds scan
    their whole model directly.
    """
    if inst.field is None:
        raise ValueError("reduce the instance first")
    if inst.kind not in ("dp3", "dp4"):
        raise ValueError("line-incidence census scans dp3 or dp4 models")
    p = inst.field.p
    plan = build_scan_plan(inst.kind, list(inst.polys.values()), p, inst.n)
    scan = impl.dp3_scan if inst.kind == "dp3" else impl.dp4_scan
    on_x, counts = scan(plan)
    inc = int(counts[on_x].sum())
    return IncidenceCount(
        p=p,
        incidences=inc,
        points_on_model=int(on_x.sum()),
        per_line_unit=inc / (p + 1),
    )


@dataclass
class SlopeFit:
    slope: float | None
    intercept: float | None
    residual_rms: float | None
    kappa: float | None
    rounded_dim: int | None
    stable: bool
    used: list
    skipped: list


def slope_fit(pairs, stable_rms: float = 0.5) -> SlopeFit:
    """Least squares of log(count) on log(p); kappa measures the constant."""
    used = [(p, c) for p, c in pairs if c > 0]
    skipped = [(p, c) for p, c in pairs if c <= 0]
    if len(used) < 2:
        return SlopeFit(
            slope=None,
            intercept=None,
            residual_rms=None,
            kappa=None,
            rounded_dim=None,
            stable=False,
            used=used,
            skipped=skipped,
        )
    xs = [math.log(p) for p, _ in used]
    ys = [math.log(c) for _, c in used]
    k = len(xs)
    xbar = sum(xs) / k
    ybar = sum(ys) / k
    sxx = sum((x - xbar) ** 2 for x in xs)
    sxy = sum((x - xbar) * (y - ybar) for x, y in zip(xs, ys))
    slope = sxy / sxx
    intercept = ybar - slope * xbar
    resid = [y - (intercept + slope * x) for x, y in zip(xs, ys)]
    rms = math.sqrt(sum(r * r for r in resid) / k)
    dim = int(math.floor(slope + 0.5))
    logs = [math.log(c) - dim * math.log(p) for p, c in used]
    kappa = math.exp(sum(logs) / len(logs))
    return SlopeFit(
        slope=slope,
        intercept=intercept,
        residual_rms=rms,
        kappa=kappa,
        rounded_dim=dim,
        stable=rms <= stable_rms,
        used=used,
        skipped=skipped,
    )
