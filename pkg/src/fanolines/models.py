"""Del Pezzo models of degrees 1 to 4 over the integers or a prime field.

Degree 1: z^2 + y^3 + F4(x) y + F6(x) in P(1^n, 2, 3), data (F4, F6) on the
weight-1 variables. Degree 2: y^2 + F(x) in P(1^(n+1), 2), F quartic.
Degree 3: a cubic in P^(n+1). Degree 4: two quadrics in P^(n+2).
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field as dc_field

from ._kernels import impl
from ._kernels.plans import poly_arrays
from .field import PrimeField, is_prime
from .poly import WeightedPoly, monomial_exponents

KINDS = ("dp1", "dp2", "dp3", "dp4")

POLY_KEYS = {
    "dp1": ("F4", "F6"),
    "dp2": ("F",),
    "dp3": ("F",),
    "dp4": ("Q1", "Q2"),
}

POLY_DEGREES = {
    "dp1": {"F4": 4, "F6": 6},
    "dp2": {"F": 4},
    "dp3": {"F": 3},
    "dp4": {"Q1": 2, "Q2": 2},
}

MIN_N = {"dp1": 2, "dp2": 2, "dp3": 2, "dp4": 2}


def kind_degree(kind: str) -> int:
    return {"dp1": 1, "dp2": 2, "dp3": 3, "dp4": 4}[kind]


def data_ring(kind: str, n: int):
    """(names, weights) of the ring the defining polynomials live in."""
    if kind == "dp1":
        return tuple(f"x{i}" for i in range(n)), (1,) * n
    if kind == "dp2":
        return tuple(f"x{i}" for i in range(n + 1)), (1,) * (n + 1)
    if kind == "dp3":
        return tuple(f"x{i}" for i in range(n + 2)), (1,) * (n + 2)
    if kind == "dp4":
        return tuple(f"x{i}" for i in range(n + 3)), (1,) * (n + 3)
    raise ValueError(f"unknown kind {kind!r}")


def base_ring(kind: str, n: int):
    """Ring of the space the anticanonical double covers project to."""
    if kind == "dp1":
        return tuple(f"x{i}" for i in range(n)) + ("y",), (1,) * n + (2,)
    if kind == "dp2":
        return data_ring(kind, n)
    raise ValueError(f"kind {kind!r} has no cover base")


def ambient_ring(kind: str, n: int):
    if kind == "dp1":
        return tuple(f"x{i}" for i in range(n)) + ("y", "z"), (1,) * n + (2, 3)
    if kind == "dp2":
        return tuple(f"x{i}" for i in range(n + 1)) + ("y",), (1,) * (n + 1) + (2,)
    return data_ring(kind, n)


@dataclass
class DelPezzoInstance:
    kind: str
    n: int
    polys: dict
    field: PrimeField | None = None
    meta: dict = dc_field(default_factory=dict)

    @property
    def degree(self) -> int:
        return kind_degree(self.kind)

    def reduce_mod(self, p: int) -> "DelPezzoInstance":
        if self.field is not None:
            raise ValueError("instance is already over a field")
        check_admissible_prime(self.kind, p)
        fp = PrimeField(p)
        return DelPezzoInstance(
            kind=self.kind,
            n=self.n,
            polys={k: f.reduce_mod(fp) for k, f in self.polys.items()},
            field=fp,
            meta=dict(self.meta),
        )

    def cover_form(self) -> WeightedPoly:
        """The full cover polynomial on the base ring (dp1/dp2 only)."""
        names, weights = base_ring(self.kind, self.n)
        if self.kind == "dp1":
            f4 = self.polys["F4"].lift_to(names, weights, self.field)
            f6 = self.polys["F6"].lift_to(names, weights, self.field)
            y = WeightedPoly.variable(names, weights, len(names) - 1, self.field)
            return y * y * y + f4 * y + f6
        if self.kind == "dp2":
            return self.polys["F"]
        raise ValueError(f"kind {self.kind!r} has no cover form")

    def cone_polys(self) -> list:
        """Defining polynomial(s) on the full ambient ring."""
        names, weights = ambient_ring(self.kind, self.n)
        if self.kind == "dp1":
            f = self.cover_form().lift_to(names, weights, self.field)
            z = WeightedPoly.variable(names, weights, len(names) - 1, self.field)
            return [z * z + f]
        if self.kind == "dp2":
            f = self.polys["F"].lift_to(names, weights, self.field)
            y = WeightedPoly.variable(names, weights, len(names) - 1, self.field)
            return [y * y + f]
        if self.kind == "dp3":
            return [self.polys["F"]]
        return [self.polys["Q1"], self.polys["Q2"]]

    def branch_loci(self) -> dict:
        """Equations of the branch data (the covers' ramification sources)."""
        if self.kind == "dp2":
            return {"cover_branch": self.polys["F"]}
        if self.kind == "dp1":
            f4, f6 = self.polys["F4"], self.polys["F6"]
            disc = f4 * f4 * f4 * 4 + f6 * f6 * 27
            return {"cover_branch": self.cover_form(), "cubic_discriminant": disc}
        return {}


def check_admissible_prime(kind: str, p: int) -> None:
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if p == 2:
        raise ValueError("p = 2 is not supported (square-class arguments fail)")
    if kind == "dp1" and p == 3:
        raise ValueError("dp1 needs p >= 5 (the depressed cubic in y degenerates mod 3)")


def make_instance(kind: str, n: int, coeff_lists: dict, meta=None) -> DelPezzoInstance:
    """Build an integer instance from {key: {exps: coeff}} data, validated."""
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}")
    if n < MIN_N[kind]:
        raise ValueError(f"{kind} needs n >= {MIN_N[kind]}")
    names, weights = data_ring(kind, n)
    polys = {}
    for key in POLY_KEYS[kind]:
        if key not in coeff_lists:
            raise ValueError(f"missing polynomial {key!r}")
        deg = POLY_DEGREES[kind][key]
        terms = {}
        for exps, c in coeff_lists[key].items():
            if len(exps) != len(names):
                raise ValueError(
                    f"{key} term {list(exps)}: expected {len(names)} exponents"
                )
            wd = sum(e * w for e, w in zip(exps, weights))
            if any(e < 0 for e in exps):
                raise ValueError(f"{key} term {list(exps)}: negative exponent")
            if wd != deg:
                raise ValueError(
                    f"{key} term {list(exps)}: weighted degree {wd}, expected {deg}"
                )
            if int(c) != 0:
                terms[tuple(int(e) for e in exps)] = terms.get(tuple(exps), 0) + int(c)
        polys[key] = WeightedPoly(names, weights, None, terms)
    extra = set(coeff_lists) - set(POLY_KEYS[kind])
    if extra:
        raise ValueError(f"unexpected polynomial keys {sorted(extra)}")
    return DelPezzoInstance(kind=kind, n=n, polys=polys, meta=meta or {})


def generate_instance(
    kind: str,
    n: int,
    seed,
    coeff_bound: int = 4,
    screen_primes=(5, 7, 11),
    max_attempts: int = 64,
) -> DelPezzoInstance:
    """Deterministic rejection sampling of a screened integer instance."""
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}")
    for p in screen_primes:
        check_admissible_prime(kind, p)
    rng = random.Random(f"fanolines:{kind}:{n}:{coeff_bound}:{seed}")
    names, weights = data_ring(kind, n)
    last_failure = None
    for attempt in range(max_attempts):
        coeff_lists = {}
        for key in POLY_KEYS[kind]:
            deg = POLY_DEGREES[kind][key]
            terms = {}
            for exps in monomial_exponents(weights, deg):
                c = rng.randint(-coeff_bound, coeff_bound)
                if c:
                    terms[exps] = c
            coeff_lists[key] = terms
        inst = make_instance(
            kind,
            n,
            coeff_lists,
            meta={"seed": str(seed), "attempt": attempt, "coeff_bound": coeff_bound},
        )
        ok = True
        for p in screen_primes:
            report = quasi_smoothness_screen(inst.reduce_mod(p))
            if not report.passed:
                ok = False
                last_failure = report
                break
        if ok:
            inst.meta["screen_primes"] = list(screen_primes)
            return inst
    raise RuntimeError(
        f"no screened instance found in {max_attempts} attempts; "
        f"last failure: p={last_failure.prime}, witness={last_failure.witness}"
    )


@dataclass
class ScreenReport:
    passed: bool
    prime: int
    witness: tuple | None
    note: str = ""


def quasi_smoothness_screen(inst: DelPezzoInstance) -> ScreenReport:
    """Search the punctured affine cone for a rational singular point.

    The system is the defining equations plus all partials (dp1-dp3) or the
    Jacobian 2x2 minors (dp4). Only a witness certifies failure; passing is
    a screen, not a proof of smoothness.
    """
    if inst.field is None:
        raise ValueError("screen needs a reduced instance")
    p = inst.field.p
    cones = inst.cone_polys()
    names = cones[0].names
    weights = cones[0].weights
    nv = len(names)
    eqs = [poly_arrays(f) for f in cones]
    if inst.kind == "dp4":
        jac = [[f.partial(i) for i in range(nv)] for f in cones]
        for i in range(nv):
            for j in range(i + 1, nv):
                minor = jac[0][i] * jac[1][j] - jac[0][j] * jac[1][i]
                eqs.append(poly_arrays(minor))
    else:
        for f in cones:
            for i in range(nv):
                eqs.append(poly_arrays(f.partial(i)))
    witness = impl.staged_find_zero(eqs, nv, weights, p)
    # the strata where every weight-1 coordinate vanishes carry no singular
    # cone points for dp1/dp2 (checked directly), and do not exist for dp3/dp4
    if witness is not None:
        return ScreenReport(passed=False, prime=p, witness=witness)
    return ScreenReport(passed=True, prime=p, witness=None)


def serialize(inst: DelPezzoInstance) -> str:
    """Canonical one-line JSON for integer instances; byte-stable."""
    if inst.field is not None:
        raise ValueError("only integer instances serialize; reduce after parsing")
    payload = {"kind": inst.kind, "n": inst.n, "polys": {}}
    for key in POLY_KEYS[inst.kind]:
        f = inst.polys[key]
        payload["polys"][key] = [[list(e), c] for e, c in f.sorted_terms()]
    return json.dumps(payload, separators=(",", ":"))


def parse(text: str) -> DelPezzoInstance:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise ValueError("top level must be an object")
    for req in ("kind", "n", "polys"):
        if req not in payload:
            raise ValueError(f"missing field {req!r}")
    kind = payload["kind"]
    n = payload["n"]
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}")
    if not isinstance(n, int) or n < MIN_N[kind]:
        raise ValueError(f"invalid n {n!r} for {kind}")
    if not isinstance(payload["polys"], dict):
        raise ValueError("polys must be an object")
    coeff_lists = {}
    for key, rows in payload["polys"].items():
        terms = {}
        if not isinstance(rows, list):
            raise ValueError(f"{key} must be a list of [exponents, coeff] pairs")
        for row in rows:
            if (
                not isinstance(row, list)
                or len(row) != 2
                or not isinstance(row[0], list)
                or not isinstance(row[1], int)
            ):
                raise ValueError(f"{key} term {row!r}: expected [[e0,...], coeff]")
            exps = tuple(row[0])
            if not all(isinstance(e, int) for e in exps):
                raise ValueError(f"{key} term {row!r}: exponents must be integers")
            if exps in terms:
                raise ValueError(f"{key} term {list(exps)}: duplicate exponent vector")
            terms[exps] = row[1]
        coeff_lists[key] = terms
    return make_instance(kind, n, coeff_lists)


def named_instance(name: str, n: int) -> DelPezzoInstance:
    """Classical diagonal fixtures used by tests and docs."""
    if name == "fermat-dp3":
        names, weights = data_ring("dp3", n)
        terms = {}
        for i in range(len(names)):
            e = [0] * len(names)
            e[i] = 3
            terms[tuple(e)] = 1
        return make_instance(
            "dp3", n, {"F": terms}, meta={"name": name}
        )
    if name == "fermat-dp2":
        names, weights = data_ring("dp2", n)
        terms = {tuple(4 if j == i else 0 for j in range(len(names))): 1 for i in range(len(names))}
        return make_instance("dp2", n, {"F": terms}, meta={"name": name})
    if name == "fermat-dp1":
        names, weights = data_ring("dp1", n)
        t6 = {tuple(6 if j == i else 0 for j in range(len(names))): 1 for i in range(len(names))}
        return make_instance("dp1", n, {"F4": {}, "F6": t6}, meta={"name": name})
    if name == "diagonal-dp4":
        names, weights = data_ring("dp4", n)
        nv = len(names)
        q1 = {tuple(2 if j == i else 0 for j in range(nv)): 1 for i in range(nv)}
        q2 = {
            tuple(2 if j == i else 0 for j in range(nv)): i + 1
            for i in range(nv)
        }
        return make_instance("dp4", n, {"Q1": q1, "Q2": q2}, meta={"name": name})
    if name == "cone-dp2":
        # quasi-smooth, but the branch quartic is a cone with vertex at e0
        names, weights = data_ring("dp2", n)
        nv = len(names)
        terms = {tuple(4 if j == i else 0 for j in range(nv)): 1 for i in range(1, nv)}
        lead = [0] * nv
        lead[0], lead[1] = 3, 1
        terms[tuple(lead)] = 1
        return make_instance("dp2", n, {"F": terms}, meta={"name": name})
    raise ValueError(f"unknown named instance {name!r}")
