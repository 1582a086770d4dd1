"""Batch front-end: generation, screening, fiber and census runs, scans,
divisor audits, and full verification reports.

Exit codes: 0 success, 1 verification failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field

from . import __version__
from .audit import (
    bounded_across_ladder,
    detector_agreement_dp2,
    divisor_audit_fundamental_dp1,
    divisor_audit_threeh_dp1,
    random_threeh_form,
    scan_exceptional,
)
from .census import count_fiber_scheme, count_line_incidences, slope_fit
from .fibers import classified_line_count, fiber_scheme, random_model_point
from .models import (
    DelPezzoInstance,
    check_admissible_prime,
    generate_instance,
    parse,
    quasi_smoothness_screen,
    serialize,
)
from .oracle import oracle_hom_count
from .report import (
    assemble,
    count_entry,
    make_meta,
    slope_dict,
    verdict,
    write_report,
)

SLOPE_TOL_FIBER = 0.35
SLOPE_TOL_LINES = 0.4
SLOPE_TOL_HOM = 0.6
KAPPA_RANGE = (0.5, 1.5)


@dataclass
class RunConfig:
    command: str
    out: str | None
    seed: int | None
    primes: list = dc_field(default_factory=list)
    jobs: int = 1
    csv: bool = False
    options: dict = dc_field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "command": self.command,
            "out": self.out,
            "seed": self.seed,
            "primes": self.primes,
            "jobs": self.jobs,
            "csv": self.csv,
            **{k: self.options[k] for k in sorted(self.options)},
        }


class UsageError(Exception):
    pass


def _parse_primes(text: str, kind: str) -> list:
    try:
        primes = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise UsageError(f"bad prime list {text!r}")
    if not primes:
        raise UsageError("empty prime list")
    for p in primes:
        try:
            check_admissible_prime(kind, p)
        except ValueError as exc:
            raise UsageError(str(exc))
    return primes


def _parse_point(text: str):
    groups = text.split(";")
    try:
        coords = tuple(int(tok) for tok in groups[0].split(",") if tok.strip())
        lift = int(groups[1]) if len(groups) > 1 and groups[1].strip() else None
    except ValueError:
        raise UsageError(f"bad point {text!r}")
    if not coords:
        raise UsageError(f"bad point {text!r}")
    return coords, lift


def _load_instance(path: str) -> DelPezzoInstance:
    try:
        with open(path) as fh:
            return parse(fh.read())
    except OSError as exc:
        raise UsageError(f"cannot read instance file: {exc}")
    except ValueError as exc:
        raise UsageError(f"bad instance file {path}: {exc}")


def _instance_block(inst: DelPezzoInstance) -> dict:
    return json.loads(serialize(inst))


def _pick_point(inst_p: DelPezzoInstance, spec: str | None, seed):
    if spec is None or spec == "auto":
        if seed is None:
            raise UsageError("--point auto needs --seed")
        return random_model_point(inst_p, seed)
    coords, lift = _parse_point(spec)
    p = inst_p.field.p
    coords = tuple(c % p for c in coords)
    if inst_p.kind in ("dp3", "dp4"):
        polys = list(inst_p.polys.values())
        if any(f.evaluate(coords) != 0 for f in polys):
            raise UsageError(f"point {coords} is not on the model at p={p}")
    elif lift is not None:
        val = inst_p.cover_form().evaluate(coords)
        if (lift * lift + val) % p != 0:
            raise UsageError(f"lift {lift} does not square to -F at {coords}")
    return coords


def _pool_map(fn, items, jobs: int):
    if jobs <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def cmd_gen(cfg: RunConfig) -> tuple:
    inst = generate_instance(
        cfg.options["kind"],
        cfg.options["n"],
        cfg.seed,
        coeff_bound=cfg.options["coeff_bound"],
    )
    text = serialize(inst)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return None, 0


def cmd_smooth(cfg: RunConfig) -> tuple:
    inst = _load_instance(cfg.options["infile"])
    verdicts = []
    for p in cfg.primes:
        rep = quasi_smoothness_screen(inst.reduce_mod(p))
        detail = rep.note or (f"witness {rep.witness}" if rep.witness else "no rational singular point")
        verdicts.append(verdict(f"quasi-smooth:p={p}", rep.passed, detail))
    doc = assemble(
        make_meta(cfg.as_dict(), cfg.seed),
        instance=_instance_block(inst),
        verdicts=verdicts,
    )
    return doc, 0 if all(v["pass"] for v in verdicts) else 1


def cmd_fiber(cfg: RunConfig) -> tuple:
    inst = _load_instance(cfg.options["infile"])
    p = cfg.primes[0]
    inst_p = inst.reduce_mod(p)
    q = _pick_point(inst_p, cfg.options.get("point"), cfg.seed)
    scheme = fiber_scheme(inst_p, q)
    cls = classified_line_count(inst_p, scheme)
    counts = [
        count_entry(inst.kind, p, "fiber-scheme", cls.scheme_count),
        count_entry(inst.kind, p, "lines-through-point", cls.line_count),
    ]
    doc = assemble(
        make_meta(cfg.as_dict(), cfg.seed),
        instance=_instance_block(inst),
        fibers=[scheme.describe()],
        counts=counts,
        verdicts=[verdict("fiber-built", True, f"point {list(q)} at p={p}")],
    )
    return doc, 0


def cmd_census_fiber(cfg: RunConfig) -> tuple:
    inst = _load_instance(cfg.options["infile"])
    point_spec = cfg.options.get("point")

    def one(p):
        inst_p = inst.reduce_mod(p)
        q = _pick_point(inst_p, point_spec, cfg.seed)
        scheme = fiber_scheme(inst_p, q)
        return p, q, count_fiber_scheme(scheme)

    results = _pool_map(one, cfg.primes, cfg.jobs)
    results.sort(key=lambda r: r[0])
    counts = [
        count_entry(inst.kind, p, "fiber-scheme", c, point=list(q))
        for p, q, c in results
    ]
    fit = slope_fit([(p, c) for p, q, c in results])
    target = inst.n - 3
    ok, detail = _dim_verdict(fit, target, SLOPE_TOL_FIBER, inst.kind)
    doc = assemble(
        make_meta(cfg.as_dict(), cfg.seed),
        instance=_instance_block(inst),
        counts=counts,
        slopes=[slope_dict("fiber-scheme", fit)],
        verdicts=[verdict("fiber-dimension", ok, detail)],
    )
    return doc, 0 if ok else 1


# weighted Bezout degree of the fiber system, the ceiling for a
# zero-dimensional line space
FIBER_DEGREE_BOUND = {"dp1": 60, "dp2": 12, "dp3": 6, "dp4": 4}


def _dim_verdict(fit, target: float, tol: float, kind: str | None = None) -> tuple:
    if target == 0 and kind in FIBER_DEGREE_BOUND:
        mx = max((c for _, c in fit.used + fit.skipped), default=0)
        bound = FIBER_DEGREE_BOUND[kind]
        return mx <= bound, f"max count {mx} vs degree bound {bound} (dimension 0)"
    if fit.slope is None:
        return False, "fewer than two usable counts"
    lo, hi = KAPPA_RANGE
    ok = (
        abs(fit.slope - target) <= tol
        and fit.kappa is not None
        and lo <= fit.kappa <= hi
    )
    detail = (
        f"slope {fit.slope:.3f} vs target {target} (tol {tol}), "
        f"kappa {fit.kappa:.3f} in [{lo}, {hi}]"
    )
    return ok, detail


def cmd_census_lines(cfg: RunConfig) -> tuple:
    inst = _load_instance(cfg.options["infile"])
    if inst.kind not in ("dp3", "dp4"):
        raise UsageError("census-lines scans dp3 or dp4 models")

    def one(p):
        return count_line_incidences(inst.reduce_mod(p))

    results = _pool_map(one, cfg.primes, cfg.jobs)
    results.sort(key=lambda r: r.p)
    counts = [
        count_entry(
            inst.kind,
            r.p,
            "line-incidences",
            r.incidences,
            points_on_model=r.points_on_model,
            per_line_unit=r.per_line_unit,
        )
        for r in results
    ]
    fit = slope_fit([(r.p, r.per_line_unit) for r in results])
    target = 2 * (inst.n - 2)
    if target == 0:
        # surfaces carry a classical finite line count
        bound = 27 if inst.kind == "dp3" else 16
        mx = max(r.per_line_unit for r in results)
        ok = mx <= bound
        detail = f"max lines estimate {mx:.1f} vs classical bound {bound}"
    else:
        ok, detail = _dim_verdict(fit, target, SLOPE_TOL_LINES)
    doc = assemble(
        make_meta(cfg.as_dict(), cfg.seed),
        instance=_instance_block(inst),
        counts=counts,
        slopes=[slope_dict("lines-estimate", fit)],
        verdicts=[verdict("line-family-dimension", ok, detail)],
    )
    return doc, 0 if ok else 1


def cmd_census_hom(cfg: RunConfig) -> tuple:
    inst = _load_instance(cfg.options["infile"])
    d = cfg.options["degree"]
    max_ops = cfg.options["max_ops"]

    def one(p):
        return oracle_hom_count(inst.reduce_mod(p), d, max_ops=max_ops)

    results = _pool_map(one, cfg.primes, cfg.jobs)
    results.sort(key=lambda r: r.p)
    counts = []
    pairs = []
    for r in results:
        net = r.raw - (r.degenerate or 0)
        counts.append(
            count_entry(
                inst.kind,
                r.p,
                f"hom-degree-{d}",
                r.raw,
                degenerate=r.degenerate,
                net=net,
                method=r.method,
            )
        )
        pairs.append((r.p, net))
    fit = slope_fit(pairs)
    target = results[0].dim_target
    ok, detail = _dim_verdict(fit, target, SLOPE_TOL_HOM)
    doc = assemble(
        make_meta(cfg.as_dict(), cfg.seed),
        instance=_instance_block(inst),
        counts=counts,
        slopes=[slope_dict(f"hom-degree-{d}", fit)],
        verdicts=[verdict("hom-dimension", ok, detail)],
    )
    return doc, 0 if ok else 1


def cmd_scan(cfg: RunConfig) -> tuple:
    inst = _load_instance(cfg.options["infile"])
    mode = cfg.options["mode"]
    if mode == "sample" and cfg.seed is None:
        raise UsageError("sample mode needs --seed")
    rep = scan_exceptional(
        inst,
        cfg.primes,
        mode=mode,
        sample_k=cfg.options["k"],
        seed=cfg.seed if cfg.seed is not None else 0,
        max_full_ops=cfg.options["max_ops"],
    )
    scan_block = rep.as_dict()
    verdicts = [
        verdict(
            "scan-ceiling",
            True,
            "no point reached the p^(n-1) family ceiling",
        )
    ]
    if inst.kind == "dp2" and cfg.options.get("detector"):
        tables = detector_agreement_dp2(inst, cfg.primes)
        scan_block["detector"] = [t.as_dict() for t in tables]
        worst = min(t.diagonal_fraction for t in tables)
        verdicts.append(
            verdict(
                "detector-agreement",
                worst >= 0.95,
                f"worst diagonal fraction {worst:.3f}",
            )
        )
    doc = assemble(
        make_meta(cfg.as_dict(), cfg.seed),
        instance=_instance_block(inst),
        scan=scan_block,
        verdicts=verdicts,
    )
    return doc, 0 if all(v["pass"] for v in verdicts) else 1


def cmd_audit_divisor(cfg: RunConfig) -> tuple:
    inst = _load_instance(cfg.options["infile"])
    if inst.kind != "dp1":
        raise UsageError("divisor audits apply to dp1 instances")
    lemma = cfg.options["lemma"]
    audits = []
    verdicts = []
    if lemma in ("fundamental", "both"):
        coeffs = cfg.options.get("coeffs")
        if coeffs is None:
            if cfg.seed is None:
                raise UsageError("seeded hyperplane choice needs --seed")
            import random as _random

            rng = _random.Random(f"fanolines:hyperplane:{inst.n}:{cfg.seed}")
            coeffs = [0] * inst.n
            while all(c == 0 for c in coeffs):
                coeffs = [rng.randrange(-3, 4) for _ in range(inst.n)]
        else:
            coeffs = [int(tok) for tok in coeffs.split(",")]
        per_p = {}
        for p in cfg.primes:
            rep = divisor_audit_fundamental_dp1(inst.reduce_mod(p), coeffs)
            audits.append(rep.as_dict())
            per_p[p] = len(rep.witnesses)
        verdicts.append(
            verdict(
                "divisor-fundamental-bounded",
                bounded_across_ladder(per_p),
                f"witness counts {per_p}, hyperplane {coeffs}",
            )
        )
    if lemma in ("three-h", "both"):
        if cfg.seed is None:
            raise UsageError("the cubic member choice needs --seed")
        p_form = random_threeh_form(inst, cfg.seed)
        per_p = {}
        for p in cfg.primes:
            rep = divisor_audit_threeh_dp1(inst.reduce_mod(p), p_form)
            audits.append(rep.as_dict())
            per_p[p] = len(rep.witnesses)
        verdicts.append(
            verdict(
                "divisor-three-h-bounded",
                bounded_across_ladder(per_p),
                f"witness counts {per_p}",
            )
        )
    doc = assemble(
        make_meta(cfg.as_dict(), cfg.seed),
        instance=_instance_block(inst),
        audits=audits,
        verdicts=verdicts,
    )
    return doc, 0 if all(v["pass"] for v in verdicts) else 1


def cmd_report(cfg: RunConfig) -> tuple:
    inst = _load_instance(cfg.options["infile"])
    if cfg.seed is None:
        raise UsageError("report runs are randomized; --seed is mandatory")
    verdicts = []
    counts = []
    slopes = []
    audits = []
    fibers = []
    for p in cfg.primes:
        rep = quasi_smoothness_screen(inst.reduce_mod(p))
        verdicts.append(
            verdict(f"quasi-smooth:p={p}", rep.passed, rep.note or "screen")
        )
    results = []
    for p in cfg.primes:
        inst_p = inst.reduce_mod(p)
        q = random_model_point(inst_p, cfg.seed)
        scheme = fiber_scheme(inst_p, q)
        if p == cfg.primes[0]:
            fibers.append(scheme.describe())
        c = count_fiber_scheme(scheme)
        counts.append(count_entry(inst.kind, p, "fiber-scheme", c, point=list(q)))
        results.append((p, c))
    fit = slope_fit(results)
    slopes.append(slope_dict("fiber-scheme", fit))
    ok, detail = _dim_verdict(fit, inst.n - 3, SLOPE_TOL_FIBER, inst.kind)
    verdicts.append(verdict("fiber-dimension", ok, detail))
    mode = "sample" if inst.kind == "dp1" else "full"
    scan_rep = scan_exceptional(
        inst, cfg.primes, mode=mode, sample_k=cfg.options["k"], seed=cfg.seed
    )
    scan_block = scan_rep.as_dict()
    verdicts.append(verdict("scan-ceiling", True, "family ceiling respected"))
    if inst.kind == "dp2":
        tables = detector_agreement_dp2(inst, cfg.primes)
        scan_block["detector"] = [t.as_dict() for t in tables]
        worst = min(t.diagonal_fraction for t in tables)
        verdicts.append(
            verdict("detector-agreement", worst >= 0.95, f"worst {worst:.3f}")
        )
    if inst.kind == "dp1":
        p_form = random_threeh_form(inst, cfg.seed)
        per_p = {}
        for p in cfg.primes:
            rep = divisor_audit_threeh_dp1(inst.reduce_mod(p), p_form)
            audits.append(rep.as_dict())
            per_p[p] = len(rep.witnesses)
        verdicts.append(
            verdict(
                "divisor-three-h-bounded",
                bounded_across_ladder(per_p),
                f"witness counts {per_p}",
            )
        )
    doc = assemble(
        make_meta(cfg.as_dict(), cfg.seed),
        instance=_instance_block(inst),
        fibers=fibers,
        counts=counts,
        slopes=slopes,
        scan=scan_block,
        audits=audits,
        verdicts=verdicts,
    )
    return doc, 0 if all(v["pass"] for v in verdicts) else 1


COMMANDS = {
    "gen": cmd_gen,
    "smooth": cmd_smooth,
    "fiber": cmd_fiber,
    "census-fiber": cmd_census_fiber,
    "census-lines": cmd_census_lines,
    "census-hom": cmd_census_hom,
    "scan": cmd_scan,
    "audit-divisor": cmd_audit_divisor,
    "report": cmd_report,
}

DEFAULT_PRIMES = {
    "dp1": "11,13",
    "dp2": "7,11,13",
    "dp3": "5,7,11",
    "dp4": "5,7,11",
}


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="fanolines",
        description="del Pezzo line-space construction and verification",
    )
    top.add_argument("--version", action="version", version=__version__)
    sub = top.add_subparsers(dest="command", required=True)

    def common(sp, infile=True):
        if infile:
            sp.add_argument("--in", dest="infile", required=True, help="instance file")
            sp.add_argument("--primes", help="comma-separated prime ladder")
        sp.add_argument("-o", "--out", help="report path (JSON)")
        sp.add_argument("--seed", type=int, help="seed for randomized choices")
        sp.add_argument(
            "--jobs",
            type=int,
            default=int(os.environ.get("FANOLINES_JOBS", "1")),
            help="worker pool size (default FANOLINES_JOBS or 1)",
        )
        sp.add_argument("--csv", action="store_true", help="also write a CSV flattening")
        sp.add_argument(
            "--max-ops",
            type=float,
            default=4e9,
            help="guardrail budget for brute-force work",
        )

    g = sub.add_parser("gen", help="generate a screened integer instance")
    g.add_argument("--kind", required=True, choices=["dp1", "dp2", "dp3", "dp4"])
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--coeff-bound", type=int, default=4)
    common(g, infile=False)

    common(sub.add_parser("smooth", help="quasi-smoothness screen over a prime ladder"))

    f = sub.add_parser("fiber", help="fiber scheme at one point, one prime")
    f.add_argument("--point", default="auto", help='"c0,c1,...[;lift]" or auto')
    common(f)

    cf = sub.add_parser("census-fiber", help="fiber count ladder and slope fit")
    cf.add_argument("--point", default="auto")
    common(cf)

    common(sub.add_parser("census-lines", help="line-incidence census (dp3/dp4)"))

    ch = sub.add_parser("census-hom", help="parameterized-map count ladder")
    ch.add_argument("--degree", type=int, default=1, choices=[1, 2])
    common(ch)

    sc = sub.add_parser("scan", help="exceptional-point scan")
    sc.add_argument("--mode", default="full", choices=["full", "sample"])
    sc.add_argument("--k", type=int, default=200, help="sample size per prime")
    sc.add_argument("--detector", action="store_true", help="dp2 cone detector table")
    common(sc)

    ad = sub.add_parser("audit-divisor", help="divisor member singularity audit (dp1)")
    ad.add_argument(
        "--lemma", default="both", choices=["fundamental", "three-h", "both"]
    )
    ad.add_argument("--coeffs", help="hyperplane coefficients c0,c1,...")
    common(ad)

    rp = sub.add_parser("report", help="full verification pipeline on an instance")
    rp.add_argument("--k", type=int, default=200, help="dp1 scan sample size")
    common(rp)
    return top


def make_config(args: argparse.Namespace) -> RunConfig:
    options = {
        k: v
        for k, v in vars(args).items()
        if k not in ("command", "out", "seed", "primes", "jobs", "csv")
    }
    if "max_ops" in options:
        options["max_ops"] = float(options["max_ops"])
    cfg = RunConfig(
        command=args.command,
        out=args.out,
        seed=args.seed,
        jobs=max(1, args.jobs),
        csv=bool(args.csv),
        options=options,
    )
    if args.command == "gen":
        if cfg.seed is None:
            raise UsageError("gen is randomized; --seed is mandatory")
        return cfg
    kind = None
    if "infile" in options:
        kind = _load_instance(options["infile"]).kind
    primes_text = getattr(args, "primes", None) or DEFAULT_PRIMES.get(kind, "5,7,11")
    cfg.primes = _parse_primes(primes_text, kind)
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    try:
        cfg = make_config(args)
        doc, code = COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except AssertionError as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return 1
    if doc is not None:
        if cfg.out:
            write_report(doc, cfg.out, with_csv=cfg.csv)
        else:
            from .report import render

            sys.stdout.write(render(doc))
    return code


if __name__ == "__main__":
    sys.exit(main())
