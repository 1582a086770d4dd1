"""Compare the compiled and pure-python counting backends.

Runs the fiber-size scans on generated instances and reports wall time
per backend plus the speedup. Both backends must return identical
arrays; the run aborts if they disagree.

Usage: python benchmarks/bench_kernels.py [--n 4] [--primes 11,13] [--seed 0]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from fanolines._kernels import available_backends, get_backend
from fanolines._kernels.plans import build_scan_plan, hom_plan_pairs
from fanolines.models import generate_instance

POLY_KEYS = {"dp2": ["F"], "dp3": ["F"], "dp4": ["Q1", "Q2"]}
SCANS = {"dp2": "dp2_scan", "dp3": "dp3_scan", "dp4": "dp4_scan"}


def time_scan(backend, scan_name: str, plan, repeats: int) -> tuple[float, tuple]:
    fn = getattr(backend, scan_name)
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn(plan)
        best = min(best, time.perf_counter() - t0)
    return best, result


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=4, help="instance dimension")
    ap.add_argument("--primes", default="11,13", help="comma-separated primes")
    ap.add_argument("--seed", type=int, default=0, help="instance generator seed")
    ap.add_argument("--repeats", type=int, default=1, help="timing repeats, best-of")
    ap.add_argument("--hom-prime", type=int, default=7,
                    help="prime for the pair-enumeration bench (0 skips it)")
    args = ap.parse_args()
    primes = [int(t) for t in args.primes.split(",") if t.strip()]

    names = available_backends()
    if "cython" not in names:
        print("compiled backend not available; timing python only")
    backends = [(name, get_backend(name)) for name in names]

    print(f"{'kind':<5} {'p':>3} {'points':>8} {'on_x':>7} " +
          " ".join(f"{name:>10}" for name, _ in backends) +
          ("  speedup" if len(backends) > 1 else ""))
    for kind in ("dp2", "dp3", "dp4"):
        inst = generate_instance(kind, args.n, seed=args.seed)
        for p in primes:
            inst_p = inst.reduce_mod(p)
            polys = [inst_p.polys[k] for k in POLY_KEYS[kind]]
            plan = build_scan_plan(kind, polys, p, args.n)
            times = []
            results = []
            for _, backend in backends:
                t, res = time_scan(backend, SCANS[kind], plan, args.repeats)
                times.append(t)
                results.append(res)
            for other in results[1:]:
                if not all(np.array_equal(a, b) for a, b in zip(results[0], other)):
                    raise SystemExit(f"backend mismatch on {kind} n={args.n} p={p}")
            # counts >= 0 exactly where the fiber was computed
            on_x = int((results[0][1] >= 0).sum())
            npts = len(results[0][0])
            line = (f"{kind:<5} {p:>3} {npts:>8} {on_x:>7} " +
                    " ".join(f"{t:>9.3f}s" for t in times))
            if len(times) > 1:
                line += f"  {times[0] / max(times[-1], 1e-9):>6.1f}x"
            print(line)

    if args.hom_prime:
        hp = args.hom_prime
        inst_p = generate_instance("dp3", args.n, seed=args.seed).reduce_mod(hp)
        plan = hom_plan_pairs([inst_p.polys["F"]], hp, symmetric=False)
        times = []
        raws = []
        for _, backend in backends:
            best = float("inf")
            raw = None
            for _ in range(args.repeats):
                t0 = time.perf_counter()
                raw = backend.hom_pairs(plan)
                best = min(best, time.perf_counter() - t0)
            times.append(best)
            raws.append(raw)
        if len(set(raws)) > 1:
            raise SystemExit(f"backend mismatch on hom_pairs dp3 n={args.n} p={hp}")
        ns = plan["s_pts"].shape[0]
        line = (f"pair enumeration dp3 p={hp} (zero set {ns}, raw {raws[0]}): " +
                " ".join(f"{name} {t:.3f}s" for (name, _), t in zip(backends, times)))
        if len(times) > 1:
            line += f"  {times[0] / max(times[-1], 1e-9):.1f}x"
        print(line)


if __name__ == "__main__":
    main()
