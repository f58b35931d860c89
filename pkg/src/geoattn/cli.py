"""Command-line surface: verify, bench, tree-embed, descent.

Exit codes: 0 success, 1 property or experiment failure, 2 usage error.
GEOATTN_SEED overrides the default seed.  All file outputs are UTF-8.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import statistics
import sys
import time

import numpy as np

from . import experiments
from .attention import (AttentionConfig, euclidean_attention,
                        lorentz_cross_attention, oblique_attention)
from .verify import run_properties

_BENCH_FIELDS = ["kernel", "n", "m", "d", "heads", "space",
                 "mean_ns", "p50_ns", "p95_ns", "repeats"]
_SIZE_GUARD = 2 ** 24  # n * m cap before any allocation


def _default_seed() -> int:
    return int(os.environ.get("GEOATTN_SEED", "0"))


def _parse_seeds(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def cmd_verify(args) -> int:
    cfg = AttentionConfig(eps_lorentz=args.eps_lorentz,
                          eps_oblique=args.eps_oblique)
    results = run_properties(filter_substring=args.filter or "",
                             seed=args.seed, cfg=cfg)
    if not results:
        print(f"no properties match filter {args.filter!r}", file=sys.stderr)
        return 1
    failed = 0
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        extra = f"  ({r.detail})" if r.detail else ""
        print(f"{status}  {r.name:45s} max_err={r.max_error:.3e}{extra}")
        failed += not r.passed
    print(f"{len(results) - failed}/{len(results)} properties passed")
    return 0 if failed == 0 else 1


def _percentile(sorted_vals, q):
    if len(sorted_vals) == 1:
        return sorted_vals[0]
    idx = q * (len(sorted_vals) - 1)
    lo = int(math.floor(idx))
    hi = min(lo + 1, len(sorted_vals) - 1)
    frac = idx - lo
    return sorted_vals[lo] * (1 - frac) + sorted_vals[hi] * frac


def cmd_bench(args) -> int:
    if args.n * args.m > _SIZE_GUARD:
        print(f"n*m = {args.n * args.m} exceeds the {_SIZE_GUARD} guard",
              file=sys.stderr)
        return 1
    cfg = AttentionConfig(heads=args.heads, tau_obl=args.tau,
                          curvature=args.curvature)
    rng = np.random.default_rng(args.seed)
    q = rng.normal(size=(args.n, args.d))
    k = rng.normal(size=(args.m, args.d))
    v = rng.normal(size=(args.m, args.d))
    kernels = [
        ("euclidean", "euclidean", lambda: euclidean_attention(q, k, v, cfg)),
        ("oblique", "oblique", lambda: oblique_attention(q, k, v, cfg)),
        ("lorentz", "lorentz", lambda: lorentz_cross_attention(q, k, v, cfg)),
    ]
    records = []
    for name, space, fn in kernels:
        for _ in range(3):  # warmup
            fn()
        times = []
        for _ in range(args.repeats):
            t0 = time.perf_counter_ns()
            fn()
            times.append(time.perf_counter_ns() - t0)
        times.sort()
        records.append({
            "kernel": name, "n": args.n, "m": args.m, "d": args.d,
            "heads": args.heads, "space": space,
            "mean_ns": statistics.fmean(times),
            "p50_ns": _percentile(times, 0.50),
            "p95_ns": _percentile(times, 0.95),
            "repeats": args.repeats,
        })
    _emit(records, _BENCH_FIELDS, args.format, args.output,
          comment="timings in nanoseconds")
    return 0


def _emit(records, fields, fmt, output, comment=None):
    if fmt == "json":
        text = json.dumps(records, indent=2) + "\n"
    else:
        lines = []
        if comment:
            lines.append(f"# {comment}")
        lines.append(",".join(fields))
        for r in records:
            lines.append(",".join(_fmt_value(r[f]) for f in fields))
        text = "\n".join(lines) + "\n"
    if output:
        with open(output, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _fmt_value(v):
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def cmd_tree_embed(args) -> int:
    spec = experiments.TreeSpec(branching=args.branching, depth=args.depth)
    seeds = _parse_seeds(args.seeds)
    curvatures = [float(t) for t in args.curvature.split(",")]
    arms = [("euclidean", None)] + [("lorentz", c) for c in curvatures]
    records = []
    for space, c in arms:
        distortions = []
        for seed in seeds:
            run = experiments.EmbeddingRun(
                space=space, curvature=c if c is not None else 1.0,
                dim=args.dim, steps=args.steps, step_size=args.step_size,
                seed=seed)
            out = experiments.embed_tree(spec, run)
            records.append({
                "space": space, "curvature": c if c is not None else "",
                "seed": seed, "distortion": out.final_distortion,
                "worst_ratio": out.worst_ratio, "stress": out.final_stress,
            })
            distortions.append(out.final_distortion)
        label = space if c is None else f"{space}(c={c})"
        print(f"{label:20s} mean distortion over seeds: "
              f"{statistics.fmean(distortions):.4f}")
    fields = ["space", "curvature", "seed", "distortion", "worst_ratio", "stress"]
    if args.output:
        _emit(records, fields, args.format, args.output)
    return 0


def cmd_descent(args) -> int:
    run = experiments.descent_demo(experiments.DescentRun(
        condition_number=args.condition_number, tol=args.tol, seed=args.seed))
    if not os.path.isdir(args.out_dir):
        print(f"output directory does not exist: {args.out_dir}", file=sys.stderr)
        return 1
    paths = experiments.export_trajectories(run, args.out_dir)
    ratio = run.iters_oblique / max(run.iters_unconstrained, 1)
    print(f"unconstrained iterations: {run.iters_unconstrained} "
          f"(converged={run.converged_unconstrained})")
    print(f"oblique iterations:       {run.iters_oblique} "
          f"(converged={run.converged_oblique})")
    print(f"oblique/unconstrained ratio: {ratio:.4f}")
    for p in paths:
        print(f"wrote {p}")
    ok = run.converged_unconstrained and run.converged_oblique
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="geoattn",
                                description="Geodesic attention kernels: "
                                            "verification, benchmarks, experiments")
    p.add_argument("--seed", type=int, default=_default_seed())
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run the invariant/property suite")
    v.add_argument("--filter", help="only run properties containing this substring")
    v.add_argument("--eps-lorentz", type=float, default=1e-15)
    v.add_argument("--eps-oblique", type=float, default=1e-4)
    v.set_defaults(fn=cmd_verify)

    b = sub.add_parser("bench", help="micro-benchmark the three kernels")
    b.add_argument("--n", type=int, default=256)
    b.add_argument("--m", type=int, default=256)
    b.add_argument("--d", type=int, default=256)
    b.add_argument("--heads", type=int, default=4)
    b.add_argument("--tau", type=float, default=1.0)
    b.add_argument("--curvature", type=float, default=1.0)
    b.add_argument("--repeats", type=int, default=10)
    b.add_argument("--format", choices=["csv", "json"], default="csv")
    b.add_argument("--output", help="write records here instead of stdout")
    b.set_defaults(fn=cmd_bench)

    t = sub.add_parser("tree-embed", help="tree-embedding distortion study")
    t.add_argument("--branching", type=int, default=2)
    t.add_argument("--depth", type=int, default=5)
    t.add_argument("--dim", type=int, default=2)
    t.add_argument("--steps", type=int, default=3000)
    t.add_argument("--step-size", type=float, default=0.05)
    t.add_argument("--seeds", default="0,333,777")
    t.add_argument("--curvature", default="1.0",
                   help="comma-separated curvature sweep for the lorentz arms")
    t.add_argument("--format", choices=["csv", "json"], default="csv")
    t.add_argument("--output")
    t.set_defaults(fn=cmd_tree_embed)

    d = sub.add_parser("descent", help="constrained-descent trajectory demo")
    d.add_argument("--condition-number", type=float, default=100.0)
    d.add_argument("--tol", type=float, default=1e-6)
    d.add_argument("--out-dir", default=".")
    d.set_defaults(fn=cmd_descent)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
