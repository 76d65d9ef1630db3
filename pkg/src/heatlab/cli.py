"""Command-line driver.

Exit codes: 0 all checks passed, 1 a configured assertion failed,
2 malformed input or configuration. The suite command returns 2 if any
config errored, else 1 if any failed, else 0.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import experiments
from .errors import AssertionFailed, HeatLabError
from .graphs import load_graph
from .kernels import heat_semigroup, verify_axioms
from .paths import (feynman_kac_trace_mc, no_jump_lower_bound,
                    pnfb_probability, sample_bridge, sample_free_path,
                    stay_probability_exact)
from .potential_class import growth_profile_from_config, ricci_admissibility
from .traces import trace_semigroup
from .util import write_csv


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="heatlab",
        description="heat-kernel experiments on weighted graphs and tori")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        p.add_argument("--threads", type=int, default=1)

    p_run = sub.add_parser("run", help="run one experiment config")
    p_run.add_argument("config")
    common(p_run)

    p_suite = sub.add_parser("suite",
                             help="run every config in a directory")
    p_suite.add_argument("config_dir")
    common(p_suite)

    p_ver = sub.add_parser("verify-kernel",
                           help="check semigroup axioms for a graph")
    p_ver.add_argument("--graph", required=True)
    p_ver.add_argument("--s", type=float, default=0.5)
    p_ver.add_argument("--t", type=float, default=0.5)
    p_ver.add_argument("--ck-tol", type=float, default=1e-10)
    p_ver.add_argument("--sym-tol", type=float, default=1e-12)
    p_ver.add_argument("--mass-tol", type=float, default=1e-12)
    p_ver.add_argument("--out", default=".")

    p_sp = sub.add_parser("sample-paths",
                          help="Monte Carlo over jump trajectories")
    p_sp.add_argument("--graph", required=True)
    p_sp.add_argument("--t", type=float, required=True)
    p_sp.add_argument("--samples", type=int, required=True)
    p_sp.add_argument("--seed", type=int, default=0)
    p_sp.add_argument("--mode", required=True,
                      choices=("free", "bridge", "fk-trace", "pnfb"))
    p_sp.add_argument("--x", help="start vertex (index or label)")
    p_sp.add_argument("--y", help="end vertex for bridges")
    p_sp.add_argument("--K", help="comma-separated subset for pnfb")
    p_sp.add_argument("--potential",
                      help="comma-separated vertex values for fk-trace")
    p_sp.add_argument("--constant", type=float,
                      help="constant potential value for fk-trace")
    p_sp.add_argument("--threads", type=int, default=1)
    p_sp.add_argument("--out", default=".")

    p_adm = sub.add_parser("check-admissibility",
                           help="evaluate a curvature growth profile")
    p_adm.add_argument("profile", help="JSON profile document")
    p_adm.add_argument("--out", default=".")
    return parser


def _vertex(graph, raw, flag):
    if raw is None:
        raise HeatLabError(f"mode requires {flag}")
    try:
        return graph.resolve(int(raw))
    except ValueError:
        return graph.resolve(raw)


def _cmd_run(args) -> int:
    config = experiments.ExperimentConfig.from_file(args.config)
    result = experiments.run(config, args.out, seed=args.seed,
                             threads=args.threads)
    print(f"{result.name}: pass")
    for artifact in result.artifacts:
        print(f"  wrote {artifact}")
    return 0


def _cmd_suite(args) -> int:
    suite = experiments.run_suite(args.config_dir, args.out, seed=args.seed,
                                  threads=args.threads)
    width = max(len(r.name) for r in suite.results)
    for r in suite.results:
        line = f"{r.name:<{width}}  {r.status}"
        if r.detail:
            line += f"  {r.detail}"
        print(line)
    counts = {"pass": 0, "fail": 0, "error": 0}
    for r in suite.results:
        counts[r.status] += 1
    print(f"{counts['pass']} passed, {counts['fail']} failed, "
          f"{counts['error']} errored; summary at {suite.summary_path}")
    return suite.exit_code


def _cmd_verify_kernel(args) -> int:
    graph = load_graph(args.graph)
    report = verify_axioms(
        heat_semigroup(graph, args.s), heat_semigroup(graph, args.t),
        heat_semigroup(graph, args.s + args.t),
        ck_tol=args.ck_tol, sym_tol=args.sym_tol, mass_tol=args.mass_tol)
    path = write_csv(Path(args.out) / "axioms.csv", report.header,
                     report.rows())
    print(f"ck defect {report.chapman_kolmogorov_defect:.3e}, "
          f"symmetry defect {report.symmetry_defect:.3e}, "
          f"mass excess {report.mass_excess:.3e}, "
          f"deficit {report.mass_deficit:.3e}")
    print(f"wrote {path}")
    if not report.passed:
        raise AssertionFailed("axioms: defects exceed tolerances")
    return 0


def _path_statistics(paths_iter, t, n, seed, reference):
    counts = []
    no_jump = 0
    for path in paths_iter:
        counts.append(path.jump_count())
        if path.jump_count() == 0:
            no_jump += 1
    counts = np.asarray(counts, dtype=float)
    se_counts = float(counts.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    freq = no_jump / n
    se_freq = float(np.sqrt(freq * (1.0 - freq) / n))
    return [
        ("jump_count_mean", t, float(counts.mean()), se_counts, n, seed,
         "", ""),
        ("no_jump_probability", t, freq, se_freq, n, seed, reference,
         abs(freq - reference) if reference != "" else ""),
    ]


def _cmd_sample_paths(args) -> int:
    graph = load_graph(args.graph)
    t, n, seed = args.t, args.samples, args.seed
    if n < 1:
        raise HeatLabError("--samples must be at least 1")
    header = ("statistic", "t", "estimate", "std_error", "n_samples",
              "seed", "reference", "abs_diff")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    if args.mode == "free":
        x = _vertex(graph, args.x, "--x")
        ref = float(np.exp(-t * graph.degree(x)))
        rows = _path_statistics(
            (sample_free_path(graph, x, t, rng) for _ in range(n)),
            t, n, seed, ref)
    elif args.mode == "bridge":
        x = _vertex(graph, args.x, "--x")
        y = _vertex(graph, args.y, "--y")
        ref = no_jump_lower_bound(graph, x, t) if x == y else ""
        rows = _path_statistics(
            (sample_bridge(graph, x, y, t, rng) for _ in range(n)),
            t, n, seed, ref)
    elif args.mode == "fk-trace":
        if args.potential is not None:
            w = np.asarray([float(v) for v in args.potential.split(",")])
        elif args.constant is not None:
            w = np.full(graph.n, args.constant)
        else:
            w = np.zeros(graph.n)
        est = feynman_kac_trace_mc(graph, w, t, n, seed,
                                   threads=args.threads)
        exact = trace_semigroup(graph, w, t)
        rows = [("fk_trace", t, est.mean, est.std_error, n, seed, exact,
                 abs(est.mean - exact))]
    else:  # pnfb
        x = _vertex(graph, args.x, "--x")
        if args.K is None:
            raise HeatLabError("pnfb mode requires --K")
        subset = [int(v) for v in args.K.split(",")]
        est = pnfb_probability(graph, x, subset, t, n, seed)
        exact = stay_probability_exact(graph, x, subset, t)
        bound = no_jump_lower_bound(graph, x, t)
        rows = [
            ("stay_probability", t, est.mean, est.std_error, n, seed,
             exact, abs(est.mean - exact)),
            ("stay_lower_bound", t, bound, 0.0, 0, seed, "", ""),
        ]
    path = write_csv(Path(args.out) / "sample_paths.csv", header, rows)
    for row in rows:
        print(f"{row[0]} = {row[2]!r} (se {row[3]!r})")
    print(f"wrote {path}")
    return 0


def _cmd_check_admissibility(args) -> int:
    import json

    p = Path(args.profile)
    try:
        doc = json.loads(p.read_text())
    except OSError as exc:
        raise HeatLabError(f"cannot read profile {p}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise HeatLabError(f"invalid JSON in {p}: {exc}") from None
    profile = growth_profile_from_config(doc)
    result = ricci_admissibility(profile, window=int(doc.get("window", 16)))
    path = write_csv(Path(args.out) / "admissibility.csv", result.header,
                     result.rows())
    print(f"verdict: {result.verdict} "
          f"(k_max {result.k_max}, partial sum {result.partial_sum!r}, "
          f"tail bound {result.tail_bound!r})")
    print(f"wrote {path}")
    expect = doc.get("expect")
    if expect is not None and result.verdict != expect:
        raise AssertionFailed(
            f"expected_verdict: got {result.verdict!r}, wanted {expect!r}")
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "suite": _cmd_suite,
    "verify-kernel": _cmd_verify_kernel,
    "sample-paths": _cmd_sample_paths,
    "check-admissibility": _cmd_check_admissibility,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except AssertionFailed as exc:
        print(f"FAILED {exc}", file=sys.stderr)
        return 1
    except HeatLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
