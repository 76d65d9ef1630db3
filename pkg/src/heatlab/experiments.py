"""Config-driven experiments with machine-checkable outcomes.

Each experiment is one JSON document with a "kind" field. Running it writes
a CSV table and a JSON sidecar into the output directory and then evaluates
its configured checks; the first failing check raises AssertionFailed with
that check's name. Malformed documents raise ConfigError, unreadable data
files InputError. A suite is a directory of configs run in sorted filename
order with per-config error isolation and a one-line-per-config summary.

All CSV output is byte-deterministic: same configs, same bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (AssertionFailed, ConfigError, HeatLabError,
                     TruncationNotConverged)
from .fixtures import fixture_registry
from .graphs import WeightedGraph, load_graph
from .kernels import heat_semigroup, verify_axioms
from .paths import feynman_kac_trace_mc, no_jump_lower_bound, \
    pnfb_probability, stay_probability_exact
from .potential_class import growth_profile_from_config, ricci_admissibility
from .torus import TorusModel, potential_from_spec, torus_semiclassical_scan
from .traces import semiclassical_scan, trace_semigroup
from .util import default_time_grid, parallel_map, write_csv

KNOWN_KINDS = ("graph-limit", "torus-limit", "fk-crosscheck", "pnfb",
               "axioms", "admissibility")


@dataclass
class ExperimentConfig:
    kind: str
    name: str
    seed: int
    doc: dict
    base_dir: Path

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        p = Path(path)
        try:
            doc = json.loads(p.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {p}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {p}: {exc}") from None
        if not isinstance(doc, dict):
            raise ConfigError(f"config {p} must be a JSON object")
        kind = doc.get("kind")
        if kind not in KNOWN_KINDS:
            raise ConfigError(
                f"unknown experiment kind {kind!r} in {p}; "
                f"expected one of {', '.join(KNOWN_KINDS)}")
        name = doc.get("name", p.stem)
        seed = int(doc.get("seed", 0))
        return cls(kind=kind, name=str(name), seed=seed, doc=doc,
                   base_dir=p.parent)


@dataclass
class ExperimentResult:
    name: str
    kind: str
    status: str            # pass | fail | error
    detail: str = ""
    artifacts: list = field(default_factory=list)


# ------------------------------------------------------------ doc parsing


def _require(doc: dict, key: str, kind: str):
    if key not in doc:
        raise ConfigError(f"{kind} config is missing required key {key!r}")
    return doc[key]


def _resolve_graph(ref, base_dir: Path) -> WeightedGraph:
    if isinstance(ref, str) and ref.startswith("fixture:"):
        name = ref.split(":", 1)[1]
        registry = fixture_registry()
        if name not in registry:
            raise ConfigError(f"unknown fixture graph {name!r}")
        return registry[name][0]
    path = Path(ref)
    if not path.is_absolute():
        path = base_dir / path
    return load_graph(path)


def _potential_values(entry, n: int, graph_ref=None) -> np.ndarray:
    if entry is None:
        return np.zeros(n)
    if isinstance(entry, (int, float)):
        return np.full(n, float(entry))
    if isinstance(entry, list):
        entry = {"values": entry}
    if isinstance(entry, str) and entry.startswith("fixture:"):
        name = entry.split(":", 1)[1]
        registry = fixture_registry()
        if name not in registry:
            raise ConfigError(f"unknown fixture potential {name!r}")
        vals = np.asarray(registry[name][1], dtype=float)
        if vals.size != n:
            raise ConfigError(
                f"fixture potential {name!r} has {vals.size} entries, "
                f"graph has {n} vertices")
        return vals
    if not isinstance(entry, dict):
        raise ConfigError(f"cannot interpret potential spec {entry!r}")
    if "constant" in entry:
        return np.full(n, float(entry["constant"]))
    if "values" in entry:
        vals = np.asarray(entry["values"], dtype=float)
        if vals.size != n:
            raise ConfigError(
                f"potential has {vals.size} entries, graph has {n} vertices")
        return vals
    raise ConfigError(f"potential spec needs 'values' or 'constant': {entry!r}")


def _time_grid(doc: dict) -> np.ndarray:
    spec = doc.get("t_grid")
    if spec is None:
        return default_time_grid()
    if isinstance(spec, list):
        return np.asarray(spec, dtype=float)
    if isinstance(spec, dict):
        if "values" in spec:
            return np.asarray(spec["values"], dtype=float)
        return default_time_grid(t0=float(spec.get("t0", 1.0)),
                                 ratio=float(spec.get("ratio", 0.5)),
                                 points=int(spec.get("points", 20)))
    raise ConfigError(f"cannot interpret t_grid spec {spec!r}")


def _tolerances(doc: dict) -> dict:
    tol = doc.get("tolerances", {})
    if not isinstance(tol, dict):
        raise ConfigError("'tolerances' must be an object")
    return tol


def _check_all(checks) -> None:
    for name, ok, detail in checks:
        if not ok:
            raise AssertionFailed(f"{name}: {detail}")


def _write_json(path: Path, payload: dict) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


# ------------------------------------------------------------ kind runners


def _scan_checks(report, tol: dict):
    rel = float(tol.get("final_rel_error", report.final_rel_tol))
    budget = rel * abs(report.target)
    checks = [("final_rel_error", report.final_error <= budget,
               f"final abs error {report.final_error!r} exceeds "
               f"{rel!r} * |target| = {budget!r}")]
    if bool(tol.get("monotone", True)):
        checks.append(("monotone_tail", report.tail_monotone(),
                       f"errors over the last {report.monotone_tail} grid "
                       f"points are not nonincreasing"))
    gap = report.gt_bounds - report.scaled_traces
    atol = 1e-10 * np.maximum(1.0, np.abs(report.gt_bounds))
    checks.append(("trace_inequality", bool(np.all(gap >= -atol)),
                   f"scaled trace exceeds its bound by {float(-gap.min())!r}"))
    return checks


def _run_graph_limit(cfg: ExperimentConfig, out: Path, seed: int, threads: int):
    doc = cfg.doc
    graph = _resolve_graph(_require(doc, "graph", cfg.kind), cfg.base_dir)
    w = _potential_values(doc.get("potential"), graph.n)
    tol = _tolerances(doc)
    report = semiclassical_scan(
        graph, w, _time_grid(doc),
        final_rel_tol=float(tol.get("final_rel_error", 0.01)),
        monotone_tail=int(tol.get("monotone_tail", 5)),
        require_monotone=bool(tol.get("monotone", True)))
    csv = report.to_csv(out / f"{cfg.name}.csv")
    js = report.to_json(out / f"{cfg.name}.json")
    return [csv, js], _scan_checks(report, tol)


def _run_torus_limit(cfg: ExperimentConfig, out: Path, seed: int, threads: int):
    doc = cfg.doc
    dim = int(_require(doc, "dim", cfg.kind))
    lengths = _require(doc, "lengths", cfg.kind)
    if dim not in (1, 2, 3):
        raise ConfigError(f"torus dim must be 1, 2 or 3, got {dim}")
    if not isinstance(lengths, list) or len(lengths) != dim:
        raise ConfigError(f"lengths must list {dim} circumferences")
    trunc = int(_require(doc, "truncation", cfg.kind))
    potential = potential_from_spec(doc.get("potential", "zero"),
                                    [float(v) for v in lengths])
    model = TorusModel(dim=dim, lengths=tuple(float(v) for v in lengths),
                       truncation=trunc, potential=potential)
    tol = _tolerances(doc)
    kwargs = {}
    if "scaling_base" in doc:
        kwargs["scaling_base"] = float(doc["scaling_base"])
    try:
        report = torus_semiclassical_scan(
            model, _time_grid(doc),
            final_rel_tol=float(tol.get("final_rel_error", 0.01)),
            monotone_tail=int(tol.get("monotone_tail", 5)),
            require_monotone=bool(tol.get("monotone", True)),
            check_rel_tol=float(tol.get("truncation_doubling", 1e-6)),
            **kwargs)
    except TruncationNotConverged as exc:
        # the doubling gate is an experiment assertion, not bad input
        raise AssertionFailed(f"truncation_doubling: {exc}") from None
    csv = report.to_csv(out / f"{cfg.name}.csv")
    js = report.to_json(out / f"{cfg.name}.json")
    return [csv, js], _scan_checks(report, tol)


_MC_HEADER = ("statistic", "t", "estimate", "std_error", "n_samples", "seed",
              "reference", "abs_diff")


def _run_fk_crosscheck(cfg: ExperimentConfig, out: Path, seed: int,
                       threads: int):
    doc = cfg.doc
    graph = _resolve_graph(_require(doc, "graph", cfg.kind), cfg.base_dir)
    w = _potential_values(doc.get("potential"), graph.n)
    t = float(_require(doc, "t", cfg.kind))
    samples = int(_require(doc, "samples", cfg.kind))
    tol = _tolerances(doc)
    k_sigma = float(tol.get("k_sigma", 3.0))
    exact = trace_semigroup(graph, w, t)
    est = feynman_kac_trace_mc(graph, w, t, samples, seed, threads=threads)
    diff = abs(est.mean - exact)
    csv = write_csv(out / f"{cfg.name}.csv", _MC_HEADER,
                    [("fk_trace", t, est.mean, est.std_error, est.n_samples,
                      est.seed, exact, diff)])
    js = _write_json(out / f"{cfg.name}.json", {
        "t": t, "estimate": est.mean, "std_error": est.std_error,
        "n_samples": est.n_samples, "seed": est.seed, "reference": exact,
        "abs_diff": diff})
    atol = 1e-10 * max(1.0, abs(exact))
    checks = [("mc_within_k_sigma",
               diff <= k_sigma * est.std_error + atol,
               f"|{est.mean!r} - {exact!r}| = {diff!r} > "
               f"{k_sigma!r} * {est.std_error!r}")]
    if "max_rel_se" in tol:
        cap = float(tol["max_rel_se"]) * abs(exact)
        checks.append(("relative_se", est.std_error <= cap,
                       f"std error {est.std_error!r} exceeds {cap!r}"))
    return [csv, js], checks


def _run_pnfb(cfg: ExperimentConfig, out: Path, seed: int, threads: int):
    doc = cfg.doc
    graph = _resolve_graph(_require(doc, "graph", cfg.kind), cfg.base_dir)
    x = _require(doc, "x", cfg.kind)
    subset = _require(doc, "K", cfg.kind)
    t_list = [float(v) for v in _require(doc, "t_list", cfg.kind)]
    if len(t_list) < 1 or any(b <= 0 for b in t_list) or \
            any(t_list[i + 1] >= t_list[i] for i in range(len(t_list) - 1)):
        raise ConfigError("t_list must be strictly decreasing and positive")
    samples = int(_require(doc, "samples", cfg.kind))
    tol = _tolerances(doc)
    k_sigma = float(tol.get("k_sigma", 3.0))
    final_min = float(tol.get("final_min", 0.99))
    rows = []
    estimates = []
    for i, t in enumerate(t_list):
        est = pnfb_probability(graph, x, subset, t, samples, seed + i)
        bound = no_jump_lower_bound(graph, x, t)
        exact = stay_probability_exact(graph, x, subset, t)
        rows.append((t, est.mean, est.std_error, est.n_samples, est.seed,
                     bound, exact))
        estimates.append((t, est, bound, exact))
    header = ("t", "estimate", "std_error", "n_samples", "seed",
              "lower_bound", "exact_ratio")
    csv = write_csv(out / f"{cfg.name}.csv", header, rows)
    js = _write_json(out / f"{cfg.name}.json", {
        "x": graph.resolve(x), "K": sorted(graph.resolve(v) for v in subset),
        "rows": [dict(zip(header, r)) for r in rows]})
    checks = []
    for t, est, bound, exact in estimates:
        # the 1/n floor covers the degenerate all-stay draw, where the
        # empirical standard error collapses to zero
        tol = k_sigma * (est.std_error + 1.0 / est.n_samples)
        ok = abs(est.mean - exact) <= tol
        checks.append(("per_time_consistency", ok,
                       f"at t={t!r}: estimate {est.mean!r} vs exact "
                       f"{exact!r} beyond {k_sigma!r} sigma"))
        checks.append(("dominates_lower_bound",
                       est.mean >= bound - k_sigma * est.std_error - 1e-10,
                       f"at t={t!r}: estimate {est.mean!r} under bound "
                       f"{bound!r}"))
    means = [e.mean for _, e, _, _ in estimates]
    checks.append(("monotone_in_shrinking_t",
                   all(means[i + 1] >= means[i] - 1e-12
                       for i in range(len(means) - 1)),
                   f"estimates {means!r} do not increase as t shrinks"))
    checks.append(("final_value", means[-1] >= final_min,
                   f"final estimate {means[-1]!r} below {final_min!r}"))
    return [csv, js], checks


def _run_axioms(cfg: ExperimentConfig, out: Path, seed: int, threads: int):
    doc = cfg.doc
    graph = _resolve_graph(_require(doc, "graph", cfg.kind), cfg.base_dir)
    s = float(_require(doc, "s", cfg.kind))
    t = float(_require(doc, "t", cfg.kind))
    tol = _tolerances(doc)
    report = verify_axioms(
        heat_semigroup(graph, s), heat_semigroup(graph, t),
        heat_semigroup(graph, s + t),
        ck_tol=float(tol.get("ck", 1e-10)),
        sym_tol=float(tol.get("symmetry", 1e-12)),
        mass_tol=float(tol.get("mass", 1e-12)),
        conservative=bool(doc.get("conservative", True)))
    csv = write_csv(out / f"{cfg.name}.csv", report.header, report.rows())
    js = _write_json(out / f"{cfg.name}.json", {
        "s": report.s, "t": report.t,
        "ck_defect": report.chapman_kolmogorov_defect,
        "symmetry_defect": report.symmetry_defect,
        "mass_excess": report.mass_excess,
        "mass_deficit": report.mass_deficit, "passed": report.passed})
    ck_tol = float(tol.get("ck", 1e-10))
    sym_tol = float(tol.get("symmetry", 1e-12))
    mass_tol = float(tol.get("mass", 1e-12))
    checks = [
        ("chapman_kolmogorov",
         report.chapman_kolmogorov_defect <= ck_tol,
         f"defect {report.chapman_kolmogorov_defect!r} > {ck_tol!r}"),
        ("symmetry", report.symmetry_defect <= sym_tol,
         f"defect {report.symmetry_defect!r} > {sym_tol!r}"),
        ("mass_window",
         report.mass_excess <= mass_tol and
         (not bool(doc.get("conservative", True))
          or report.mass_deficit <= mass_tol),
         f"excess {report.mass_excess!r}, deficit {report.mass_deficit!r} "
         f"outside {mass_tol!r}"),
    ]
    return [csv, js], checks


def _run_admissibility(cfg: ExperimentConfig, out: Path, seed: int,
                       threads: int):
    doc = cfg.doc
    profile = growth_profile_from_config(_require(doc, "profile", cfg.kind))
    result = ricci_admissibility(profile,
                                 window=int(doc.get("window", 16)))
    csv = write_csv(out / f"{cfg.name}.csv", result.header, result.rows())
    js = _write_json(out / f"{cfg.name}.json", {
        "verdict": result.verdict, "k_max": result.k_max,
        "partial_sum": result.partial_sum,
        "doubling_partial_sum": result.doubling_partial_sum,
        "certified_ratio": result.certified_ratio,
        "tail_bound": result.tail_bound})
    checks = []
    if "expect" in doc:
        expect = doc["expect"]
        if expect not in ("admissible", "inadmissible", "undecided"):
            raise ConfigError(f"bad expected verdict {expect!r}")
        checks.append(("expected_verdict", result.verdict == expect,
                       f"verdict {result.verdict!r}, expected {expect!r}"))
    return [csv, js], checks


_RUNNERS = {
    "graph-limit": _run_graph_limit,
    "torus-limit": _run_torus_limit,
    "fk-crosscheck": _run_fk_crosscheck,
    "pnfb": _run_pnfb,
    "axioms": _run_axioms,
    "admissibility": _run_admissibility,
}


# ------------------------------------------------------------------ driver


def run(config: ExperimentConfig, out_dir, seed: int | None = None,
        threads: int = 1) -> ExperimentResult:
    """Run one experiment; write artifacts; evaluate its checks.

    Artifacts land on disk before checks are evaluated, so a failing
    experiment still leaves its data behind. seed overrides the config's
    own seed for the kinds that draw random numbers.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    effective_seed = config.seed if seed is None else int(seed)
    artifacts, checks = _RUNNERS[config.kind](config, out, effective_seed,
                                              threads)
    _check_all(checks)
    return ExperimentResult(name=config.name, kind=config.kind,
                            status="pass", artifacts=artifacts)


@dataclass
class SuiteResult:
    results: list
    summary_path: Path | None

    @property
    def exit_code(self) -> int:
        statuses = {r.status for r in self.results}
        if "error" in statuses:
            return 2
        if "fail" in statuses:
            return 1
        return 0


def run_suite(config_dir, out_dir, seed: int | None = None,
              threads: int = 1) -> SuiteResult:
    """Run every *.json config under config_dir in sorted filename order.

    Config and input errors are isolated per config and recorded as status
    "error"; failed assertions as "fail". The summary CSV is written last
    and is byte-deterministic. Parallelism is across configs; each config
    itself runs single-threaded so the estimates match a sequential run.
    """
    cfg_dir = Path(config_dir)
    paths = sorted(cfg_dir.glob("*.json"))
    if not paths:
        raise ConfigError(f"no *.json experiment configs under {cfg_dir}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    def one(path: Path) -> ExperimentResult:
        try:
            config = ExperimentConfig.from_file(path)
        except HeatLabError as exc:
            return ExperimentResult(name=path.stem, kind="?", status="error",
                                    detail=str(exc))
        try:
            return run(config, out, seed=seed, threads=1)
        except AssertionFailed as exc:
            return ExperimentResult(name=config.name, kind=config.kind,
                                    status="fail", detail=str(exc))
        except HeatLabError as exc:
            return ExperimentResult(name=config.name, kind=config.kind,
                                    status="error", detail=str(exc))

    results = parallel_map(one, paths, threads)
    summary = write_csv(out / "suite_summary.csv",
                        ("name", "kind", "status", "detail"),
                        [(r.name, r.kind, r.status, r.detail)
                         for r in results])
    return SuiteResult(results=results, summary_path=summary)
