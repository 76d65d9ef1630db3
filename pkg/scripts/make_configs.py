#!/usr/bin/env python3
"""Regenerate configs/ from the fixture registry.

Run from the repository root: python3 scripts/make_configs.py
Output is deterministic; committing a rerun should be a no-op.
"""

import json
import math
from pathlib import Path

from heatlab.fixtures import fixture_registry
from heatlab.graphs import save_graph

ROOT = Path(__file__).resolve().parent.parent
GRAPHS = ROOT / "configs" / "graphs"
ACCEPT = ROOT / "configs" / "acceptance"
PROFILES = ROOT / "configs" / "profiles"

TWO_PI = 2 * math.pi


def dump(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def main() -> None:
    GRAPHS.mkdir(parents=True, exist_ok=True)
    ACCEPT.mkdir(parents=True, exist_ok=True)
    registry = fixture_registry()
    for name, (graph, _) in registry.items():
        save_graph(graph, GRAPHS / f"{name}.graph")

    grid11 = {"t0": 1.0, "ratio": 0.5, "points": 11}
    for name, (_, w) in registry.items():
        dump(ACCEPT / f"graph_limit_{name}.json", {
            "kind": "graph-limit",
            "name": f"graph_limit_{name}",
            "graph": f"../graphs/{name}.graph",
            "potential": {"values": [float(v) for v in w]},
            "t_grid": grid11,
            "tolerances": {"final_rel_error": 0.01, "monotone_tail": 5},
        })

    dump(ACCEPT / "torus_1d_cosine.json", {
        "kind": "torus-limit", "name": "torus_1d_cosine",
        "dim": 1, "lengths": [TWO_PI], "truncation": 64,
        "potential": "cosine-well",
        "t_grid": {"t0": 1.0, "ratio": 0.5, "points": 9},
        "tolerances": {"final_rel_error": 0.01, "monotone_tail": 5},
    })
    # near t = 1e-3 the zero-potential error is truncation-dominated and
    # rises again, so this config checks the final error only
    dump(ACCEPT / "torus_1d_zero.json", {
        "kind": "torus-limit", "name": "torus_1d_zero",
        "dim": 1, "lengths": [TWO_PI], "truncation": 64,
        "potential": "zero",
        "t_grid": {"t0": 1.0, "ratio": 0.5, "points": 11},
        "tolerances": {"final_rel_error": 0.005, "monotone": False},
    })
    dump(ACCEPT / "torus_2d_zero.json", {
        "kind": "torus-limit", "name": "torus_2d_zero",
        "dim": 2, "lengths": [TWO_PI, TWO_PI], "truncation": 24,
        "potential": "zero",
        "t_grid": {"t0": 1.0, "ratio": 0.5, "points": 5},
        "tolerances": {"final_rel_error": 0.01, "monotone_tail": 5},
    })

    for name, seed in (("two_vertex", 20240801), ("k5", 20240802)):
        _, w = registry[name]
        dump(ACCEPT / f"fk_{name}.json", {
            "kind": "fk-crosscheck", "name": f"fk_{name}",
            "graph": f"../graphs/{name}.graph",
            "potential": {"values": [float(v) for v in w]},
            "t": 1.0, "samples": 20000, "seed": seed,
            "tolerances": {"k_sigma": 3.0, "max_rel_se": 0.01},
        })

    dump(ACCEPT / "pnfb_p5.json", {
        "kind": "pnfb", "name": "pnfb_p5",
        "graph": "../graphs/p5.graph",
        "x": 2, "K": [1, 2, 3],
        "t_list": [1.0, 0.5, 0.1, 0.01],
        "samples": 20000, "seed": 99,
        "tolerances": {"k_sigma": 3.0, "final_min": 0.99},
    })

    dump(ACCEPT / "axioms_random10.json", {
        "kind": "axioms", "name": "axioms_random10",
        "graph": "../graphs/random10.graph",
        "s": 0.5, "t": 0.5,
        "tolerances": {"ck": 1e-10, "symmetry": 1e-12, "mass": 1e-12},
    })

    dump(ACCEPT / "adm_growth.json", {
        "kind": "admissibility", "name": "adm_growth",
        "profile": {"m": 2, "A": 1.0, "k_max": 400,
                    "rule": {"rule": "constant", "value": 1.0}},
        "expect": "inadmissible",
    })
    dump(ACCEPT / "adm_gaussian.json", {
        "kind": "admissibility", "name": "adm_gaussian",
        "profile": {"m": 2, "A": 1.0, "k_max": 200,
                    "rule": {"rule": "quadratic-growth", "rate": 1.0}},
        "expect": "admissible",
    })
    dump(ACCEPT / "adm_p_series_desk.json", {
        "kind": "admissibility", "name": "adm_p_series_desk",
        "profile": {"m": 1, "A": 0.0, "k_max": 10000,
                    "rule": {"rule": "power", "exponent": -3.0}},
        "expect": "undecided",
    })

    # bare profile documents for `heatlab check-admissibility`
    PROFILES.mkdir(parents=True, exist_ok=True)
    dump(PROFILES / "gaussian_decay.json", {
        "m": 2, "A": 1.0, "k_max": 200,
        "rule": {"rule": "quadratic-growth", "rate": 1.0},
        "expect": "admissible",
    })
    dump(PROFILES / "flat_growth.json", {
        "m": 2, "A": 1.0, "k_max": 400,
        "rule": {"rule": "constant", "value": 1.0},
        "expect": "inadmissible",
    })

    print(f"wrote {len(list(GRAPHS.iterdir()))} graphs, "
          f"{len(list(ACCEPT.iterdir()))} configs, "
          f"{len(list(PROFILES.iterdir()))} profiles")


if __name__ == "__main__":
    main()
