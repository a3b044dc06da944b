"""Pilot runs with the pilot seed, used once to sanity-check the frozen tolerances.

Writes results/pilot.json. Usage: python3 scripts/pilot.py [--trials 300] [--threads 1]
"""

import argparse
import json
import pathlib
import time

from biphase import experiments as ex

ROOT = pathlib.Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=300)
    ap.add_argument("--excess-trials", type=int, default=10)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    def cfg(**kw):
        base = dict(n=10 ** 6, eps=0.05, trials=args.trials, master_seed=ex.PILOT_SEED, threads=args.threads)
        base.update(kw)
        return ex.ExperimentConfig(**base)

    runs = {
        "poisson_trees": (ex.exp_poisson_trees, cfg()),
        "poisson_unicyclic": (ex.exp_poisson_unicyclic, cfg()),
        "poisson_unicyclic_subcritical": (ex.exp_poisson_unicyclic, cfg(eps=-0.05)),
        "no_large_tree": (ex.exp_no_large_tree, cfg()),
        "no_complex_sub": (ex.exp_no_complex, cfg(eps=-0.05)),
        "no_complex_super": (ex.exp_no_complex, cfg()),
        "giant": (ex.exp_giant, cfg()),
        "small_vertex_counts": (ex.exp_small_vertex_counts, cfg()),
        "subcritical_tail": (ex.exp_subcritical_tail, cfg(trials=max(20, args.trials // 10),
                                                          tail_ns=(10 ** 5, 10 ** 6))),
        "excess": (ex.exp_excess, cfg(n=10 ** 7, trials=args.excess_trials)),
    }
    out = {}
    for name, (fn, c) in runs.items():
        t0 = time.perf_counter()
        r = fn(c)
        out[name] = {"passed": r.passed, "predictions": r.predictions, "estimates": r.estimates,
                     "stderr": r.stderr, "statistics": r.statistics, "checks": r.checks, "notes": r.notes}
        print(f"{name}: passed={r.passed} ({time.perf_counter() - t0:.0f}s)", flush=True)
        for line in r.summary_lines():
            print("   ", line, flush=True)
    path = ROOT / "results" / "pilot.json"
    path.parent.mkdir(exist_ok=True)
    path.write_text(json.dumps(out, indent=1, sort_keys=True) + "\n")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
