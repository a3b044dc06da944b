import csv
import io
import json
import math

import numpy as np
import pytest
from scipy.stats import poisson

from biphase import census as cs
from biphase import experiments as ex
from biphase import sampler as sp
from biphase.enumeration import expected_window_count
from biphase.numeric import DomainError

SEED = ex.PILOT_SEED  # tests never touch the acceptance seed


def cfg(**kw):
    base = dict(n=100_000, eps=0.1, trials=20, master_seed=SEED)
    base.update(kw)
    return ex.ExperimentConfig(**base)


def test_config_validation_and_parsing():
    with pytest.raises(DomainError):
        cfg(trials=0)
    c = ex.ExperimentConfig.from_mapping({"n": "1e5", "eps": "0.2", "alphas": "1,2.5", "tol.mean_rel": "0.5",
                                          "include-isolated": "false", "omega": "none"})
    assert c.n == 100_000 and c.alphas == (1, 2.5) and not c.include_isolated and c.omega is None
    assert c.tol("giant", "mean_rel") == 0.5 and c.tol("giant", "l2_fraction_max") == 0.05
    with pytest.raises(KeyError):
        ex.ExperimentConfig.from_mapping({"bogus": "1"})


def test_total_variation_reference():
    values = np.array([0, 0, 1, 2, 2, 2, 5])
    emp = np.bincount(values, minlength=60) / values.size
    ref = 0.5 * np.abs(emp - poisson.pmf(np.arange(60), 1.3)).sum()
    assert ex.total_variation_poisson(values, 1.3) == pytest.approx(ref, abs=1e-12)
    assert ex.total_variation_poisson(np.zeros(9, int), 0.0) == 0.0


def test_degenerate_windows():
    r = ex.exp_poisson_trees(cfg(r1=0.4, r2=0.4, trials=7))
    assert all(row["tree_window"] == 0 for row in r.per_trial)
    assert r.statistics["tv_distance"] == 0.0
    r = ex.exp_poisson_unicyclic(cfg(u1=1.2, u2=1.2, trials=7))
    assert r.estimates["mean"] == 0.0 and r.statistics["tv_distance"] == 0.0


def test_tree_window_mean_matches_exact_expectation():
    # the simulation must reproduce the exact finite-n expectation, whatever the limit
    c = cfg(n=100_000, eps=0.1, trials=200)
    rows = ex.simulate(c)
    y = np.array([r["tree_window"] for r in rows])
    lo, hi = cs.tree_window(c.n, c.eps, 0, 1)
    exact = expected_window_count(c.n, (1 + c.eps) / c.n, lo, hi, "tree")
    se = y.std(ddof=1) / math.sqrt(y.size)
    assert abs(y.mean() - exact) < 4 * se


def test_unicyclic_window_mean_matches_exact_expectation():
    c = cfg(n=100_000, eps=0.1, trials=200, u1=0.2, u2=2.0)
    z = np.array([r["unicyclic_window"] for r in ex.simulate(c)])
    lo, hi = cs.unicyclic_window(c.eps, c.u1, c.u2)
    exact = expected_window_count(c.n, (1 + c.eps) / c.n, lo, hi, "unicyclic")
    se = max(z.std(ddof=1), math.sqrt(exact)) / math.sqrt(z.size)
    assert abs(z.mean() - exact) < 4 * se


def test_reports_deterministic_across_threads():
    outs = []
    for threads in (1, 3):
        ex.clear_cache()
        c = cfg(n=20_000, trials=6, threads=threads)
        outs.append(ex.exp_giant(c).to_json() + ex.exp_poisson_trees(c).to_json())
    assert outs[0] == outs[1]
    ex.clear_cache()


def test_report_serialisation():
    r = ex.exp_no_complex(cfg(n=20_000, trials=5))
    d = json.loads(r.to_json())
    for key in ("name", "config", "predictions", "estimates", "stderr", "statistics", "passed", "per_trial"):
        assert key in d
    assert "wall_time" not in d and "wall_time" in json.loads(r.to_json(timing=True))
    assert "threads" not in d["config"]
    rows = list(csv.DictReader(io.StringIO(r.to_csv())))
    assert len(rows) == 5 and rows[0]["trial_index"] == "0" and rows[0]["seed"] == str(SEED)


def test_regime_guard_downgrades():
    r = ex.exp_excess(cfg(n=20_000, eps=0.05, trials=2))  # eps^3 n = 2.5
    assert r.passed is None and all(c["pass"] is None for c in r.checks)


def test_excess_schedule():
    s = ex.excess_schedule(10 ** 7, 0.05)
    assert s[-1] == 0.05 and all(a < b for a, b in zip(s, s[1:]))
    omega = (0.05 ** 3 * 10 ** 7) ** (1 / 6)
    assert s[0] == pytest.approx(omega ** 0.2 * 10 ** (-7 / 3))
    assert s[1] / s[0] == pytest.approx(1 + omega ** -0.1)
    with pytest.raises(DomainError):
        ex.excess_schedule(100, -0.1)


def test_complete_graph_giant():
    g = sp.sample(40, 1.0, 0)
    c = cs.census(g, 0.5)
    assert c.L1.order == 80 and c.L2 is None


def test_empty_graph_small_vertices():
    c = cs.census(sp.sample(500, 0.0, 0), 0.1)
    assert c.y_minus1(True) == 1000 and c.y_minus1(False) == 0


def test_huge_alpha_never_exceeded():
    r = ex.exp_no_large_tree(cfg(n=20_000, eps=0.2, trials=10, alphas=(1.0, 4.0, 1e6)))
    assert r.estimates["fractions"]["1000000.0"] == 0.0
    assert any("threshold > 2n" in c["name"] and c["pass"] for c in r.checks)


def test_deep_subcritical():
    r = ex.exp_no_complex(cfg(n=200_000, eps=-0.5, trials=10))
    assert r.estimates["fraction"] == 0.0 and r.passed
    r = ex.exp_subcritical_tail(cfg(eps=0.5, trials=5, tail_ns=(10_000, 100_000)))
    assert all(v < 0.05 for v in r.estimates["ratio"].values())


def test_small_vertex_prediction_close_at_moderate_scale():
    r = ex.exp_small_vertex_counts(cfg(n=100_000, eps=0.2, trials=10, variance_ns=(100_000,)))
    assert r.estimates["mean_y_minus1"] == pytest.approx(r.predictions["y_minus1"], rel=0.01)


def test_coupling_experiment_small():
    r = ex.exp_coupling(cfg(n=2000, trials=100, slot_set_size=2000 * 2000, p1_factor=0.9, p2_factor=1.1))
    assert r.checks[0]["pass"]
    assert 0 < r.statistics["p_value"] <= 1
