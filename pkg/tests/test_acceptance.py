"""Acceptance criteria, one test per criterion.

Each test prints a single ``[PASS]`` / ``[FAIL]`` line (collected again in the
terminal summary) and then asserts. Monte Carlo criteria run at full scale
with the acceptance seed and take roughly half an hour in total on one core.
"""

import math
import time

import pytest

from biphase import enumeration as en
from biphase import experiments as ex
from biphase import numeric as nc
from biphase.cli import selftest_checks

RESULTS = []
SEED = ex.ACCEPTANCE_SEED
THREADS = 1


def record(number, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {detail}"
    RESULTS.append(line)
    print(line)
    return ok


def mc_config(**kw):
    base = dict(n=10 ** 6, eps=0.05, trials=2000, master_seed=SEED, threads=THREADS)
    base.update(kw)
    return ex.ExperimentConfig(**base)


def check_lines(report):
    return "; ".join(f"{c['name']}={c['value']!r} (bound {c['bound']}) {'ok' if c['pass'] else 'FAIL'}"
                     for c in report.checks)


def test_criterion_01_oracle_equivalence():
    t0 = time.perf_counter()
    results = list(selftest_checks())
    bad = [name for name, ok in results if not ok]
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 60
    record(1, ok, f"{len(results) - len(bad)}/{len(results)} exact matches in {elapsed:.1f}s")
    assert ok, bad


def test_criterion_02_complex_bound():
    t0 = time.perf_counter()
    worst, rows = 0.0, 0
    for k in range(2, 9):
        for i in range(1, k):
            j = k - i
            if not (2 * i >= j and 2 * j >= i):
                continue
            for ell in range(1, 4):
                if ell > i * j - i - j:
                    continue
                count = en.count_connected_oracle(i, j, k + ell)
                c = en.minimal_complex_constant(i, j, ell, count)
                assert count <= float(en.complex_upper_bound(i, j, ell, 100.0)) * (1 + 1e-12)
                worst = max(worst, c)
                rows += 1
    elapsed = time.perf_counter() - t0
    ok = rows > 0 and worst <= 100 and elapsed < 120
    record(2, ok, f"{rows} shapes, minimal c = {worst:.6g} (<= 100) in {elapsed:.1f}s")
    assert ok


def _exhaustive(p):
    slots = [(0, 2), (0, 3), (1, 2), (1, 3)]
    table = {}
    for mask in range(16):
        edges = [slots[b] for b in range(4) if mask >> b & 1]
        w = p ** len(edges) * (1 - p) ** (4 - len(edges))
        comp = list(range(4))
        for a, b in edges:
            ra, rb = comp[a], comp[b]
            comp = [ra if c == rb else c for c in comp]
        for label in set(comp):
            members = [v for v in range(4) if comp[v] == label]
            i = sum(v < 2 for v in members)
            m = sum(1 for a, _ in edges if comp[a] == label)
            key = (i, len(members) - i, m - len(members))
            table[key] = table.get(key, 0.0) + w
    return table


def test_criterion_03_exhaustive_expectation():
    t0 = time.perf_counter()
    worst = 0.0
    for p in (0.25, 0.5, 0.75):
        for (i, j, ell), value in _exhaustive(p).items():
            k = i + j
            count = 1 if k == 1 else en.count_connected_oracle(i, j, k + ell)
            got = float(en.expected_components(2, p, en.BipartiteShape(i, j, ell), count))
            worst = max(worst, abs(got - value))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-12 and elapsed < 1
    record(3, ok, f"max |error| = {worst:.2e} (<= 1e-12) in {elapsed:.3f}s")
    assert ok


def test_criterion_04_eps_prime():
    t0 = time.perf_counter()
    grid = [10 ** -3 + (0.3 - 10 ** -3) * t / 299 for t in range(300)]
    resid = max(abs((1 - y) * math.exp(y) - (1 + e) * math.exp(-e)) for e in grid for y in [nc.epsilon_prime(e)])
    expansion = max(abs(nc.epsilon_prime(e) - (e - 2 / 3 * e * e)) / e ** 3 for e in grid)
    elapsed = time.perf_counter() - t0
    ok = resid <= 1e-12 and expansion <= 1 and elapsed < 1
    record(4, ok, f"max residual {resid:.2e} (<= 1e-12); max |eps' - (eps - 2eps^2/3)|/eps^3 = {expansion:.3f} (<= 1)")
    assert ok


def test_criterion_05_gaussian_sum():
    t0 = time.perf_counter()
    r0 = nc.verify_gaussian_sum(10 ** 4, 9999, 0, 10 ** 9)[2]
    r1 = nc.verify_gaussian_sum(10 ** 4, 9999, 1, 10 ** 9)[2]
    elapsed = time.perf_counter() - t0
    ok = abs(r0 - 1) <= 0.01 and abs(r1 - 1) <= 0.05 and elapsed < 5
    record(5, ok, f"ratio m=0: {r0:.6f} (within 1%), m=1: {r1:.6f} (within 5%) in {elapsed:.2f}s")
    assert ok


def test_criterion_06_poisson_trees():
    r = ex.exp_poisson_trees(mc_config())
    pred = r.predictions
    detail = (f"mean {r.estimates['mean']:.4f} vs lambda {pred['lambda']:.6f} +-15%, "
              f"TV {r.statistics['tv_distance']:.4f} (<= 0.08), "
              f"E(Y)_2 {r.estimates['second_factorial_moment']:.3f} vs {pred['lambda_squared']:.4f} +-30%; "
              f"exact finite-n mean {pred['exact_finite_n_mean']:.4f}")
    record(6, bool(r.passed), detail)
    if not r.passed:
        pytest.fail(check_lines(r))


def test_criterion_07_poisson_unicyclic():
    r = ex.exp_poisson_unicyclic(mc_config())
    pred = r.predictions
    detail = (f"mean {r.estimates['mean']:.4f} +- {r.stderr['mean']:.4f} vs nu {pred['nu']:.6f} +-25%; "
              f"exact finite-n mean {pred['exact_finite_n_mean']:.4f}, nu/2 = {pred['parity_corrected_limit']:.4f}")
    record(7, bool(r.passed), detail)
    if not r.passed:
        pytest.fail(check_lines(r))


def test_criterion_08_giant():
    r = ex.exp_giant(mc_config(trials=200))
    detail = (f"mean |L1| {r.estimates['mean_order']:.1f} vs {r.predictions['giant_order']:.1f} +-3%, "
              f"|L2| > n^(2/3) fraction {r.estimates['l2_fraction']:.3f} (<= 0.05), "
              f"imbalance fraction {r.estimates['imbalance_fraction']:.3f} (<= 0.05)")
    record(8, bool(r.passed), detail)
    if not r.passed:
        pytest.fail(check_lines(r))


def test_criterion_09_giant_excess():
    r = ex.exp_excess(mc_config(n=10 ** 7, trials=100))
    detail = (f"mean excess {r.estimates['mean_excess']:.1f} +- {r.stderr['mean_excess']:.1f} "
              f"vs {r.predictions['excess']:.1f} +-15%")
    record(9, bool(r.passed), detail)
    if not r.passed:
        pytest.fail(check_lines(r))


def test_criterion_10_subcritical_complex_free():
    r = ex.exp_no_complex(mc_config(eps=-0.05, trials=1000))
    detail = f"complex fraction {r.estimates['fraction']:.4f} (<= {10 / 125:.2f})"
    record(10, bool(r.passed), detail)
    if not r.passed:
        pytest.fail(check_lines(r))


def test_criterion_11_small_vertex_counts():
    r = ex.exp_small_vertex_counts(mc_config())
    var = r.estimates["var_z1_eps_over_n"]
    detail = (f"mean Y(-1) {r.estimates['mean_y_minus1']:.0f} vs {r.predictions['y_minus1']:.0f} +-1%; "
              f"Var(Z1) eps/n = {', '.join(f'{k}: {v:.3f}' for k, v in var.items())} (<= 10)")
    record(11, bool(r.passed), detail)
    if not r.passed:
        pytest.fail(check_lines(r))


def test_criterion_12_coupling():
    t0 = time.perf_counter()
    r = ex.exp_coupling(mc_config(n=10 ** 5, trials=500, slot_set_size=10 ** 7))
    elapsed = time.perf_counter() - t0
    ok = bool(r.passed) and elapsed < 300
    detail = (f"algebra residual {r.checks[0]['value']:.1e}; chi-square {r.statistics['chi_square']:.2f} "
              f"<= {r.statistics['critical']:.2f} (df {r.statistics['df']}, alpha 0.01) in {elapsed:.0f}s")
    record(12, ok, detail)
    if not ok:
        pytest.fail(check_lines(r))


def test_criterion_13_determinism():
    outputs = {}
    for threads in (1, 4, 16):
        ex.clear_cache()
        c = ex.ExperimentConfig(n=10 ** 5, eps=0.1, trials=24, master_seed=SEED, threads=threads)
        text = "".join(fn(c).to_json() for fn in (ex.exp_poisson_trees, ex.exp_poisson_unicyclic,
                                                 ex.exp_giant, ex.exp_no_large_tree))
        c_exc = ex.ExperimentConfig(n=10 ** 5, eps=0.3, trials=6, master_seed=SEED, threads=threads)
        text += ex.exp_excess(c_exc).to_json()
        outputs[threads] = text
    ex.clear_cache()
    ok = outputs[1] == outputs[4] == outputs[16]
    record(13, ok, f"reports byte-identical at threads 1, 4, 16 ({len(outputs[1])} bytes)")
    assert ok
