import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from biphase import census as cs
from biphase import sampler as sp
from biphase.numeric import DomainError, tree_order_threshold


def oracle_records(g):
    n = g.n
    slots = g.slots()
    u, v = slots // n, n + slots % n
    adj = coo_matrix((np.ones(slots.size), (u, v)), shape=(2 * n, 2 * n))
    k, labels = connected_components(adj, directed=False)
    n1 = np.bincount(labels[:n], minlength=k)
    n2 = np.bincount(labels[n:], minlength=k)
    e = np.bincount(labels[u], minlength=k)
    return [cs.ComponentRecord(int(a), int(b), int(c)) for a, b, c in zip(n1, n2, e)]


def sample_from_edges(n, pairs):
    """A finalised sample holding exactly the given (left, right) pairs."""
    g = sp._blank(n, 0.5, 0, 0)
    slots = np.array(sorted(a * n + b for a, b in pairs), dtype=np.int64)
    g.slot_rounds.append(slots)
    g._absorb(slots)
    sp._compress_all(g.parent)
    return g


def test_classify_examples():
    assert cs.classify(cs.ComponentRecord(5, 5, 9), 100, 0.1) == (True, True, True)
    assert not cs.classify(cs.ComponentRecord(10, 4, 13), 100, 0.1).balanced
    f = cs.classify(cs.ComponentRecord(600, 200, 799), 10 ** 6, 0.05)
    assert f.eps_uniform and not f.balanced
    assert 0.05 ** 0.25 * 1000 == pytest.approx(472.87, abs=0.01)
    with pytest.raises(DomainError):
        cs.classify(cs.ComponentRecord(1, 1, 1), 10, 0.0)


def test_small_cutoff_exact():
    assert cs.small_order_cutoff(10 ** 6) == 10 ** 4
    assert cs.small_order_cutoff(10 ** 6 - 1) == 9999
    for n in (2, 7, 1000, 123457):
        c = cs.small_order_cutoff(n)
        assert c ** 3 <= n * n < (c + 1) ** 3


def test_empty_sample():
    c = cs.census(sp.sample(40, 0.0, 0), 0.1)
    assert c.trees == 80 and c.unicyclic == 0 and c.complex == 0
    assert c.isolated == 80
    assert c.y_minus1(True) == 80 and c.y_minus1(False) == 0
    assert c.shape_map() == {(1, 0, -1): 40, (0, 1, -1): 40}


def test_four_cycle():
    g = sample_from_edges(2, [(0, 0), (0, 1), (1, 0), (1, 1)])
    c = cs.census(g, 0.5)
    assert (c.trees, c.unicyclic, c.complex) == (0, 1, 0)
    assert c.shape_map() == {(2, 2, 0): 1}
    assert c.y_0 == 0  # order 4 exceeds floor(2^(2/3)) = 1


@given(st.integers(2, 80), st.floats(0, 0.2), st.integers(0, 2 ** 31))
def test_census_matches_oracle(n, p, seed):
    g = sp.sample(n, p, seed)
    c = cs.census(g, 0.1)
    recs = oracle_records(g)
    assert c.trees + c.unicyclic + c.complex == len(recs) == c.roots
    by_kind = {"tree": [], "unicyclic": [], "complex": []}
    for r in recs:
        by_kind[r.kind].append(r.order)
    for kind, orders in by_kind.items():
        hist = np.bincount(orders, minlength=c.order_cap + 1) if orders else np.zeros(c.order_cap + 1, int)
        capped = hist[:c.order_cap + 1]
        assert np.array_equal(c.histograms[kind], capped)
    # totals and shape map consistency
    total = sum(int((np.arange(c.order_cap + 1) * h).sum()) for h in c.histograms.values())
    total += sum(r.order for r in c.large)
    assert total == 2 * n
    trees_from_map = np.zeros(c.order_cap + 1, dtype=np.int64)
    for (i, j, ell), cnt in c.shape_map().items():
        if ell == -1:
            trees_from_map[i + j] += cnt
    assert np.array_equal(trees_from_map, c.histograms["tree"])
    # L1, L2 against a full sort
    ranked = sorted(recs, key=lambda r: -r.order)
    assert c.L1.order == ranked[0].order
    if len(ranked) > 1:
        assert c.L2.order == ranked[1].order
    assert c.L1.order >= (c.L2.order if c.L2 else 0)
    small = cs.small_order_cutoff(n)
    assert c.y_minus1() == sum(r.order for r in recs if r.kind == "tree" and r.order <= small)
    assert c.y_0 == sum(r.order for r in recs if r.kind == "unicyclic" and r.order <= small)
    assert c.y_minus1() + c.y_0 <= 2 * n


def test_tie_break_smaller_root():
    # two disjoint edges: orders tie, L1 is the component of the smaller root id
    g = sample_from_edges(4, [(0, 0), (2, 3)])
    c = cs.census(g, 0.1)
    roots, a, b, e = g.components()
    assert c.L1 == c.L2 == cs.ComponentRecord(1, 1, 1)
    assert g.largest_root() == int(min(r for r, x, y in zip(roots, a, b) if x + y == 2))


def test_y_minus1_excludes_large_and_cyclic():
    n = 27  # cutoff floor(27^(2/3)) = 9
    pairs = [(i, i) for i in range(5)] + [(i + 1, i) for i in range(4)]  # path on 10 vertices
    pairs += [(10, 10), (10, 11), (11, 10), (11, 11)]  # 4-cycle
    pairs += [(20, 20)]  # single edge
    c = cs.census(sample_from_edges(n, pairs), 0.1)
    isolated = 2 * n - 10 - 4 - 2
    assert c.y_minus1() == isolated + 2  # the order-10 path is above the cutoff
    assert c.y_0 == 4


def test_window_counts_constructed():
    n, eps = 10 ** 6, 0.05
    lo, hi = cs.tree_window(n, eps, 0, 1)
    k = math.ceil(tree_order_threshold(n, eps, 0.5))
    assert lo <= k <= hi
    roots = np.arange(3)
    c = cs.census_from_arrays(n, eps, roots, [k // 2, 1, 1], [k - k // 2, 0, 0], [k - 1, 0, 0])
    assert cs.window_count_trees(c, n, eps, 0, 1) == 1
    assert cs.window_count_trees(c, n, eps, 0.3, 0.3) == 0
    u_lo, u_hi = cs.unicyclic_window(eps, 1, 2)
    m = (u_lo + u_hi) // 2
    c = cs.census_from_arrays(n, eps, roots, [m // 2, 1, 1], [m - m // 2, 0, 0], [m, 0, 0])
    assert cs.window_count_unicyclic(c, n, eps, 1, 2) == 1
    assert cs.window_count_unicyclic(c, n, eps, 1.5, 1.5) == 0
    assert cs.window_count_trees(c, n, eps, 0, 1) == 0


def test_window_beyond_cap():
    c = cs.census_from_arrays(1000, 0.5, [0], [1], [0], [0], order_cap=5)
    with pytest.raises(DomainError):
        cs.window_count_unicyclic(c, 1000, 0.5, 1, 10)


def test_uniform_tree_vertices():
    n = 10 ** 4  # eps=0.0001: threshold 0.1 * 100 = 10
    c = cs.census_from_arrays(n, 1e-4, np.arange(4), [3, 20, 1, 2], [3, 2, 1, 2], [5, 21, 1, 4])
    # (3,3) tree -> 6; (20,2) tree is non-uniform (18 >= 10); (1,1) tree -> 2; (2,2,ell=0) not a tree
    assert c.uniform_tree_vertices(50) == 8
    assert c.uniform_tree_vertices(5) == 2
    assert c.nonuniform_small_trees == 1


def test_unbalanced_large():
    c = cs.census_from_arrays(10 ** 4, 0.1, np.arange(2), [100, 40], [20, 40], [119, 79],
                              unbalanced_threshold=50)
    assert c.unbalanced_large == 1


def test_json_schema():
    g = sp.sample(300, 1.5 / 300, 1)
    d = cs.census(g, 0.5).to_json()
    assert set(d) == {"trees", "unicyclic", "complex", "L1", "L2", "histograms", "shape_map"}
    assert set(d["L1"]) == {"n1", "n2", "edges"}
    assert set(d["histograms"]) == {"tree", "unicyclic", "complex"}
    assert sum(o * k for cls in d["histograms"].values() for o, k in cls) == 600
