"""Component census of a finalised sample.

A component is summarised by ``(n1, n2, edges)``; its excess is
``edges - n1 - n2``. Isolated vertices are trees of order 1 (excess -1); they
stay in the histograms and can be dropped from ``Y(-1)`` via a flag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .numeric import DomainError, delta, tree_order_threshold

__all__ = [
    "ComponentRecord",
    "ComponentCensus",
    "Flags",
    "classify",
    "census",
    "census_from_arrays",
    "small_order_cutoff",
    "window_count_trees",
    "window_count_unicyclic",
    "tree_window",
    "unicyclic_window",
]

CLASSES = ("tree", "unicyclic", "complex")


def icbrt(x: int) -> int:
    """Largest integer r with r^3 <= x."""
    r = int(round(x ** (1.0 / 3.0)))
    while r ** 3 > x:
        r -= 1
    while (r + 1) ** 3 <= x:
        r += 1
    return r


def small_order_cutoff(n: int) -> int:
    """``floor(n^(2/3))`` computed exactly."""
    return icbrt(n * n)


@dataclass(frozen=True)
class ComponentRecord:
    n1: int
    n2: int
    edges: int

    @property
    def order(self) -> int:
        return self.n1 + self.n2

    @property
    def excess(self) -> int:
        return self.edges - self.order

    @property
    def kind(self) -> str:
        ex = self.excess
        return "tree" if ex == -1 else ("unicyclic" if ex == 0 else "complex")

    def to_json(self) -> dict:
        return {"n1": self.n1, "n2": self.n2, "edges": self.edges}


class Flags(NamedTuple):
    balanced: bool
    eps_uniform: bool
    small: bool


def classify(record: ComponentRecord, n: int, eps: float) -> Flags:
    if eps <= 0:
        raise DomainError(f"uniformity threshold needs eps > 0, got {eps}")
    a, b = record.n1, record.n2
    balanced = a <= 2 * b and b <= 2 * a
    uniform = abs(a - b) < eps ** 0.25 * math.sqrt(n)
    return Flags(balanced, uniform, record.order <= small_order_cutoff(n))


@dataclass
class ComponentCensus:
    n: int
    eps: float
    order_cap: int
    small_cutoff: int
    counts: dict  # class -> number of components
    histograms: dict  # class -> bincount over orders 0..order_cap
    large: list  # ComponentRecords with order > order_cap, largest first
    L1: ComponentRecord | None
    L2: ComponentRecord | None
    isolated: int
    y_tree_small: int  # vertices in tree components of order <= small_cutoff, isolated included
    y_unicyclic_small: int
    unbalanced_threshold: int
    unbalanced_large: int
    nonuniform_small_trees: int
    complex_small: int
    shape_keys: np.ndarray = field(repr=False)  # (i, j, ell, count) rows, order <= order_cap
    roots: int = 0

    @property
    def trees(self) -> int:
        return self.counts["tree"]

    @property
    def unicyclic(self) -> int:
        return self.counts["unicyclic"]

    @property
    def complex(self) -> int:
        return self.counts["complex"]

    def y_minus1(self, include_isolated: bool = True) -> int:
        return self.y_tree_small - (0 if include_isolated else self.isolated)

    @property
    def y_0(self) -> int:
        return self.y_unicyclic_small

    def shape_map(self) -> dict:
        return {(int(i), int(j), int(e)): int(c) for i, j, e, c in self.shape_keys}

    def uniform_tree_vertices(self, max_order: int) -> int:
        """Vertices in eps-uniform tree components of order at most ``max_order``."""
        if max_order > self.order_cap:
            raise DomainError(f"max_order {max_order} exceeds order_cap {self.order_cap}")
        i, j, e, c = self.shape_keys.T
        thr = self.eps ** 0.25 * math.sqrt(self.n) if self.eps > 0 else math.inf
        mask = (e == -1) & (i + j <= max_order) & (np.abs(i - j) < thr)
        return int(((i + j) * c)[mask].sum())

    def to_json(self) -> dict:
        def hist(h):
            nz = np.flatnonzero(h)
            return [[int(o), int(h[o])] for o in nz]

        large = {cls: [] for cls in CLASSES}
        for rec in self.large:
            large[rec.kind].append(rec.order)
        hists = {}
        for cls in CLASSES:
            rows = hist(self.histograms[cls])
            for o in sorted(set(large[cls])):
                rows.append([o, large[cls].count(o)])
            hists[cls] = rows
        return {
            "trees": self.trees,
            "unicyclic": self.unicyclic,
            "complex": self.complex,
            "L1": None if self.L1 is None else self.L1.to_json(),
            "L2": None if self.L2 is None else self.L2.to_json(),
            "histograms": hists,
            "shape_map": [[int(v) for v in row] for row in self.shape_keys],
        }


_SHIFT = 21


def _shape_rows(i, j, ell):
    if i.size == 0:
        return np.empty((0, 4), dtype=np.int64)
    if i.max() < 2 ** _SHIFT and j.max() < 2 ** _SHIFT and ell.max() + 1 < 2 ** _SHIFT:
        key = (i << (2 * _SHIFT)) | (j << _SHIFT) | (ell + 1)
        uniq, cnt = np.unique(key, return_counts=True)
        mask = 2 ** _SHIFT - 1
        return np.stack([uniq >> (2 * _SHIFT), (uniq >> _SHIFT) & mask,
                         (uniq & mask) - 1, cnt], axis=1)
    uniq, cnt = np.unique(np.stack([i, j, ell], axis=1), axis=0, return_counts=True)
    return np.concatenate([uniq, cnt[:, None]], axis=1)


def census_from_arrays(n: int, eps: float, roots, n1, n2, edges, order_cap: int | None = None,
                       unbalanced_threshold: int | None = None) -> ComponentCensus:
    """Census from per-component arrays (one entry per union-find root)."""
    roots = np.asarray(roots, dtype=np.int64)
    n1 = np.asarray(n1, dtype=np.int64)
    n2 = np.asarray(n2, dtype=np.int64)
    edges = np.asarray(edges, dtype=np.int64)
    small = small_order_cutoff(n)
    if order_cap is None:
        order_cap = icbrt(n * n) + (0 if icbrt(n * n) ** 3 == n * n else 1)  # ceil(n^(2/3))
        order_cap = max(order_cap, min(2 * n, 64))  # tiny graphs keep every shape
    if unbalanced_threshold is None:
        unbalanced_threshold = math.ceil(2000 * math.log(n)) if n > 1 else 1
    order = n1 + n2
    excess = edges - order
    kind = np.where(excess < 0, 0, np.where(excess == 0, 1, 2))

    counts, histograms = {}, {}
    capped = order <= order_cap
    for code, cls in enumerate(CLASSES):
        sel = kind == code
        counts[cls] = int(sel.sum())
        histograms[cls] = np.bincount(order[sel & capped], minlength=order_cap + 1)

    rank = np.lexsort((roots, -order))
    records = [ComponentRecord(int(n1[r]), int(n2[r]), int(edges[r])) for r in rank[:2]]
    big = rank[order[rank] > order_cap]
    large = [ComponentRecord(int(n1[r]), int(n2[r]), int(edges[r])) for r in big]

    is_small = order <= small
    balanced = (n1 <= 2 * n2) & (n2 <= 2 * n1)
    thr = eps ** 0.25 * math.sqrt(n) if eps > 0 else math.inf
    nonuniform = np.abs(n1 - n2) >= thr

    return ComponentCensus(
        n=n, eps=eps, order_cap=order_cap, small_cutoff=small,
        counts=counts, histograms=histograms, large=large,
        L1=records[0] if records else None,
        L2=records[1] if len(records) > 1 else None,
        isolated=int((order == 1).sum()),
        y_tree_small=int(order[(kind == 0) & is_small].sum()),
        y_unicyclic_small=int(order[(kind == 1) & is_small].sum()),
        unbalanced_threshold=unbalanced_threshold,
        unbalanced_large=int((~balanced & (order >= unbalanced_threshold)).sum()),
        nonuniform_small_trees=int(((kind == 0) & is_small & nonuniform).sum()),
        complex_small=int(((kind == 2) & is_small).sum()),
        shape_keys=_shape_rows(n1[capped], n2[capped], excess[capped]),
        roots=int(roots.shape[0]),
    )


def census(g, eps: float, order_cap: int | None = None, **kwargs) -> ComponentCensus:
    """Census of a finalised :class:`~biphase.sampler.GraphSample`."""
    return census_from_arrays(g.n, eps, *g.components(), order_cap=order_cap, **kwargs)


def tree_window(n: int, eps: float, r1: float, r2: float) -> tuple[int, int]:
    """Closed integer order window ``[ceil(T(r1)), floor(T(r2))]``."""
    if r2 < r1:
        raise DomainError(f"need r1 <= r2, got {r1}, {r2}")
    return (math.ceil(tree_order_threshold(n, eps, r1)),
            math.floor(tree_order_threshold(n, eps, r2)))


def unicyclic_window(eps: float, u1: float, u2: float) -> tuple[int, int]:
    if u2 < u1:
        raise DomainError(f"need u1 <= u2, got {u1}, {u2}")
    d = delta(eps)
    return math.ceil(u1 / d), math.floor(u2 / d)


def _window_sum(c: ComponentCensus, cls: str, lo: int, hi: int) -> int:
    if hi < lo:
        return 0
    if hi > c.order_cap:
        raise DomainError(f"window upper edge {hi} exceeds order_cap {c.order_cap}")
    return int(c.histograms[cls][lo:hi + 1].sum())


def window_count_trees(c: ComponentCensus, n: int, eps: float, r1: float, r2: float) -> int:
    if r1 == r2:
        return 0
    return _window_sum(c, "tree", *tree_window(n, eps, r1, r2))


def window_count_unicyclic(c: ComponentCensus, n: int, eps: float, u1: float, u2: float) -> int:
    if u1 == u2:
        return 0
    return _window_sum(c, "unicyclic", *unicyclic_window(eps, u1, u2))
