"""Sparse G(n, n, p) sampler with a union-find component structure.

Vertices ``[0, n)`` form class N1 and ``[n, 2n)`` class N2. Edge slot ``e`` in
``[0, n^2)`` joins ``e // n`` to ``n + e % n``. Present slots are generated in
increasing order by geometric skips, so the cost is linear in the number of
edges rather than in ``n^2``.

Random streams are Philox (counter based) keyed by ``(seed, trial, round)``;
a sample is therefore a deterministic function of those three numbers no
matter which thread produces it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numba as nb
import numpy as np

from .numeric import DomainError, sprinkle_probability

__all__ = ["GraphSample", "SprinkleRound", "sample", "sprinkle", "find_root",
           "stream", "draw_slots"]


def stream(seed: int, trial: int = 0, round_index: int = 0) -> np.random.Generator:
    """Independent Philox generator for one (seed, trial, round) triple."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(trial), int(round_index)))
    return np.random.Generator(np.random.Philox(ss))


def draw_slots(rng: np.random.Generator, p: float, total: int) -> np.ndarray:
    """Sorted indices of the slots in ``[0, total)`` kept independently with probability ``p``.

    Gaps between consecutive kept slots are ``floor(log(U) / log(1 - p))``.
    """
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must be a probability, got {p}")
    if p == 0.0 or total == 0:
        return np.empty(0, dtype=np.int64)
    if p == 1.0:
        return np.arange(total, dtype=np.int64)
    log_q = np.log1p(-p)
    mean = total * p
    chunk = int(mean + 6.0 * np.sqrt(mean) + 64)
    pieces = []
    last = -1
    while True:
        u = rng.random(chunk)
        # 1 - u lies in (0, 1], so the log is finite
        with np.errstate(over="ignore", divide="ignore"):  # tiny p: gap is inf, clipped below
            gaps = np.floor(np.log1p(-u) / log_q)
        np.minimum(gaps, total, out=gaps)
        pos = last + np.cumsum(gaps.astype(np.int64) + 1)
        if pos[-1] >= total:
            pieces.append(pos[pos < total])
            break
        pieces.append(pos)
        last = int(pos[-1])
        chunk = max(64, chunk // 4)
    return np.concatenate(pieces) if len(pieces) > 1 else pieces[0]


@nb.njit(cache=True, nogil=True)
def _find(parent, v):
    root = v
    while parent[root] != root:
        root = parent[root]
    while parent[v] != root:
        nxt = parent[v]
        parent[v] = root
        v = nxt
    return root


@nb.njit(cache=True, nogil=True)
def _absorb(parent, n1, n2, edges, slots, n):
    """Union the endpoints of each slot (union by size, path compression)."""
    for idx in range(slots.shape[0]):
        e = slots[idx]
        a = _find(parent, e // n)
        b = _find(parent, n + e % n)
        if a == b:
            edges[a] += 1
            continue
        size_a = n1[a] + n2[a]
        size_b = n1[b] + n2[b]
        if size_a < size_b or (size_a == size_b and b < a):
            a, b = b, a
        parent[b] = a
        n1[a] += n1[b]
        n2[a] += n2[b]
        edges[a] += edges[b] + 1


@nb.njit(cache=True, nogil=True)
def _compress_all(parent):
    for v in range(parent.shape[0]):
        _find(parent, v)


@nb.njit(cache=True, nogil=True)
def _drop_present(new, rounds_flat, bounds):
    """Mask of slots in ``new`` absent from every sorted array in ``rounds_flat``."""
    keep = np.ones(new.shape[0], dtype=np.bool_)
    for r in range(bounds.shape[0] - 1):
        arr = rounds_flat[bounds[r]:bounds[r + 1]]
        if arr.shape[0] == 0:
            continue
        pos = np.searchsorted(arr, new)
        for t in range(new.shape[0]):
            if pos[t] < arr.shape[0] and arr[pos[t]] == new[t]:
                keep[t] = False
    return keep


@dataclass
class GraphSample:
    """One realisation of G(n, n, p) held as union-find plus per-root counters."""

    n: int
    p: float
    seed: int
    trial: int
    parent: np.ndarray
    n1: np.ndarray
    n2: np.ndarray
    edges: np.ndarray
    slot_rounds: list = field(default_factory=list)
    rounds_done: int = 0

    @property
    def total_edges(self) -> int:
        return int(sum(r.shape[0] for r in self.slot_rounds))

    def roots(self) -> np.ndarray:
        return np.flatnonzero(self.parent == np.arange(self.parent.shape[0]))

    def components(self):
        """``(roots, n1, n2, edges)`` arrays, one entry per component, by root id."""
        r = self.roots()
        return r, self.n1[r].astype(np.int64), self.n2[r].astype(np.int64), self.edges[r].copy()

    def largest_root(self) -> int:
        r, a, b, _ = self.components()
        order = a + b
        # lexsort: primary -order, secondary root id
        return int(r[np.lexsort((r, -order))[0]])

    def slots(self) -> np.ndarray:
        if not self.slot_rounds:
            return np.empty(0, dtype=np.int64)
        return np.sort(np.concatenate(self.slot_rounds), kind="mergesort")

    def dump_edges(self):
        """Yield ``"u v"`` lines sorted by slot index."""
        n = self.n
        for e in self.slots():
            yield f"{e // n} {n + e % n}"

    def _absorb(self, slots: np.ndarray) -> None:
        _absorb(self.parent, self.n1, self.n2, self.edges, slots, np.int64(self.n))


@dataclass(frozen=True)
class SprinkleRound:
    p_prev: float
    p_next: float
    q: float
    new_edges: int
    delta_excess_giant: int


def _blank(n: int, p: float, seed: int, trial: int) -> GraphSample:
    idx = np.int64 if 2 * n >= 2 ** 31 else np.int32
    n1 = np.zeros(2 * n, dtype=idx)
    n1[:n] = 1
    n2 = np.zeros(2 * n, dtype=idx)
    n2[n:] = 1
    return GraphSample(n=n, p=p, seed=seed, trial=trial,
                       parent=np.arange(2 * n, dtype=idx), n1=n1, n2=n2,
                       edges=np.zeros(2 * n, dtype=np.int64))


def sample(n: int, p: float, seed: int, trial: int = 0) -> GraphSample:
    """Draw G(n, n, p) from stream ``(seed, trial, 0)``."""
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must be a probability, got {p}")
    g = _blank(n, p, seed, trial)
    slots = draw_slots(stream(seed, trial, 0), p, n * n)
    g.slot_rounds.append(slots)
    g._absorb(slots)
    _compress_all(g.parent)
    return g


def sprinkle(g: GraphSample, p_next: float, seed: int | None = None) -> SprinkleRound:
    """Union an independent G(n, n, q) into ``g`` so that it becomes G(n, n, p_next).

    Slots already present stay single edges. The stream is
    ``(seed, trial, round)`` with ``seed`` defaulting to the sample's own.
    """
    if p_next < g.p:
        raise DomainError(f"cannot sprinkle down from p={g.p} to {p_next}")
    q = sprinkle_probability(g.p, p_next) if g.p < 1.0 else 0.0
    giant = g.largest_root()
    before = int(g.edges[giant] - g.n1[giant] - g.n2[giant])
    round_index = g.rounds_done + 1
    new = draw_slots(stream(g.seed if seed is None else seed, g.trial, round_index), q, g.n * g.n)
    if new.shape[0] and g.slot_rounds:
        bounds = np.cumsum([0] + [r.shape[0] for r in g.slot_rounds]).astype(np.int64)
        new = new[_drop_present(new, np.concatenate(g.slot_rounds), bounds)]
    g.slot_rounds.append(new)
    g._absorb(new)
    _compress_all(g.parent)
    root = find_root(g, giant)
    after = int(g.edges[root] - g.n1[root] - g.n2[root])
    prev = g.p
    g.p = p_next
    g.rounds_done = round_index
    return SprinkleRound(p_prev=prev, p_next=p_next, q=q, new_edges=int(new.shape[0]),
                         delta_excess_giant=after - before)


def find_root(g: GraphSample, v: int) -> int:
    if not 0 <= v < 2 * g.n:
        raise IndexError(f"vertex {v} outside [0, {2 * g.n})")
    return int(_find(g.parent, v))
