"""Exact counts of labelled connected bipartite graphs and component expectations.

Counts are plain Python ints (arbitrary precision). Expectations, which span
hundreds of orders of magnitude at realistic ``n``, are returned as
:class:`LogReal`.

``C(i, j, ell)`` below is the number of connected bipartite graphs with ``i``
labelled vertices in one class, ``j`` in the other and ``i + j + ell`` edges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numba as _nb
import numpy as np
from scipy.special import gammaln as _gammaln

from .numeric import DomainError

__all__ = [
    "BipartiteShape",
    "LogReal",
    "OracleBudgetError",
    "falling_factorial",
    "count_trees",
    "count_forests",
    "count_unicyclic",
    "unicyclic_asymptotic",
    "complex_upper_bound",
    "minimal_complex_constant",
    "naive_edge_subset_bound",
    "count_connected_oracle",
    "oracle_partition",
    "expected_components",
    "expected_window_count",
]

ORACLE_MAX_SLOTS = 24
ORACLE_MAX_SUBSETS = 10_000_000


class OracleBudgetError(RuntimeError):
    pass


@dataclass(frozen=True)
class BipartiteShape:
    """Class sizes ``(i, j)`` and excess ``ell`` of a connected bipartite graph."""

    i: int
    j: int
    ell: int

    def __post_init__(self):
        if self.i < 0 or self.j < 0 or self.i + self.j < 1:
            raise DomainError(f"bad class sizes ({self.i}, {self.j})")
        if self.ell < -1:
            raise DomainError(f"excess must be >= -1, got {self.ell}")
        if self.edges > self.i * self.j:
            raise DomainError(f"{self.edges} edges do not fit in K_{{{self.i},{self.j}}}")

    @property
    def k(self) -> int:
        return self.i + self.j

    @property
    def edges(self) -> int:
        return self.i + self.j + self.ell


@dataclass(frozen=True)
class LogReal:
    """Nonnegative real stored as its natural log; ``log_magnitude = -inf`` is zero."""

    log_magnitude: float

    @classmethod
    def zero(cls) -> "LogReal":
        return cls(-math.inf)

    @classmethod
    def from_value(cls, x) -> "LogReal":
        if x < 0:
            raise DomainError(f"LogReal holds nonnegative values, got {x}")
        if x == 0:
            return cls.zero()
        return cls(math.log(x))  # math.log is exact-input for big ints

    @property
    def is_zero(self) -> bool:
        return self.log_magnitude == -math.inf

    def __mul__(self, other: "LogReal") -> "LogReal":
        if self.is_zero or other.is_zero:
            return LogReal.zero()
        return LogReal(self.log_magnitude + other.log_magnitude)

    def __truediv__(self, other: "LogReal") -> "LogReal":
        if other.is_zero:
            raise ZeroDivisionError("LogReal division by zero")
        if self.is_zero:
            return self
        return LogReal(self.log_magnitude - other.log_magnitude)

    def __add__(self, other: "LogReal") -> "LogReal":
        a, b = self.log_magnitude, other.log_magnitude
        if a < b:
            a, b = b, a
        if b == -math.inf:
            return LogReal(a)
        return LogReal(a + math.log1p(math.exp(b - a)))

    def __lt__(self, other: "LogReal") -> bool:
        return self.log_magnitude < other.log_magnitude

    def __le__(self, other: "LogReal") -> bool:
        return self.log_magnitude <= other.log_magnitude

    def __float__(self) -> float:
        try:
            return math.exp(self.log_magnitude)
        except OverflowError:
            return math.inf

    def scientific(self) -> str:
        """Decimal scientific notation that survives magnitudes beyond double range."""
        if self.is_zero:
            return "0"
        log10 = self.log_magnitude / math.log(10.0)
        exponent = math.floor(log10)
        mantissa = 10.0 ** (log10 - exponent)
        if mantissa >= 9.9999999995:
            mantissa, exponent = 1.0, exponent + 1
        return f"{mantissa:.9f}e{exponent:+d}"

    def to_json(self) -> dict:
        return {"sign": 0 if self.is_zero else 1,
                "log": None if self.is_zero else self.log_magnitude}


def falling_factorial(n: int, i: int) -> int:
    """``n (n - 1) ... (n - i + 1)``; empty product for ``i = 0``."""
    if i < 0 or n < 0 or i > n:
        raise DomainError(f"falling factorial needs 0 <= i <= n, got n={n}, i={i}")
    return math.perm(n, i)


def count_trees(i: int, j: int) -> int:
    """Spanning trees of ``K_{i,j}``: ``i^(j-1) j^(i-1)``."""
    if i < 1 or j < 1:
        raise DomainError(f"count_trees needs i, j >= 1, got ({i}, {j})")
    return i ** (j - 1) * j ** (i - 1)


def count_forests(i: int, j: int, s: int, t: int) -> int:
    """Spanning forests of ``K_{i,j}`` with ``s + t`` trees, each containing
    exactly one of ``s`` fixed left roots and ``t`` fixed right roots.

    Closed form ``i^(j-t-1) j^(i-s-1) (s j + t i - s t)``; a -1 exponent
    (``t = j`` or ``s = i``) cancels against the trailing factor, which is then
    divisible by ``i`` (resp. ``j``).
    """
    if not (0 <= s <= i and 0 <= t <= j):
        raise DomainError(f"need 0 <= s <= i, 0 <= t <= j, got s={s}, t={t}")
    if s + t == 0:
        raise DomainError("at least one root is required")
    tail = s * j + t * i - s * t
    a, b = j - t - 1, i - s - 1
    if a == -1 and b == -1:
        # all vertices are roots: only the empty forest
        return tail // (i * j)
    if a == -1:
        # t = j: tail = s j + j i - s j = i j
        return (tail // i) * j ** b
    if b == -1:
        return (tail // j) * i ** a
    return i ** a * j ** b * tail


def count_unicyclic(i: int, j: int) -> int:
    """Connected unicyclic bipartite graphs, summed over the cycle half-length ``r``.

    Evaluated in exact rationals and checked to be an integer.
    """
    if i < 1 or j < 1:
        raise DomainError(f"count_unicyclic needs i, j >= 1, got ({i}, {j})")
    if min(i, j) < 2:
        return 0
    total = Fraction(0)
    for r in range(2, min(i, j) + 1):
        total += Fraction(math.perm(i, r) * math.perm(j, r), i ** r * j ** r) * (i + j - r)
    value = Fraction(i ** (j - 1) * j ** (i - 1), 2) * total
    if value.denominator != 1:
        raise ArithmeticError(f"unicyclic count for ({i}, {j}) is not integral: {value}")
    return value.numerator


def unicyclic_asymptotic(i: int, j: int) -> LogReal:
    """``sqrt(pi/8) sqrt(i+j) i^(j-1/2) j^(i-1/2)`` in log space."""
    if i < 2 or j < 2:
        raise DomainError(f"need i, j >= 2, got ({i}, {j})")
    return LogReal(0.5 * math.log(math.pi / 8.0) + 0.5 * math.log(i + j)
                   + (j - 0.5) * math.log(i) + (i - 0.5) * math.log(j))


def _check_complex_domain(i: int, j: int, ell: int) -> None:
    if i < 1 or j < 1:
        raise DomainError(f"need i, j >= 1, got ({i}, {j})")
    if not (j <= 2 * i and i <= 2 * j):
        raise DomainError(f"shape ({i}, {j}) is not balanced")
    if not 1 <= ell <= i * j - i - j:
        raise DomainError(f"excess {ell} outside [1, {i * j - i - j}]")


def complex_upper_bound(i: int, j: int, ell: int, c: float) -> LogReal:
    """``i^j j^i (i+j)^((3 ell - 1)/2) (c / ell)^(ell/2)`` for balanced shapes."""
    _check_complex_domain(i, j, ell)
    if c <= 0:
        raise DomainError(f"c must be positive, got {c}")
    return LogReal(j * math.log(i) + i * math.log(j)
                   + 0.5 * (3 * ell - 1) * math.log(i + j)
                   + 0.5 * ell * (math.log(c) - math.log(ell)))


def minimal_complex_constant(i: int, j: int, ell: int, count: int) -> float:
    """Smallest ``c`` for which :func:`complex_upper_bound` dominates ``count``."""
    _check_complex_domain(i, j, ell)
    if count == 0:
        return 0.0
    base = complex_upper_bound(i, j, ell, 1.0)  # c = 1
    gap = math.log(count) - base.log_magnitude
    return math.exp(2.0 * gap / ell)


def naive_edge_subset_bound(i: int, j: int, ell: int) -> int:
    """Every graph counted by ``C(i, j, ell)`` is a ``(i+j+ell)``-subset of the ``ij`` slots."""
    return math.comb(i * j, i + j + ell)


def _connected(i: int, j: int, subset) -> bool:
    # union-find over i + j vertices, right class offset by i
    parent = list(range(i + j))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    parts = i + j
    for slot in subset:
        a, b = find(slot // j), find(i + slot % j)
        if a != b:
            parent[a] = b
            parts -= 1
            if parts == 1:
                return True
    return parts == 1


def oracle_partition(i: int, j: int, m: int, *, max_slots: int = ORACLE_MAX_SLOTS,
                     max_subsets: int = ORACLE_MAX_SUBSETS) -> tuple[int, int]:
    """Brute force over all ``m``-edge subsets of ``K_{i,j}``.

    Returns ``(connected, disconnected)``; the two always sum to ``comb(ij, m)``.
    """
    if i < 0 or j < 0 or i + j < 1 or m < 0:
        raise DomainError(f"bad oracle arguments i={i}, j={j}, m={m}")
    slots = i * j
    if slots > max_slots:
        raise OracleBudgetError(f"i*j = {slots} edge slots exceeds budget {max_slots}")
    if m > slots:
        return 0, 0
    total = math.comb(slots, m)
    if total > max_subsets:
        raise OracleBudgetError(f"comb({slots}, {m}) = {total} subsets exceeds budget {max_subsets}")
    if i + j == 1:
        return (1, 0) if m == 0 else (0, 0)
    if m < i + j - 1:
        return 0, total
    connected = sum(1 for subset in combinations(range(slots), m) if _connected(i, j, subset))
    return connected, total - connected


def count_connected_oracle(i: int, j: int, m: int, **budget) -> int:
    """Number of connected spanning ``m``-edge subgraphs of ``K_{i,j}``, by enumeration."""
    return oracle_partition(i, j, m, **budget)[0]


def _log_comb(n: int, r: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(r + 1) - math.lgamma(n - r + 1)


def expected_components(n: int, p: float, shape: BipartiteShape, count) -> LogReal:
    """Expected number of components of ``shape`` in ``G(n, n, p)``.

    ``comb(n, i) comb(n, j) count p^(k + ell) (1 - p)^(k n - i j - k - ell)``;
    ``count`` is an exact number of graphs or any upper bound on it (int,
    float, or :class:`LogReal`).
    """
    i, j, ell, k = shape.i, shape.j, shape.ell, shape.k
    if i > n or j > n:
        raise DomainError(f"shape ({i}, {j}) does not fit in n = {n}")
    if not 0.0 < p < 1.0:
        raise DomainError(f"need 0 < p < 1, got {p}")
    closed = k * n - i * j - k - ell
    if closed < 0:
        raise DomainError(f"negative non-edge exponent {closed}")
    log_count = count if isinstance(count, LogReal) else LogReal.from_value(count)
    if log_count.is_zero:
        return LogReal.zero()
    return LogReal(_log_comb(n, i) + _log_comb(n, j) + log_count.log_magnitude
                   + (k + ell) * math.log(p) + closed * math.log1p(-p))


@_nb.njit(cache=True)
def _log_unicyclic_sums(i_arr, j_arr):
    # log of sum_{r>=2} prod_{t<r}(1 - t/i)(1 - t/j) (i + j - r)
    out = np.empty(i_arr.shape[0])
    for idx in range(i_arr.shape[0]):
        i, j = i_arr[idx], j_arr[idx]
        total = 0.0
        prod = 1.0
        for r in range(1, min(i, j) + 1):
            prod *= (1.0 - (r - 1) / i) * (1.0 - (r - 1) / j)
            if r >= 2:
                total += prod * (i + j - r)
        out[idx] = np.log(total) if total > 0 else -np.inf
    return out


def _window_pairs(lo: int, hi: int, min_side: int):
    ks, is_ = [], []
    for k in range(max(lo, 2 * min_side), hi + 1):
        i = np.arange(min_side, k - min_side + 1, dtype=np.int64)
        is_.append(i)
        ks.append(np.full(i.shape[0], k, dtype=np.int64))
    if not ks:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    i = np.concatenate(is_)
    return i, np.concatenate(ks) - i


def _log_expectation_terms(n, p, i, j, ell, log_count):
    k = i + j
    closed = k * n - i * j - k - ell
    return (_gammaln(n + 1) * 2 - _gammaln(i + 1) - _gammaln(n - i + 1)
            - _gammaln(j + 1) - _gammaln(n - j + 1) + log_count
            + (k + ell) * math.log(p) + closed * math.log1p(-p))


def expected_window_count(n: int, p: float, lo: int, hi: int, kind: str) -> float:
    """Exact finite-``n`` expected number of tree or unicyclic components with order in ``[lo, hi]``.

    Sums the component-count expectation over every class split ``i + j = k``
    (both classes nonempty), using the closed-form counts.
    """
    if kind not in ("tree", "unicyclic"):
        raise DomainError(f"kind must be 'tree' or 'unicyclic', got {kind!r}")
    if hi < lo:
        return 0.0
    if hi > n:
        raise DomainError(f"order {hi} exceeds n = {n}")
    if kind == "tree":
        i, j = _window_pairs(lo, hi, 1)
        if i.size == 0:
            return 0.0
        log_count = (j - 1) * np.log(i) + (i - 1) * np.log(j)
        terms = _log_expectation_terms(n, p, i, j, -1, log_count)
    else:
        i, j = _window_pairs(lo, hi, 2)
        if i.size == 0:
            return 0.0
        log_count = (math.log(0.5) + (j - 1) * np.log(i) + (i - 1) * np.log(j)
                     + _log_unicyclic_sums(i, j))
        terms = _log_expectation_terms(n, p, i, j, 0, log_count)
    top = terms.max()
    return float(math.exp(top) * np.exp(terms - top).sum())
