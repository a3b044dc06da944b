"""Scalar quantities of the near-critical G(n, n, p) model.

Everything here is a pure double-precision function of its arguments.
``eps`` always denotes the offset in ``p = (1 + eps) / n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

__all__ = [
    "DomainError",
    "CriticalParams",
    "DerivedScalars",
    "delta",
    "epsilon_prime",
    "poisson_lambda",
    "poisson_nu",
    "exp1",
    "tree_order_threshold",
    "giant_order_prediction",
    "giant_excess_prediction",
    "small_tree_vertices_prediction",
    "excess_increment_prediction",
    "verify_gaussian_sum",
    "sprinkle_probability",
    "derived_scalars",
]

EULER_GAMMA = 0.57721566490153286061
_SQRT_PI = math.sqrt(math.pi)


class DomainError(ValueError):
    """Argument outside the domain where a formula is defined."""


@dataclass(frozen=True)
class CriticalParams:
    n: int
    eps: float
    p: float = field(init=False)

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"n must be positive, got {self.n}")
        if not -1.0 < self.eps < 1.0 or self.eps == 0.0:
            raise DomainError(f"eps must lie in (-1, 1) \\ {{0}}, got {self.eps}")
        p = (1.0 + self.eps) / self.n
        if p > 1.0:
            raise DomainError(f"p = (1+eps)/n = {p} exceeds 1")
        object.__setattr__(self, "p", p)

    @property
    def supercritical(self) -> bool:
        return self.eps > 0


@dataclass(frozen=True)
class DerivedScalars:
    delta: float
    eps_prime: float | None
    giant_order_prediction: float | None
    giant_excess_prediction: float | None


def delta(eps: float) -> float:
    """Return ``eps - log(1 + eps)``, the exponential decay rate of component tails.

    Evaluated as ``eps - log1p(eps)``; for tiny ``|eps|`` a short series keeps
    full relative precision.
    """
    if eps <= -1.0:
        raise DomainError(f"delta needs eps > -1, got {eps}")
    if eps == 0.0:
        raise DomainError("delta is degenerate at eps = 0")
    if abs(eps) < 1e-3:
        # eps^2/2 - eps^3/3 + eps^4/4 - ...
        total, term = 0.0, eps
        for k in range(2, 12):
            term *= -eps
            total -= term / k
        return total
    return eps - math.log1p(eps)


def epsilon_prime(eps: float) -> float:
    """Solve ``(1 - y) e^y = (1 + eps) e^{-eps}`` for the unique ``y`` in (0, 1).

    The left side is strictly decreasing on (0, 1), so plain bisection always
    converges; we stop once the bracket is narrower than 1e-14.
    """
    if not 0.0 < eps < 1.0:
        raise DomainError(f"epsilon_prime needs 0 < eps < 1, got {eps}")
    # compare logs: log(1-y) + y  vs  log(1+eps) - eps, i.e. -delta(-y) vs -delta(eps)
    target = delta(eps)

    def f(y):
        return delta(-y) - target  # increasing in y, negative at 0+

    lo, hi = 0.0, 1.0 - 1e-15
    while hi - lo > 1e-14:
        mid = 0.5 * (lo + hi)
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def poisson_lambda(r1: float, r2: float) -> float:
    """Limiting mean of the windowed tree-component count: ``(e^-r1 - e^-r2)/sqrt(pi)``."""
    if r1 < 0 or r2 < r1:
        raise DomainError(f"need 0 <= r1 <= r2, got r1={r1}, r2={r2}")
    return (math.exp(-r1) - math.exp(-r2)) / _SQRT_PI


def exp1(x: float) -> float:
    """Exponential integral E1(x) for x > 0 (series below 1, continued fraction above)."""
    if x <= 0:
        raise DomainError(f"E1 needs x > 0, got {x}")
    if math.isinf(x):
        return 0.0
    if x < 1.0:
        total, term, k = 0.0, 1.0, 0
        while True:
            k += 1
            term *= -x / k
            contrib = term / k
            total += contrib
            if abs(contrib) < 1e-17 * abs(total) or k > 200:
                break
        return -EULER_GAMMA - math.log(x) - total
    # modified Lentz on the continued fraction e^{-x} / (x + 1 - 1/(x + 3 - 4/(x + 5 - ...)))
    tiny = 1e-300
    b = x + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 500):
        a = -float(i * i)
        b += 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        step = c * d
        h *= step
        if abs(step - 1.0) < 1e-16:
            break
    return h * math.exp(-x)


def _adaptive_simpson(f, a: float, b: float, tol: float) -> float:
    def simpson(fa, fm, fb, a, b):
        return (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, a, m)
        right = simpson(fm, frm, fb, m, b)
        if depth <= 0 or abs(left + right - whole) <= 15.0 * tol:
            return left + right + (left + right - whole) / 15.0
        return (recurse(a, m, fa, flm, fm, left, tol / 2, depth - 1)
                + recurse(m, b, fm, frm, fb, right, tol / 2, depth - 1))

    fa, fb, fm = f(a), f(b), f(0.5 * (a + b))
    return recurse(a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, 50)


def _nu_quadrature(u1: float, u2: float) -> float:
    hi = min(u2, u1 + 60.0)  # e^-60 tail is far below tolerance
    return 0.5 * _adaptive_simpson(lambda t: math.exp(-t) / t, u1, hi, 1e-13)


def poisson_nu(u1: float, u2: float) -> float:
    """Limiting mean of the windowed unicyclic count, ``(E1(u1) - E1(u2)) / 2``.

    A quadrature of ``e^-t / t`` is evaluated alongside; if the two routes
    disagree by more than 1e-9 the quadrature value is returned.
    """
    if u1 <= 0 or u2 < u1:
        raise DomainError(f"need 0 < u1 <= u2, got u1={u1}, u2={u2}")
    if u1 == u2:
        return 0.0
    closed = 0.5 * (exp1(u1) - exp1(u2))
    quad = _nu_quadrature(u1, u2)
    if abs(closed - quad) > 1e-9:
        return quad
    return closed


def tree_order_threshold(n: int, eps: float, alpha: float) -> float:
    """Order scale ``(log(x) - 2.5 log log(x) + alpha) / delta`` with ``x = |eps|^3 n``."""
    x = abs(eps) ** 3 * n
    if x <= math.e:
        raise DomainError(f"|eps|^3 n = {x} must exceed e")
    ln = math.log(x)
    return (ln - 2.5 * math.log(ln) + alpha) / delta(eps)


def giant_order_prediction(n: int, eps: float) -> float:
    return 2.0 * (eps + epsilon_prime(eps)) * n / (1.0 + eps)


def giant_excess_prediction(n: int, eps: float) -> float:
    if eps <= 0:
        raise DomainError(f"giant excess prediction needs eps > 0, got {eps}")
    return 4.0 / 3.0 * eps ** 3 * n


def small_tree_vertices_prediction(n: int, eps: float) -> float:
    """Expected number of vertices in small tree components, ``2 (1 - eps') n / (1 + eps)``."""
    return 2.0 * (1.0 - epsilon_prime(eps)) * n / (1.0 + eps)


def excess_increment_prediction(n: int, eps_i: float, eps_next: float) -> float:
    """Predicted growth of the giant's excess when moving from ``eps_i`` to ``eps_next``."""
    ep = epsilon_prime(eps_i)
    return (eps_i + ep) ** 2 * n * (eps_next - eps_i) / (1.0 + eps_i) ** 2


def verify_gaussian_sum(k: int, L: int, m: int, n: int) -> tuple[float, float, float]:
    """Direct evaluation of the symmetric sum against ``sqrt(pi/2) k^(1/2 - 2m)``.

    The sum runs over d in [-L, L] of
    ``(k^2 - d^2)^-m ((k - d)/(k + d))^d exp(-d^2 / (2n))``
    and is accumulated with ``math.fsum``.

    Returns (exact_sum, asymptotic, ratio).
    """
    if L >= k:
        raise DomainError(f"need L < k, got L={L}, k={k}")
    if k < 1 or L < 0 or m < 0 or n < 1:
        raise DomainError("k, n must be positive; L, m nonnegative")
    terms = []
    for d in range(-L, L + 1):
        # log((k-d)/(k+d)) = log1p(-2d/(k+d))
        log_ratio = math.log1p(-2.0 * d / (k + d))
        log_term = d * log_ratio - d * d / (2.0 * n)
        if m:
            log_term -= m * (math.log(k - d) + math.log(k + d))
        terms.append(math.exp(log_term))
    exact = math.fsum(terms)
    asym = math.sqrt(math.pi / 2.0) * k ** (0.5 - 2 * m)
    return exact, asym, exact / asym


def sprinkle_probability(p1: float, p2: float) -> float:
    """Edge probability ``q`` with ``G(p1) ∪ G(q) ~ G(p2)``: ``(p2 - p1) / (1 - p1)``."""
    if p1 > p2:
        raise DomainError(f"need p1 <= p2, got p1={p1}, p2={p2}")
    if p1 >= 1.0 or p1 < 0.0:
        raise DomainError(f"need 0 <= p1 < 1, got p1={p1}")
    if p2 > 1.0:
        raise DomainError(f"p2 must be a probability, got {p2}")
    return (p2 - p1) / (1.0 - p1)


def derived_scalars(n: int, eps: float) -> DerivedScalars:
    if eps > 0:
        return DerivedScalars(
            delta=delta(eps),
            eps_prime=epsilon_prime(eps),
            giant_order_prediction=giant_order_prediction(n, eps),
            giant_excess_prediction=giant_excess_prediction(n, eps),
        )
    return DerivedScalars(delta(eps), None, None, None)
