"""Closed-form membership probabilities for random ratio sets.

A random subset A of {1, ..., n} keeps each element independently with
probability alpha. For a reduced fraction r/s (r < s) the membership
probability is the complement of a product of correction factors,

    P(r/s in A/A) = 1 - prod_{i=1}^{L} gamma_i^{floor(n / s^i)},

with L the largest i such that s^i <= n, and similarly with gamma_i^(E)
for the event that some power (r/s)^e with e in E lands in A/A. The
special case s^2 > n collapses to 1 - (1 - alpha^2)^floor(n/s).

Exact mode keeps everything in big rationals; log-space float mode stores
log(1 - P), accumulated with compensated summation from the smallest
exponent down, so probabilities indistinguishable from 1 stay meaningful.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

from .recurrences import Alpha, BetaSequence, ExponentSet, Number, beta_e_sequence

__all__ = [
    "ReducedFraction",
    "ProbabilityValue",
    "ComponentTooLargeError",
    "normalize_fraction",
    "prob_in_ratio_set",
    "prob_in_ratio_set_powers",
    "prob_bruteforce",
    "membership_event",
    "powers_event",
    "any_of_event",
    "direction_event",
]

ENUMERATION_VERTEX_BOUND = 25


class ComponentTooLargeError(Exception):
    """A connected component exceeds the exact-enumeration bound; fall back
    to the Monte Carlo engine for this instance."""


@dataclass(frozen=True)
class ReducedFraction:
    """A rational r/s in lowest terms with r <= s; r = s = 1 is the diagonal."""

    r: int
    s: int

    def __post_init__(self) -> None:
        if self.r < 1 or self.s < 1:
            raise ValueError("numerator and denominator must be positive")
        if gcd(self.r, self.s) != 1:
            raise ValueError(f"{self.r}/{self.s} is not in lowest terms")
        if self.r > self.s:
            raise ValueError("numerator must not exceed denominator; normalize first")
        if self.r == self.s and self.r != 1:
            raise ValueError("diagonal fractions reduce to 1/1")

    @property
    def is_diagonal(self) -> bool:
        return self.s == 1

    def power(self, e: int) -> "ReducedFraction":
        return ReducedFraction(self.r**e, self.s**e)

    def as_fraction(self) -> Fraction:
        return Fraction(self.r, self.s)

    def __str__(self) -> str:
        return f"{self.r}/{self.s}"


def normalize_fraction(a: int, b: int) -> ReducedFraction:
    """Reduce a/b and invert if needed so the result has numerator <= denominator.

    Membership in A/A is invariant under both operations; equal inputs flag
    the diagonal query 1/1.
    """
    if a < 1 or b < 1:
        raise ValueError("fraction components must be positive integers")
    g = gcd(a, b)
    a, b = a // g, b // g
    if a > b:
        a, b = b, a
    return ReducedFraction(a, b)


@dataclass(frozen=True)
class ProbabilityValue:
    """A probability with its computation mode and provenance.

    Exact mode carries a Fraction in [0, 1]. Log-space mode primarily
    carries log(1 - P) so near-one probabilities keep full precision;
    ``value`` is then the rounded complement.
    """

    mode: str  # "exact" | "log"
    value: Number
    provenance: str
    log_one_minus_p: float | None = None
    detail: dict | None = None

    def __post_init__(self) -> None:
        if self.mode == "exact":
            if not isinstance(self.value, Fraction) or not 0 <= self.value <= 1:
                raise ValueError("exact probabilities must be Fractions in [0, 1]")
        elif self.mode == "log":
            if self.log_one_minus_p is None or self.log_one_minus_p > 0:
                raise ValueError("log mode requires log(1 - P) <= 0")
        else:
            raise ValueError(f"unknown probability mode {self.mode!r}")

    @classmethod
    def from_exact(cls, p: Fraction, provenance: str, detail: dict | None = None) -> "ProbabilityValue":
        return cls("exact", p, provenance, detail=detail)

    @classmethod
    def from_log_complement(cls, log1mp: float, provenance: str, detail: dict | None = None) -> "ProbabilityValue":
        return cls("log", -math.expm1(log1mp), provenance, log_one_minus_p=log1mp, detail=detail)

    def as_float(self) -> float:
        return float(self.value)


def product_bound(n: int, s: int) -> int:
    """Largest i with s^i <= n, by integer arithmetic only.

    Floating-point logs misplace the bound at exact powers (n = s^k), so
    the loop multiplies instead.
    """
    if s < 2:
        raise ValueError("bound requires s >= 2")
    i = 0
    power = s
    while power <= n:
        i += 1
        power *= s
    return i


def _neumaier_sum(terms: Iterable[float]) -> float:
    total = 0.0
    comp = 0.0
    for t in terms:
        fresh = total + t
        if abs(total) >= abs(t):
            comp += (total - fresh) + t
        else:
            comp += (t - fresh) + total
        total = fresh
    return total + comp


def _log_of_ratio(g: Number) -> float:
    # log via log1p of the exact difference: gamma_i - 1 shrinks
    # geometrically, and log(x) near x = 1 would lose the whole tail.
    return math.log1p(float(g - 1))


def _gamma_product(gammas: Sequence[Number], exponents: Sequence[int], alpha: Alpha, mode: str, provenance: str) -> ProbabilityValue:
    if mode == "exact":
        if not alpha.is_exact:
            raise ValueError("exact probabilities require an exact alpha")
        prod = Fraction(1)
        for g, k in zip(gammas, exponents):
            prod *= Fraction(g) ** k
        return ProbabilityValue.from_exact(1 - prod, provenance)
    # smallest exponents first keeps the compensated accumulation tight
    terms = [k * _log_of_ratio(g) for g, k in zip(gammas, exponents)]
    log1mp = _neumaier_sum(reversed(terms))
    return ProbabilityValue.from_log_complement(log1mp, provenance)


def _resolve_mode(alpha: Alpha, mode: str | None) -> str:
    if mode is None:
        return "exact" if alpha.is_exact else "log"
    if mode not in ("exact", "log"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "exact" and not alpha.is_exact:
        raise ValueError("cannot compute exactly from a float alpha")
    return mode


def prob_in_ratio_set(n: int, q: ReducedFraction, alpha: Alpha, mode: str | None = None) -> ProbabilityValue:
    """P(q in A/A) for a random subset A of {1, ..., n}.

    The diagonal q = 1 is the event A nonempty, 1 - (1-alpha)^n. For s > n
    the product is empty and the probability is 0.
    """
    if n < 1:
        raise ValueError("n must be positive")
    mode = _resolve_mode(alpha, mode)
    if q.is_diagonal:
        a = alpha.value
        if mode == "exact":
            return ProbabilityValue.from_exact(1 - (1 - Fraction(a)) ** n, "formula")
        return ProbabilityValue.from_log_complement(n * math.log1p(-float(a)), "formula")
    ell = product_bound(n, q.s)
    seq = BetaSequence(alpha)
    gammas = [seq.gamma(i) for i in range(1, ell + 1)]
    exps = [n // q.s**i for i in range(1, ell + 1)]
    return _gamma_product(gammas, exps, alpha, mode, "formula")


def prob_in_ratio_set_powers(
    n: int,
    q: ReducedFraction,
    exponents: ExponentSet,
    alpha: Alpha,
    mode: str | None = None,
) -> ProbabilityValue:
    """P(some (r/s)^e with e in E lies in A/A), via the gamma^(E) product.

    Requires r < s strictly; whether the formula survives on the diagonal
    is unsettled, so the diagonal is rejected rather than guessed.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if q.is_diagonal:
        raise ValueError("the powers formula requires r < s strictly")
    mode = _resolve_mode(alpha, mode)
    ell = product_bound(n, q.s)
    if ell == 0:
        if mode == "exact":
            return ProbabilityValue.from_exact(Fraction(0), "formula")
        return ProbabilityValue.from_log_complement(0.0, "formula")
    betas = beta_e_sequence(exponents, ell + 1, alpha)
    gammas = [betas[i - 1] * betas[i + 1] / betas[i] ** 2 for i in range(1, ell + 1)]
    exps = [n // q.s**i for i in range(1, ell + 1)]
    return _gamma_product(gammas, exps, alpha, mode, "formula")


# --- brute-force oracle -----------------------------------------------------

Constraint = tuple[int, ...]


def membership_event(n: int, q: ReducedFraction) -> list[Constraint]:
    """Pairs (rt, st) whose joint selection puts q in A/A."""
    if q.is_diagonal:
        return [(t,) for t in range(1, n + 1)]
    return [(q.r * t, q.s * t) for t in range(1, n // q.s + 1)]


def powers_event(n: int, q: ReducedFraction, exponents: ExponentSet) -> list[Constraint]:
    """Pairs over all contributing powers; only e with s^e <= n have pairs."""
    if q.is_diagonal:
        raise ValueError("powers events require r < s")
    bound = product_bound(n, q.s)
    pairs: list[Constraint] = []
    for e in exponents.members_up_to(bound):
        pairs.extend(membership_event(n, q.power(e)))
    return pairs


def any_of_event(n: int, qs: Sequence[ReducedFraction]) -> list[Constraint]:
    pairs: list[Constraint] = []
    seen = set()
    for q in qs:
        if q in seen:
            continue
        seen.add(q)
        pairs.extend(membership_event(n, q))
    return pairs


def direction_event(n: int, coords: Sequence[int]) -> list[Constraint]:
    """Tuples (x_1 t, ..., x_d t) whose joint selection makes the direction
    visible; duplicate entries within a tuple are collapsed."""
    top = max(coords)
    return [tuple(sorted({x * t for x in coords})) for t in range(1, n // top + 1)]


def _constraint_components(constraints: Sequence[Constraint]) -> list[list[Constraint]]:
    parent: dict[int, int] = {}

    def find(v: int) -> int:
        root = v
        while parent[root] != root:
            root = parent[root]
        while parent[v] != root:
            parent[v], v = root, parent[v]
        return root

    for c in constraints:
        for v in c:
            parent.setdefault(v, v)
        base = find(c[0])
        for v in c[1:]:
            r = find(v)
            if r != base:
                parent[r] = base
    groups: dict[int, list[Constraint]] = {}
    for c in constraints:
        groups.setdefault(find(c[0]), []).append(c)
    return [groups[root] for root in sorted(groups)]


def _component_avoidance_enumerate(constraints: Sequence[Constraint], alpha: Alpha) -> Number:
    vertices = sorted({v for c in constraints for v in c})
    if len(vertices) > ENUMERATION_VERTEX_BOUND:
        raise ComponentTooLargeError(
            f"component has {len(vertices)} vertices (bound {ENUMERATION_VERTEX_BOUND}); "
            "use the Monte Carlo engine instead"
        )
    index = {v: j for j, v in enumerate(vertices)}
    masks = [sum(1 << index[v] for v in c) for c in constraints]
    counts = [0] * (len(vertices) + 1)
    for subset in range(1 << len(vertices)):
        if any(subset & m == m for m in masks):
            continue
        counts[subset.bit_count()] += 1
    a = alpha.value
    b = 1 - a
    one = alpha.one()
    size = len(vertices)
    return sum((one * cnt) * a**k * b ** (size - k) for k, cnt in enumerate(counts) if cnt)


def prob_bruteforce(n: int, constraints: Sequence[Constraint], alpha: Alpha) -> ProbabilityValue:
    """Exact probability that at least one constraint tuple is fully
    selected, by per-component subset enumeration.

    Independent of every closed form: builds the constraint graph, splits
    it into connected components, and enumerates subsets per component.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if n > 30:
        raise ValueError("brute force is limited to n <= 30")
    if not alpha.is_exact:
        raise ValueError("the brute-force oracle runs in exact mode only")
    for c in constraints:
        if any(not 1 <= v <= n for v in c):
            raise ValueError("constraint vertex outside {1, ..., n}")
    avoid = Fraction(1)
    for comp in _constraint_components(constraints):
        avoid *= _component_avoidance_enumerate(comp, alpha)
    return ProbabilityValue.from_exact(1 - avoid, "brute-force")
