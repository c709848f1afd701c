"""Avoidance-probability recurrences for random subsets.

Pick every element of a ground set independently with probability alpha.
The probability that a chain of i elements contains no two *adjacent*
selected elements satisfies

    beta_0 = 1,  beta_1 = 1,  beta_{i+1} = (1-alpha) beta_i + alpha (1-alpha) beta_{i-1},

and the per-level correction factors are gamma_i = beta_{i-1} beta_{i+1} / beta_i^2.

The generalized sequences beta_i^(E), for a finite or cofinite set E of
positive distances with 1 in E, give the probability that a length-i
Bernoulli(alpha) binary string has no two ones at distance e for any e in E
(a *pairwise* condition on one-positions, regardless of what lies between).
For finite E this is computed by a sliding-window dynamic program and,
equivalently, by a Markov chain over binary windows (TransferSystem); for
cofinite E by summing over the finitely many admissible one-position shapes.

All computations run in exact rational arithmetic when alpha is exact, and
in double precision when alpha is a float.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

Number = Fraction | float

__all__ = [
    "Alpha",
    "BetaSequence",
    "ExponentSet",
    "TransferSystem",
    "beta",
    "gamma",
    "beta_e",
    "beta_e_sequence",
    "gamma_e",
    "beta_e_bruteforce",
    "build_transfer_system",
    "minimal_recurrence",
]


@dataclass(frozen=True)
class Alpha:
    """Selection probability in (0, 1), carried exactly or as a float.

    The mode tags every downstream result: exact alphas keep all arithmetic
    in arbitrary-precision rationals, float alphas run the same recurrences
    in double precision.
    """

    value: Number
    mode: str  # "exact" | "float"

    def __post_init__(self) -> None:
        if self.mode == "exact":
            if not isinstance(self.value, Fraction):
                raise ValueError("exact mode requires a Fraction value")
        elif self.mode == "float":
            if not isinstance(self.value, float):
                raise ValueError("float mode requires a float value")
        else:
            raise ValueError(f"unknown alpha mode {self.mode!r}")
        if not (0 < self.value < 1):
            raise ValueError(f"alpha must lie strictly in (0, 1), got {self.value}")

    @classmethod
    def exact(cls, value: Fraction | int | str | tuple[int, int]) -> "Alpha":
        if isinstance(value, tuple):
            value = Fraction(*value)
        return cls(Fraction(value), "exact")

    @classmethod
    def inexact(cls, value: float) -> "Alpha":
        return cls(float(value), "float")

    @classmethod
    def parse(cls, text: str) -> "Alpha":
        """Parse "p/q" as exact, a decimal literal as float."""
        text = text.strip()
        if "/" in text:
            return cls.exact(Fraction(text))
        return cls.inexact(float(text))

    @property
    def is_exact(self) -> bool:
        return self.mode == "exact"

    def one(self) -> Number:
        """Multiplicative unit of the right type, seeds recurrences."""
        return Fraction(1) if self.is_exact else 1.0

    def as_float(self) -> float:
        return float(self.value)

    def __str__(self) -> str:
        return str(self.value)


class BetaSequence:
    """Memoized values of the adjacent-avoidance recurrence.

    Not locked: share across threads only for reading after warm-up, or keep
    one instance per thread.
    """

    def __init__(self, alpha: Alpha):
        self.alpha = alpha
        one = alpha.one()
        self._memo: list[Number] = [one, one]

    def __getitem__(self, i: int) -> Number:
        if i < 0:
            raise ValueError("index must be nonnegative")
        a = self.alpha.value
        memo = self._memo
        while len(memo) <= i:
            nxt = (1 - a) * memo[-1] + a * (1 - a) * memo[-2]
            memo.append(nxt)
        return memo[i]

    def gamma(self, i: int) -> Number:
        if i < 1:
            raise ValueError("gamma is defined for i >= 1")
        return self[i - 1] * self[i + 1] / self[i] ** 2


def beta(i: int, alpha: Alpha) -> Number:
    """Probability that a chain of i vertices has no two adjacent selections."""
    return BetaSequence(alpha)[i]


def gamma(i: int, alpha: Alpha) -> Number:
    """The ratio beta_{i-1} beta_{i+1} / beta_i^2; exceeds 1 for even i."""
    return BetaSequence(alpha).gamma(i)


@dataclass(frozen=True)
class ExponentSet:
    """A finite or cofinite set E of positive integers with 1 in E.

    For the finite kind ``elements`` lists the members; for the cofinite
    kind it lists the finitely many *excluded* integers (1 never excluded).
    """

    kind: str  # "finite" | "cofinite"
    elements: tuple[int, ...]

    def __post_init__(self) -> None:
        elems = tuple(sorted(set(self.elements)))
        object.__setattr__(self, "elements", elems)
        if any(e < 1 for e in elems):
            raise ValueError("exponents must be positive integers")
        if self.kind == "finite":
            if not elems:
                raise ValueError("finite exponent set must be nonempty")
            if 1 not in elems:
                raise ValueError("exponent set must contain 1")
        elif self.kind == "cofinite":
            if 1 in elems:
                raise ValueError("1 may not be excluded from a cofinite exponent set")
        else:
            raise ValueError(f"unknown exponent set kind {self.kind!r}")

    @classmethod
    def finite(cls, elements) -> "ExponentSet":
        return cls("finite", tuple(elements))

    @classmethod
    def cofinite(cls, excluded=()) -> "ExponentSet":
        return cls("cofinite", tuple(excluded))

    @classmethod
    def all_powers(cls) -> "ExponentSet":
        return cls("cofinite", ())

    @classmethod
    def parse(cls, text: str) -> "ExponentSet":
        """Parse "1,2,5" (finite), "all" or "all-except:2,4" (cofinite)."""
        text = text.strip().lower()
        if text == "all":
            return cls.all_powers()
        if text.startswith("all-except:"):
            body = text[len("all-except:"):]
            excluded = [int(t) for t in body.split(",") if t.strip()]
            return cls.cofinite(excluded)
        return cls.finite(int(t) for t in text.split(","))

    def __contains__(self, e: int) -> bool:
        if self.kind == "finite":
            return e in self.elements
        return e >= 1 and e not in self.elements

    @property
    def max_element(self) -> int:
        if self.kind != "finite":
            raise ValueError("cofinite exponent sets are unbounded")
        return self.elements[-1]

    def members_up_to(self, bound: int) -> Iterator[int]:
        for e in range(1, bound + 1):
            if e in self:
                yield e

    def label(self) -> str:
        if self.kind == "finite":
            return ",".join(str(e) for e in self.elements)
        if not self.elements:
            return "all"
        return "all-except:" + ",".join(str(e) for e in self.elements)

    def __str__(self) -> str:
        return self.label()


def _forbidden_distances(exponents: ExponentSet, span: int) -> list[int]:
    """Distances in E that can occur inside a string of the given length."""
    return [e for e in range(1, span) if e in exponents]


def beta_e_sequence(exponents: ExponentSet, hi: int, alpha: Alpha) -> list[Number]:
    """Values beta_0^(E) .. beta_hi^(E) in a single pass."""
    if hi < 0:
        raise ValueError("hi must be nonnegative")
    if exponents.kind == "finite":
        return _beta_finite_sequence(exponents, hi, alpha)
    return [_beta_cofinite(exponents, i, alpha) for i in range(hi + 1)]


def beta_e(exponents: ExponentSet, i: int, alpha: Alpha) -> Number:
    """Probability that a length-i Bernoulli(alpha) string has no two ones
    at distance e for any e in E (pairwise, regardless of intervening bits)."""
    if i < 0:
        raise ValueError("i must be nonnegative")
    return beta_e_sequence(exponents, i, alpha)[i]


def gamma_e(exponents: ExponentSet, i: int, alpha: Alpha) -> Number:
    """The ratio beta_{i-1}^(E) beta_{i+1}^(E) / (beta_i^(E))^2."""
    if i < 1:
        raise ValueError("gamma_e is defined for i >= 1")
    seq = beta_e_sequence(exponents, i + 1, alpha)
    return seq[i - 1] * seq[i + 1] / seq[i] ** 2


def _beta_finite_sequence(exponents: ExponentSet, hi: int, alpha: Alpha) -> list[Number]:
    # Sliding window over the last max(E) bits: a fresh one at position p is
    # admissible iff no earlier one sits at distance e in E, and such a one
    # can only live inside the window.
    w = exponents.max_element
    a = alpha.value
    b = 1 - a
    one = alpha.one()
    conflict = 0
    for e in exponents.elements:
        conflict |= 1 << (e - 1)
    window_mask = (1 << w) - 1

    values = [one]
    states: dict[int, Number] = {0: one}
    for _ in range(hi):
        nxt: dict[int, Number] = {}
        for state, weight in states.items():
            s0 = (state << 1) & window_mask
            nxt[s0] = nxt.get(s0, 0) + weight * b
            if state & conflict == 0:
                s1 = s0 | 1
                nxt[s1] = nxt.get(s1, 0) + weight * a
        states = nxt
        values.append(sum(states.values()))
    return values


def _admissible_shapes(excluded: tuple[int, ...]) -> list[tuple[int, int]]:
    """One-position shapes (size, diameter) whose pairwise gaps all lie in
    the excluded set; these are the only multi-one patterns a cofinite E
    permits."""
    shapes = [(1, 0)]
    pool = list(excluded)
    n = len(pool)
    for pick in range(1, 1 << n):
        offsets = [0] + [pool[j] for j in range(n) if pick >> j & 1]
        ok = all(
            (offsets[k] - offsets[j]) in excluded
            for j in range(len(offsets))
            for k in range(j + 1, len(offsets))
        )
        if ok:
            shapes.append((len(offsets), offsets[-1]))
    return shapes


def _beta_cofinite(exponents: ExponentSet, i: int, alpha: Alpha) -> Number:
    a = alpha.value
    b = 1 - a
    one = alpha.one()
    if i == 0:
        return one
    total = one * b**i
    for size, diam in _admissible_shapes(exponents.elements):
        placements = i - diam
        if placements > 0:
            total += placements * a**size * b ** (i - size)
    return total


def beta_e_bruteforce(exponents: ExponentSet, i: int, alpha: Alpha) -> Number:
    """Independent oracle: enumerate all 2^i strings and sum the admissible
    weights. Only usable for i <= 24."""
    if i < 0:
        raise ValueError("i must be nonnegative")
    if i > 24:
        raise ValueError("enumeration bound is i <= 24")
    distances = _forbidden_distances(exponents, i)
    counts = [0] * (i + 1)
    for mask in range(1 << i):
        if any(mask & (mask >> e) for e in distances):
            continue
        counts[mask.bit_count()] += 1
    a = alpha.value
    b = 1 - a
    one = alpha.one()
    return sum((one * count) * a**k * b ** (i - k) for k, count in enumerate(counts) if count)


@dataclass(frozen=True)
class TransferSystem:
    """Markov chain over binary windows computing beta_i^(E) for finite E.

    States are the admissible windows of length m = max(E) + 1 (as integers,
    oldest bit most significant) plus one absorbing state, kept last. The
    initial distribution weights each admissible window by its Bernoulli
    probability; a transition shifts the window left and appends a fresh
    bit, falling into the absorbing state when the new window is forbidden.

    beta_i^(E) = pi Sigma^(i-m) (1,...,1,0)^t for every i >= m.
    """

    exponents: ExponentSet
    alpha: Alpha
    window_length: int
    states: tuple[int, ...]
    pi: tuple[Number, ...]
    sigma: tuple[tuple[Number, ...], ...]
    acceptance: tuple[int, ...]

    @property
    def state_count(self) -> int:
        return len(self.states) + 1

    def value(self, i: int) -> Number:
        """beta_i^(E) through the chain; requires i >= window length."""
        if i < self.window_length:
            raise ValueError(f"matrix form applies from i = {self.window_length}")
        return self.sequence(i)[-1]

    def sequence(self, hi: int) -> list[Number]:
        """Values beta_m^(E) .. beta_hi^(E) by iterating the chain."""
        m = self.window_length
        if hi < m:
            return []
        vec = list(self.pi)
        out = [sum(vec[:-1])]
        for _ in range(hi - m):
            vec = self._step(vec)
            out.append(sum(vec[:-1]))
        return out

    def _step(self, vec: list[Number]) -> list[Number]:
        u = self.state_count
        nxt = [0] * u
        for j in range(u):
            wj = vec[j]
            if wj:
                row = self.sigma[j]
                for k in range(u):
                    if row[k]:
                        nxt[k] += wj * row[k]
        return nxt

    def characteristic_polynomial(self) -> list[Number]:
        """Coefficients [1, c_1, ..., c_u] of det(X I - Sigma), exact for
        exact alpha (Faddeev-LeVerrier). Any annihilating polynomial of
        Sigma yields a linear recurrence the generated sequence satisfies."""
        u = self.state_count
        one = self.alpha.one()
        a = [[one * x for x in row] for row in self.sigma]
        m = [[one if r == c else one * 0 for c in range(u)] for r in range(u)]
        coeffs: list[Number] = [one]
        for k in range(1, u + 1):
            if k > 1:
                am = _mat_mul(a, m)
                for r in range(u):
                    am[r][r] += coeffs[-1]
                m = am
            am = _mat_mul(a, m)
            trace = sum(am[r][r] for r in range(u))
            coeffs.append(-trace / k)
        return coeffs


def _mat_mul(x: list[list[Number]], y: list[list[Number]]) -> list[list[Number]]:
    u = len(x)
    out = [[0] * u for _ in range(u)]
    for r in range(u):
        xr = x[r]
        outr = out[r]
        for j in range(u):
            v = xr[j]
            if v:
                yj = y[j]
                for c in range(u):
                    outr[c] += v * yj[c]
    return out


def _window_admissible(window: int, distances: Sequence[int]) -> bool:
    return not any(window & (window >> e) for e in distances)


def build_transfer_system(exponents: ExponentSet, alpha: Alpha) -> TransferSystem:
    """Build the window Markov chain for a finite exponent set."""
    if exponents.kind != "finite":
        raise ValueError("transfer systems require a finite exponent set")
    m = exponents.max_element + 1
    distances = list(exponents.elements)
    windows = [w for w in range(1 << m) if _window_admissible(w, distances)]

    a = alpha.value
    b = 1 - a
    one = alpha.one()
    pi = [one * a ** w.bit_count() * b ** (m - w.bit_count()) for w in windows]
    pi.append(1 - sum(pi))  # inadmissible windows start absorbed

    index = {w: j for j, w in enumerate(windows)}
    u = len(windows) + 1
    absorbing = u - 1
    window_mask = (1 << m) - 1
    zero = one * 0
    sigma = [[zero] * u for _ in range(u)]
    for j, w in enumerate(windows):
        for bit, prob in ((0, b), (1, a)):
            nxt = ((w << 1) & window_mask) | bit
            if _window_admissible(nxt, distances):
                sigma[j][index[nxt]] += prob
            else:
                sigma[j][absorbing] += prob
    sigma[absorbing][absorbing] = one

    acceptance = tuple([1] * len(windows) + [0])
    return TransferSystem(
        exponents=exponents,
        alpha=alpha,
        window_length=m,
        states=tuple(windows),
        pi=tuple(pi),
        sigma=tuple(tuple(row) for row in sigma),
        acceptance=acceptance,
    )


def _solve_exact(rows: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction] | None:
    """Solve a rectangular exact system; None if inconsistent or the
    solution is not unique."""
    n_unknowns = len(rows[0])
    aug = [row[:] + [r] for row, r in zip(rows, rhs)]
    pivots: list[int] = []
    lead = 0
    for col in range(n_unknowns):
        pivot = next((r for r in range(lead, len(aug)) if aug[r][col] != 0), None)
        if pivot is None:
            continue
        aug[lead], aug[pivot] = aug[pivot], aug[lead]
        pv = aug[lead][col]
        aug[lead] = [x / pv for x in aug[lead]]
        for r in range(len(aug)):
            if r != lead and aug[r][col] != 0:
                factor = aug[r][col]
                aug[r] = [x - factor * y for x, y in zip(aug[r], aug[lead])]
        pivots.append(col)
        lead += 1
    for r in range(lead, len(aug)):
        if aug[r][-1] != 0:
            return None  # inconsistent
    if len(pivots) < n_unknowns:
        return None  # underdetermined
    sol = [Fraction(0)] * n_unknowns
    for r, col in enumerate(pivots):
        sol[col] = aug[r][-1]
    return sol


def minimal_recurrence(values: Sequence[Fraction], max_order: int | None = None) -> list[Fraction]:
    """Minimal-order linear recurrence v_i = sum_j a_j v_{i-j} satisfied by
    the whole exact sequence, found by exact elimination and verified on
    every supplied term (the check must be overdetermined by >= 2 terms)."""
    vals = list(values)
    if any(not isinstance(v, Fraction) for v in vals):
        raise ValueError("minimal_recurrence requires exact values")
    if max_order is None:
        max_order = (len(vals) - 2) // 2
    for order in range(1, max_order + 1):
        rows = [[vals[i - j] for j in range(1, order + 1)] for i in range(order, len(vals))]
        rhs = [vals[i] for i in range(order, len(vals))]
        if len(rows) < order + 2:
            break
        sol = _solve_exact([r[:] for r in rows], rhs)
        if sol is None:
            continue
        if all(sum(c * x for c, x in zip(sol, row)) == r for row, r in zip(rows, rhs)):
            return sol
    raise ValueError(f"no linear recurrence of order <= {max_order} fits the sequence")
