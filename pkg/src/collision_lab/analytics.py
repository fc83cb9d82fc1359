"""Closed-form collision mathematics for n draws into b buckets.

The expected number of collisions is n - b*(1 - (1 - 1/b)^n).  Evaluated
literally, the inner 1 - 1/b rounds to exactly 1 once 1/b drops below half
a unit in the last place of 1.0 (b = 2^k with k >= 54), collapsing the
whole expression to n.  The stable rewrite n + b*expm1(n*log1p(-1/b))
never forms the doomed difference.  The same treatment applies to the
birthday-problem collision probability 1 - prod(1 - i/b), rewritten as
-expm1(sum log1p(-i/b)).  Both literal forms are kept alongside the stable
ones so the error curves can be measured.

The exact distribution of the collision count C is
P(C = c) = (b)_(n-c) / b^n * S(n, n-c), with (b)_l the falling factorial
and S the Stirling numbers of the second kind.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from .errors import BracketingError, CapacityError
from .stable_math import StableEvalReport, sum_log1p

__all__ = [
    "BucketSpace",
    "StirlingTable",
    "CollisionPmf",
    "expected_collisions_naive",
    "expected_collisions",
    "collision_probability_naive",
    "collision_probability",
    "stirling2",
    "collision_pmf_exact",
    "min_bits_for_expected",
    "sample_size_for_expected",
    "probability_error_curve",
]

_CHUNK = 1 << 20

MAX_BITS = 64
_MAX_EXACT_BUCKETS = 1 << 63


@dataclass(frozen=True)
class BucketSpace:
    """The collision universe: b buckets, either exactly 2^k or explicit.

    ``count`` is the exact integer b (arbitrary precision, so 2^64 is fine);
    float arithmetic goes through ``inv_count`` (exact 2^-k for power-of-two
    spaces) and ``log2_count``.
    """

    bits: Optional[int]
    count: int

    def __post_init__(self):
        if self.bits is not None:
            if not 1 <= self.bits <= MAX_BITS:
                raise ValueError(f"bits must be in 1..{MAX_BITS}, got {self.bits}")
            if self.count != 1 << self.bits:
                raise ValueError("count does not match 2^bits; use the constructors")
        else:
            if not 1 <= self.count <= _MAX_EXACT_BUCKETS:
                raise ValueError(
                    f"bucket count must be in [1, 2^63], got {self.count}")

    @classmethod
    def power_of_two(cls, k: int) -> "BucketSpace":
        """The k-bit setup: b = 2^k."""
        if not 1 <= k <= MAX_BITS:
            raise ValueError(f"bits must be in 1..{MAX_BITS}, got {k}")
        return cls(bits=k, count=1 << k)

    @classmethod
    def exact(cls, b: int) -> "BucketSpace":
        return cls(bits=None, count=b)

    @property
    def inv_count(self) -> float:
        """1/b as a double; exact for power-of-two spaces."""
        if self.bits is not None:
            return 2.0 ** -self.bits
        return 1.0 / self.count

    @property
    def log2_count(self) -> float:
        """log2(b); exactly k for power-of-two spaces."""
        if self.bits is not None:
            return float(self.bits)
        return math.log2(self.count)

    def __str__(self):
        return f"2^{self.bits}" if self.bits is not None else str(self.count)


def expected_collisions_naive(n, space: BucketSpace) -> float:
    """Literal n - b*(1 - (1 - 1/b)^n) in double precision.

    Deliberately carries the cancellation failure: for b = 2^k with k >= 54
    the inner 1 - 1/b rounds to 1 and the result collapses to n.  Kept as a
    cross-check for small k and to measure the failure itself.
    """
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    bf = float(space.count)
    return n - bf * (1.0 - (1.0 - 1.0 / bf) ** n)


def expected_collisions(n, space: BucketSpace) -> float:
    """Stable expected collision count n + b*expm1(n*log1p(-1/b)).

    Accepts real n (the root solver works on the continuous extension).
    Always finite and within [0, max(0, n-1)].
    """
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    if n <= 1:
        return 0.0
    if space.count == 1:
        return float(n - 1)
    value = n + float(space.count) * math.expm1(n * math.log1p(-space.inv_count))
    return max(0.0, value)


def collision_probability_naive(n: int, space: BucketSpace) -> float:
    """Literal birthday probability 1 - prod_{i=1}^{n-1} (1 - i/b).

    The product runs over exactly n-1 factors, each evaluated in double
    precision, multiplied left to right.  (R's pbirthday() builds the factor
    sequence with the colon operator, whose length goes wrong for classes
    near 2^54 and beyond; that bug is an R artifact and is not emulated.)
    """
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    if n <= 1:
        return 0.0
    bf = float(space.count)
    prod = 1.0
    for lo in range(1, n, _CHUNK):
        i = np.arange(lo, min(n, lo + _CHUNK), dtype=np.float64)
        prod *= float(np.multiply.reduce(1.0 - i / bf))
    return 1.0 - prod


def collision_probability(n: int, space: BucketSpace) -> float:
    """Stable birthday probability -expm1(sum_{i<n} log1p(-i/b)), in [0, 1].

    Returns 0 for n <= 1 and (pigeonhole) exactly 1 for n > b; otherwise the
    log-domain sum is accumulated with compensated summation via sum_log1p.
    """
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    if n <= 1:
        return 0.0
    if n > space.count:
        return 1.0
    bf = float(space.count)
    partials = []
    for lo in range(1, n, _CHUNK):
        i = np.arange(lo, min(n, lo + _CHUNK), dtype=np.float64)
        partials.append(sum_log1p(-(i / bf)))
    return -math.expm1(math.fsum(partials))


# --------------------------------------------------------------------------
# Stirling numbers of the second kind

_EXACT_TABLE_LIMIT = 64
_LOG_TABLE_LIMIT = 2048


class StirlingTable:
    """Triangle of S(n, l), 0 <= l <= n <= max_n.

    Entries are exact arbitrary-size integers for max_n <= 64 and log-domain
    floats beyond (the integers outgrow every fixed width quickly; the exact
    mode exists to anchor oracle tests).  Immutable after construction.
    """

    def __init__(self, max_n: int, exact: Optional[bool] = None):
        if max_n < 0:
            raise ValueError(f"max_n must be nonnegative, got {max_n}")
        if exact is None:
            exact = max_n <= _EXACT_TABLE_LIMIT
        if exact and max_n > _EXACT_TABLE_LIMIT:
            raise CapacityError(
                f"exact Stirling tables are capped at max_n = {_EXACT_TABLE_LIMIT}")
        if not exact and max_n > _LOG_TABLE_LIMIT:
            raise CapacityError(
                f"log-domain Stirling tables are capped at max_n = {_LOG_TABLE_LIMIT}; "
                f"use stirling_log_row for single rows")
        self.max_n = max_n
        self.exact = exact
        if exact:
            rows = [[1]]
            for nn in range(1, max_n + 1):
                prev = rows[-1]
                row = [0] * (nn + 1)
                row[nn] = 1
                for l in range(1, nn):
                    row[l] = l * prev[l] + prev[l - 1]
                rows.append(row)
            self._rows = rows
        else:
            rows = [np.array([0.0])]
            for nn in range(1, max_n + 1):
                rows.append(_log_row_step(rows[-1], nn))
            self._rows = rows

    def _check(self, n: int, l: int):
        if n < 0 or l < 0:
            raise ValueError(f"S(n, l) needs nonnegative arguments, got ({n}, {l})")
        if l > n:
            raise ValueError(f"S(n, l) needs l <= n, got ({n}, {l})")
        if n > self.max_n:
            raise ValueError(f"table holds n <= {self.max_n}, got {n}")

    def value(self, n: int, l: int) -> int:
        """Exact S(n, l); only available in exact mode."""
        self._check(n, l)
        if not self.exact:
            raise ValueError("table is log-domain; use log_value")
        return self._rows[n][l]

    def log_value(self, n: int, l: int) -> float:
        """log S(n, l) (-inf where S = 0)."""
        self._check(n, l)
        if self.exact:
            v = self._rows[n][l]
            return math.log(v) if v else -math.inf
        return float(self._rows[n][l])


def _log_row_step(prev: np.ndarray, nn: int) -> np.ndarray:
    # S(n, l) = l*S(n-1, l) + S(n-1, l-1), in log domain
    row = np.empty(nn + 1)
    row[0] = -np.inf
    row[nn] = 0.0
    if nn > 1:
        l = np.arange(1, nn)
        row[1:nn] = np.logaddexp(np.log(l) + prev[1:nn], prev[0:nn - 1])
    return row


def stirling_log_row(n: int) -> np.ndarray:
    """log S(n, l) for l = 0..n without materializing the whole triangle."""
    row = np.array([0.0])
    for nn in range(1, n + 1):
        row = _log_row_step(row, nn)
    return row


def stirling2(n: int, l: int, table: Optional[StirlingTable] = None):
    """S(n, l): exact integer from an exact table, log-domain float otherwise."""
    if table is None:
        table = StirlingTable(n)
    if table.exact:
        return table.value(n, l)
    return table.log_value(n, l)


# --------------------------------------------------------------------------
# Exact collision distribution

EXACT_PMF_CAP = 64
LOG_PMF_CAP = 10 ** 4


@dataclass(frozen=True)
class CollisionPmf:
    """Distribution of the collision count C for n draws into b buckets.

    probs[c] = P(C = c) for c = 0..n-1, as Fractions (exact-rational mode)
    or floats (log-domain mode).
    """

    n: int
    space: BucketSpace
    probs: Sequence[Union[Fraction, float]]
    representation: str  # "exact-rational" | "log-domain-float"

    def total(self):
        """Sum of all probabilities (exactly 1 in rational mode)."""
        if self.representation == "exact-rational":
            return sum(self.probs, Fraction(0))
        return math.fsum(self.probs)

    def mean(self) -> float:
        """Expected collision count sum c * P(C = c)."""
        if self.representation == "exact-rational":
            return float(sum((c * p for c, p in enumerate(self.probs)), Fraction(0)))
        return math.fsum(c * p for c, p in enumerate(self.probs))

    def prob_any_collision(self) -> float:
        return float(1 - self.probs[0])


def collision_pmf_exact(n: int, space: BucketSpace, mode: str = "auto",
                        exact_cap: int = EXACT_PMF_CAP,
                        log_cap: int = LOG_PMF_CAP) -> CollisionPmf:
    """Exact PMF of the collision count via Stirling numbers.

    P(C = c) = (b)_(n-c) / b^n * S(n, n-c).  Rational mode evaluates this in
    exact integer arithmetic (n <= exact_cap); log-domain mode computes the
    falling factorial as a compensated sum of log1p(-i/b) terms and the
    Stirling factor in log space, exponentiating at the end (n <= log_cap).
    """
    if n < 1:
        raise ValueError(f"pmf needs n >= 1, got {n}")
    if mode == "auto":
        mode = "exact" if n <= exact_cap else "log"
    if mode == "exact":
        if n > exact_cap:
            raise CapacityError(f"exact-rational pmf capped at n = {exact_cap}, got {n}")
        return _pmf_exact_rational(n, space)
    if mode == "log":
        if n > log_cap:
            raise CapacityError(f"log-domain pmf capped at n = {log_cap}, got {n}")
        return _pmf_log_domain(n, space)
    raise ValueError(f"mode must be auto, exact or log, got {mode!r}")


def _pmf_exact_rational(n: int, space: BucketSpace) -> CollisionPmf:
    b = space.count
    bn = b ** n
    table = StirlingTable(n)
    probs = []
    falling = 1  # (b)_l built up as l grows; hits 0 once l exceeds b
    ff_by_l = [1]
    for l in range(1, n + 1):
        falling *= b - (l - 1)
        ff_by_l.append(falling)
    for c in range(n):
        l = n - c
        probs.append(Fraction(ff_by_l[l] * table.value(n, l), bn))
    return CollisionPmf(n=n, space=space, probs=probs,
                        representation="exact-rational")


def _pmf_log_domain(n: int, space: BucketSpace) -> CollisionPmf:
    b = space.count
    log_b = space.log2_count * math.log(2.0)
    # prefix[l] = sum_{i=0}^{l-1} log1p(-i/b) = log((b)_l / b^l); only the
    # first min(n, b) terms are in log1p's domain, beyond them (b)_l = 0
    valid = min(n, b)
    i = np.arange(valid, dtype=np.float64)
    prefix = np.concatenate([[0.0], np.cumsum(np.log1p(-(i / float(b))))])
    log_s = stirling_log_row(n)
    probs = np.zeros(n)
    for c in range(n):
        l = n - c
        if l > b:
            continue  # pigeonhole: cannot land n draws in fewer than l buckets
        probs[c] = math.exp(prefix[l] - c * log_b + log_s[l])
    return CollisionPmf(n=n, space=space, probs=probs,
                        representation="log-domain-float")


# --------------------------------------------------------------------------
# Inverse problems

def min_bits_for_expected(n: int, target: float) -> Optional[int]:
    """Smallest k in 1..64 with expected_collisions(n, 2^k) <= target.

    Returns None when no k in range reaches the target.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if target <= 0:
        raise ValueError(f"target must be positive, got {target}")
    for k in range(1, MAX_BITS + 1):
        if expected_collisions(n, BucketSpace.power_of_two(k)) <= target:
            return k
    return None


def sample_size_for_expected(space: BucketSpace, target: float,
                             lo: float, hi: float,
                             rel_tol: float = 1e-9) -> float:
    """Real-valued n with expected_collisions(n, space) = target, by bisection.

    The objective is monotone in n, so bisection on the bracketing interval
    [lo, hi] is robust; the caller rounds the root to a count as needed.
    Raises BracketingError when f(lo) and f(hi) share a sign.
    """
    if target <= 0:
        raise ValueError(f"target must be positive, got {target}")
    if not 0 <= lo < hi:
        raise ValueError(f"need 0 <= lo < hi, got [{lo}, {hi}]")

    def f(x):
        return expected_collisions(x, space) - target

    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return float(lo)
    if fhi == 0.0:
        return float(hi)
    if (flo < 0) == (fhi < 0):
        raise BracketingError(
            f"no sign change on [{lo}, {hi}]: f(lo)={flo}, f(hi)={fhi}")
    while hi - lo > rel_tol * max(abs(lo), abs(hi)):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def probability_error_curve(n: int, k_lo: int = 32, k_hi: int = 64):
    """Naive-vs-stable collision-probability reports for k = k_lo..k_hi."""
    reports = []
    for k in range(k_lo, k_hi + 1):
        space = BucketSpace.power_of_two(k)
        reports.append(StableEvalReport.compare(
            input=float(k),
            naive=collision_probability_naive(n, space),
            stable=collision_probability(n, space),
        ))
    return reports
