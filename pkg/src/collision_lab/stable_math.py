"""Numerically stable scalar primitives: exp(x)-1, log(1+x) and compensated
sums of log1p terms.

``expm1_ref`` is a self-contained reference implementation of the classic
three-region expm1 algorithm (threshold constants 2^-52, 1e-8 and 0.697,
plus a single Newton correction step).  It exists so the region structure
can be inspected and tested on its own; everything else in the library
uses the platform intrinsics ``math.expm1``/``math.log1p``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .errors import DomainError

__all__ = [
    "DOUBLE_EPS",
    "StableEvalReport",
    "expm1_ref",
    "log1p_stable",
    "log1p_fallback",
    "sum_log1p",
]

# Gap between 1.0 and the next representable double (C's DBL_EPSILON).
DOUBLE_EPS = 2.0 ** -52

# |x| above this is safe for the direct exp(x)-1: the result's magnitude
# exceeds 0.5, so the subtraction loses at most one bit.
_DIRECT_THRESHOLD = 0.697

# |x| below this uses the two-term Taylor polynomial instead of exp().
_TAYLOR_THRESHOLD = 1e-8

_SUM_CHUNK = 1 << 20


def expm1_ref(x: float) -> float:
    """Reference exp(x) - 1 via the three-region algorithm.

    Regions for a = |x|:
      a <  2^-52          -> x  (exp(x)-1 rounds to x itself)
      a >  0.697          -> exp(x) - 1 directly (negligible cancellation)
      a in (1e-8, 0.697]  -> y = exp(x) - 1, then one Newton step
      a in [2^-52, 1e-8]  -> y = (x/2 + 1)*x, then one Newton step

    The Newton step improves the root of f(y) = log(1+y) - x via
    y <- y - (1+y)*(log1p(y) - x).  Exactly one step is applied.
    """
    a = abs(x)
    if a < DOUBLE_EPS:
        return x
    if a > _DIRECT_THRESHOLD:
        try:
            return math.exp(x) - 1.0
        except OverflowError:
            return math.inf
    if a > _TAYLOR_THRESHOLD:
        y = math.exp(x) - 1.0
    else:
        y = (x / 2.0 + 1.0) * x
    y -= (1.0 + y) * (math.log1p(y) - x)
    return y


def log1p_stable(x: float) -> float:
    """log(1 + x) with full relative accuracy near x = 0.

    Raises DomainError for x <= -1 rather than returning -inf/NaN, so that
    probability code downstream can distinguish misuse from underflow.
    """
    if math.isnan(x) or x <= -1.0:
        raise DomainError(f"log1p_stable requires x > -1, got {x!r}")
    return math.log1p(x)


def log1p_fallback(x: float) -> float:
    """log(1 + x) without a log1p intrinsic (Kahan's rounded-u trick).

    Let u = fl(1 + x).  If u == 1 the true value is x to working precision;
    otherwise log(u) * x / (u - 1) cancels the rounding error committed in
    forming u.  Provided for platforms lacking an intrinsic and as an
    independent cross-check of ``log1p_stable``.
    """
    if math.isnan(x) or x <= -1.0:
        raise DomainError(f"log1p_fallback requires x > -1, got {x!r}")
    u = 1.0 + x
    if u == 1.0:
        return x
    return math.log(u) * x / (u - 1.0)


def _as_blocks(terms) -> Iterable[np.ndarray]:
    if isinstance(terms, np.ndarray):
        for start in range(0, terms.size, _SUM_CHUNK):
            yield np.asarray(terms[start:start + _SUM_CHUNK], dtype=np.float64)
        return
    block = []
    for t in terms:
        block.append(t)
        if len(block) == _SUM_CHUNK:
            yield np.asarray(block, dtype=np.float64)
            block = []
    if block:
        yield np.asarray(block, dtype=np.float64)


# numpy's vectorized log1p can differ from the libm scalar in the last ulp;
# short inputs go through math.log1p so that a single-element sum is
# bit-identical to log1p_stable
_SCALAR_LIMIT = 1024


def sum_log1p(terms) -> float:
    """Compensated sum of log1p over ``terms`` (each term must be > -1).

    Summation uses math.fsum (exact Shewchuk accumulation, strictly stronger
    than Kahan compensation), chunked so arbitrarily long inputs stream
    through bounded memory.  The empty sum is 0.
    """
    partials = []
    for block in _as_blocks(terms):
        if block.size == 0:
            continue
        if not np.all(block > -1.0):
            bad = block[~(block > -1.0)][0]
            raise DomainError(f"sum_log1p requires every term > -1, got {bad!r}")
        if block.size <= _SCALAR_LIMIT:
            partials.append(math.fsum(math.log1p(float(t)) for t in block))
        else:
            partials.append(math.fsum(np.log1p(block)))
    return math.fsum(partials)


@dataclass(frozen=True)
class StableEvalReport:
    """Naive-vs-stable evaluation of one quantity at one input.

    ``relative_error`` is |stable - naive| / |stable|, or None when the
    stable value is 0 (the error is then flagged rather than divided out).
    """

    input: float
    naive_value: float
    stable_value: float
    relative_error: Optional[float]

    @classmethod
    def compare(cls, input: float, naive: float, stable: float) -> "StableEvalReport":
        if stable == 0.0:
            rel = None
        else:
            rel = abs(stable - naive) / abs(stable)
        return cls(input=input, naive_value=naive, stable_value=stable,
                   relative_error=rel)
