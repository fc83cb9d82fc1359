"""Collision and tie counting over samples and generator streams.

Duplicates follow the first-occurrence convention: a draw is a duplicate
when it equals some earlier draw, so m equal values count m-1 duplicates.
Ties follow the Kendall convention: every member of a group of equal
values is a tie, so the same group counts m ties.  Equality is always on
the exact 64-bit representation (bit patterns), never on a tolerance.
"""

from __future__ import annotations

import os
import struct
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import CapacityError
from .prng import GeneratorSpec, KBitStream, derive_seed

__all__ = [
    "DEFAULT_MAX_DISTINCT",
    "MAX_DISTINCT_ENV",
    "TieSummary",
    "CollisionTrace",
    "count_duplicates",
    "count_ties",
    "collision_positions",
    "trace_collisions",
    "collision_summary",
    "run_seeds",
    "merge_summaries",
    "write_trajectory_csv",
    "write_positions_csv",
]

DEFAULT_MAX_DISTINCT = 10 ** 8
MAX_DISTINCT_ENV = "COLLISION_LAB_MAX_DISTINCT"


def _resolve_cap(max_distinct: Optional[int]) -> int:
    if max_distinct is not None:
        return max_distinct
    env = os.environ.get(MAX_DISTINCT_ENV)
    if env:
        return int(env)
    return DEFAULT_MAX_DISTINCT


def _key(value):
    # floats compare by bit payload: -0.0 != 0.0, NaNs equal per payload
    if isinstance(value, (float, np.floating)):
        return struct.unpack("<Q", struct.pack("<d", float(value)))[0], "f"
    if isinstance(value, (int, np.integer)):
        return int(value)
    return value


def count_duplicates(values: Sequence) -> int:
    """Number of elements equal to at least one earlier element."""
    seen = set()
    dup = 0
    for v in values:
        k = _key(v)
        if k in seen:
            dup += 1
        else:
            seen.add(k)
    return dup


def count_ties(values: Sequence) -> int:
    """Total multiplicity of all values appearing more than once."""
    counts = Counter(_key(v) for v in values)
    return sum(c for c in counts.values() if c >= 2)


def collision_positions(values: Sequence) -> list:
    """1-based indices of duplicate occurrences, ascending."""
    seen = set()
    positions = []
    for i, v in enumerate(values, start=1):
        k = _key(v)
        if k in seen:
            positions.append(i)
        else:
            seen.add(k)
    return positions


@dataclass
class TieSummary:
    """Duplicate count, Kendall tie count and multiplicity histogram.

    histogram maps multiplicity m >= 2 to the number of distinct values
    appearing exactly m times.  Always: C = sum (m-1)*count(m) and
    T = sum m*count(m); whenever C >= 1, C+1 <= T <= 2C.
    """

    n: int
    duplicates: int
    ties: int
    histogram: dict = field(default_factory=dict)

    @classmethod
    def from_multiplicities(cls, n: int, counts: np.ndarray) -> "TieSummary":
        tied = counts[counts >= 2]
        mult, mult_counts = np.unique(tied, return_counts=True)
        histogram = {int(m): int(c) for m, c in zip(mult, mult_counts)}
        return cls(
            n=n,
            duplicates=int(n - counts.size),
            ties=int(tied.sum()),
            histogram=histogram,
        )

    def merged_with(self, other: "TieSummary") -> "TieSummary":
        hist = dict(self.histogram)
        for m, c in other.histogram.items():
            hist[m] = hist.get(m, 0) + c
        return TieSummary(
            n=self.n + other.n,
            duplicates=self.duplicates + other.duplicates,
            ties=self.ties + other.ties,
            histogram=hist,
        )


def merge_summaries(summaries: Iterable[TieSummary]) -> TieSummary:
    """Sum counts across independent runs (histograms merge per key)."""
    merged = TieSummary(n=0, duplicates=0, ties=0, histogram={})
    for s in summaries:
        merged = merged.merged_with(s)
    return merged


@dataclass
class CollisionTrace:
    """Where duplicates landed: 1-based positions and the running count."""

    positions: np.ndarray
    cumulative: np.ndarray


def _check_cap(n: int, max_distinct: Optional[int]):
    cap = _resolve_cap(max_distinct)
    if n > cap:
        raise CapacityError(
            f"{n} draws exceed the distinct-value cap of {cap}; raise it via "
            f"the {MAX_DISTINCT_ENV} environment variable or max_distinct= "
            f"if you really want to hold that many values in memory")


def collision_summary(stream: KBitStream, n: int,
                      max_distinct: Optional[int] = None) -> TieSummary:
    """TieSummary of the next ``n`` draws (no positional trace)."""
    _check_cap(n, max_distinct)
    draws = stream.take_kbits(n)
    _, counts = np.unique(draws, return_counts=True)
    return TieSummary.from_multiplicities(n, counts)


def trace_collisions(stream: KBitStream, n: int,
                     max_distinct: Optional[int] = None):
    """Consume ``n`` draws; return (TieSummary, CollisionTrace).

    Duplicate detection is exact (sort-based over the k-bit integers) and
    agrees with count_duplicates/count_ties on the materialized sequence.
    Draw counts above the distinct-value cap raise CapacityError instead of
    degrading to approximate counting.
    """
    _check_cap(n, max_distinct)
    draws = stream.take_kbits(n)
    _, first_idx, counts = np.unique(draws, return_index=True, return_counts=True)
    summary = TieSummary.from_multiplicities(n, counts)
    is_dup = np.ones(n, dtype=bool)
    is_dup[first_idx] = False
    trace = CollisionTrace(
        positions=np.flatnonzero(is_dup) + 1,
        cumulative=np.cumsum(is_dup),
    )
    return summary, trace


def run_seeds(family: str, output_bits: int, n: int, seeds: Sequence[int],
              max_distinct: Optional[int] = None,
              workers: int = 1) -> list:
    """TieSummary per seed, in seed order.

    Each seed gets its own stream (single-owner state); with workers > 1 the
    seeds fan out over a thread pool, one stream per worker task.
    """
    _check_cap(n, max_distinct)

    def one(seed: int) -> TieSummary:
        stream = KBitStream(GeneratorSpec(family, seed, output_bits))
        return collision_summary(stream, n, max_distinct=max_distinct)

    if workers <= 1:
        return [one(s) for s in seeds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, seeds))


def seeds_from_base(base_seed: int, count: int) -> list:
    """The documented per-worker seed sequence for a base seed."""
    return [derive_seed(base_seed, i) for i in range(count)]


def write_trajectory_csv(trace: CollisionTrace, out) -> None:
    """CSV `index,cumulative_collisions`: collisions as a function of sample size."""
    out.write("index,cumulative_collisions\n")
    for i, c in enumerate(trace.cumulative, start=1):
        out.write(f"{i},{int(c)}\n")


def write_positions_csv(trace: CollisionTrace, out) -> None:
    """CSV `collision_rank,position`: the 1-based index of each duplicate draw."""
    out.write("collision_rank,position\n")
    for rank, pos in enumerate(trace.positions, start=1):
        out.write(f"{rank},{int(pos)}\n")
