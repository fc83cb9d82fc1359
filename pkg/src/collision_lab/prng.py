"""Deterministic k-bit integer streams.

Three families:

* ``mt19937`` -- the standard Mersenne Twister with the Knuth-multiplier
  initialization (init_genrand).  Native output is 32 bits.
* ``cmrg`` -- L'Ecuyer's combined multiple recursive generator MRG32k3a
  with the published parameters; the native value in [0, m1) is reduced
  to 32 bits by scaling.
* ``splitcounter`` -- a SplitMix64 counter mixer, native 64 bits, for
  experiments where concatenating 32-bit words is awkward.

Requesting fewer than the native bits truncates to the top bits; requesting
more (from a 32-bit family) concatenates two successive native outputs.
Identical GeneratorSpec values always yield bitwise-identical streams; the
block-generating fast paths are exact reproductions of the one-step
recurrences (tested against scalar references).

Streams are single-owner mutable state: move them between threads, never
share one.  Parallel work derives one seed per worker via ``derive_seed``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "FAMILIES",
    "GeneratorSpec",
    "KBitStream",
    "derive_seed",
    "mix64",
    "rand_int_rejection",
    "sample_ints",
]

FAMILIES = ("mt19937", "cmrg", "splitcounter")

_MASK32 = 0xFFFFFFFF
_MASK64 = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """SplitMix64 finalizer: a 64-bit bijective mixer."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(base_seed: int, index: int) -> int:
    """Worker seed ``index`` derived from ``base_seed``.

    The splitting rule is base + (index+1) * golden-ratio increment, pushed
    through the SplitMix64 mixer; distinct indices give unrelated seeds.
    """
    return mix64((base_seed + (index + 1) * _GOLDEN) & _MASK64)


@dataclass(frozen=True)
class GeneratorSpec:
    """Family, seed and output width of one deterministic stream."""

    family: str
    seed: int
    output_bits: int

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown generator family {self.family!r}; "
                             f"expected one of {FAMILIES}")
        if not 0 <= self.seed <= _MASK64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if not 1 <= self.output_bits <= 64:
            raise ValueError(f"output_bits must be in 1..64, got {self.output_bits}")

    def serialize(self) -> str:
        """Plain-text triple ``family:seed:bits`` used by the CLI."""
        return f"{self.family}:{self.seed}:{self.output_bits}"

    @classmethod
    def parse(cls, text: str) -> "GeneratorSpec":
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"generator spec must be family:seed:bits, got {text!r}")
        family, seed_s, bits_s = parts
        try:
            seed = int(seed_s)
            bits = int(bits_s)
        except ValueError:
            raise ValueError(f"generator spec must be family:seed:bits, got {text!r}")
        return cls(family=family.lower(), seed=seed, output_bits=bits)


# --------------------------------------------------------------------------
# MT19937

_MT_N, _MT_M = 624, 397
_MT_MATRIX_A = np.uint32(0x9908B0DF)
_MT_UPPER = np.uint32(0x80000000)
_MT_LOWER = np.uint32(0x7FFFFFFF)


class _Mt19937Core:
    """Mersenne Twister generating tempered words one 624-block at a time."""

    native_bits = 32

    def __init__(self, seed: int):
        # init_genrand: the 64-bit seed field is reduced to its low 32 bits.
        mt = np.empty(_MT_N, dtype=np.uint32)
        s = seed & _MASK32
        mt[0] = s
        for i in range(1, _MT_N):
            s = (1812433253 * (s ^ (s >> 30)) + i) & _MASK32
            mt[i] = s
        self._mt = mt

    def _twist(self) -> np.ndarray:
        mt = self._mt
        y = (mt & _MT_UPPER) | (np.roll(mt, -1) & _MT_LOWER)
        mag = np.where((y & np.uint32(1)).astype(bool), _MT_MATRIX_A, np.uint32(0))
        sh = y >> np.uint32(1)
        new = np.empty(_MT_N, dtype=np.uint32)
        step = _MT_N - _MT_M
        new[:step] = mt[_MT_M:] ^ sh[:step] ^ mag[:step]
        # later words read words produced in this same twist: fill in
        # dependency-respecting chunks of length N - M
        start = step
        while start < _MT_N - 1:
            end = min(start + step, _MT_N - 1)
            new[start:end] = new[start - step:end - step] ^ sh[start:end] ^ mag[start:end]
            start = end
        y_last = (int(mt[_MT_N - 1]) & 0x80000000) | (int(new[0]) & 0x7FFFFFFF)
        new[_MT_N - 1] = (int(new[_MT_M - 1]) ^ (y_last >> 1)
                          ^ (0x9908B0DF if y_last & 1 else 0))
        self._mt = new
        return new

    def blocks(self, count: int):
        """Yield uint32 blocks totalling at least ``count`` words."""
        produced = 0
        while produced < count:
            state = self._twist()
            y = state ^ (state >> np.uint32(11))
            y = y ^ ((y << np.uint32(7)) & np.uint32(0x9D2C5680))
            y = y ^ ((y << np.uint32(15)) & np.uint32(0xEFC60000))
            y = y ^ (y >> np.uint32(18))
            produced += _MT_N
            yield y


# --------------------------------------------------------------------------
# MRG32k3a (L'Ecuyer's combined MRG)

_M1 = 4294967087          # 2^32 - 209
_M2 = 4294944443          # 2^32 - 22853
_A12, _A13N = 1403580, 810728
_A21, _A23N = 527612, 1370589

# companion matrices acting on the column state (s[n-3], s[n-2], s[n-1])
_MAT1 = ((0, 1, 0), (0, 0, 1), ((_M1 - _A13N) % _M1, _A12, 0))
_MAT2 = ((0, 1, 0), (0, 0, 1), ((_M2 - _A23N) % _M2, 0, _A21))

_CMRG_LANES = 4096  # interleaved substreams per vectorized step


def _mat_mul(a, b, m):
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(3)) % m for j in range(3))
        for i in range(3)
    )


def _mat_pow(a, e, m):
    r = ((1, 0, 0), (0, 1, 0), (0, 0, 1))
    while e:
        if e & 1:
            r = _mat_mul(r, a, m)
        a = _mat_mul(a, a, m)
        e >>= 1
    return r


_MAT1_J = _mat_pow(_MAT1, _CMRG_LANES, _M1)
_MAT2_J = _mat_pow(_MAT2, _CMRG_LANES, _M2)


def _mat_apply(mat, x, m):
    # per-term modular products: every entry and state is < m < 2^32, so each
    # product stays below 2^64 and uint64 arithmetic is exact
    m_ = np.uint64(m)
    rows = []
    for i in range(3):
        acc = np.zeros(x.shape[1], dtype=np.uint64)
        for k in range(3):
            if mat[i][k]:
                acc = (acc + (np.uint64(mat[i][k]) * x[k]) % m_) % m_
        rows.append(acc)
    return np.array(rows)


def _next_component(mat, x, m):
    m_ = np.uint64(m)
    acc = np.zeros(x.shape[1], dtype=np.uint64)
    for k in range(3):
        if mat[2][k]:
            acc = (acc + (np.uint64(mat[2][k]) * x[k]) % m_) % m_
    return acc


class _Mrg32k3aCore:
    """MRG32k3a emitting the canonical output sequence.

    Small requests step the scalar recurrence; large ones switch to an
    interleaved-substream form (lane r holds state A^r x0 and advances by
    A^J) whose outputs are bit-identical to the scalar sequence.
    """

    native_bits = 32

    def __init__(self, seed: int):
        # expand the 64-bit seed into six component seeds in [1, m-1]
        raw = [mix64(seed + (i + 1) * _GOLDEN) for i in range(6)]
        s1 = [raw[i] % (_M1 - 1) + 1 for i in range(3)]
        s2 = [raw[i + 3] % (_M2 - 1) + 1 for i in range(3)]
        self._init_state(s1, s2)

    @classmethod
    def from_state(cls, s1, s2):
        """Construct from raw component states (validation vectors)."""
        core = cls.__new__(cls)
        core._init_state(list(s1), list(s2))
        return core

    def _init_state(self, s1, s2):
        if len(s1) != 3 or len(s2) != 3:
            raise ValueError("each component state needs exactly 3 values")
        if not all(0 <= v < _M1 for v in s1) or not any(s1):
            raise ValueError(f"first component state must be in [0, {_M1}) and not all zero")
        if not all(0 <= v < _M2 for v in s2) or not any(s2):
            raise ValueError(f"second component state must be in [0, {_M2}) and not all zero")
        self._s1 = s1
        self._s2 = s2
        self._x1 = None  # lane states, built on first large request
        self._x2 = None

    def _scalar_step(self) -> int:
        s1, s2 = self._s1, self._s2
        p1 = (_A12 * s1[1] - _A13N * s1[0]) % _M1
        s1[0], s1[1], s1[2] = s1[1], s1[2], p1
        p2 = (_A21 * s2[2] - _A23N * s2[0]) % _M2
        s2[0], s2[1], s2[2] = s2[1], s2[2], p2
        return (p1 - p2) % _M1

    def _build_lanes(self):
        j = _CMRG_LANES
        x1 = np.empty((3, j), dtype=np.uint64)
        x2 = np.empty((3, j), dtype=np.uint64)
        for r in range(j):
            x1[:, r] = self._s1
            x2[:, r] = self._s2
            self._scalar_step()
        self._x1, self._x2 = x1, x2

    @staticmethod
    def _reduce32(z: np.ndarray) -> np.ndarray:
        # scale [0, m1) onto the full 32-bit range: floor(z * 2^32 / m1)
        return (z << np.uint64(32)) // np.uint64(_M1)

    def blocks(self, count: int):
        """Yield uint32-valued blocks totalling at least ``count`` words."""
        if self._x1 is None and count < _CMRG_LANES:
            out = np.fromiter((self._scalar_step() for _ in range(count)),
                              dtype=np.uint64, count=count)
            yield self._reduce32(out).astype(np.uint32)
            return
        if self._x1 is None:
            self._build_lanes()
        produced = 0
        while produced < count:
            z = (_next_component(_MAT1, self._x1, _M1) + np.uint64(_M1)
                 - _next_component(_MAT2, self._x2, _M2)) % np.uint64(_M1)
            self._x1 = _mat_apply(_MAT1_J, self._x1, _M1)
            self._x2 = _mat_apply(_MAT2_J, self._x2, _M2)
            produced += _CMRG_LANES
            yield self._reduce32(z).astype(np.uint32)


# --------------------------------------------------------------------------
# SplitCounter

_SM_MULT1 = np.uint64(0xBF58476D1CE4E5B9)
_SM_MULT2 = np.uint64(0x94D049BB133111EB)


class _SplitCounterCore:
    """Counter through the SplitMix64 mixer; native 64-bit output."""

    native_bits = 64

    def __init__(self, seed: int):
        self._seed = seed & _MASK64
        self._drawn = 0

    def blocks(self, count: int):
        idx = np.arange(self._drawn + 1, self._drawn + count + 1, dtype=np.uint64)
        self._drawn += count
        z = np.uint64(self._seed) + idx * np.uint64(_GOLDEN)  # wraps mod 2^64
        z = (z ^ (z >> np.uint64(30))) * _SM_MULT1
        z = (z ^ (z >> np.uint64(27))) * _SM_MULT2
        yield z ^ (z >> np.uint64(31))


def _make_core(spec: GeneratorSpec):
    if spec.family == "mt19937":
        return _Mt19937Core(spec.seed)
    if spec.family == "cmrg":
        return _Mrg32k3aCore(spec.seed)
    return _SplitCounterCore(spec.seed)


class KBitStream:
    """Buffered stream of k-bit unsigned integers from one generator core.

    ``position`` counts emitted k-bit draws; ``next_kbit`` advances it by
    exactly one.  ``take_kbits``/``take_units`` are the bulk equivalents and
    produce the identical sequence: leftover native words are buffered, so
    any interleaving of single and bulk draws yields the same stream.
    """

    def __init__(self, spec: GeneratorSpec):
        self.spec = spec
        self._core = _make_core(spec)
        self.position = 0
        self._words = None   # unconsumed native words
        self._word_pos = 0
        self._unit_scale = 2.0 ** -spec.output_bits

    @property
    def unit_map_injective(self) -> bool:
        """True when distinct k-bit integers map to distinct unit doubles."""
        return self.spec.output_bits <= 52

    def _native(self, count: int) -> np.ndarray:
        """Exactly ``count`` native words, in sequence order."""
        if self._words is not None:
            avail = self._words.size - self._word_pos
            if avail >= count:
                out = self._words[self._word_pos:self._word_pos + count]
                self._word_pos += count
                return out
            parts = [self._words[self._word_pos:]]
            missing = count - avail
        else:
            parts = []
            missing = count
        parts.extend(self._core.blocks(missing))
        words = np.concatenate(parts) if len(parts) > 1 else parts[0]
        # keep only the short tail; a view would pin the whole take
        self._words = words[count:].copy()
        self._word_pos = 0
        return words[:count]

    def take_kbits(self, count: int) -> np.ndarray:
        """Next ``count`` k-bit integers as a uint64 array."""
        if count < 0:
            raise ValueError("count must be nonnegative")
        if count == 0:
            return np.empty(0, dtype=np.uint64)
        k = self.spec.output_bits
        nb = self._core.native_bits
        if k <= nb:
            vals = self._native(count).astype(np.uint64) >> (nb - k)
        else:
            # two native words per draw, first word supplies the high bits
            words = self._native(2 * count).astype(np.uint64)
            vals = ((words[0::2] << np.uint64(nb)) | words[1::2]) >> (2 * nb - k)
        self.position += count
        return vals

    def next_kbit(self) -> int:
        """Next k-bit integer in [0, 2^k - 1]."""
        return int(self.take_kbits(1)[0])

    def take_units(self, count: int) -> np.ndarray:
        """Next ``count`` unit-interval doubles, each next_kbit / 2^k."""
        return self.take_kbits(count).astype(np.float64) * self._unit_scale

    def next_unit(self) -> float:
        """Next double in [0, 1): next_kbit / 2^k."""
        return self.next_kbit() * self._unit_scale


def rand_int_rejection(stream: KBitStream, n: int, max_rejections: int = 10 ** 6) -> int:
    """Uniform integer in {1..n} by rejection on ceil(log2 n)-bit patterns.

    Patterns are the top bits of the stream's draws (several draws are
    combined when the pattern is wider than the stream).  A pattern p is
    accepted iff p <= n-1 and then shifted to p+1, which is exactly uniform.
    n = 1 returns 1 without drawing.  ``max_rejections`` guards against a
    broken generator; hitting it raises RuntimeError.
    """
    if n < 1:
        raise DomainError(f"rand_int_rejection requires n >= 1, got {n}")
    if n == 1:
        return 1
    m = (n - 1).bit_length()
    k = stream.spec.output_bits
    draws_per_pattern = max(1, math.ceil(m / k))
    rejections = 0
    while True:
        if draws_per_pattern == 1:
            v = stream.next_kbit() >> (k - m)
        else:
            acc = 0
            for _ in range(draws_per_pattern):
                acc = (acc << k) | stream.next_kbit()
            v = acc >> (draws_per_pattern * k - m)
        if v <= n - 1:
            return v + 1
        rejections += 1
        if rejections >= max_rejections:
            raise RuntimeError(
                f"rejection sampler exceeded {max_rejections} rejections for "
                f"n={n}; the generator looks broken")


def sample_ints(stream: KBitStream, n: int, count: int) -> np.ndarray:
    """Vectorized batch of ``count`` draws from {1..n}.

    Accepts and rejects exactly like ``rand_int_rejection`` and yields the
    same value sequence for the same stream state, but consumes draws in
    batches (the final batch may discard unused draws), so do not interleave
    it with the scalar sampler on one stream.
    """
    if n < 1:
        raise DomainError(f"sample_ints requires n >= 1, got {n}")
    out = np.empty(count, dtype=np.uint64)
    if n == 1:
        out.fill(1)
        return out
    m = (n - 1).bit_length()
    k = stream.spec.output_bits
    draws_per_pattern = max(1, math.ceil(m / k))
    accept = n / 2.0 ** m
    filled = 0
    while filled < count:
        want = count - filled
        batch = min(1 << 22, int(want / accept) + 16)
        if draws_per_pattern == 1:
            v = stream.take_kbits(batch) >> (k - m)
        else:
            words = stream.take_kbits(batch * draws_per_pattern)
            words = words.reshape(batch, draws_per_pattern)
            acc = np.zeros(batch, dtype=np.uint64)
            for col in range(draws_per_pattern):
                acc = (acc << np.uint64(k)) | words[:, col]
            v = acc >> (draws_per_pattern * k - m)
        good = v[v <= n - 1][:want]
        out[filled:filled + good.size] = good + np.uint64(1)
        filled += good.size
    return out
