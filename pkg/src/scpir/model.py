"""Shared domain types: exact fractions, storage profiles, message libraries,
placement plans and their bit-level partition.

Every storage fraction, segment mass and rate in this package is a
:class:`fractions.Fraction`. Floats only show up when a report is rendered.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

Rational = Fraction


def as_rational(value) -> Fraction:
    """Convert ``value`` to an exact fraction.

    Strings are parsed exactly, so ``"0.1"`` becomes ``1/10`` and ``"2/5"``
    becomes ``2/5``. Floats are rejected because their binary expansion is
    almost never the value the caller meant.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not storage fractions")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not an exact fraction: {value!r}") from exc
    if isinstance(value, float):
        raise TypeError(f"float {value!r} is not exact; pass a string such as '0.1' or '1/10'")
    raise TypeError(f"cannot interpret {type(value).__name__} as a fraction")


def is_integer(x: Fraction) -> bool:
    return x.denominator == 1


def floor_frac(x: Fraction) -> int:
    return x.numerator // x.denominator


def ceil_frac(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


@dataclass(frozen=True)
class StorageProfile:
    """Normalized storage budget ``mu[n]`` of each of the N databases.

    Database ``n`` may hold ``mu[n] * K * L`` bits. The replication factor
    ``t`` is the sum of the budgets.
    """

    mu: tuple[Fraction, ...]

    def __init__(self, mu: Iterable):
        values = tuple(as_rational(m) for m in mu)
        if not values:
            raise ValueError("storage profile needs at least one database")
        for n, m in enumerate(values, start=1):
            if not 0 < m <= 1:
                raise ValueError(f"mu[{n}] = {m} outside (0, 1]")
        if sum(values) < 1:
            raise ValueError(f"total storage t = {sum(values)} < 1; the library cannot be stored")
        object.__setattr__(self, "mu", values)

    @classmethod
    def uniform(cls, n: int, mu0) -> "StorageProfile":
        return cls([as_rational(mu0)] * n)

    @property
    def N(self) -> int:
        return len(self.mu)

    @property
    def t(self) -> Fraction:
        return sum(self.mu, Fraction(0))

    @property
    def integer_t(self) -> bool:
        return is_integer(self.t)

    def __len__(self) -> int:
        return len(self.mu)

    def __iter__(self):
        return iter(self.mu)

    def __getitem__(self, n: int) -> Fraction:
        return self.mu[n]


@dataclass(frozen=True)
class MessageLibrary:
    """K messages of L bits each, stored as a read-only ``(K, L)`` uint8 array of 0/1."""

    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=np.uint8)
        if bits.ndim != 2 or bits.shape[0] < 1 or bits.shape[1] < 1:
            raise ValueError("message library must be a non-empty (K, L) array")
        if np.any(bits > 1):
            raise ValueError("message bits must be 0 or 1")
        bits = bits.copy()
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)

    @classmethod
    def random(cls, K: int, L: int, seed: int = 0) -> "MessageLibrary":
        if K < 1 or L < 1:
            raise ValueError("K and L must be positive")
        rng = np.random.default_rng(seed)
        return cls(rng.integers(0, 2, size=(K, L), dtype=np.uint8))

    @property
    def K(self) -> int:
        return self.bits.shape[0]

    @property
    def L(self) -> int:
        return self.bits.shape[1]

    def message(self, k: int) -> np.ndarray:
        """Message ``k`` (1-based) as a bit vector."""
        return self.bits[k - 1]


@dataclass(frozen=True)
class Segment:
    alpha: Fraction
    dbset: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.dbset)


@dataclass(frozen=True)
class PlacementPlan:
    """Ordered segments ``(alpha_f, N_f)``; segment f holds an ``alpha_f`` slice of
    every message at each database in ``N_f`` (1-based ids)."""

    segments: tuple[Segment, ...]

    def __init__(self, segments: Iterable):
        segs = []
        for seg in segments:
            if not isinstance(seg, Segment):
                alpha, dbset = seg
                seg = Segment(as_rational(alpha), tuple(sorted(int(n) for n in dbset)))
            if seg.alpha <= 0:
                raise ValueError(f"segment mass must be positive, got {seg.alpha}")
            if not seg.dbset:
                raise ValueError("segment database set must be non-empty")
            if len(set(seg.dbset)) != len(seg.dbset):
                raise ValueError(f"duplicate database in {seg.dbset}")
            segs.append(seg)
        if not segs:
            raise ValueError("placement plan needs at least one segment")
        object.__setattr__(self, "segments", tuple(segs))

    @property
    def F(self) -> int:
        return len(self.segments)

    @property
    def alphas(self) -> tuple[Fraction, ...]:
        return tuple(s.alpha for s in self.segments)

    @property
    def total_mass(self) -> Fraction:
        return sum(self.alphas, Fraction(0))

    def __iter__(self):
        return iter(self.segments)

    def __len__(self) -> int:
        return len(self.segments)

    def __getitem__(self, f: int) -> Segment:
        return self.segments[f]

    def load(self, N: int) -> list[Fraction]:
        """Per-database stored mass: sum of ``alpha_f`` over segments containing n."""
        out = [Fraction(0)] * N
        for seg in self.segments:
            for n in seg.dbset:
                out[n - 1] += seg.alpha
        return out


@dataclass(frozen=True)
class SegmentPartition:
    """Contiguous bit ranges of each message, one per segment.

    Segment f covers bits ``[starts[f], starts[f] + widths[f])`` of every
    message and is split into ``symbols[f]`` symbols of ``symbol_bits[f]``
    bits each for the full-storage retrieval on that segment.
    """

    L: int
    starts: tuple[int, ...]
    widths: tuple[int, ...]
    symbols: tuple[int, ...]

    @classmethod
    def from_plan(cls, plan: PlacementPlan, K: int, L: int) -> "SegmentPartition":
        if plan.total_mass != 1:
            raise ValueError(f"segment masses sum to {plan.total_mass}, not 1")
        starts, widths, symbols = [], [], []
        pos = 0
        for f, seg in enumerate(plan, start=1):
            width = seg.alpha * L
            if not is_integer(width) or width <= 0:
                raise ValueError(f"segment {f}: alpha*L = {width} is not a positive integer")
            s = seg.size ** K
            if int(width) % s:
                raise ValueError(f"segment {f}: {int(width)} bits not divisible into {s} symbols")
            starts.append(pos)
            widths.append(int(width))
            symbols.append(s)
            pos += int(width)
        assert pos == L
        return cls(L, tuple(starts), tuple(widths), tuple(symbols))

    @property
    def symbol_bits(self) -> tuple[int, ...]:
        return tuple(w // s for w, s in zip(self.widths, self.symbols))

    def bit_range(self, f: int) -> range:
        """Bit range of segment ``f`` (0-based)."""
        return range(self.starts[f], self.starts[f] + self.widths[f])


def capacity_fspir(t: int, K: int) -> Fraction:
    """Capacity ``(1 + 1/t + ... + 1/t^(K-1))^-1`` of full-storage PIR with t servers."""
    if t < 1 or K < 1:
        raise ValueError("t and K must be positive")
    return 1 / sum((Fraction(1, t) ** i for i in range(K)), Fraction(0))


def capacity_scpir(profile: StorageProfile, K: int) -> Fraction:
    """Storage-constrained capacity: the exact full-storage rate at integer t,
    otherwise the download-cost interpolation between floor(t) and ceil(t)."""
    t = profile.t
    if is_integer(t):
        return capacity_fspir(int(t), K)
    lo, hi = floor_frac(t), ceil_frac(t)
    cost = (hi - t) / capacity_fspir(lo, K) + (t - lo) / capacity_fspir(hi, K)
    return 1 / cost


def lcm_all(values: Sequence[int]) -> int:
    out = 1
    for v in values:
        out = math.lcm(out, v)
    return out
