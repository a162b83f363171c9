"""Block-fading channel traces for the two-user relay network.

Each slot carries one pair of squared channel gains (s1, s2), one per
user-relay link. Gains are exponentially distributed (Rayleigh amplitude
fading), independent across slots and across the two links, and constant
within a slot.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

__all__ = [
    "FadingStatistics",
    "ChannelState",
    "ChannelTrace",
    "sample_trace",
    "empirical_means",
    "dump_csv",
]


@dataclass(frozen=True)
class FadingStatistics:
    """Long-term mean squared gains of the two links, E[s1] and E[s2]."""

    omega1: float
    omega2: float

    def __post_init__(self) -> None:
        if not (self.omega1 > 0.0 and self.omega2 > 0.0):
            raise ValueError("fading means must be positive")


@dataclass(frozen=True)
class ChannelState:
    """Squared channel gains seen in one slot. Slot indices are 1-based."""

    slot: int
    s1: float
    s2: float

    def __post_init__(self) -> None:
        if self.slot < 1:
            raise ValueError("slot index is 1-based")
        if self.s1 < 0.0 or self.s2 < 0.0:
            raise ValueError("squared gains cannot be negative")


@dataclass(frozen=True, eq=False)
class ChannelTrace:
    """A materialized fading realization of n_slots slot states.

    The gain arrays are read-only; a trace is a value, fully determined by
    (stats, seed, length).
    """

    stats: FadingStatistics
    seed: int
    s1: np.ndarray = field(repr=False)
    s2: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.s1.shape != self.s2.shape or self.s1.ndim != 1:
            raise ValueError("gain arrays must be 1-D and equally long")
        self.s1.flags.writeable = False
        self.s2.flags.writeable = False

    def __len__(self) -> int:
        return int(self.s1.shape[0])

    def __iter__(self) -> Iterator[ChannelState]:
        for i in range(len(self)):
            yield ChannelState(i + 1, float(self.s1[i]), float(self.s2[i]))

    def state(self, slot: int) -> ChannelState:
        if not 1 <= slot <= len(self):
            raise ValueError(f"slot {slot} outside 1..{len(self)}")
        return ChannelState(slot, float(self.s1[slot - 1]), float(self.s2[slot - 1]))


def sample_trace(stats: FadingStatistics, n_slots: int, seed: int) -> ChannelTrace:
    """Draw a fading trace of n_slots i.i.d. exponential gain pairs.

    Gains come from inverse-CDF sampling, s = -omega*log(1-u), on uniform
    draws from a seeded 64-bit generator, so the trace is a pure function of
    (stats, n_slots, seed) and is bit-identical across runs and platforms.
    """
    if n_slots < 1:
        raise ValueError("n_slots must be >= 1")
    u = np.random.default_rng(seed).random((2, n_slots))
    s1 = -stats.omega1 * np.log1p(-u[0])
    s2 = -stats.omega2 * np.log1p(-u[1])
    return ChannelTrace(stats=stats, seed=seed, s1=s1, s2=s2)


def empirical_means(trace: ChannelTrace) -> tuple[float, float]:
    """Sample means of the two gain sequences."""
    if len(trace) == 0:
        raise ValueError("trace is empty")
    return float(trace.s1.mean()), float(trace.s2.mean())


def dump_csv(trace: ChannelTrace, path: str) -> None:
    """Write the trace as CSV rows (slot, s1, s2) for offline inspection."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["slot", "s1", "s2"])
        for i in range(len(trace)):
            writer.writerow([i + 1, repr(float(trace.s1[i])), repr(float(trace.s2[i]))])
