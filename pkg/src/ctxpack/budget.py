"""Token-budget arithmetic for packed frame contexts.

Per-frame lengths follow a geometric progression: the frame at compression
level ``i`` costs ``tokens_per_frame / ratio**i`` tokens, so the history
cost of an unbounded video converges to ``ratio / (ratio - 1)`` frames'
worth of tokens. Everything here is computed with ``fractions.Fraction``
so monotonicity and reconstruction checks hold exactly; callers can wrap
results in ``float()`` for display.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import ExcessHistory, IndivisibleDims, NonDyadicBudget
from .schedule import (
    BASE_KERNEL,
    Frames,
    Generate,
    KernelSpec,
    PackingSchedule,
    TailMode,
)

Numeric = Union[int, float, Fraction]

TAIL_POOL = (1, 32, 32)


def _fraction(value: Numeric, what: str) -> Fraction:
    try:
        return Fraction(value)
    except (TypeError, ValueError) as exc:
        raise TypeError(f"{what} must be a rational number, got {value!r}") from exc


@dataclass(frozen=True)
class BudgetParams:
    """Inputs of the context-length formula.

    tokens_per_frame: cost of one frame at the base kernel (often written
    L_f); ratio: per-level compression factor, must exceed 1;
    section_frames: size of the generated section; history_frames: number
    of conditioning frames.
    """

    tokens_per_frame: int
    ratio: Fraction
    section_frames: int
    history_frames: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "ratio", _fraction(self.ratio, "ratio"))
        if self.tokens_per_frame < 1:
            raise ValueError("tokens_per_frame must be >= 1")
        if self.ratio <= 1:
            raise ValueError("ratio must be > 1")
        if self.section_frames < 1:
            raise ValueError("section_frames must be >= 1")
        if self.history_frames < 0:
            raise ValueError("history_frames must be >= 0")


def per_frame_length(tokens_per_frame: int, ratio: Numeric, level: int) -> Fraction:
    """Token cost of the history frame at compression level ``level``."""
    if level < 0:
        raise ValueError("level must be >= 0")
    r = _fraction(ratio, "ratio")
    return Fraction(tokens_per_frame) / r**level


def total_length(params: BudgetParams) -> Fraction:
    """Exact context length of a section plus geometrically packed history."""
    lf = Fraction(params.tokens_per_frame)
    base = params.section_frames * lf
    if params.history_frames == 0:
        return base
    inv = 1 / params.ratio
    return base + lf * (1 - inv**params.history_frames) / (1 - inv)


def length_bound(tokens_per_frame: int, ratio: Numeric, section_frames: int) -> Fraction:
    """Limit of ``total_length`` as the history grows without bound."""
    r = _fraction(ratio, "ratio")
    if r <= 1:
        raise ValueError("ratio must be > 1")
    return (section_frames + r / (r - 1)) * Fraction(tokens_per_frame)


@dataclass(frozen=True)
class RateDecomposition:
    """A budget written as the full halving series plus bit-level edits.

    The base series sums to exactly 2 frames' worth of tokens. Each
    duplicated level ``i`` adds an extra ``1/2**i``; each dropped level
    removes the series' single ``1/2**i`` term.
    """

    base_included: bool
    duplicated_levels: tuple[int, ...]
    dropped_levels: tuple[int, ...]

    def value(self) -> Fraction:
        total = Fraction(2) if self.base_included else Fraction(0)
        total += sum((Fraction(1, 2**i) for i in self.duplicated_levels), Fraction(0))
        total -= sum((Fraction(1, 2**i) for i in self.dropped_levels), Fraction(0))
        return total


def _fraction_bits(frac: Fraction, first_level: int) -> list[int]:
    """Levels of the set bits of ``frac`` in (0, 1), starting at first_level."""
    bits = []
    level = first_level
    while frac:
        frac *= 2
        if frac >= 1:
            bits.append(level)
            frac -= 1
        level += 1
    return bits


def decompose_rate(budget: Numeric) -> RateDecomposition:
    """Express a dyadic budget (in base-frame units) as series edits.

    Budgets of at least 2 keep the base series and duplicate levels;
    smaller budgets keep the base series and drop levels. Non-dyadic
    budgets are rejected rather than rounded.
    """
    b = _fraction(budget, "budget")
    if b <= 0:
        raise ValueError(f"budget must be positive, got {budget!r}")
    if b.denominator & (b.denominator - 1):
        raise NonDyadicBudget(f"budget {b} has no terminating binary expansion")

    if b >= 2:
        extra = b - 2
        whole = int(extra)
        dups = [0] * whole + _fraction_bits(extra - whole, 1)
        return RateDecomposition(True, tuple(dups), ())

    deficit = 2 - b  # in (0, 2), so at most one copy of each level
    drops = []
    if deficit >= 1:
        drops.append(0)
        deficit -= 1
    drops += _fraction_bits(deficit, 1)
    return RateDecomposition(True, (), tuple(drops))


def _grid(size: int, step: int, axis: str, pad: bool) -> int:
    if size % step and not pad:
        raise IndivisibleDims(f"{axis}={size} is not divisible by kernel step {step}")
    return math.ceil(size / step) if pad else size // step


def tokens_for_entry(
    count: int, kernel: KernelSpec, height: int, width: int, *, pad: bool = False
) -> int:
    """Tokens emitted by one schedule entry over the given latent dims."""
    groups = _grid(count, kernel.p_f, "count", pad)
    rows = _grid(height, kernel.p_h, "height", pad)
    cols = _grid(width, kernel.p_w, "width", pad)
    return groups * rows * cols


def tokens_per_frame_for(height: int, width: int, *, pad: bool = False) -> int:
    """Base-kernel cost of one frame, derived from the latent resolution."""
    return tokens_for_entry(1, BASE_KERNEL, height, width, pad=pad)


def tail_tokens(
    mode: TailMode,
    tail_frames: int,
    coarsest: KernelSpec,
    height: int,
    width: int,
    *,
    pad: bool = False,
) -> int:
    """Token count contributed by the tail under the given mode."""
    if tail_frames <= 0 or mode is TailMode.DELETE:
        return 0
    if mode is TailMode.APPEND:
        return tail_frames * math.ceil(height / TAIL_POOL[1]) * math.ceil(width / TAIL_POOL[2])
    # compress: all tail frames averaged into one coarsest-kernel group
    return tokens_for_entry(coarsest.p_f, coarsest, height, width, pad=pad)


def tokens_for_schedule(
    schedule: PackingSchedule,
    height: int,
    width: int,
    tail_frames: int = 0,
    *,
    pad: bool = False,
) -> int:
    """Total context tokens: entries, generated section, and tail."""
    total = 0
    for seg in schedule.segments:
        if isinstance(seg, Frames):
            total += tokens_for_entry(seg.count, seg.kernel, height, width, pad=pad)
        elif isinstance(seg, Generate):
            total += seg.count * tokens_per_frame_for(height, width, pad=pad)

    if tail_frames:
        tail = schedule.tail
        if tail is None:
            raise ExcessHistory(
                f"{tail_frames} leftover frames but the schedule has no tail marker"
            )
        total += tail_tokens(
            tail.mode, tail_frames, schedule.coarsest_kernel, height, width, pad=pad
        )
    return total
