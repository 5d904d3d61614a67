"""Apply packing schedules to latent histories.

Frames are grouped under each entry's kernel and mean-pooled into tokens.
Mean pooling stands in for a learned input projection: it preserves the
geometry, token counts, and linearity that the rest of the toolkit checks.

Token order is deterministic: temporal first, then row-major within each
kernel grid. Time spans are given on a packed timeline that runs tail,
entries, and generated section in segment order, with gaps counted as
zero-width at packing time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .budget import TAIL_POOL, tokens_for_schedule
from .errors import (
    ExcessHistory,
    IndivisibleDims,
    InvalidSchedule,
    ShortHistory,
    UnsupportedKernel,
)
from .schedule import (
    BASE_KERNEL,
    Frames,
    Generate,
    KernelSpec,
    PackingSchedule,
    TailMode,
)

LEARNED_KERNELS = (
    KernelSpec(1, 2, 2),
    KernelSpec(2, 4, 4),
    KernelSpec(4, 8, 8),
    KernelSpec(8, 16, 16),
)


@dataclass(frozen=True, eq=False)
class LatentVideo:
    """A (T, H, W, C) block of latent frames with finite values."""

    data: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.data, dtype=np.float64)
        if arr.ndim != 4:
            raise ValueError(f"latent video must be 4D (T,H,W,C), got shape {arr.shape}")
        if min(arr.shape[1:]) < 1:
            raise ValueError(f"H, W, C must all be >= 1, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise ValueError("latent video must contain only finite values")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def frame_count(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    @property
    def channels(self) -> int:
        return self.data.shape[3]

    def slice_frames(self, start: int, stop: int) -> "LatentVideo":
        return LatentVideo(self.data[start:stop])


@dataclass(frozen=True, eq=False)
class PackedToken:
    """One context token with full provenance.

    ``phase`` holds the mean (time, row, column) latent position of the
    pooled window, the positions a rotary embedding would be generated at.
    """

    time_span: tuple[int, int]
    cell: tuple[int, int]
    kernel: KernelSpec
    feature: np.ndarray
    phase: tuple[float, float, float]


@dataclass(frozen=True, eq=False)
class PackedContext:
    """The token sequence a schedule produces, including the section slots."""

    tokens: tuple[PackedToken, ...]
    schedule: PackingSchedule
    budget: int
    generate_span: tuple[int, int]
    tail_span: tuple[int, int] | None = None

    @property
    def generate_tokens(self) -> tuple[PackedToken, ...]:
        a, b = self.generate_span
        return tuple(t for t in self.tokens if a <= t.time_span[0] and t.time_span[1] <= b)

    @property
    def history_tokens(self) -> tuple[PackedToken, ...]:
        a, b = self.generate_span
        return tuple(t for t in self.tokens if t.time_span[1] <= a or t.time_span[0] >= b)

    @property
    def tail_frame_count(self) -> int:
        if self.tail_span is None:
            return 0
        return self.tail_span[1] - self.tail_span[0]


@dataclass(frozen=True)
class KernelResolution:
    """A requested kernel split into pre-pooling and a physical kernel."""

    downsample: tuple[int, int, int]
    physical: KernelSpec


def resolve_kernel(requested: KernelSpec) -> KernelResolution:
    """Map a kernel onto the largest learned kernel plus a downsample.

    The physical kernel is the highest-rate learned kernel that fits the
    request element-wise and divides it evenly on every axis.
    """
    for physical in sorted(LEARNED_KERNELS, key=lambda k: k.rate, reverse=True):
        if (
            requested.p_f % physical.p_f == 0
            and requested.p_h % physical.p_h == 0
            and requested.p_w % physical.p_w == 0
        ):
            ds = (
                requested.p_f // physical.p_f,
                requested.p_h // physical.p_h,
                requested.p_w // physical.p_w,
            )
            return KernelResolution(ds, physical)
    raise UnsupportedKernel(
        f"kernel {requested.dims} is not a multiple of any learned kernel"
    )


def _pad_spatial(block: np.ndarray, p_h: int, p_w: int) -> np.ndarray:
    h, w = block.shape[1:3]
    pad_h = (-h) % p_h
    pad_w = (-w) % p_w
    if pad_h or pad_w:
        block = np.pad(block, ((0, 0), (0, pad_h), (0, pad_w), (0, 0)))
    return block


def _pool_block(block: np.ndarray, kernel: KernelSpec, pad_spatial: bool) -> np.ndarray:
    """Mean-pool a (p_f, H, W, C) block into an (H', W', C) feature grid."""
    h, w = block.shape[1:3]
    if (h % kernel.p_h or w % kernel.p_w) and not pad_spatial:
        raise IndivisibleDims(
            f"latent dims {h}x{w} are not divisible by kernel {kernel.dims}"
        )
    block = _pad_spatial(block, kernel.p_h, kernel.p_w)
    h, w = block.shape[1:3]
    grid = block.reshape(
        block.shape[0],
        h // kernel.p_h,
        kernel.p_h,
        w // kernel.p_w,
        kernel.p_w,
        block.shape[3],
    ).mean(axis=(0, 2, 4))
    grid.setflags(write=False)
    return grid


def _grid_tokens(
    grid: np.ndarray,
    kernel: KernelSpec,
    time_span: tuple[int, int],
    time_pos: float,
) -> list[PackedToken]:
    tokens = []
    for r in range(grid.shape[0]):
        for c in range(grid.shape[1]):
            phase = (
                time_pos,
                r * kernel.p_h + (kernel.p_h - 1) / 2,
                c * kernel.p_w + (kernel.p_w - 1) / 2,
            )
            tokens.append(PackedToken(time_span, (r, c), kernel, grid[r, c], phase))
    return tokens


def _patchify_array(
    block: np.ndarray,
    kernel: KernelSpec,
    t_offset: int,
    pad_spatial: bool,
) -> list[PackedToken]:
    grid = _pool_block(block, kernel, pad_spatial)
    span = (t_offset, t_offset + kernel.p_f)
    return _grid_tokens(grid, kernel, span, t_offset + (kernel.p_f - 1) / 2)


def patchify(
    frames: LatentVideo,
    kernel: KernelSpec,
    *,
    t_offset: int = 0,
    pad_spatial: bool = False,
) -> list[PackedToken]:
    """Turn one kernel-sized slice of frames into its token grid."""
    if frames.frame_count != kernel.p_f:
        raise ValueError(
            f"slice has {frames.frame_count} frames, kernel wants {kernel.p_f}"
        )
    return _patchify_array(frames.data, kernel, t_offset, pad_spatial)


def _clipped_windows(size: int, step: int) -> list[tuple[int, int]]:
    return [(lo, min(lo + step, size)) for lo in range(0, size, step)]


def handle_tail(
    tail: LatentVideo,
    mode: TailMode,
    coarsest: KernelSpec | None = None,
    *,
    t_offset: int = 0,
    pad_spatial: bool = False,
) -> list[PackedToken]:
    """Pack leftover oldest (or newest) frames per the tail mode.

    Delete drops them. Append pools each frame spatially by (1, 32, 32)
    with clipped edge windows, one coarse pixel grid per frame. Compress
    averages all tail frames into a single frame and patchifies it with
    the schedule's coarsest kernel; its tokens span the whole tail.
    """
    if mode is TailMode.DELETE or tail.frame_count == 0:
        return []

    if mode is TailMode.APPEND:
        kernel = KernelSpec(*TAIL_POOL)
        rows = _clipped_windows(tail.height, TAIL_POOL[1])
        cols = _clipped_windows(tail.width, TAIL_POOL[2])
        tokens = []
        for t in range(tail.frame_count):
            for r, (r0, r1) in enumerate(rows):
                for c, (c0, c1) in enumerate(cols):
                    feature = tail.data[t, r0:r1, c0:c1].mean(axis=(0, 1))
                    feature.setflags(write=False)
                    phase = (float(t_offset + t), (r0 + r1 - 1) / 2, (c0 + c1 - 1) / 2)
                    tokens.append(
                        PackedToken((t_offset + t, t_offset + t + 1), (r, c), kernel, feature, phase)
                    )
        return tokens

    # compress
    kernel = coarsest if coarsest is not None else BASE_KERNEL
    averaged = tail.data.mean(axis=0, keepdims=True)
    grid = _pool_block(averaged, kernel, pad_spatial)
    span = (t_offset, t_offset + tail.frame_count)
    return _grid_tokens(grid, kernel, span, t_offset + (tail.frame_count - 1) / 2)


def _entry_groups(
    frames: np.ndarray, entry: Frames, pad_history: bool
) -> list[np.ndarray]:
    """Split an entry's frames into kernel-sized groups, oldest first."""
    p_f = entry.kernel.p_f
    if frames.shape[0] % p_f:
        if not pad_history:
            raise IndivisibleDims(
                f"entry of {entry.count} frames is not divisible by kernel step {p_f}"
            )
        deficit = (-frames.shape[0]) % p_f
        frames = np.concatenate([frames, np.repeat(frames[-1:], deficit, axis=0)])
    return [frames[i : i + p_f] for i in range(0, frames.shape[0], p_f)]


def _pad_block(frames: np.ndarray, target: int, at_start: bool) -> np.ndarray:
    """Replicate the boundary frame until the block holds ``target`` frames."""
    deficit = target - frames.shape[0]
    if deficit <= 0:
        return frames
    if frames.shape[0] == 0:
        raise ShortHistory("cannot pad from an empty history")
    edge = frames[:1] if at_start else frames[-1:]
    pad = np.repeat(edge, deficit, axis=0)
    return np.concatenate([pad, frames] if at_start else [frames, pad])


def apply_schedule(
    history: LatentVideo,
    schedule: PackingSchedule,
    *,
    pad_history: bool = False,
    pad_spatial: bool = False,
) -> PackedContext:
    """Pack a concrete history under a schedule.

    Entries consume frames from the generate-adjacent end outward; the
    side carrying the tail marker absorbs leftover frames into the tail.
    The emitted budget always equals ``tokens_for_schedule`` for the same
    dims and tail count; the generated section contributes zero-feature
    placeholder tokens at the base kernel.
    """
    h, w, channels = history.height, history.width, history.channels
    pre = schedule.entries_before_generate
    post = schedule.entries_after_generate
    cap_pre = sum(e.count for e in pre)
    cap_post = sum(e.count for e in post)
    total = history.frame_count

    if schedule.tail_at_start:
        n_post = min(cap_post, total)
        n_pre = min(cap_pre, total - n_post)
        n_tail = total - n_post - n_pre
        tail_block = history.data[:n_tail]
        pre_block = history.data[n_tail : n_tail + n_pre]
        post_block = history.data[total - n_post :]
    elif schedule.tail_at_end:
        n_pre = min(cap_pre, total)
        n_post = min(cap_post, total - n_pre)
        n_tail = total - n_pre - n_post
        pre_block = history.data[:n_pre]
        post_block = history.data[n_pre : n_pre + n_post]
        tail_block = history.data[n_pre + n_post :]
    else:
        if total > cap_pre + cap_post:
            raise ExcessHistory(
                f"history of {total} frames exceeds schedule capacity "
                f"{cap_pre + cap_post} and there is no tail marker"
            )
        n_pre = min(cap_pre, total)
        n_post = total - n_pre
        n_tail = 0
        pre_block = history.data[:n_pre]
        post_block = history.data[n_pre:]
        tail_block = history.data[:0]

    if (n_pre < cap_pre or n_post < cap_post) and not pad_history:
        raise ShortHistory(
            f"history of {total} frames cannot fill entries needing "
            f"{cap_pre + cap_post} frames"
        )
    pre_block = _pad_block(pre_block, cap_pre, at_start=True)
    post_block = _pad_block(post_block, cap_post, at_start=False)

    tokens: list[PackedToken] = []
    cursor = 0
    tail_span: tuple[int, int] | None = None

    def emit_tail() -> None:
        nonlocal cursor, tail_span
        tail_span = (cursor, cursor + n_tail)
        tokens.extend(
            handle_tail(
                LatentVideo(tail_block),
                schedule.tail.mode,
                schedule.coarsest_kernel,
                t_offset=cursor,
                pad_spatial=pad_spatial,
            )
        )
        cursor += n_tail

    def emit_entries(entries: Sequence[Frames], block: np.ndarray) -> None:
        nonlocal cursor
        offset = 0
        for entry in entries:
            chunk = block[offset : offset + entry.count]
            offset += entry.count
            for group in _entry_groups(chunk, entry, pad_history):
                tokens.extend(_patchify_array(group, entry.kernel, cursor, pad_spatial))
                cursor += entry.kernel.p_f

    if schedule.tail_at_start:
        emit_tail()
    emit_entries(pre, pre_block)

    section = schedule.generate.count
    generate_span = (cursor, cursor + section)
    zero_feature = np.zeros(channels)
    zero_feature.setflags(write=False)
    rows = math.ceil(h / BASE_KERNEL.p_h) if pad_spatial else h // BASE_KERNEL.p_h
    cols = math.ceil(w / BASE_KERNEL.p_w) if pad_spatial else w // BASE_KERNEL.p_w
    if (h % BASE_KERNEL.p_h or w % BASE_KERNEL.p_w) and not pad_spatial:
        raise IndivisibleDims(
            f"latent dims {h}x{w} are not divisible by the base kernel {BASE_KERNEL.dims}"
        )
    for s in range(section):
        span = (cursor, cursor + 1)
        for r in range(rows):
            for c in range(cols):
                phase = (float(cursor), r * 2 + 0.5, c * 2 + 0.5)
                tokens.append(PackedToken(span, (r, c), BASE_KERNEL, zero_feature, phase))
        cursor += 1

    emit_entries(post, post_block)
    if schedule.tail_at_end:
        emit_tail()

    expected = tokens_for_schedule(
        schedule, h, w, n_tail, pad=pad_history or pad_spatial
    )
    if len(tokens) != expected:
        raise RuntimeError(
            f"packed {len(tokens)} tokens but accounting expected {expected}"
        )
    return PackedContext(tuple(tokens), schedule, len(tokens), generate_span, tail_span)


def build_symmetric_schedule(
    entries: Sequence[Frames],
    generate_count: int,
    *,
    discretize_history: bool = False,
) -> PackingSchedule:
    """Mirror a half-progression around the generated section.

    The finest entries sit at both temporal ends and the coarsest meet in
    the middle, so both ends of the history carry equal weight. The
    mirrored halves' token budgets add to twice the half's budget.
    """
    if not entries or not all(isinstance(e, Frames) for e in entries):
        raise InvalidSchedule("symmetric schedule needs at least one frames entry")
    segments = (*entries, Generate(generate_count), *reversed(entries))
    return PackingSchedule(segments, discretize_history)
