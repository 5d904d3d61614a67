"""Command-line front end over the packing toolkit.

One binary with subcommands; outputs are deterministic plain text so they
can serve as golden files. Exit codes: 0 success, 2 usage or schedule
errors, 3 data errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import fplt
from .budget import (
    tail_tokens,
    tokens_for_entry,
    tokens_for_schedule,
    tokens_per_frame_for,
)
from .codebook import fit_codebook, discretize_history
from .drift import (
    DEFAULT_INITIAL_RATING,
    builtin_metrics,
    drift_report,
    parse_match_log,
    rank_buckets,
    tournament,
)
from .errors import (
    FpltFormatError,
    IndivisibleDims,
    PlanError,
    ScheduleError,
    UnsupportedKernel,
)
from .packing import apply_schedule
from .planner import (
    plan_endpoint,
    plan_inverted,
    plan_multi_endpoint,
    plan_vanilla,
    serialize_plan,
)
from .schedule import Frames, Generate, SamplingMode, Tail, parse_schedule

USAGE_ERRORS = (ScheduleError, IndivisibleDims, UnsupportedKernel, PlanError)


def _segment_text(seg) -> str:
    if isinstance(seg, Tail):
        return f"tail {seg.mode.value}"
    if isinstance(seg, Frames):
        return f"frames f{seg.count}{seg.kernel.token}"
    if isinstance(seg, Generate):
        return f"generate g{seg.count}"
    return "skip x"


def cmd_parse(args: argparse.Namespace) -> int:
    schedule = parse_schedule(args.name)
    print(f"name={schedule.name}")
    print(f"mode={schedule.sampling_mode.value}")
    print(f"discretize={'true' if schedule.discretize_history else 'false'}")
    print(f"entries={len(schedule.frames_entries)}")
    print(f"generate={schedule.generate.count}")
    for i, seg in enumerate(schedule.segments, start=1):
        print(f"segment {i}: {_segment_text(seg)}")
    return 0


def cmd_budget(args: argparse.Namespace) -> int:
    schedule = parse_schedule(args.name)
    h, w, pad = args.height, args.width, args.pad
    total = 0
    for seg in schedule.segments:
        if isinstance(seg, Frames):
            tokens = tokens_for_entry(seg.count, seg.kernel, h, w, pad=pad)
            print(f"entry f{seg.count}{seg.kernel.token} tokens={tokens}")
            total += tokens
        elif isinstance(seg, Generate):
            tokens = seg.count * tokens_per_frame_for(h, w, pad=pad)
            print(f"generate g{seg.count} tokens={tokens}")
            total += tokens
    tail = schedule.tail
    if tail is not None:
        tokens = tail_tokens(tail.mode, args.tail_frames, schedule.coarsest_kernel, h, w, pad=pad)
        print(f"tail {tail.mode.value} frames={args.tail_frames} tokens={tokens}")
        total += tokens
    check = tokens_for_schedule(schedule, h, w, args.tail_frames, pad=pad)
    if total != check:
        raise RuntimeError(f"budget table sums to {total}, accounting says {check}")
    print(f"total {total}")
    return 0


def _parse_spans(text: str) -> list[tuple[int, int]]:
    spans = []
    for part in text.split(","):
        lo, _, hi = part.partition("..")
        spans.append((int(lo), int(hi)))
    return spans


def cmd_plan(args: argparse.Namespace) -> int:
    schedule = parse_schedule(args.name)
    mode = schedule.sampling_mode
    if args.endpoints:
        plan = plan_multi_endpoint(
            args.total, args.section, schedule, _parse_spans(args.endpoints)
        )
    elif mode is SamplingMode.VANILLA:
        plan = plan_vanilla(args.total, args.section, schedule)
    elif mode is SamplingMode.ENDPOINT_ANCHORED:
        plan = plan_endpoint(args.total, args.section, schedule)
    elif mode is SamplingMode.INVERTED:
        plan = plan_inverted(args.total, args.section, schedule, user_frames=args.user_frames)
    else:
        raise PlanError(f"schedule {args.name!r} does not imply a sampling order")
    sys.stdout.write(serialize_plan(plan))
    return 0


def cmd_pack(args: argparse.Namespace) -> int:
    schedule = parse_schedule(args.name)
    video = fplt.read_video(args.input)
    context = apply_schedule(
        video, schedule, pad_history=args.pad_history, pad_spatial=args.pad_spatial
    )
    features = np.stack([t.feature for t in context.tokens])
    fplt.write_tensor(args.output, features.reshape(1, 1, *features.shape))

    sidecar = Path(args.provenance or f"{args.output}.prov")
    lines = [
        f"schedule {schedule.name}",
        f"budget {context.budget}",
        f"generate_span {context.generate_span[0]}..{context.generate_span[1]}",
        f"tail_frames {context.tail_frame_count}",
    ]
    for i, tok in enumerate(context.tokens):
        lines.append(
            f"token {i} span={tok.time_span[0]}..{tok.time_span[1]}"
            f" cell={tok.cell[0]},{tok.cell[1]} kernel={tok.kernel.token}"
            f" phase={tok.phase[0]!r},{tok.phase[1]!r},{tok.phase[2]!r}"
        )
    sidecar.write_text("\n".join(lines) + "\n")
    print(f"budget {context.budget}")
    print(f"tokens {args.output}")
    print(f"provenance {sidecar}")
    return 0


def cmd_codebook_fit(args: argparse.Namespace) -> int:
    videos = [fplt.read_video(p) for p in args.inputs]
    codebook = fit_codebook(videos, args.k, args.seed, args.max_iters, args.tol)
    fplt.write_codebook(args.output, codebook)
    stats = codebook.fit_stats
    print(f"codebook {args.output}")
    print(f"k {codebook.size}")
    print(f"iterations {stats.iterations}")
    print(f"inertia {stats.inertia!r}")
    return 0


def cmd_quantize(args: argparse.Namespace) -> int:
    video = fplt.read_video(args.input)
    codebook = fplt.read_codebook(args.codebook)
    fplt.write_video(args.output, discretize_history(video, codebook))
    print(f"quantized {args.output}")
    return 0


def cmd_drift(args: argparse.Namespace) -> int:
    video = fplt.read_video(args.input)
    metrics = builtin_metrics()
    if args.metric != "all":
        metrics = [m for m in metrics if m.name == args.metric]
    sys.stdout.write(drift_report(video, metrics))
    return 0


def cmd_elo(args: argparse.Namespace) -> int:
    records = parse_match_log(Path(args.matches).read_text())
    table = tournament(records, initial=args.initial)
    ranks = rank_buckets(table)
    for player, rating in sorted(table.ratings.items(), key=lambda kv: (-kv[1], kv[0])):
        if args.ranks:
            print(f"{player}={rating:.1f} rank={ranks[player]}")
        else:
            print(f"{player}={rating:.1f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ctxpack",
        description="Compute, apply, and verify frame-context packing schedules.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse a schedule name and dump its structure")
    p.add_argument("name")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("budget", help="token accounting for a schedule at given dims")
    p.add_argument("name")
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--tail-frames", type=int, default=0)
    p.add_argument("--pad", action="store_true", help="ceil-divide indivisible dims")
    p.set_defaults(func=cmd_budget)

    p = sub.add_parser("plan", help="emit the generation plan a schedule implies")
    p.add_argument("name")
    p.add_argument("--total", type=int, required=True)
    p.add_argument("--section", type=int, required=True)
    p.add_argument("--user-frames", type=int, default=1, help="leading user-supplied frames (inverted mode)")
    p.add_argument("--endpoints", help="anchor spans a..b,c..d for multi-endpoint plans")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("pack", help="apply a schedule to a latent video container")
    p.add_argument("name")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--provenance", help="sidecar path (default: <output>.prov)")
    p.add_argument("--pad-history", action="store_true")
    p.add_argument("--pad-spatial", action="store_true")
    p.set_defaults(func=cmd_pack)

    p = sub.add_parser("codebook", help="codebook operations")
    csub = p.add_subparsers(dest="codebook_command", required=True)
    pf = csub.add_parser("fit", help="fit a codebook over latent pixels")
    pf.add_argument("inputs", nargs="+")
    pf.add_argument("--k", type=int, required=True)
    pf.add_argument("--seed", type=int, required=True)
    pf.add_argument("--max-iters", type=int, default=100)
    pf.add_argument("--tol", type=float, default=1e-6)
    pf.add_argument("-o", "--output", required=True)
    pf.set_defaults(func=cmd_codebook_fit)

    p = sub.add_parser("quantize", help="snap a video to its nearest codebook entries")
    p.add_argument("input")
    p.add_argument("--codebook", required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_quantize)

    p = sub.add_parser("drift", help="start-end drift report for a video")
    p.add_argument("input")
    p.add_argument(
        "--metric",
        default="all",
        choices=["all"] + [m.name for m in builtin_metrics()],
    )
    p.set_defaults(func=cmd_drift)

    p = sub.add_parser("elo", help="sequential K-32 ratings from a match log")
    p.add_argument("matches")
    p.add_argument("--initial", type=float, default=DEFAULT_INITIAL_RATING)
    p.add_argument("--ranks", action="store_true", help="append tie-bucketed ranks")
    p.set_defaults(func=cmd_elo)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except USAGE_ERRORS as exc:
        print(f"ctxpack: {exc}", file=sys.stderr)
        return 2
    except (ValueError, FpltFormatError, OSError) as exc:
        print(f"ctxpack: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
