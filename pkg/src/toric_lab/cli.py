"""Command-line entry point: ``toric-lab <subcommand> ...`` or ``python -m toric_lab``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import subprocess
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .agent import TrainingDiverged, train
from .checkpoint import load_checkpoint
from .config import PRESETS, REWARD_MODES, TrainConfig, preset
from .evaluate import (
    MWPM,
    RL,
    SweepResult,
    SweepSpec,
    compare_reward_modes,
    estimate_threshold,
    evaluate,
)

log = logging.getLogger("toric_lab")

CURVE_HEADER = ("d", "p", "trials", "successes", "rate", "ci_lo", "ci_hi", "mean_steps")
HIST_HEADER = ("d", "p", "steps", "count")
BENCH_HEADER = ("d", "p", "trials", "successes", "success_rate")


def parse_p_list(text: str) -> tuple[float, ...]:
    """``0.01:0.15:0.01`` (inclusive range) or ``0.05,0.1``."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(f"range must be start:stop:step, got {text!r}")
        start, stop, step = (float(x) for x in parts)
        if step <= 0 or stop < start:
            raise argparse.ArgumentTypeError(f"empty or invalid range {text!r}")
        n = int(round((stop - start) / step))
        if start + n * step > stop + 1e-9:
            n -= 1
        return tuple(round(start + i * step, 10) for i in range(n + 1))
    try:
        return tuple(float(x) for x in text.split(",") if x)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid probability list {text!r}") from None


def _p(x: float) -> str:
    return f"{x:g}"


def _git_hash() -> Optional[str]:
    try:
        out = subprocess.run(
            ["git", "rev-parse", "HEAD"], capture_output=True, text=True, timeout=5, cwd=Path(__file__).parent
        )
    except (OSError, subprocess.SubprocessError):
        return None
    return out.stdout.strip() or None


def _write_meta(out: Path, args: argparse.Namespace, extra: Optional[dict] = None) -> None:
    meta = {
        "command": args.command,
        "args": {k: v for k, v in vars(args).items() if k != "func"},
        "version": __version__,
        "git": _git_hash(),
    }
    if extra:
        meta.update(extra)
    out.with_name(out.name + ".meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True, default=str) + "\n")


def _open_csv(path: Path, header: Sequence[str]):
    fh = open(path, "w", newline="")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    return fh, w


def write_curves(path: Path, results: Sequence[SweepResult], label: Optional[Sequence[str]] = None) -> None:
    header = (("agent",) if label else ()) + CURVE_HEADER
    fh, w = _open_csv(path, header)
    with fh:
        for i, res in enumerate(results):
            for pt in res.points:
                lo, hi = pt.ci
                row = (res.d, _p(pt.p), pt.trials, pt.successes, f"{pt.rate:.6f}", f"{lo:.6f}", f"{hi:.6f}", f"{pt.mean_steps:.4f}")
                w.writerow(((label[i],) if label else ()) + row)


def write_histograms(path: Path, results: Sequence[SweepResult], label: Optional[Sequence[str]] = None) -> None:
    fh, w = _open_csv(path, (("agent",) if label else ()) + HIST_HEADER)
    with fh:
        for i, res in enumerate(results):
            for pt in res.points:
                for steps, count in pt.histogram.items():
                    w.writerow(((label[i],) if label else ()) + (res.d, _p(pt.p), steps, count))


def read_curves(paths: Sequence[Path]) -> dict[int, tuple[list[float], list[float]]]:
    curves: dict[int, dict[float, float]] = {}
    for path in paths:
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                rate = row.get("rate", row.get("success_rate"))
                if rate is None:
                    raise ValueError(f"{path}: no rate column")
                curves.setdefault(int(row["d"]), {})[float(row["p"])] = float(rate)
    return {d: (sorted(pts), [pts[p] for p in sorted(pts)]) for d, pts in curves.items()}


def cmd_train(args: argparse.Namespace) -> int:
    if args.config:
        cfg = TrainConfig.load(args.config)
    else:
        cfg = preset(args.preset)
    sched = cfg.schedule
    if args.reward_mode:
        sched = replace(sched, reward_mode=args.reward_mode)
    if args.iterations:
        sched = replace(sched, total_iterations=args.iterations, iterations_at_p_final=min(sched.iterations_at_p_final, args.iterations))
    if args.per_experience:
        sched = replace(sched, per_experience_updates=True)
    cfg = replace(cfg, schedule=sched)
    if args.checkpoint_every is not None:
        cfg = replace(cfg, checkpoint_every=args.checkpoint_every)
    if args.print_config:
        print(cfg.dumps())
        return 0
    if not args.out:
        raise ValueError("--out is required for training")
    out = Path(args.out)
    log_path = Path(args.log) if args.log else out.with_name(out.name + ".log.csv")
    try:
        train(cfg, args.seed, out, log_path, wall_clock=args.wall_clock, progress_every=args.progress)
    except TrainingDiverged as exc:
        dump = out.with_name(out.name + ".diverged.json")
        dump.write_text(json.dumps(exc.dump, indent=1))
        log.error("%s; offending batch written to %s", exc, dump)
        return 1
    _write_meta(out, args, {"config": cfg.to_dict(), "log": str(log_path)})
    return 0


def _sweep(args: argparse.Namespace, d: int, decoder: str, checkpoint: Optional[str]) -> int:
    spec = SweepSpec(d, args.p, args.trials, decoder, args.seed, checkpoint, args.max_steps)
    res = evaluate(spec)
    out = Path(args.out)
    write_curves(out, [res])
    if args.hist:
        write_histograms(Path(args.hist), [res])
    _write_meta(out, args)
    for pt in res.points:
        print(f"d={d} p={_p(pt.p)} rate={pt.rate:.4f} mean_steps={pt.mean_steps:.3f}")
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    ck = load_checkpoint(args.checkpoint)
    d = ck.config.network.d
    if args.d is not None and args.d != d:
        raise ValueError(f"checkpoint has d={d} but --d {args.d} was given")
    return _sweep(args, d, RL, args.checkpoint)


def cmd_sweep(args: argparse.Namespace) -> int:
    if args.decoder == RL and not args.checkpoint:
        raise ValueError("--decoder rl needs --checkpoint")
    return _sweep(args, args.d, args.decoder, args.checkpoint)


def cmd_mwpm_bench(args: argparse.Namespace) -> int:
    res = evaluate(SweepSpec(args.d, args.p, args.trials, MWPM, args.seed))
    out = Path(args.out)
    fh, w = _open_csv(out, BENCH_HEADER)
    with fh:
        for pt in res.points:
            w.writerow((args.d, _p(pt.p), pt.trials, pt.successes, f"{pt.rate:.6f}"))
    _write_meta(out, args)
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    d = load_checkpoint(args.first).config.network.d
    cmp = compare_reward_modes(d, args.first, args.second, args.p, args.trials, args.seed)
    labels = (args.labels[0], args.labels[1])
    out = Path(args.out)
    write_curves(out, [cmp.first, cmp.second], labels)
    if args.hist:
        write_histograms(Path(args.hist), [cmp.first, cmp.second], labels)
    tv = {_p(pt.p): t for pt, t in zip(cmp.first.points, cmp.tv_distance)}
    _write_meta(out, args, {"tv_distance": tv})
    for p, t in tv.items():
        print(f"d={d} p={p} episode-length TV distance={t:.4f}")
    return 0


def cmd_threshold(args: argparse.Namespace) -> int:
    est = estimate_threshold(read_curves([Path(p) for p in args.curves]))
    if args.out:
        out = Path(args.out)
        fh, w = _open_csv(out, ("d_a", "d_b", "p_cross"))
        with fh:
            for a, b, p in est.crossings:
                w.writerow((a, b, f"{p:.6f}"))
        _write_meta(out, args, {"interval": [est.lo, est.hi]})
    if est.found:
        print(f"threshold interval [{est.lo:.5f}, {est.hi:.5f}] from {len(est.crossings)} crossing(s)")
    else:
        print("no crossing in range")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="toric-lab", description="Toric-code decoding with deep Q-learning and MWPM.")
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train a deep Q-learning decoder")
    src = t.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=sorted(PRESETS), help="named hyper-parameter preset")
    src.add_argument("--config", help="JSON config file (see --print-config for the layout)")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--out", help="checkpoint path")
    t.add_argument("--log", help="training log CSV (default: <out>.log.csv)")
    t.add_argument("--checkpoint-every", type=int, help="also write the checkpoint every N episodes")
    t.add_argument("--reward-mode", choices=REWARD_MODES, help="override the reward scheme")
    t.add_argument("--iterations", type=int, help="override the number of training episodes")
    t.add_argument("--per-experience", action="store_true", help="one Adam step per sampled experience")
    t.add_argument("--wall-clock", action="store_true", help="fill the wall_ms log column (breaks byte-identical reruns)")
    t.add_argument("--progress", type=int, default=0, help="log a progress line every N episodes")
    t.add_argument("--print-config", action="store_true", help="print the resolved config as JSON and exit")
    t.set_defaults(func=cmd_train)

    def sweep_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--p", type=parse_p_list, required=True, help="list 0.05,0.1 or range start:stop:step")
        p.add_argument("--trials", type=int, default=10_000)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", required=True, help="curve CSV path")
        p.add_argument("--hist", help="episode-length histogram CSV path")
        p.add_argument("--max-steps", type=int, help="episode step cap for RL decoding")

    e = sub.add_parser("evaluate", help="evaluate a trained checkpoint over error rates")
    e.add_argument("--checkpoint", required=True)
    e.add_argument("--d", type=int, help="optional consistency check against the checkpoint")
    sweep_flags(e)
    e.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("sweep", help="success-rate curve for MWPM or an RL checkpoint")
    s.add_argument("--decoder", choices=(MWPM, RL), required=True)
    s.add_argument("--checkpoint")
    s.add_argument("--d", type=int, required=True)
    sweep_flags(s)
    s.set_defaults(func=cmd_sweep)

    c = sub.add_parser("compare", help="episode lengths and success rates of two agents")
    c.add_argument("--first", required=True, help="checkpoint, e.g. success/failure rewards")
    c.add_argument("--second", required=True, help="checkpoint, e.g. minimum-action rewards")
    c.add_argument("--labels", nargs=2, default=("success_failure", "minimum_action"))
    sweep_flags(c)
    c.set_defaults(func=cmd_compare)

    b = sub.add_parser("mwpm-bench", help="MWPM logical success rates")
    b.add_argument("--d", type=int, required=True)
    b.add_argument("--p", type=parse_p_list, required=True)
    b.add_argument("--trials", type=int, default=10_000)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_mwpm_bench)

    th = sub.add_parser("threshold", help="estimate where curves of different d cross")
    th.add_argument("--curves", nargs="+", required=True, help="curve CSVs with d, p and rate columns")
    th.add_argument("--out", help="CSV of pairwise crossings")
    th.set_defaults(func=cmd_threshold)
    return ap


def cli_main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors (2) and --help/--version (0)
        return exc.code if isinstance(exc.code, int) else 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"toric-lab {args.command}: error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main())
