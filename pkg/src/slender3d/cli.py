"""Command-line front end: synth, reconstruct, eval, and bench.

Exit codes: 0 on success, 1 for input errors (bad arguments, unreadable
or malformed files), 2 for pipeline errors (the failing stage is named
on stderr).
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import io as sio
from .errors import (
    InvalidSpec,
    IoError,
    ParseError,
    Slender3dError,
    StageFailure,
    UnknownPreset,
    UnsupportedFormat,
)
from .metrics import evaluate
from .pipeline import BENCH_MODES, PipelineConfig, bench_scene, make_scene, reconstruct_scene
from .synth import CurveSpec, RIG_PRESETS

_INPUT_ERRORS = (
    InvalidSpec,
    IoError,
    ParseError,
    UnknownPreset,
    UnsupportedFormat,
    FileNotFoundError,
    PermissionError,
    ValueError,
)


def _load_config(args) -> PipelineConfig:
    config = PipelineConfig.from_file(args.config) if args.config else PipelineConfig()
    overrides = {}
    for key in ("input_mode", "r_max", "lambda_a", "lambda_d", "degenerate_penalty"):
        if getattr(args, key, None) is not None:
            overrides[key] = getattr(args, key)
    return config.with_overrides(**overrides)


def cmd_synth(args) -> int:
    spec = CurveSpec(
        seed=args.seed,
        n_control=args.n_control,
        length_mm=args.length_mm,
        bend_scale=args.bend_scale,
        loop_bias=args.loop_bias,
        n_samples=args.n_samples,
    )
    bundle = make_scene(
        args.seed, args.preset, stroke_px=args.stroke, spec=spec, jitter_seed=args.jitter_seed
    )
    out = Path(args.out)
    try:
        manifest = sio.write_scene(
            bundle,
            out,
            extra={"preset": args.preset, "seed": args.seed, "jitter_seed": args.jitter_seed},
        )
    except OSError as exc:
        raise IoError(f"{out}: {exc}") from exc
    print(manifest)
    return 0


def cmd_reconstruct(args) -> int:
    config = _load_config(args)
    out_dir = Path(args.out)
    artifacts = reconstruct_scene(args.scene_dir, config, out_dir)
    curve = artifacts["curve"]
    print(f"reconstructed {len(curve)} points ({curve.n_dropped} dropped)")
    print(out_dir / "curve3d.csv")
    return 0


def cmd_eval(args) -> int:
    recon = sio.read_curve_csv(args.recon)
    gt = sio.read_curve_csv(args.gt)
    metrics = evaluate(recon, gt, gt_resample=args.gt_resample)
    doc = json.dumps(metrics.to_dict(), indent=2, sort_keys=True)
    print(doc)
    if args.out:
        Path(args.out).write_text(doc + "\n")
    return 0


def _bench_one(task):
    seed, preset, config, stroke = task
    try:
        return seed, bench_scene(seed, preset, config, stroke), None
    except Slender3dError as exc:
        stage = exc.stage if isinstance(exc, StageFailure) else type(exc).__name__
        return seed, None, stage


def cmd_bench(args) -> int:
    if args.n_seeds < 1:
        raise ValueError("n_seeds must be >= 1")
    config = _load_config(args)
    tasks = [(seed, args.preset, config, args.stroke) for seed in range(args.n_seeds)]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            outcomes = list(pool.map(_bench_one, tasks))
    else:
        outcomes = [_bench_one(t) for t in tasks]

    rows = []
    failures = []
    for seed, result, failed_stage in outcomes:
        if result is None:
            failures.append((seed, failed_stage))
            continue
        for mode in BENCH_MODES:
            m = result[mode]
            rows.append((seed, mode, m.accuracy, m.completeness, m.overall, m.max_error))

    lines = ["seed,mode,accuracy,completeness,overall,max_error"]
    for seed, mode, acc, comp, overall, mx in rows:
        lines.append(f"{seed},{mode},{acc:.6f},{comp:.6f},{overall:.6f},{mx:.6f}")
    csv_text = "\n".join(lines) + "\n"

    table = [
        "| mode | mean accuracy | mean completeness | mean overall | mean max error | scenes |",
        "|---|---|---|---|---|---|",
    ]
    for mode in BENCH_MODES:
        mode_rows = [r for r in rows if r[1] == mode]
        if not mode_rows:
            table.append(f"| {mode} | - | - | - | - | 0 |")
            continue
        means = [sum(r[k] for r in mode_rows) / len(mode_rows) for k in (2, 3, 4, 5)]
        table.append(
            f"| {mode} | {means[0]:.4f} | {means[1]:.4f} | {means[2]:.4f} | "
            f"{means[3]:.4f} | {len(mode_rows)} |"
        )
    for seed, stage in failures:
        table.append(f"| seed {seed} FAILED ({stage}) | - | - | - | - | - |")
    md_text = "\n".join(table) + "\n"

    print(md_text)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "bench_results.csv").write_text(csv_text)
        (out / "bench_summary.md").write_text(md_text)
        print(out / "bench_summary.md")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slender3d",
        description="Two-view 3D centerline reconstruction for slender bodies",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    spec_defaults = CurveSpec(seed=0)  # flag defaults track the dataclass
    p = sub.add_parser("synth", help="generate a calibrated synthetic scene directory")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--preset", choices=sorted(RIG_PRESETS), default="orthogonal")
    p.add_argument("--out", required=True)
    p.add_argument("--n-control", dest="n_control", type=int, default=spec_defaults.n_control)
    p.add_argument("--length-mm", dest="length_mm", type=float, default=spec_defaults.length_mm)
    p.add_argument("--bend-scale", dest="bend_scale", type=float, default=spec_defaults.bend_scale)
    p.add_argument("--loop-bias", dest="loop_bias", type=float, default=spec_defaults.loop_bias)
    p.add_argument("--n-samples", dest="n_samples", type=int, default=spec_defaults.n_samples)
    p.add_argument("--stroke", type=int, default=2)
    p.add_argument(
        "--jitter-seed",
        dest="jitter_seed",
        type=int,
        default=None,
        help="add small calibration-uncertainty pose jitter to the rig",
    )
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("reconstruct", help="reconstruct a 3D curve from a scene directory")
    p.add_argument("scene_dir")
    p.add_argument("--out", required=True)
    p.add_argument("--config", default=None, help="JSON pipeline configuration")
    p.add_argument("--input-mode", dest="input_mode", choices=["masks", "ordered_points"])
    p.add_argument("--r-max", dest="r_max", type=int)
    p.add_argument("--lambda-a", dest="lambda_a", type=float)
    p.add_argument("--lambda-d", dest="lambda_d", type=float)
    p.add_argument("--degenerate-penalty", dest="degenerate_penalty", type=float)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("eval", help="compare a reconstructed curve CSV to ground truth")
    p.add_argument("recon")
    p.add_argument("gt")
    p.add_argument("--out", default=None)
    p.add_argument("--gt-resample", dest="gt_resample", type=int, default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="aggregate metrics over seeds and input modes")
    p.add_argument("--n-seeds", dest="n_seeds", type=int, required=True)
    p.add_argument("--preset", choices=sorted(RIG_PRESETS), default="orthogonal")
    p.add_argument("--out", default=None)
    p.add_argument("--config", default=None)
    p.add_argument("--stroke", type=int, default=2)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except StageFailure as exc:
        if isinstance(exc.original, _INPUT_ERRORS):
            print(f"input error: {exc}", file=sys.stderr)
            return 1
        print(f"pipeline error at {exc}", file=sys.stderr)
        return 2
    except _INPUT_ERRORS as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 1
    except Slender3dError as exc:
        print(f"pipeline error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
