"""Batch command-line front-end.

Subcommands: segment, angle, eval-seg, sweep, synth.  Exit codes are
stable across subcommands: 0 success, 2 usage/configuration error,
3 degenerate contact, 4 data mismatch.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import fileio, maskgen, metrics, synth
from .core import (
    ConfigError,
    DataMismatchError,
    DegenerateFitError,
    DegenerateSkeletonError,
    InitialContactUnreliableError,
    NoContactError,
)
from .estimators import EstimatorKind, track_lift

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DEGENERATE = 3
EXIT_MISMATCH = 4

DEFAULT_SEED = 7


def _atomic_write(path: Path, writer) -> None:
    tmp = path.with_name(path.name + ".tmp")
    writer(tmp)
    os.replace(tmp, path)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_segment(args) -> int:
    logits_mode = args.logits is not None
    baseline_mode = args.contact is not None or args.reference is not None
    if logits_mode == baseline_mode:
        raise ConfigError("pass either --logits, or --contact with --reference")
    if baseline_mode and (args.contact is None or args.reference is None):
        raise ConfigError("baseline mode needs both --contact and --reference")
    if not 0.0 < args.threshold < 1.0:
        raise ConfigError(f"--threshold must lie in (0, 1), got {args.threshold}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    if logits_mode:
        files = sorted(p for p in Path(args.logits).iterdir()
                       if p.suffix.lower() in (".csv", ".f32", ".bin", ".logits"))
        if not files:
            raise ConfigError(f"no logit files found in {args.logits}")
        for f in files:
            prob = maskgen.sigmoid_map(fileio.read_logits(f))
            mask = maskgen.binarize(prob, threshold=args.threshold)
            dest = out / (f.stem + ".pgm")
            _atomic_write(dest, lambda p, m=mask: fileio.write_mask(p, m))
            print(f"{f.name}: {int(mask.sum())} contact px -> {dest.name}")
    else:
        reference = fileio.read_image_gray(args.reference)
        files = fileio.list_images(args.contact)
        if not files:
            raise ConfigError(f"no images found in {args.contact}")
        for f in files:
            contact = fileio.read_image_gray(f)
            mask = maskgen.diff_segment(contact, reference, delta=args.delta)
            if not mask.any():
                print(f"warning: {f.name} produced an empty mask", file=sys.stderr)
            dest = out / (f.stem + ".pgm")
            _atomic_write(dest, lambda p, m=mask: fileio.write_mask(p, m))
            print(f"{f.name}: {int(mask.sum())} contact px -> {dest.name}")
    return EXIT_OK


def cmd_angle(args) -> int:
    files = fileio.list_images(args.masks)
    if not files:
        raise ConfigError(f"no mask images found in {args.masks}")
    if args.window < 1:
        raise ConfigError("--window must be >= 1")
    masks = [fileio.read_mask(f) for f in files]
    kind = EstimatorKind.from_string(args.estimator)
    gt = fileio.read_gt_csv(args.gt) if args.gt else ()
    if gt and len(gt) != len(masks):
        raise DataMismatchError(
            f"{len(masks)} masks but {len(gt)} ground-truth angles")
    trace = track_lift(masks, kind, n=args.window, ground_truth=gt)
    fileio.write_trace_csv(args.out, trace, with_gt=bool(gt))
    final = trace.samples[-1]
    print(f"{len(trace.samples)} frames, final angle "
          f"{final.filtered_angle:.2f} deg -> {args.out}")
    return EXIT_OK


def _gt_mask_for(path: Path):
    if path.suffix.lower() == ".json":
        return fileio.read_labelme_mask(path)
    return fileio.read_mask(path)


def cmd_eval_seg(args) -> int:
    pred_files = {p.stem: p for p in fileio.list_images(args.pred)}
    gt_files = {p.stem: p for p in sorted(Path(args.gt).iterdir())
                if p.suffix.lower() in fileio.IMAGE_SUFFIXES + (".json",)}
    missing_gt = sorted(set(pred_files) - set(gt_files))
    missing_pred = sorted(set(gt_files) - set(pred_files))
    if not pred_files or not gt_files or missing_gt or missing_pred:
        for name in missing_gt:
            print(f"no ground truth for prediction {name}", file=sys.stderr)
        for name in missing_pred:
            print(f"no prediction for ground truth {name}", file=sys.stderr)
        raise DataMismatchError("prediction and ground-truth sets do not match")

    rows = []
    for stem in sorted(pred_files):
        pred = fileio.read_mask(pred_files[stem])
        gt = _gt_mask_for(gt_files[stem])
        score = metrics.seg_score(pred, gt)
        rows.append((stem, score.dice, score.iou))

    dices = np.array([r[1] for r in rows])
    ious = np.array([r[2] for r in rows])
    with open(args.out + ".csv", "w", encoding="utf-8") as fh:
        fh.write("file,dice,iou\n")
        for stem, d, i in rows:
            fh.write(f"{stem},{d:.6f},{i:.6f}\n")
    summary = {"files": len(rows),
               "dice_mean": float(dices.mean()), "dice_std": float(dices.std()),
               "iou_mean": float(ious.mean()), "iou_std": float(ious.std()),
               "std_kind": "population"}
    with open(args.out + ".json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"dice {summary['dice_mean']:.4f} +- {summary['dice_std']:.4f}, "
          f"iou {summary['iou_mean']:.4f} +- {summary['iou_std']:.4f} "
          f"over {len(rows)} files")
    return EXIT_OK


def _load_dataset(root) -> list[tuple[list, list]]:
    root = Path(root)
    lifts = []
    for lift_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        gt_path = lift_dir / "gt.csv"
        frames = fileio.list_images(lift_dir)
        if not frames:
            continue
        if not gt_path.exists():
            raise DataMismatchError(f"{lift_dir} has frames but no gt.csv")
        gt = fileio.read_gt_csv(gt_path)
        if len(gt) != len(frames):
            raise DataMismatchError(
                f"{lift_dir}: {len(frames)} frames vs {len(gt)} gt angles")
        lifts.append(([fileio.read_mask(f) for f in frames], gt))
    if not lifts:
        raise ConfigError(f"no lifts found under {root}")
    return lifts


def cmd_sweep(args) -> int:
    sizes = [int(s) for s in args.windows.split(",") if s]
    if not sizes or any(s < 1 for s in sizes):
        raise ConfigError(f"invalid window sizes {args.windows!r}")
    kinds = [EstimatorKind.from_string(s) for s in args.estimators.split(",") if s]
    if not kinds:
        raise ConfigError("no estimators given")
    lifts = _load_dataset(args.dataset)
    results = {k.value: metrics.window_sweep(lifts, k, sizes=sizes)
               for k in kinds}
    metrics.write_sweep_csv(args.out + ".csv", results)
    metrics.write_sweep_json(args.out + ".json", results)
    for row in metrics.sweep_table_rows(results):
        print(f"{row['estimator']:<9} window={row['window']:<3} "
              f"MARE {row['mare']:.3f} +- {row['mare_std']:.3f} deg")
    return EXIT_OK


def cmd_synth(args) -> int:
    seed = args.seed
    if seed is None:
        env = os.environ.get("SLIPKIT_SEED")
        seed = int(env) if env else DEFAULT_SEED
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    if args.kind:
        if args.frames < 1:
            raise ConfigError("--frames must be >= 1")
        spec = synth.ShapeSpec(kind=args.kind, major=args.major,
                               minor=args.minor,
                               center=(synth.SUITE_DIMS[0] / 2,
                                       synth.SUITE_DIMS[1] / 2),
                               angle=args.angle)
        traj = [args.final * i / max(args.frames - 1, 1)
                for i in range(args.frames)]
        noise = synth.NoiseSpec(boundary_jitter_px=args.jitter,
                                speckle_rate=args.speckle,
                                size_drift=args.size_drift,
                                tail_rate=args.tail_rate, seed=seed)
        lifts = [synth.SuiteLift(object_id="custom", lift_index=0, spec=spec,
                                 trajectory=tuple(traj), noise=noise)]
    else:
        lifts = synth.standard_suite(seed=seed)

    manifest = {"version": "1", "seed": seed,
                "dims": list(synth.SUITE_DIMS), "lifts": []}
    for lift in lifts:
        try:
            masks, gts = synth.generate_suite_frames(lift)
        except ValueError as exc:
            raise ConfigError(str(exc))
        lift_dir = out / f"lift_{lift.lift_index:03d}"
        lift_dir.mkdir(exist_ok=True)
        for i, mask in enumerate(masks):
            _atomic_write(lift_dir / f"frame_{i:04d}.pgm",
                          lambda p, m=mask: fileio.write_mask(p, m))
        _atomic_write(lift_dir / "gt.csv",
                      lambda p, g=gts: fileio.write_gt_csv(p, g))
        manifest["lifts"].append({
            "dir": lift_dir.name, "object_id": lift.object_id,
            "kind": lift.spec.kind, "major": lift.spec.major,
            "minor": lift.spec.minor, "angle": lift.spec.angle,
            "frames": len(masks), "final": lift.trajectory[-1],
            "noise": {"boundary_jitter_px": lift.noise.boundary_jitter_px,
                      "speckle_rate": lift.noise.speckle_rate,
                      "size_drift": lift.noise.size_drift,
                      "tail_rate": lift.noise.tail_rate,
                      "seed": lift.noise.seed}})
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {len(lifts)} lifts under {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser and entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slipkit",
        description="Rotational-slip angle estimation from contact masks")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", help="turn logits or image pairs into masks")
    p.add_argument("--logits", help="directory of logit grids (.f32/.bin/.csv)")
    p.add_argument("--contact", help="directory of contact images (baseline mode)")
    p.add_argument("--reference", help="non-contact reference image (baseline mode)")
    p.add_argument("--threshold", type=float, default=maskgen.DEFAULT_THRESHOLD,
                   help="contact probability threshold (default 0.7)")
    p.add_argument("--delta", type=float, default=25.0,
                   help="intensity difference threshold for baseline mode")
    p.add_argument("--out", required=True, help="output mask directory")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("angle", help="track the rotation angle over a lift")
    p.add_argument("--masks", required=True, help="directory of mask frames")
    p.add_argument("--estimator", default="skeleton",
                   choices=[k.value for k in EstimatorKind])
    p.add_argument("--window", type=int, default=2, help="filter window size")
    p.add_argument("--gt", help="optional ground-truth angle CSV")
    p.add_argument("--out", required=True, help="output trace CSV")
    p.set_defaults(func=cmd_angle)

    p = sub.add_parser("eval-seg", help="score predicted masks against labels")
    p.add_argument("--pred", required=True, help="directory of predicted masks")
    p.add_argument("--gt", required=True,
                   help="directory of label masks or LabelMe JSON")
    p.add_argument("--out", required=True, help="report path prefix (.csv/.json)")
    p.set_defaults(func=cmd_eval_seg)

    p = sub.add_parser("sweep", help="MARE per estimator and window size")
    p.add_argument("--dataset", required=True,
                   help="dataset root (lift subdirs with frames + gt.csv)")
    p.add_argument("--estimators", default="skeleton,pca,ellipse")
    p.add_argument("--windows", default="2,4,6,8,10")
    p.add_argument("--out", required=True, help="report path prefix (.csv/.json)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("synth", help="generate a synthetic benchmark dataset")
    p.add_argument("--out", required=True, help="dataset output directory")
    p.add_argument("--seed", type=int, default=None,
                   help="RNG seed (default: SLIPKIT_SEED env var or 7)")
    p.add_argument("--kind", choices=synth.SHAPE_KINDS,
                   help="generate a single custom lift instead of the suite")
    p.add_argument("--major", type=float, default=28.0)
    p.add_argument("--minor", type=float, default=10.0)
    p.add_argument("--angle", type=float, default=20.0)
    p.add_argument("--final", type=float, default=30.0,
                   help="final rotation of the custom trajectory")
    p.add_argument("--frames", type=int, default=synth.SUITE_FRAMES)
    p.add_argument("--jitter", type=float, default=0.6,
                   help="boundary jitter RMS in pixels")
    p.add_argument("--speckle", type=float, default=0.014,
                   help="spurious contact pixel rate")
    p.add_argument("--size-drift", type=float, default=0.04,
                   help="isotropic per-frame scale fluctuation")
    p.add_argument("--tail-rate", type=float, default=1.5,
                   help="expected concurrent smear tails per frame")
    p.set_defaults(func=cmd_synth)

    return parser


def _inject_config(argv: list[str]) -> list[str]:
    """Expand --config key=value files into CLI tokens.

    Config entries are inserted right after the subcommand so that
    explicit flags, which come later, win.
    """
    if "--config" not in argv and not any(a.startswith("--config=") for a in argv):
        return argv
    argv = list(argv)
    for i, a in enumerate(argv):
        if a == "--config":
            path = argv[i + 1]
            del argv[i:i + 2]
            break
        if a.startswith("--config="):
            path = a.split("=", 1)[1]
            del argv[i]
            break
    tokens = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"config line is not key=value: {line!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            tokens += [f"--{key.replace('_', '-')}", value]
    if not argv:
        raise ConfigError("--config requires a subcommand")
    return argv[:1] + tokens + argv[1:]


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _inject_config(argv)
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NoContactError, DegenerateFitError, DegenerateSkeletonError,
            InitialContactUnreliableError) as exc:
        print(f"degenerate contact: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except DataMismatchError as exc:
        print(f"data mismatch: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
