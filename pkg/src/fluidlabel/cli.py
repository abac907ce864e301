"""Batch command-line interface.

Subcommands: superpixels, genlabel, refine, metrics, serve. All commands
are deterministic for identical files and flags. Exit codes: 0 success,
2 input or validation failure, 3 algorithmic degeneracy.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import metrics as metrics_mod
from . import refinement
from .config import PipelineConfig, load_config
from .errors import DegenerateJointError, FluidLabelError, ValidationError
from .formats import (
    read_fmap,
    read_label_pgm,
    read_pgm,
    read_points,
    write_fmap,
    write_pgm,
    write_pgm16,
)
from .pseudolabel import generate
from .rasters import LabelMap, ProbMap, TrustMap
from .superpixels import slic

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_DEGENERATE = 3


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON config file")
    common.add_argument("--verbose", action="store_true",
                        help="echo the effective configuration to stderr")
    common.add_argument("--json", action="store_true",
                        help="machine-readable output on stdout")

    parser = argparse.ArgumentParser(
        prog="fluidlabel",
        description="Point-annotation tooling for OCT fluid segmentation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("superpixels", parents=[common],
                       help="segment an image into superpixel blocks")
    p.add_argument("image", help="input .pgm image")
    p.add_argument("-o", "--output", help="16-bit .pgm of block ids")
    p.add_argument("--overlay", help="optional boundary-overlay .png")
    _add_slic_flags(p)
    p.set_defaults(func=cmd_superpixels)

    p = sub.add_parser("genlabel", parents=[common],
                       help="grow pseudo-labels and a trust map from points")
    p.add_argument("image", help="input .pgm image")
    p.add_argument("points", help="input .points.json annotations")
    p.add_argument("--label", help="output pseudo-label .pgm")
    p.add_argument("--trust", help="output trust .fmap")
    _add_slic_flags(p)
    p.add_argument("--threshold-srf-irf", type=float, dest="threshold_srf_irf")
    p.add_argument("--threshold-ped", type=float, dest="threshold_ped")
    p.add_argument("--trust-init", type=float, dest="trust_init")
    p.add_argument("--trust-seed", type=float, dest="trust_seed")
    p.add_argument("--decay-per-hop", type=float, dest="decay_per_hop")
    p.set_defaults(func=cmd_genlabel)

    p = sub.add_parser("refine", parents=[common],
                       help="detect and repair label noise with model probabilities")
    p.add_argument("label", help="pseudo-label .pgm")
    p.add_argument("trust", help="trust .fmap")
    p.add_argument("probs", help="model probability .fmap")
    p.add_argument("--error-out", help="output estimated error map .pgm")
    p.add_argument("--label-out", help="output refined label .pgm")
    p.add_argument("--trust-out", help="output refined trust .fmap")
    p.add_argument("--keep-fraction", type=float, dest="self_confidence_keep_fraction")
    p.add_argument("--trust-gate", type=float, dest="trust_gate")
    p.add_argument("--delta", help='trust for flagged pixels: a number or "static"')
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("metrics", parents=[common],
                       help="Dice and IoU between a prediction and ground truth")
    p.add_argument("pred", help="predicted label .pgm")
    p.add_argument("gt", help="ground-truth label .pgm")
    p.add_argument("--classes", type=int, default=4, help="number of classes (default 4)")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("serve", parents=[common],
                       help="run the interactive annotation HTTP service")
    p.add_argument("--bind", default="127.0.0.1:8787", help="address:port to listen on")
    p.add_argument("--ui", help="directory with the built web UI to serve at /")
    p.add_argument("--max-dim", type=int, default=4096,
                   help="largest accepted image side (default 4096)")
    p.add_argument("--session-dir",
                   help="mirror live session artifacts into this directory")
    p.add_argument("--gen-timeout", type=float, default=60.0,
                   help="label-generation timeout per request in seconds")
    p.set_defaults(func=cmd_serve)
    return parser


def _add_slic_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--region-size", type=int, dest="region_size")
    p.add_argument("--compactness", type=float, dest="compactness")
    p.add_argument("--iterations", type=int, dest="iterations")


_FLAG_FIELDS = (
    "region_size", "compactness", "iterations",
    "threshold_srf_irf", "threshold_ped", "trust_init", "trust_seed",
    "decay_per_hop", "self_confidence_keep_fraction", "trust_gate", "delta",
)


def effective_config(args: argparse.Namespace) -> PipelineConfig:
    """Config file (if any) overridden by any explicitly set flags."""
    cfg = load_config(args.config) if args.config else PipelineConfig()
    overrides = {}
    for name in _FLAG_FIELDS:
        value = getattr(args, name, None)
        if value is None:
            continue
        if name == "delta" and value != "static":
            try:
                value = float(value)
            except ValueError:
                raise ValidationError(
                    f'--delta must be a number or "static", got {value!r}'
                ) from None
        overrides[name] = value
    cfg = cfg.merged(overrides)
    if args.verbose:
        print(f"config: {json.dumps(cfg.to_dict(), sort_keys=True)}", file=sys.stderr)
    return cfg


def cmd_superpixels(args: argparse.Namespace) -> int:
    cfg = effective_config(args)
    image = read_pgm(Path(args.image).read_bytes())
    spmap = slic(image, cfg.region_size, cfg.compactness, cfg.iterations)
    out_path = Path(args.output) if args.output else Path(args.image).with_suffix(".blocks.pgm")
    out_path.write_bytes(write_pgm16(spmap.assignment))
    if args.overlay:
        from .overlay import render_overlay

        Path(args.overlay).write_bytes(render_overlay(image, spmap, None))
    mean_size = image.width * image.height / spmap.num_blocks
    if args.json:
        print(json.dumps({
            "num_blocks": spmap.num_blocks,
            "mean_block_size": mean_size,
            "output": str(out_path),
        }))
    else:
        print(f"{spmap.num_blocks} blocks (mean {mean_size:.1f} px/block) -> {out_path}")
    return EXIT_OK


def cmd_genlabel(args: argparse.Namespace) -> int:
    cfg = effective_config(args)
    image = read_pgm(Path(args.image).read_bytes())
    points = read_points(Path(args.points).read_text())
    labels, trust, _ = generate(
        image, points, cfg.growth(),
        region_size=cfg.region_size, compactness=cfg.compactness,
        iterations=cfg.iterations,
    )
    label_path = Path(args.label) if args.label else Path(args.image).with_suffix(".label.pgm")
    trust_path = Path(args.trust) if args.trust else Path(args.image).with_suffix(".trust.fmap")
    label_path.write_bytes(write_pgm(labels))
    trust_path.write_bytes(write_fmap(trust))
    counts = labels.class_counts()
    if args.json:
        print(json.dumps({
            "labeled_counts": {str(c): int(counts[c]) for c in range(1, labels.num_classes)},
            "label": str(label_path),
            "trust": str(trust_path),
        }))
    else:
        summary = "  ".join(
            f"class {c}: {int(counts[c])} px" for c in range(1, labels.num_classes)
        )
        print(f"labeled pixels: {summary}")
    return EXIT_OK


def cmd_refine(args: argparse.Namespace) -> int:
    cfg = effective_config(args)
    label_bytes = Path(args.label).read_bytes()
    trust_in = read_fmap(Path(args.trust).read_bytes())
    probs = read_fmap(Path(args.probs).read_bytes())
    if not isinstance(probs, ProbMap):
        raise ValidationError(f"{args.probs} holds a single channel; expected class probabilities")
    if not isinstance(trust_in, TrustMap):
        raise ValidationError(f"{args.trust} holds multiple channels; expected a trust map")
    labels = read_label_pgm(label_bytes, probs.num_classes)

    thresholds = refinement.class_thresholds(probs, labels)
    est = refinement.calibrate_and_joint(
        refinement.confusion(probs, labels, thresholds), labels
    )
    err = refinement.estimate_error_map(probs, labels, trust_in, cfg.refine(), est)
    refined_labels = refinement.refine_labels(labels, probs, err)
    refined_trust = refinement.refine_trust(trust_in, err, cfg.refine())

    stem = Path(args.label)
    err_path = Path(args.error_out) if args.error_out else stem.with_suffix(".err.pgm")
    lab_path = Path(args.label_out) if args.label_out else stem.with_suffix(".refined.pgm")
    tru_path = Path(args.trust_out) if args.trust_out else stem.with_suffix(".refined.fmap")
    err_path.write_bytes(write_pgm(LabelMap(err.bits, 2)))
    lab_path.write_bytes(write_pgm(refined_labels))
    tru_path.write_bytes(write_fmap(refined_trust))

    assert est.joint is not None
    if args.json:
        print(json.dumps({
            "joint": [[float(q) for q in row] for row in est.joint],
            "flagged_pixels": int(err.bits.sum()),
            "error": str(err_path), "label": str(lab_path), "trust": str(tru_path),
        }))
    else:
        print("joint distribution Q:")
        for row in est.joint:
            print("  " + "  ".join(f"{q:.6f}" for q in row))
        print(f"flagged pixels: {int(err.bits.sum())}")
    return EXIT_OK


def cmd_metrics(args: argparse.Namespace) -> int:
    effective_config(args)
    pred = read_label_pgm(Path(args.pred).read_bytes(), args.classes)
    gt = read_label_pgm(Path(args.gt).read_bytes(), args.classes)
    scores = metrics_mod.evaluate(pred, gt)
    if args.json:
        print(json.dumps({
            "dice_per_class": list(scores.dice_per_class),
            "dsc": scores.mean_dice,
            "iou_per_class": list(scores.iou_per_class),
            "miou": scores.mean_iou,
        }))
    else:
        dice_row = "  ".join(
            f"{c}: {100.0 * d:.2f}" for c, d in enumerate(scores.dice_per_class)
        )
        iou_row = "  ".join(
            f"{c}: {i:.4f}" for c, i in enumerate(scores.iou_per_class)
        )
        print(f"dice per class (%): {dice_row}")
        print(f"DSC: {100.0 * scores.mean_dice:.2f}")
        print(f"iou per class: {iou_row}")
        print(f"mIoU: {scores.mean_iou:.4f}")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .server import create_app

    cfg = effective_config(args)
    host, _, port = args.bind.rpartition(":")
    if not host or not port.isdigit():
        raise ValidationError(f"--bind must look like host:port, got {args.bind!r}")
    app = create_app(config=cfg, ui_dir=args.ui, max_dim=args.max_dim,
                     session_dir=args.session_dir, gen_timeout=args.gen_timeout)
    uvicorn.run(app, host=host, port=int(port), log_level="info")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DegenerateJointError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (FluidLabelError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
