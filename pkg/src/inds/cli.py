"""Command-line entry points.

Verbs: extract, train, eval, sweep-steps, perturb, synth. Flags mirror the
pipeline config in kebab-case; --config merges a JSON document first. The
DBINDS_PREDICTOR environment variable overrides the predictor endpoint.
Exit codes: 0 ok, 2 usage, 3 data error, 4 predictor error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .belm import InversionError
from .pipeline import (
    ROBUSTNESS_GRID,
    DataError,
    OptimConfig,
    PipelineConfig,
    cmd_eval,
    cmd_extract,
    cmd_sweep_steps,
    cmd_train,
    perturb_manifest,
    render_report,
    robustness_grid,
)
from .predictors import PredictorError
from .selection import EmptySelectionError
from .synth import SyntheticSpec, synth_dataset

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_PREDICTOR = 4


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON pipeline config to start from")
    p.add_argument("--frames", type=int)
    p.add_argument("--stride", type=int)
    p.add_argument("--target-size", type=int)
    p.add_argument("--latent-channels", type=int)
    p.add_argument("--latent-size", type=int)
    p.add_argument("--inversion-steps", type=int)
    p.add_argument("--schedule-kind", choices=["linear_beta", "custom"])
    p.add_argument("--modules", help="comma-separated feature families")
    p.add_argument("--strategy", help="selection strategy, e.g. modules:correlation.,texture.")
    p.add_argument("--impute", choices=["median", "zero"])
    p.add_argument("--predictor", help="builtin:zero|linear|frozen or host:port")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--val-fraction", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--class-multiplier", type=float)
    p.add_argument("--trials", type=int)


def _build_config(args: argparse.Namespace) -> PipelineConfig:
    doc = {}
    if getattr(args, "config", None):
        doc = json.loads(Path(args.config).read_text())
    config = PipelineConfig.from_dict(doc) if doc else PipelineConfig()
    updates = {}
    for flag, attr in [
        ("frames", "frames"),
        ("stride", "stride"),
        ("target_size", "target_size"),
        ("latent_channels", "latent_channels"),
        ("latent_size", "latent_size"),
        ("inversion_steps", "inversion_steps"),
        ("schedule_kind", "schedule_kind"),
        ("strategy", "strategy"),
        ("impute", "impute"),
        ("predictor", "predictor"),
        ("seed", "seed"),
        ("workers", "workers"),
        ("val_fraction", "val_fraction"),
    ]:
        value = getattr(args, flag, None)
        if value is not None:
            updates[attr] = value
    if getattr(args, "modules", None):
        updates["modules"] = tuple(m.strip() for m in args.modules.split(",") if m.strip())
    optim = config.optim
    optim_updates = {}
    if getattr(args, "tau", None) is not None:
        optim_updates["tau"] = args.tau
    if getattr(args, "class_multiplier", None) is not None:
        optim_updates["m"] = args.class_multiplier
    if getattr(args, "trials", None) is not None:
        optim_updates["trials"] = args.trials
    if optim_updates:
        optim = OptimConfig(**{**optim.__dict__, **optim_updates})
        updates["optim"] = optim
    from dataclasses import replace

    return replace(config, **updates) if updates else config


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="inds", description=__doc__)
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("extract", help="feature matrix from a manifest")
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    _add_config_flags(p)

    p = sub.add_parser("train", help="selection + classifier optimization")
    p.add_argument("--features", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    _add_config_flags(p)

    p = sub.add_parser("eval", help="evaluate a bundle over a feature matrix")
    p.add_argument("--bundle", type=Path, required=True)
    p.add_argument("--features", type=Path, required=True)
    p.add_argument("--out", type=Path, help="write the JSON report here")

    p = sub.add_parser("sweep-steps", help="extract/train/eval per inversion-step count")
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--steps", default="1,5,10,15,20")
    _add_config_flags(p)

    p = sub.add_parser("perturb", help="pixel-domain perturbations / robustness grid")
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--op", help="none|blur:S|jpeg:Q|resize:F|noise:S (single op mode)")
    p.add_argument("--grid", action="store_true", help="run the full robustness grid")
    p.add_argument("--transcoder", help="JPEG hook command with {input} {output} {quality}")
    _add_config_flags(p)

    p = sub.add_parser("synth", help="synthetic dataset generation")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--n-real", type=int, default=100)
    p.add_argument("--n-generated", type=int, default=100)
    p.add_argument("--rank", type=int, default=2)
    p.add_argument("--domain", choices=["noise", "frames"], default="noise")
    p.add_argument("--channels", type=int, default=4)
    p.add_argument("--size", type=int, default=8)
    p.add_argument("--pixel-size", type=int, default=32)
    p.add_argument("--noise-scale-real", type=float, default=1.0)
    p.add_argument("--noise-scale-generated", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.verb == "extract":
            config = _build_config(args)
            result = cmd_extract(args.manifest, config, args.out)
            print(f"extracted {len(result.ids)} videos x {len(result.names)} features -> {args.out}")
            if result.failures:
                print(f"{len(result.failures)} failures recorded", file=sys.stderr)
        elif args.verb == "train":
            config = _build_config(args)
            result = cmd_train(args.features, config, args.out)
            print(json.dumps({"objective": result.bundle["objective"],
                              "theta": result.bundle["theta"],
                              "metrics": result.bundle["metrics"]}, indent=2))
        elif args.verb == "eval":
            report = cmd_eval(args.bundle, args.features, args.out)
            print(render_report(report))
        elif args.verb == "sweep-steps":
            config = _build_config(args)
            steps = tuple(int(s) for s in args.steps.split(","))
            rows = cmd_sweep_steps(args.manifest, config, args.out, steps_list=steps)
            print(json.dumps(rows, indent=2))
        elif args.verb == "perturb":
            config = _build_config(args)
            if args.grid:
                report = robustness_grid(
                    args.manifest, config, args.out, transcoder_cmd=args.transcoder
                )
                print(json.dumps(report["grid"], indent=2))
            else:
                if not args.op:
                    parser.error("--op is required without --grid")
                manifest = perturb_manifest(
                    args.manifest, args.op, args.out,
                    transcoder_cmd=args.transcoder, seed=config.seed,
                )
                print(f"wrote {manifest}")
        elif args.verb == "synth":
            spec = SyntheticSpec(
                n_real=args.n_real,
                n_generated=args.n_generated,
                rank_generated=args.rank,
                noise_scale_real=args.noise_scale_real,
                noise_scale_generated=args.noise_scale_generated,
                channels=args.channels,
                size=args.size,
                domain=args.domain,
                pixel_size=args.pixel_size,
            )
            manifest = synth_dataset(spec, args.seed, args.out)
            print(f"wrote {manifest}")
    except (PredictorError, InversionError) as exc:
        print(f"predictor error: {exc}", file=sys.stderr)
        return EXIT_PREDICTOR
    except (DataError, EmptySelectionError, FileNotFoundError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
