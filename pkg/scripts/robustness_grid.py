#!/usr/bin/env python3
"""Robustness grid over pixel-domain perturbations.

Trains on unperturbed synthetic pixel videos, then evaluates under JPEG
(via an external transcoder hook, skipped when absent), Gaussian blur, and
optionally resize/noise cells.
"""

import argparse
import json
from pathlib import Path

from inds.pipeline import OptimConfig, PipelineConfig, robustness_grid
from inds.synth import SyntheticSpec, synth_dataset


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, required=True)
    ap.add_argument("--videos", type=int, default=32, help="per class")
    ap.add_argument("--pixel-size", type=int, default=32)
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument(
        "--perturbations", default="none,jpeg:95,jpeg:90,blur:1.0,blur:2.0",
        help="comma-separated op specs; resize:<f> and noise:<s> also work",
    )
    ap.add_argument("--transcoder",
                    help="JPEG hook command with {input} {output} {quality} placeholders")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    manifest = synth_dataset(
        SyntheticSpec(n_real=args.videos, n_generated=args.videos,
                      domain="frames", pixel_size=args.pixel_size),
        seed=args.seed, out_dir=args.out / "data",
    )
    config = PipelineConfig(
        latent_size=8, target_size=args.pixel_size,
        strategy="topk:60", modules=("spacetime", "texture"),
        optim=OptimConfig(trials=args.trials, seed=args.seed), seed=args.seed,
    )
    report = robustness_grid(
        manifest, config, args.out / "grid",
        perturbations=tuple(args.perturbations.split(",")),
        transcoder_cmd=args.transcoder,
    )
    print(json.dumps(report["grid"], indent=2))


if __name__ == "__main__":
    main()
