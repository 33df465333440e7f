"""End-to-end orchestration over manifests of videos.

extract: tensors -> (standardize -> encode ->) inversion -> difference
sequence -> feature matrix plus sidecar registry. train: staged selection
then the trial loop (weighted boosting, ROC threshold, gated objective,
TPE proposals). eval: per-source accuracy report. Plus the inversion-step
sweep and the pixel-domain robustness grid.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .belm import InversionError, invert_video
from .features import ALL_MODULES, extract_features, module_of
from .features.registry import FeatureVector
from .gbdt import GbdtParams, load_model, predict_proba, save_model, train_gbdt
from .metrics import EvalReport, class_weights, evaluate, objective, roc_curve, select_threshold
from .perturb import TranscoderUnavailable, apply_perturbation
from .predictors import PredictorError, resolve_predictor
from .schedule import make_schedule
from .selection import (
    EmptySelectionError,
    SelectionConfig,
    assemble_combination,
    combined_score,
    cross_enhance,
    forest_importance,
    variance_filter,
)
from .sequence import NoiseSequence, build_inds, sample_frame_indices, standardize_frame
from .tensors import VideoManifestEntry, read_manifest, read_tensor, write_manifest, write_tensor
from .tpe import Dimension, TrialOutcome, default_search_space, tpe_optimize

PREDICTOR_ENV = "DBINDS_PREDICTOR"


class DataError(RuntimeError):
    pass


@dataclass(frozen=True)
class OptimConfig:
    tau: float = 0.80
    m: float = 1.008
    trials: int = 60
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.tau < 1:
            raise ValueError("tau in (0, 1)")
        if self.m <= 0 or self.trials < 1:
            raise ValueError("m > 0 and trials >= 1 required")


@dataclass(frozen=True)
class PipelineConfig:
    frames: int = 8
    stride: int = 2
    target_size: int = 512
    latent_channels: int = 4
    latent_size: int = 64
    inversion_steps: int = 10
    schedule_kind: str = "linear_beta"
    modules: tuple[str, ...] = ALL_MODULES
    strategy: str = "all"
    impute: str = "median"
    predictor: str = "builtin:linear"
    seed: int = 0
    workers: int = 1
    val_fraction: float = 0.2
    optim: OptimConfig = field(default_factory=OptimConfig)
    selection: SelectionConfig = field(default_factory=SelectionConfig)

    def effective_predictor(self) -> str:
        return os.environ.get(PREDICTOR_ENV, "").strip() or self.predictor

    def to_dict(self) -> dict:
        return asdict(self)

    @staticmethod
    def from_dict(doc: dict) -> "PipelineConfig":
        doc = dict(doc)
        if "optim" in doc and isinstance(doc["optim"], dict):
            doc["optim"] = OptimConfig(**doc["optim"])
        if "selection" in doc and isinstance(doc["selection"], dict):
            doc["selection"] = SelectionConfig(**doc["selection"])
        if "modules" in doc:
            doc["modules"] = tuple(doc["modules"])
        return PipelineConfig(**doc)


@dataclass
class ExtractResult:
    matrix: np.ndarray
    names: list[str]
    labels: np.ndarray
    sources: list[str]
    ids: list[str]
    failures: list[tuple[str, str]]
    inversion_seconds: float


def builtin_encode(frame: np.ndarray, config: PipelineConfig) -> np.ndarray:
    """Area-pool a standardized pixel frame into latent geometry.

    A synthetic stand-in for a real encoder so pixel-domain manifests can
    drive the pipeline offline; channels cycle when the latent has more
    than the frame.
    """
    from .perturb import _area_resample_axis

    if frame.ndim == 2:
        frame = frame[:, :, None]
    pooled = _area_resample_axis(frame, config.latent_size, 0)
    pooled = _area_resample_axis(pooled, config.latent_size, 1)
    c_in = pooled.shape[2]
    chans = [pooled[:, :, k % c_in] for k in range(config.latent_channels)]
    return np.stack(chans)


def _video_to_inds(entry: VideoManifestEntry, config: PipelineConfig):
    tensor = read_tensor(entry.tensor_path)
    invert_seconds = 0.0
    if entry.kind == "frames":
        if tensor.ndim == 3:
            tensor = tensor[:, :, :, None]
        if tensor.ndim != 4:
            raise DataError(f"{entry.id}: frames tensor must be (T, H, W, C), got {tensor.shape}")
        idx = sample_frame_indices(tensor.shape[0], config.frames, config.stride)
        frames = [standardize_frame(tensor[i], config.target_size) for i in idx]
        latents = np.stack([builtin_encode(f, config) for f in frames])
        kind = "latents"
    else:
        if tensor.ndim != 4 or tensor.shape[0] != config.frames:
            raise DataError(
                f"{entry.id}: expected ({config.frames}, C, H, W) tensor, got {tensor.shape}"
            )
        latents = tensor.astype(np.float64)
        kind = entry.kind
    if kind == "latents":
        sched = make_schedule(config.inversion_steps, config.schedule_kind)
        pred = resolve_predictor(config.effective_predictor())
        t0 = time.perf_counter()
        seq = invert_video(latents, sched, pred)
        invert_seconds = time.perf_counter() - t0
    else:
        seq = NoiseSequence(latents)
    return build_inds(seq), invert_seconds


def _extract_one(entry: VideoManifestEntry, config: PipelineConfig):
    inds, invert_seconds = _video_to_inds(entry, config)
    fv = extract_features(inds, modules=config.modules, impute=config.impute)
    return fv.names, fv.values, invert_seconds


def cmd_extract(
    manifest_path: str | Path,
    config: PipelineConfig,
    out_dir: str | Path | None = None,
) -> ExtractResult:
    entries = read_manifest(manifest_path)
    if not entries:
        raise DataError(f"{manifest_path}: empty manifest")
    if any(e.kind != "noise" for e in entries):
        resolve_predictor(config.effective_predictor())  # fail fast on a bad spec
    results: list[tuple[int, list[str], np.ndarray, float] | None] = [None] * len(entries)
    failures: list[tuple[str, str]] = []
    predictor_failures = 0
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            futures = {
                pool.submit(_extract_one, e, config): i for i, e in enumerate(entries)
            }
            for fut, i in futures.items():
                try:
                    names, values, inv_s = fut.result()
                    results[i] = (i, names, values, inv_s)
                except (InversionError, PredictorError) as exc:
                    predictor_failures += 1
                    failures.append((entries[i].id, str(exc)))
                except (DataError, OSError, ValueError) as exc:
                    failures.append((entries[i].id, str(exc)))
    else:
        for i, entry in enumerate(entries):
            try:
                names, values, inv_s = _extract_one(entry, config)
                results[i] = (i, names, values, inv_s)
            except (InversionError, PredictorError) as exc:
                predictor_failures += 1
                failures.append((entry.id, str(exc)))
            except (DataError, OSError, ValueError) as exc:
                failures.append((entry.id, str(exc)))
    successes = [r for r in results if r is not None]
    if len(failures) > 0.5 * len(entries):
        summary = "; ".join(f"{vid}: {msg}" for vid, msg in failures[:5])
        message = f"{len(failures)}/{len(entries)} videos failed extraction: {summary}"
        if predictor_failures > len(failures) / 2:
            raise PredictorError(message)
        raise DataError(message)
    if not successes:
        raise DataError("no video survived extraction")
    names = successes[0][1]
    rows, labels, sources, ids = [], [], [], []
    inversion_seconds = 0.0
    for i, row_names, values, inv_s in successes:
        if row_names != names:
            failures.append((entries[i].id, "feature registry mismatch"))
            continue
        rows.append(values)
        labels.append(1 if entries[i].label == "generated" else 0)
        sources.append(entries[i].source)
        ids.append(entries[i].id)
        inversion_seconds += inv_s
    result = ExtractResult(
        matrix=np.asarray(np.stack(rows), dtype=np.float64),
        names=list(names),
        labels=np.array(labels, dtype=np.int64),
        sources=sources,
        ids=ids,
        failures=failures,
        inversion_seconds=inversion_seconds,
    )
    if out_dir is not None:
        save_features(out_dir, result, config)
    return result


def save_features(out_dir: str | Path, result: ExtractResult, config: PipelineConfig) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_tensor(out / "features.ltns", result.matrix.astype(np.float32))
    with open(out / "registry.jsonl", "w") as fh:
        for k, name in enumerate(result.names):
            fh.write(json.dumps({"index": k, "name": name, "module": module_of(name)}) + "\n")
    with open(out / "rows.jsonl", "w") as fh:
        for k in range(len(result.ids)):
            fh.write(
                json.dumps(
                    {
                        "row": k,
                        "id": result.ids[k],
                        "label": "generated" if result.labels[k] else "real",
                        "source": result.sources[k],
                    }
                )
                + "\n"
            )
    (out / "extract_config.json").write_text(json.dumps(config.to_dict(), indent=2))
    if result.failures:
        (out / "failures.json").write_text(json.dumps(result.failures, indent=2))


def load_features(feat_dir: str | Path) -> ExtractResult:
    feat_dir = Path(feat_dir)
    matrix = read_tensor(feat_dir / "features.ltns").astype(np.float64)
    names = []
    with open(feat_dir / "registry.jsonl") as fh:
        for line in fh:
            if line.strip():
                names.append(json.loads(line)["name"])
    labels, sources, ids = [], [], []
    with open(feat_dir / "rows.jsonl") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            labels.append(1 if obj["label"] == "generated" else 0)
            sources.append(obj["source"])
            ids.append(obj["id"])
    return ExtractResult(
        matrix=matrix,
        names=names,
        labels=np.array(labels, dtype=np.int64),
        sources=sources,
        ids=ids,
        failures=[],
        inversion_seconds=0.0,
    )


def stratified_split(labels: np.ndarray, val_fraction: float, seed: int):
    rng = np.random.default_rng([seed, 2**17])
    train_idx, val_idx = [], []
    for cls in (0, 1):
        members = np.flatnonzero(labels == cls)
        rng.shuffle(members)
        n_val = max(1, int(round(val_fraction * len(members))))
        if n_val >= len(members):
            raise DataError(f"class {cls} too small to split")
        val_idx.extend(members[:n_val].tolist())
        train_idx.extend(members[n_val:].tolist())
    return np.sort(np.array(train_idx)), np.sort(np.array(val_idx))


def _params_from_trial(trial_params: dict) -> GbdtParams:
    return GbdtParams(
        learning_rate=float(trial_params["learning_rate"]),
        num_trees=int(trial_params["num_trees"]),
        max_leaves=int(trial_params["max_leaves"]),
        min_samples_leaf=int(trial_params["min_samples_leaf"]),
        feature_fraction=float(trial_params["feature_fraction"]),
        bagging_fraction=float(trial_params["bagging_fraction"]),
        l2_reg=float(trial_params["l2_reg"]),
    )


def build_columns(
    matrix: np.ndarray,
    names: list[str],
    wanted: list[str],
    sel_cfg: SelectionConfig,
) -> np.ndarray:
    """Materialize selected columns, rebuilding cross features from their
    encoded operand names."""
    index = {n: k for k, n in enumerate(names)}
    cols = []
    missing = []
    for name in wanted:
        if name in index:
            cols.append(matrix[:, index[name]])
            continue
        if name.startswith("cross."):
            _, op, rest = name.split(".", 2)
            a_name, sep, b_name = rest.partition("__")
            if sep and a_name in index and b_name in index:
                fa, fb = matrix[:, index[a_name]], matrix[:, index[b_name]]
                if op == "prod":
                    cols.append(fa * fb)
                    continue
                if op == "ratio":
                    cols.append(fa / (fb + sel_cfg.epsilon))
                    continue
                if op == "affine":
                    cols.append(sel_cfg.alpha * fa + sel_cfg.beta * fb)
                    continue
        missing.append(name)
    if missing:
        raise DataError(f"missing features: {missing[:10]}{'...' if len(missing) > 10 else ''}")
    return np.column_stack(cols)


@dataclass
class TrainResult:
    bundle: dict
    val_report: EvalReport
    trials: list


def cmd_train(
    features: ExtractResult | str | Path,
    config: PipelineConfig,
    out_dir: str | Path | None = None,
    space: list[Dimension] | None = None,
) -> TrainResult:
    data = features if isinstance(features, ExtractResult) else load_features(features)
    y = data.labels
    if len(np.unique(y)) < 2:
        raise DataError("training needs both classes")
    train_idx, val_idx = stratified_split(y, config.val_fraction, config.seed)
    x_train, x_val = data.matrix[train_idx], data.matrix[val_idx]
    y_train, y_val = y[train_idx], y[val_idx]

    keep = variance_filter(x_train, config.selection)
    if len(keep) == 0:
        raise EmptySelectionError("variance filter removed every feature")
    base_names = [data.names[k] for k in keep]
    base_full = data.matrix[:, keep]

    imp_base = forest_importance(base_full[train_idx], y_train, seed=config.seed)
    cross_cfg = config.selection
    if cross_cfg.cross_top_n > len(base_names):
        cross_cfg = replace(cross_cfg, cross_top_n=len(base_names))
    aug_full, aug_names = cross_enhance(base_full, base_names, imp_base, cross_cfg)

    importances = forest_importance(aug_full[train_idx], y_train, seed=config.seed + 1)
    scores = combined_score(aug_full[train_idx], y_train, aug_full[val_idx], y_val)
    selected = assemble_combination(config.strategy, aug_names, scores, importances)

    name_to_col = {n: k for k, n in enumerate(aug_names)}
    sel_idx = np.array([name_to_col[n] for n in selected])
    xtr = aug_full[np.ix_(train_idx, sel_idx)]
    xva = aug_full[np.ix_(val_idx, sel_idx)]
    weights = class_weights(y_train, config.optim.m)

    def eval_fn(trial_params: dict) -> TrialOutcome:
        params = _params_from_trial(trial_params)
        model = train_gbdt(xtr, y_train, weights, params, seed=config.seed)
        probs = predict_proba(model, xva)
        roc = roc_curve(probs, y_val)
        theta = select_threshold(roc, config.optim.tau)
        rep = evaluate(probs, theta, y_val)
        j = objective(rep.accuracy, rep.gdr, config.optim.tau)
        return TrialOutcome(
            objective=j,
            threshold=theta,
            metrics={"accuracy": rep.accuracy, "gdr": rep.gdr, "real_rate": rep.real_rate},
        )

    best, trials = tpe_optimize(
        space or default_search_space(), config.optim.trials, eval_fn, seed=config.optim.seed
    )
    best_params = _params_from_trial(best.params)
    model = train_gbdt(
        xtr, y_train, weights, best_params, seed=config.seed, feature_names=selected
    )
    probs = predict_proba(model, xva)
    val_report = evaluate(probs, float(best.threshold), y_val,
                          [data.sources[i] for i in val_idx])

    bundle = {
        "format": "inds-bundle",
        "version": 1,
        "strategy": config.strategy,
        "selected": selected,
        "theta": float(best.threshold),
        "objective": float(best.objective),
        "params": asdict(best_params),
        "metrics": best.metrics,
        "selection_config": asdict(config.selection),
        "config": config.to_dict(),
    }
    result = TrainResult(bundle=bundle, val_report=val_report, trials=trials)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        save_model(model, out / "model.json")
        (out / "bundle.json").write_text(json.dumps(bundle, indent=2))
        with open(out / "trials.jsonl", "w") as fh:
            for t in trials:
                fh.write(json.dumps(t.as_dict()) + "\n")
    result.model = model  # type: ignore[attr-defined]
    return result


def cmd_eval(
    bundle_dir: str | Path,
    features: ExtractResult | str | Path,
    out_path: str | Path | None = None,
) -> EvalReport:
    bundle_dir = Path(bundle_dir)
    bundle = json.loads((bundle_dir / "bundle.json").read_text())
    model = load_model(bundle_dir / "model.json")
    data = features if isinstance(features, ExtractResult) else load_features(features)
    sel_cfg = SelectionConfig(**bundle["selection_config"])
    x = build_columns(data.matrix, data.names, bundle["selected"], sel_cfg)
    probs = predict_proba(model, x)
    report = evaluate(probs, bundle["theta"], data.labels, data.sources)
    if out_path is not None:
        Path(out_path).write_text(json.dumps(report.as_dict(), indent=2))
    return report


def render_report(report: EvalReport) -> str:
    lines = [
        f"{'source':<24} {'n':>6} {'accuracy':>9}",
        "-" * 41,
    ]
    for src in sorted(report.per_source):
        lines.append(f"{src:<24} {report.counts[src]:>6} {report.per_source[src]:>9.4f}")
    lines.append("-" * 41)
    lines.append(f"{'overall':<24} {sum(report.counts.values()):>6} {report.accuracy:>9.4f}")
    lines.append(f"gdr={report.gdr:.4f} real_rate={report.real_rate:.4f}")
    return "\n".join(lines)


def cmd_sweep_steps(
    manifest_path: str | Path,
    config: PipelineConfig,
    out_dir: str | Path,
    steps_list: tuple[int, ...] = (1, 5, 10, 15, 20),
    space: list[Dimension] | None = None,
) -> list[dict]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for steps in steps_list:
        cfg = replace(config, inversion_steps=steps)
        t0 = time.perf_counter()
        try:
            extracted = cmd_extract(manifest_path, cfg, out / f"features_step{steps}")
            train_res = cmd_train(extracted, cfg, out / f"bundle_step{steps}", space=space)
            wall = time.perf_counter() - t0
            rows.append(
                {
                    "steps": steps,
                    "wall_seconds": wall,
                    "inversion_seconds": extracted.inversion_seconds,
                    "accuracy": train_res.val_report.accuracy,
                    "gdr": train_res.val_report.gdr,
                    "real_rate": train_res.val_report.real_rate,
                    "objective": train_res.bundle["objective"],
                }
            )
        except (DataError, EmptySelectionError) as exc:
            rows.append({"steps": steps, "error": str(exc)})
    (out / "sweep.json").write_text(json.dumps(rows, indent=2))
    return rows


ROBUSTNESS_GRID = ("none", "jpeg:95", "jpeg:90", "blur:1.0", "blur:2.0")


def perturb_manifest(
    manifest_path: str | Path,
    op: str,
    out_dir: str | Path,
    transcoder_cmd: str | None = None,
    seed: int = 0,
) -> Path:
    """Apply one pixel-domain perturbation to every video of a frames
    manifest, writing a derived manifest."""
    entries = read_manifest(manifest_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    new_entries = []
    for entry in entries:
        if entry.kind != "frames":
            raise DataError(f"{entry.id}: perturbations require pixel-domain inputs")
        tensor = read_tensor(entry.tensor_path)
        frames = [
            apply_perturbation(tensor[t], op, transcoder_cmd=transcoder_cmd, seed=seed + t)
            for t in range(tensor.shape[0])
        ]
        path = out / f"{entry.id}.ltns"
        write_tensor(path, np.stack(frames).astype(np.float32))
        new_entries.append(replace(entry, tensor_path=str(path)))
    manifest = out / "manifest.jsonl"
    write_manifest(manifest, new_entries)
    return manifest


def robustness_grid(
    manifest_path: str | Path,
    config: PipelineConfig,
    out_dir: str | Path,
    perturbations: tuple[str, ...] = ROBUSTNESS_GRID,
    transcoder_cmd: str | None = None,
    space: list[Dimension] | None = None,
) -> dict:
    """Train on unperturbed pixel inputs, then evaluate every grid cell;
    cells whose tooling is absent are marked skipped, never dropped."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    baseline = cmd_extract(manifest_path, config, out / "features_none")
    train_res = cmd_train(baseline, config, out / "bundle", space=space)
    grid: dict[str, dict] = {}
    for op in perturbations:
        if op == "none":
            rep = cmd_eval(out / "bundle", baseline)
            grid[op] = {"status": "ok", **rep.as_dict()}
            continue
        try:
            pert_manifest = perturb_manifest(
                manifest_path, op, out / f"perturbed_{op.replace(':', '_')}",
                transcoder_cmd=transcoder_cmd, seed=config.seed,
            )
        except TranscoderUnavailable as exc:
            grid[op] = {"status": "skipped", "reason": str(exc)}
            continue
        extracted = cmd_extract(pert_manifest, config, out / f"features_{op.replace(':', '_')}")
        rep = cmd_eval(out / "bundle", extracted)
        grid[op] = {"status": "ok", **rep.as_dict()}
    report = {"grid": grid, "config": config.to_dict()}
    (out / "robustness.json").write_text(json.dumps(report, indent=2))
    return report
