# ---------------------------------------------------------------------
# ohcsvm/pipeline.py
# ---------------------------------------------------------------------
# Config-driven stages: label -> train-kernel -> grid-search -> fit
# -> curve -> metrics.
#
# Each stage reads the files the previous stage wrote in the output
# directory, so stages can be rerun one at a time.
#
#   label         labeled.csv, scalers.json
#   train-kernel  kernels/<name>.json, kta/<name>_history.csv,
#                 kta/<name>_summary.json, kta/embedding_sweep.csv
#   grid-search   cv/<name>.csv, cv/<name>.json
#   fit           models/<name>.json, predictions/<name>.csv
#   curve         curves/<name>.csv, curves/<name>.json, curves/comparison.csv
#   metrics       metrics/<name>.json
# ---------------------------------------------------------------------

import logging
import platform
from dataclasses import dataclass, field
from importlib import metadata
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import psutil

from ohcsvm import __version__
from ohcsvm.config import KernelEntry, RunConfig
from ohcsvm.data_pipeline import (
    Dataset,
    FeatureScaler,
    PlateGeometry,
    export_dataset,
    ingest_paths,
    label_samples,
    read_dataset,
    stratified_split_indices,
)
from ohcsvm.errors import (
    ConfigValidationError,
    DependencyError,
    EmptyDatasetError,
    ParseError,
    StageError,
)
from ohcsvm.kernel_alignment import KtaConfig, embedding_sweep, train_kta
from ohcsvm.kernels import KernelSpec, build_kernel, kernel_from_dict, kernel_to_dict
from ohcsvm.model_eval import (
    LearningCurve,
    comparison_frame,
    confusion_counts,
    classification_metrics,
    grid_search_cv,
    learning_curve,
)
from ohcsvm.quantum_kernels import QuantumKernelSpec, default_embedding_grid, init_theta
from ohcsvm.reports import read_json, write_frame, write_json
from ohcsvm.svm_solver import decision_values, fit_svm, labels_from_decision
from ohcsvm.synthetic import synth_oracle_dataset

logger = logging.getLogger(__name__)

STAGES = ("label", "train-kernel", "grid-search", "fit", "curve", "metrics")

PREDICTION_COLUMNS = ["path_id", "increment", "y_true", "decision", "y_pred"]


@dataclass
class RunContext:
    config: RunConfig
    out_dir: Path
    workers: int = 1

    def path(self, *parts: str) -> Path:
        return self.out_dir.joinpath(*parts)

    def require(self, relative: str, stage: str, producer: str) -> Path:
        path = self.path(relative)
        if not path.is_file():
            raise DependencyError(str(path), stage, producer)
        return path


@dataclass
class RunReport:
    out_dir: Path
    stages: List[str] = field(default_factory=list)
    manifest: Optional[Path] = None


# =====================================================================
# Shared loaders
# =====================================================================

def _load_split(ctx: RunContext, stage: str) -> Tuple[Dataset, Dataset]:
    samples, split = read_dataset(ctx.require("labeled.csv", stage, "label"))
    seed = ctx.config.seeds.split_seed
    train = [s for s, tag in zip(samples, split) if tag == "train"]
    test = [s for s, tag in zip(samples, split) if tag == "test"]
    if not train:
        raise EmptyDatasetError("labeled.csv holds no training samples")
    return Dataset(train, split_seed=seed), Dataset(test, split_seed=seed)


def _load_scalers(ctx: RunContext, stage: str) -> Dict[str, FeatureScaler]:
    data = read_json(ctx.require("scalers.json", stage, "label"))
    return {name: FeatureScaler.from_dict(body) for name, body in data.items()}


def _load_kernel(ctx: RunContext, entry: KernelEntry, stage: str) -> Tuple[KernelSpec, FeatureScaler]:
    data = read_json(ctx.require(f"kernels/{entry.name}.json", stage, "train-kernel"))
    return kernel_from_dict(data["kernel"]), FeatureScaler.from_dict(data["scaler"])


def _chosen_C(ctx: RunContext, entry: KernelEntry, stage: str) -> float:
    if entry.C is not None:
        return float(entry.C)
    return float(read_json(ctx.require(f"cv/{entry.name}.json", stage, "grid-search"))["best_C"])


def _initial_kernel(entry: KernelEntry, scaler: FeatureScaler, theta_seed: int) -> KernelSpec:
    theta: Sequence[float] = ()
    if entry.kind == "he2":
        theta = entry.theta if entry.theta is not None else init_theta(entry.width, entry.depth, theta_seed)
    return build_kernel(
        entry.kind,
        gamma=entry.gamma,
        c0=entry.c0,
        degree=entry.degree,
        width=entry.width,
        depth=entry.depth,
        theta=tuple(theta),
        scaler_fingerprint=scaler.fingerprint if entry.quantum else None,
    )


def _kta_config(config: RunConfig) -> KtaConfig:
    block = config.kta
    return KtaConfig(
        iterations=block.iterations,
        learning_rate=block.learning_rate,
        batch_size=block.batch_size,
        seed=config.seeds.adam_seed,
        log_every=block.log_every,
        fd_step=block.fd_step,
        beta1=block.beta1,
        beta2=block.beta2,
        eps=block.eps,
    )


# =====================================================================
# Stages
# =====================================================================

def stage_label(ctx: RunContext) -> None:
    config = ctx.config
    geom = PlateGeometry(**config.geometry.model_dump())
    threshold, eps_div = config.labeling.threshold, config.labeling.eps_div

    samples = []
    for file in config.input.files:
        paths = ingest_paths(file, geom, eps_div, schema=config.input.format)
        samples += label_samples(paths, threshold, eps_div)
    if config.input.synthetic is not None:
        synth = synth_oracle_dataset(config.input.synthetic.n, seed=config.seeds.synth_seed)
        samples += label_samples(synth.paths, threshold, eps_div, terminal_only=True)
    if not samples:
        raise EmptyDatasetError("no labeled samples")

    classical = FeatureScaler(target=config.scaling.classical)
    quantum = FeatureScaler(target=config.scaling.quantum)
    ds = Dataset(samples, scaler=classical, split_seed=config.seeds.split_seed)

    _, test_idx = stratified_split_indices(ds.y, config.split.test_fraction, config.seeds.split_seed)
    split = np.full(len(ds), "train", dtype=object)
    split[test_idx] = "test"

    export_dataset(ds, ctx.path("labeled.csv"), split.tolist())
    write_json({"classical": classical.to_dict(), "quantum": quantum.to_dict()}, ctx.path("scalers.json"))
    n_failed, n_safe = ds.class_counts
    logger.info(
        "labeled %d sample(s): %d failed, %d non-failed; %d test", len(ds), n_failed, n_safe, test_idx.size
    )


def stage_train_kernel(ctx: RunContext) -> None:
    config = ctx.config
    train, _ = _load_split(ctx, "train-kernel")
    scalers = _load_scalers(ctx, "train-kernel")
    kta_config = _kta_config(config)

    for entry in config.kernels:
        scaler = scalers["quantum" if entry.quantum else "classical"]
        spec = _initial_kernel(entry, scaler, config.seeds.theta_seed)
        if entry.train:
            X = scaler.transform(train.X)
            spec, report = train_kta(spec, X, train.y, kta_config, ctx.workers)
            write_frame(report.to_frame(), ctx.path("kta", f"{entry.name}_history.csv"))
            write_json(report.to_dict(), ctx.path("kta", f"{entry.name}_summary.json"))
        write_json(
            {
                "name": entry.name,
                "kernel": kernel_to_dict(spec),
                "scaler": scaler.to_dict(),
                "trained": entry.train,
            },
            ctx.path("kernels", f"{entry.name}.json"),
        )

    if config.kta.sweep:
        X = scalers["quantum"].transform(train.X)
        grid = [QuantumKernelSpec(e) for e in default_embedding_grid(config.seeds.theta_seed)]
        frame = embedding_sweep(grid, X, train.y, kta_config, ctx.workers)
        write_frame(frame, ctx.path("kta", "embedding_sweep.csv"))


def stage_grid_search(ctx: RunContext) -> None:
    config = ctx.config
    train, _ = _load_split(ctx, "grid-search")
    for entry in config.kernels:
        spec, scaler = _load_kernel(ctx, entry, "grid-search")
        cv = grid_search_cv(
            train.with_scaler(scaler),
            spec,
            config.svm.c_grid,
            folds=config.svm.folds,
            seed=config.seeds.cv_seed,
            tol=config.svm.tol,
            max_iter=config.svm.max_iter,
            workers=ctx.workers,
        )
        write_frame(cv.to_frame(), ctx.path("cv", f"{entry.name}.csv"))
        write_json(cv.to_dict(), ctx.path("cv", f"{entry.name}.json"))


def stage_fit(ctx: RunContext) -> None:
    config = ctx.config
    train, test = _load_split(ctx, "fit")
    for entry in config.kernels:
        spec, scaler = _load_kernel(ctx, entry, "fit")
        C = _chosen_C(ctx, entry, "fit")
        model, diagnostics = fit_svm(
            spec,
            scaler.transform(train.X),
            train.y,
            C,
            tol=config.svm.tol,
            max_iter=config.svm.max_iter,
            scaler=scaler,
            workers=ctx.workers,
        )
        write_json(
            {**model.to_dict(), "diagnostics": diagnostics.to_dict()},
            ctx.path("models", f"{entry.name}.json"),
        )

        f = decision_values(model, scaler.transform(test.X), ctx.workers) if len(test) else np.empty(0)
        predictions = pd.DataFrame(
            {
                "path_id": [s.path_id for s in test.samples],
                "increment": [s.increment for s in test.samples],
                "y_true": test.y,
                "decision": f,
                "y_pred": labels_from_decision(f),
            },
            columns=PREDICTION_COLUMNS,
        )
        write_frame(predictions, ctx.path("predictions", f"{entry.name}.csv"))
        logger.info(
            "fit %s: C=%g, %d support vector(s), converged=%s",
            entry.name, C, model.support_indices.size, diagnostics.converged,
        )


def stage_curve(ctx: RunContext) -> None:
    config = ctx.config
    train, test = _load_split(ctx, "curve")
    curves: Dict[str, LearningCurve] = {}
    for entry in config.kernels:
        spec, scaler = _load_kernel(ctx, entry, "curve")
        curve = learning_curve(
            train.with_scaler(scaler),
            test.with_scaler(scaler),
            spec,
            _chosen_C(ctx, entry, "curve"),
            fractions=config.curve.fractions,
            seed=config.seeds.split_seed,
            tol=config.svm.tol,
            max_iter=config.svm.max_iter,
            workers=ctx.workers,
            kernel_name=entry.name,
        )
        curves[entry.name] = curve
        write_frame(curve.to_frame(), ctx.path("curves", f"{entry.name}.csv"))
        write_json(curve.to_dict(), ctx.path("curves", f"{entry.name}.json"))
    write_frame(comparison_frame(curves), ctx.path("curves", "comparison.csv"))


def metrics_from_predictions(file: Path) -> Dict[str, Any]:
    """Confusion counts and the five metrics of a predictions CSV."""
    frame = pd.read_csv(file)
    missing = [c for c in ("y_true", "y_pred") if c not in frame.columns]
    if missing:
        raise ParseError(f"{file}: missing column(s) {missing}")
    counts = confusion_counts(frame["y_true"].to_numpy(), frame["y_pred"].to_numpy())
    return {
        "counts": {"tp": counts.tp, "fp": counts.fp, "fn": counts.fn, "tn": counts.tn},
        "metrics": classification_metrics(counts).to_dict(),
        "n": counts.total,
    }


def stage_metrics(ctx: RunContext) -> None:
    for entry in ctx.config.kernels:
        file = ctx.require(f"predictions/{entry.name}.csv", "metrics", "fit")
        summary = metrics_from_predictions(file)
        write_json({"kernel": entry.name, **summary}, ctx.path("metrics", f"{entry.name}.json"))
        logger.info("metrics %s: accuracy %.4f", entry.name, summary["metrics"]["accuracy"])


STAGE_FUNCTIONS: Dict[str, Callable[[RunContext], None]] = {
    "label": stage_label,
    "train-kernel": stage_train_kernel,
    "grid-search": stage_grid_search,
    "fit": stage_fit,
    "curve": stage_curve,
    "metrics": stage_metrics,
}


# =====================================================================
# Run
# =====================================================================

def _package_version(name: str) -> str:
    try:
        return metadata.version(name)
    except metadata.PackageNotFoundError:
        return "not installed"


def write_manifest(ctx: RunContext, stages: Sequence[str]) -> Path:
    """
    Materialised config, seeds, versions and the artifacts present. Nothing
    that varies with the host or the thread count (those go to run.log).
    """
    artifacts = sorted(
        p.relative_to(ctx.out_dir).as_posix()
        for p in ctx.out_dir.rglob("*")
        if p.is_file() and p.name not in ("manifest.json", "run.log")
    )
    manifest = {
        "ohcsvm": __version__,
        "config": ctx.config.materialized(),
        "seeds": ctx.config.seeds.model_dump(),
        "stages": list(stages),
        "versions": {
            "python": platform.python_version(),
            **{name: _package_version(name) for name in ("numpy", "pandas", "pydantic", "psutil")},
        },
        "artifacts": artifacts,
    }
    return write_json(manifest, ctx.path("manifest.json"))


def run(
    config: RunConfig,
    out_dir: Optional[Path] = None,
    workers: int = 1,
    stages: Optional[Sequence[str]] = None,
) -> RunReport:
    """
    Run the selected stages in pipeline order. Failures inside a stage are
    raised as StageError; a missing upstream artifact as DependencyError.
    """
    selected = list(stages) if stages else list(STAGES)
    unknown = [s for s in selected if s not in STAGE_FUNCTIONS]
    if unknown:
        raise ConfigValidationError([f"unknown stage(s) {unknown}; choose from {list(STAGES)}"])
    selected = [s for s in STAGES if s in selected]

    ctx = RunContext(config=config, out_dir=Path(out_dir or config.output_dir), workers=max(1, workers))
    ctx.out_dir.mkdir(parents=True, exist_ok=True)
    report = RunReport(out_dir=ctx.out_dir)
    logger.info(
        "run: %d worker(s), %s logical cpu(s), stages %s",
        ctx.workers, psutil.cpu_count(logical=True), selected,
    )

    for stage in selected:
        logger.info("stage %s: start", stage)
        try:
            STAGE_FUNCTIONS[stage](ctx)
        except (DependencyError, ConfigValidationError):
            raise
        except Exception as exc:
            logger.error("stage %s failed: %s", stage, exc)
            raise StageError(stage, exc) from exc
        report.stages.append(stage)
        logger.info("stage %s: done", stage)

    report.manifest = write_manifest(ctx, report.stages)
    return report
