"""End-to-end workflows (fs, rrw, ae, evaluate), report emission and the
shared configuration object backing the CLI.

All reports are plain JSON with the full effective configuration embedded,
no timestamps, so identical configs produce byte-identical reports.
"""

from __future__ import annotations

import json
import os
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field

import numpy as np

from . import dataset as ds
from .errors import ConfigError, MidistillError
from .infotheory import BinningConfig
from .metrics import compute_metrics
from .neural import (
    ae_encode,
    ae_new,
    ae_train,
    gate_predict,
    gate_train,
    mlp_new,
    mlp_predict,
    mlp_train,
    model_to_json,
)
from .ranking import ALGORITHMS, FeatureRanking, rank
from .rrw import apply_weights, avg_f1_cv, rrw_scores
from .selection import backward_eliminate, extract_optimized, tampering_audit

MODES = ("fs", "rrw", "ae", "evaluate")


@dataclass
class PipelineConfig:
    mode: str
    input_path: str
    label_column: str = "label"
    seed: int = 0
    n_bins: int = 10
    binning_strategy: str = "equal_frequency"
    folds: int = 5
    gamma: float = 0.97
    tamper_threshold: float = 0.30
    beta: float = 1.0
    epochs: int = 10
    batch: int = 10
    bottleneck: int | None = None
    out_dir: str = "out"
    fs_report: str | None = None
    normalize: bool = False
    algorithms: tuple[str, ...] = ALGORITHMS

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}")
        for name in ("gamma", "tamper_threshold"):
            v = getattr(self, name)
            if not 0.0 <= v < 1.0:
                raise ConfigError(f"{name} must be in [0, 1), got {v}")
        for name in ("n_bins", "folds", "epochs", "batch"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < (2 if name in ("n_bins", "folds") else 0):
                raise ConfigError(f"invalid {name}: {v}")
        if self.binning_strategy not in ("equal_width", "equal_frequency"):
            raise ConfigError(f"unknown binning strategy {self.binning_strategy!r}")
        unknown = [a for a in self.algorithms if a not in ALGORITHMS]
        if unknown:
            raise ConfigError(f"unknown ranking algorithm(s): {', '.join(unknown)}")
        if self.bottleneck is not None and self.bottleneck < 1:
            raise ConfigError(f"invalid bottleneck: {self.bottleneck}")

    def binning(self) -> BinningConfig:
        return BinningConfig(self.n_bins, self.binning_strategy)

    def to_json(self) -> dict:
        doc = asdict(self)
        doc["algorithms"] = list(self.algorithms)
        return doc


@contextmanager
def _stage(name: str):
    """Tag any escaping package error with the pipeline stage it came from."""
    try:
        yield
    except MidistillError as exc:
        exc.stage = name
        if not getattr(exc, "_stage_noted", False):
            exc.args = (f"[stage {name}] {exc}",) + exc.args[1:]
            exc._stage_noted = True
        raise


def _write_report(report: dict, out_dir: str, name: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _load_normalized(config: PipelineConfig):
    """Load the input CSV, split it, and min-max normalize fit on learn."""
    with _stage("load"):
        data = ds.load_csv(config.input_path, config.label_column)
    with _stage("split"):
        sp = ds.split(data, config.seed)
    with _stage("normalize"):
        normalized = ds.apply_minmax(data, ds.fit_minmax(data, sp.learn_idx))
    return data, normalized, sp


def run_fs(config: PipelineConfig) -> dict:
    """Tampering audit, backward elimination per surviving algorithm, the
    post-elimination metric gate, and emission of the optimized dataset."""
    config.validate()
    if config.mode != "fs":
        raise ConfigError("run_fs requires mode=fs")
    binning = config.binning()
    _, normalized, sp = _load_normalized(config)

    with _stage("tampering_audit"):
        audit = tampering_audit(
            normalized, config.algorithms, folds=config.folds, seed=config.seed,
            threshold=config.tamper_threshold, binning=binning, beta=config.beta)
    surviving = audit.passing()

    traces, post_bfe, rankings = {}, {}, {}
    for alg in surviving:
        with _stage(f"backward_eliminate[{alg}]"):
            traces[alg] = backward_eliminate(
                normalized, alg, sp, config.gamma, binning=binning, beta=config.beta)
        with _stage(f"rank_full[{alg}]"):
            rankings[alg] = rank(normalized.take(sp.learn_idx), binning, alg,
                                 beta=config.beta)

    # second gate: drop algorithms whose reduced-set metrics fall below gamma
    final_suite = []
    for alg, trace in traces.items():
        last_pass = None
        for step in trace.steps[:None if trace.stopped_at is None else trace.stopped_at - 1]:
            last_pass = step.metrics
        if last_pass is None:
            with _stage(f"post_bfe_gate[{alg}]"):
                reduced = extract_optimized(normalized, trace)
                gate = gate_train(reduced.take(sp.learn_idx))
                test = reduced.take(sp.test_idx)
                last_pass = compute_metrics(gate_predict(gate, test.X), test.labels)
        post_bfe[alg] = last_pass
        if last_pass.passes(config.gamma):
            final_suite.append(alg)

    best_alg, optimized, mdrt = None, None, None
    if final_suite:
        best_alg = max(final_suite, key=lambda a: (post_bfe[a].accuracy, -final_suite.index(a)))
        optimized = extract_optimized(normalized, traces[best_alg])
        mdrt = traces[best_alg].mdrt

    os.makedirs(config.out_dir, exist_ok=True)
    artifacts = {}
    if optimized is not None:
        opt_path = os.path.join(config.out_dir, "optimized.csv")
        ds.write_csv(optimized, opt_path, config.label_column)
        artifacts["optimized_csv"] = opt_path
    for alg, trace in traces.items():
        csv_path = os.path.join(config.out_dir, f"elimination_{alg}.csv")
        trace.metrics_csv(csv_path)
        artifacts[f"elimination_csv[{alg}]"] = csv_path

    report = {
        "mode": "fs",
        "config": config.to_json(),
        "estimator_notes": {
            "mi_estimator": "plug-in histogram, log2",
            "binning": {"n_bins": config.n_bins, "strategy": config.binning_strategy},
            "tie_rule": "smallest_column_index",
            "normalized_before_mi": True,
            "bfe_metrics_split": "test",
        },
        "tampering_audit": audit.to_json(),
        "surviving_after_audit": surviving,
        "traces": {alg: trace.to_json() for alg, trace in traces.items()},
        "post_bfe_metrics": {alg: m.to_json() for alg, m in post_bfe.items()},
        "final_suite": final_suite,
        "best_algorithm": best_alg,
        "mdrt": mdrt,
        "optimized_features": list(optimized.feature_names) if optimized else None,
        "rankings": {alg: r.to_json() for alg, r in rankings.items()},
        "artifacts": artifacts,
    }
    report["artifacts"]["report"] = _write_report(report, config.out_dir, "fs_report.json")
    return report


def _load_fs_report(config: PipelineConfig) -> dict:
    if not config.fs_report:
        raise ConfigError(f"mode={config.mode} requires --fs-report from a prior fs run")
    with open(config.fs_report, encoding="utf-8") as fh:
        report = json.load(fh)
    if not report.get("final_suite") or not report.get("optimized_features"):
        raise ConfigError("fs report has no surviving algorithms / optimized features")
    return report


def run_rrw(config: PipelineConfig) -> dict:
    """Cross-validated F1 per surviving algorithm, RRw weights, and the
    re-weighted optimized dataset."""
    config.validate()
    if config.mode != "rrw":
        raise ConfigError("run_rrw requires mode=rrw")
    fs_report = _load_fs_report(config)
    optimized_features = fs_report["optimized_features"]
    _, normalized, sp = _load_normalized(config)

    pairs = []
    avg_f1 = {}
    for alg in fs_report["final_suite"]:
        own_features = fs_report["traces"][alg]["optimized_features"]
        with _stage(f"avg_f1_cv[{alg}]"):
            f1 = avg_f1_cv(normalized.select_features(own_features),
                           k=config.folds, seed=config.seed)
        avg_f1[alg] = f1
        entries = [(e["feature"], e["score"])
                   for e in fs_report["rankings"][alg]["entries"]
                   if e["feature"] in optimized_features]
        pairs.append((FeatureRanking(alg, tuple(entries)), f1))

    with _stage("rrw_scores"):
        weights = rrw_scores(pairs)
    optimized = normalized.select_features(optimized_features)
    with _stage("apply_weights"):
        weighted = apply_weights(optimized, weights)

    os.makedirs(config.out_dir, exist_ok=True)
    out_csv = os.path.join(config.out_dir, "rrw_optimized.csv")
    ds.write_csv(weighted, out_csv, config.label_column)
    weights_path = os.path.join(config.out_dir, "rrw_weights.json")
    with open(weights_path, "w", encoding="utf-8") as fh:
        json.dump(weights.to_json(), fh, indent=2, sort_keys=True)
        fh.write("\n")

    report = {
        "mode": "rrw",
        "config": config.to_json(),
        "avg_f1": avg_f1,
        "weights": weights.to_json(),
        "optimized_features": list(optimized_features),
        "artifacts": {"rrw_optimized_csv": out_csv, "weights_json": weights_path},
    }
    report["artifacts"]["report"] = _write_report(report, config.out_dir, "rrw_report.json")
    return report


def run_ae(config: PipelineConfig) -> dict:
    """Train the bottleneck autoencoder and emit the latent dataset."""
    config.validate()
    if config.mode != "ae":
        raise ConfigError("run_ae requires mode=ae")
    bottleneck = config.bottleneck
    if bottleneck is None:
        if config.fs_report:
            bottleneck = _load_fs_report(config).get("mdrt")
        if bottleneck is None:
            raise ConfigError("ae mode needs --bottleneck or an fs report with an MDRt")
    _, normalized, sp = _load_normalized(config)

    with _stage("ae_train"):
        model = ae_new(normalized.n_features, bottleneck, config.seed)
        curve = ae_train(model, normalized.take(sp.learn_idx),
                         normalized.take(sp.validation_idx),
                         epochs=config.epochs, batch=config.batch)
    with _stage("ae_encode"):
        encoded = ae_encode(model, normalized)

    os.makedirs(config.out_dir, exist_ok=True)
    out_csv = os.path.join(config.out_dir, "ae_generated.csv")
    ds.write_csv(encoded, out_csv, config.label_column)
    curve_path = os.path.join(config.out_dir, "ae_curve.csv")
    curve.to_csv(curve_path)
    model_path = os.path.join(config.out_dir, "ae_model.json")
    with open(model_path, "w", encoding="utf-8") as fh:
        json.dump(model_to_json(model), fh, sort_keys=True)
        fh.write("\n")

    report = {
        "mode": "ae",
        "config": config.to_json(),
        "bottleneck": int(bottleneck),
        "curve": [{"epoch": i + 1, "train_loss": tl, "val_loss": vl}
                  for i, (tl, vl) in enumerate(curve.epochs)],
        "artifacts": {"ae_generated_csv": out_csv, "curve_csv": curve_path,
                      "model_json": model_path},
    }
    report["artifacts"]["report"] = _write_report(report, config.out_dir, "ae_report.json")
    return report


def run_evaluate(config: PipelineConfig) -> dict:
    """Train the rectangle MLP on the input dataset and report the full
    confusion-metric suite on the testing split, plus the learning curve."""
    config.validate()
    if config.mode != "evaluate":
        raise ConfigError("run_evaluate requires mode=evaluate")
    with _stage("load"):
        data = ds.load_csv(config.input_path, config.label_column)
    with _stage("split"):
        sp = ds.split(data, config.seed)
    if config.normalize:
        with _stage("normalize"):
            data = ds.apply_minmax(data, ds.fit_minmax(data, sp.learn_idx))

    with _stage("mlp_train"):
        model = mlp_new(data.n_features, config.seed)
        curve = mlp_train(model, data.take(sp.learn_idx), data.take(sp.validation_idx),
                          epochs=config.epochs, batch=config.batch)
    with _stage("evaluate"):
        test = data.take(sp.test_idx)
        preds = (mlp_predict(model, test) >= 0.5).astype(np.int64)
        metrics = compute_metrics(preds, test.labels)

    os.makedirs(config.out_dir, exist_ok=True)
    curve_path = os.path.join(config.out_dir, "mlp_curve.csv")
    curve.to_csv(curve_path)

    report = {
        "mode": "evaluate",
        "config": config.to_json(),
        "metrics": metrics.to_json(),
        "curve": [{"epoch": i + 1, "train_loss": tl, "val_loss": vl}
                  for i, (tl, vl) in enumerate(curve.epochs)],
        "artifacts": {"curve_csv": curve_path},
    }
    report["artifacts"]["report"] = _write_report(report, config.out_dir,
                                                  "evaluate_report.json")
    return report


def run(config: PipelineConfig) -> dict:
    config.validate()
    return {"fs": run_fs, "rrw": run_rrw, "ae": run_ae, "evaluate": run_evaluate}[config.mode](config)
