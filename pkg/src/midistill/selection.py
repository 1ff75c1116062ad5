"""Two-step feature selection: the random-feature tampering audit that
prunes unreliable ranking criteria, then backward feature elimination gated
by the linear classifier, yielding the minimal surviving feature set.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dataset import RESERVED_RANDOM_NAMES, DataSplit, Dataset, inject_random_features
from .errors import DataError, FeatureSetMismatch
from .infotheory import BinningConfig
from .metrics import ClassifierMetrics, compute_metrics
from .neural import gate_predict, gate_train
from .ranking import FeatureRanking, rank


def max_workers() -> int:
    """Parallelism cap from MIDISTILL_THREADS (default: single-threaded)."""
    try:
        return max(1, int(os.environ.get("MIDISTILL_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class TamperingAudit:
    per_algorithm: dict  # algorithm -> {"avg_ranks": {name: float}, "pass": bool}
    folds: int
    threshold: float
    seed: int
    n_features_total: int

    def passing(self) -> list[str]:
        return [a for a, rec in self.per_algorithm.items() if rec["pass"]]

    def to_json(self) -> dict:
        return {
            "folds": self.folds,
            "threshold": self.threshold,
            "seed": self.seed,
            "n_features_total": self.n_features_total,
            "per_algorithm": {
                a: {"avg_ranks": {k: float(v) for k, v in rec["avg_ranks"].items()},
                    "pass": bool(rec["pass"])}
                for a, rec in self.per_algorithm.items()
            },
        }


@dataclass(frozen=True)
class ElimStep:
    removed_feature: str
    n_features_after: int
    metrics: ClassifierMetrics


@dataclass(frozen=True)
class EliminationTrace:
    """Per-step record of backward elimination.

    Step i removes one feature and evaluates the gate on the reduced set;
    ``stopped_at`` is the 1-based index of the first failing evaluation
    (None if the gate never failed).  ``optimized_features`` is the feature
    set present at the last passing evaluation, of size ``mdrt``.
    """

    algorithm: str
    gamma: float
    initial_features: tuple[str, ...]
    steps: tuple[ElimStep, ...]
    stopped_at: int | None
    optimized_features: tuple[str, ...]

    @property
    def mdrt(self) -> int:
        return len(self.optimized_features)

    def to_json(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "gamma": self.gamma,
            "initial_features": list(self.initial_features),
            "stopped_at": self.stopped_at,
            "mdrt": self.mdrt,
            "optimized_features": list(self.optimized_features),
            "steps": [
                {"removed_feature": s.removed_feature,
                 "n_features_after": s.n_features_after,
                 "metrics": s.metrics.to_json()}
                for s in self.steps
            ],
        }

    def metrics_csv(self, path) -> None:
        """Export (n_features, accuracy, precision, recall) for re-plotting."""
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("n_features,accuracy,precision,recall\n")
            for s in self.steps:
                m = s.metrics
                fh.write(f"{s.n_features_after},{_cell(m.accuracy)},"
                         f"{_cell(m.precision)},{_cell(m.recall)}\n")


def _cell(v) -> str:
    return "" if v is None else repr(float(v))


def average_fold_ranks(rankings: list[FeatureRanking]) -> dict:
    """Arithmetic mean of 1-based rank positions per feature across folds."""
    if not rankings:
        raise DataError("no rankings to average")
    reference = set(rankings[0].features)
    sums: dict[str, float] = {name: 0.0 for name in reference}
    for ranking in rankings:
        if set(ranking.features) != reference:
            raise FeatureSetMismatch("rankings cover different feature sets")
        for pos, name in enumerate(ranking.features, start=1):
            sums[name] += pos
    return {name: total / len(rankings) for name, total in sums.items()}


def tampering_audit(dataset: Dataset, algorithms, folds: int = 5, seed: int = 0,
                    threshold: float = 0.30,
                    binning: BinningConfig | None = None,
                    beta: float = 1.0) -> TamperingAudit:
    """Inject the three random features, rank each fold with each algorithm,
    and pass an algorithm iff all three random features' fold-averaged ranks
    fall in the bottom ``threshold`` fraction of positions."""
    if folds < 2:
        raise DataError("need at least 2 folds")
    binning = binning or BinningConfig()
    tampered = inject_random_features(dataset, seed)
    n_total = tampered.n_features
    perm = np.random.default_rng(seed).permutation(tampered.n_samples)
    parts = [tampered.take(chunk) for chunk in np.array_split(perm, folds)]

    algorithms = list(algorithms)
    jobs = [(alg, part) for alg in algorithms for part in parts]

    def _run(job):
        alg, part = job
        return rank(part, binning, alg, beta=beta)

    workers = max_workers()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run, jobs))
    else:
        results = [_run(job) for job in jobs]

    cutoff = (1.0 - threshold) * n_total  # positions strictly above are "bottom"
    per_algorithm = {}
    for ai, alg in enumerate(algorithms):
        fold_rankings = results[ai * folds:(ai + 1) * folds]
        means = average_fold_ranks(fold_rankings)
        rand_means = {name: means[name] for name in RESERVED_RANDOM_NAMES}
        per_algorithm[alg] = {
            "avg_ranks": rand_means,
            "pass": all(v > cutoff for v in rand_means.values()),
        }
    return TamperingAudit(per_algorithm, folds, threshold, seed, n_total)


def backward_eliminate(dataset: Dataset, algorithm: str, split: DataSplit,
                       gamma: float, binning: BinningConfig | None = None,
                       beta: float = 1.0) -> EliminationTrace:
    """Iteratively drop the lowest-ranked feature while the gate classifier
    keeps accuracy, precision and recall at or above gamma on the test split.

    Rankings and gate training use the learn split only; metrics come from
    the test split.  The loop stops at the first failing evaluation or when
    a single feature remains.
    """
    if not 0 <= gamma < 1:
        raise DataError("gamma must be in [0, 1)")
    if dataset.n_features < 2:
        raise DataError("need at least 2 features to eliminate")
    binning = binning or BinningConfig()

    current = list(dataset.feature_names)
    steps: list[ElimStep] = []
    stopped_at = None
    last_passing = list(current)
    learn_rows, test_rows = split.learn_idx, split.test_idx

    while len(current) >= 2:
        view = dataset.select_features(current)
        ranking = rank(view.take(learn_rows), binning, algorithm, beta=beta)
        lowest = ranking.features[-1]
        current.remove(lowest)

        reduced = dataset.select_features(current)
        gate = gate_train(reduced.take(learn_rows))
        test = reduced.take(test_rows)
        metrics = compute_metrics(gate_predict(gate, test.X), test.labels)
        steps.append(ElimStep(lowest, len(current), metrics))
        if not metrics.passes(gamma):
            stopped_at = len(steps)
            break
        last_passing = list(current)

    return EliminationTrace(
        algorithm=algorithm,
        gamma=gamma,
        initial_features=dataset.feature_names,
        steps=tuple(steps),
        stopped_at=stopped_at,
        optimized_features=tuple(last_passing),
    )


def extract_optimized(dataset: Dataset, selection) -> Dataset:
    """Project the dataset onto an EliminationTrace's surviving features or
    an explicit feature list; labels and sample order are preserved."""
    if isinstance(selection, EliminationTrace):
        features = list(selection.optimized_features)
        note = f"backward_elimination[{selection.algorithm}], gamma={selection.gamma}"
    else:
        features = list(selection)
        note = "explicit feature list"
    return dataset.select_features(features, note=note)
