"""Greedy mutual-information feature ranking: mRMR, MIFS, CIFE, JMI, CMIM
and DISR on one shared forward-selection engine.

Each criterion scores every remaining candidate at every step; the argmax
(ties broken by smaller original column index) is appended to the ranking
with its score at selection time.  Running to exhaustion turns the greedy
selection order into a complete ranking.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset
from .errors import DataError
from .infotheory import (
    BinningConfig,
    DiscreteColumn,
    conditional_mutual_information,
    discretize,
    entropy,
    joint_entropy,
    mutual_information,
    pair_column,
)

ALGORITHMS = ("mRMR", "MIFS", "CIFE", "JMI", "CMIM", "DISR")

# scores within this distance of the step maximum count as tied; ties go to
# the smallest original column index, so rankings don't flip on last-ulp
# differences between equivalent arithmetic paths
TIE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class FeatureRanking:
    algorithm: str
    entries: tuple[tuple[str, float], ...]
    params: dict = field(default_factory=dict)

    @property
    def features(self) -> list[str]:
        return [name for name, _ in self.entries]

    def position(self, feature: str) -> int:
        """1-based rank position of a feature (1 = most relevant)."""
        for i, (name, _) in enumerate(self.entries, start=1):
            if name == feature:
                return i
        raise KeyError(feature)

    def to_json(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "params": dict(self.params),
            "entries": [
                {"feature": name, "score": float(score), "rank": i}
                for i, (name, score) in enumerate(self.entries, start=1)
            ],
        }


class MICache:
    """Memoized information quantities over one discretized dataset.

    The greedy criteria only ever need pairwise quantities between a
    candidate and an already-selected feature, so caching keeps a full
    ranking at O(F^2) histogram passes instead of O(F^3).
    """

    def __init__(self, dataset: Dataset, binning: BinningConfig):
        self.cols: list[DiscreteColumn] = [
            discretize(dataset.X[:, i], binning, name)
            for i, name in enumerate(dataset.feature_names)
        ]
        self.label = DiscreteColumn(dataset.labels, 2, "label")
        self._rel: dict[int, float] = {}
        self._mi: dict[tuple[int, int], float] = {}
        self._cmi_pair_given_label: dict[tuple[int, int], float] = {}
        self._cmi_label_given_feature: dict[tuple[int, int], float] = {}
        self._sr_pair: dict[tuple[int, int], float] = {}

    def relevance(self, i: int) -> float:
        """I(X_i; c)"""
        if i not in self._rel:
            self._rel[i] = mutual_information(self.cols[i], self.label)
        return self._rel[i]

    def mi(self, i: int, j: int) -> float:
        """I(X_i; X_j)"""
        key = (min(i, j), max(i, j))
        if key not in self._mi:
            self._mi[key] = mutual_information(self.cols[key[0]], self.cols[key[1]])
        return self._mi[key]

    def cmi_pair_given_label(self, i: int, j: int) -> float:
        """I(X_i; X_j | c)"""
        key = (min(i, j), max(i, j))
        if key not in self._cmi_pair_given_label:
            self._cmi_pair_given_label[key] = conditional_mutual_information(
                self.cols[key[0]], self.cols[key[1]], self.label
            )
        return self._cmi_pair_given_label[key]

    def cmi_label_given_feature(self, i: int, j: int) -> float:
        """I(X_i; c | X_j) -- not symmetric in (i, j)."""
        if (i, j) not in self._cmi_label_given_feature:
            self._cmi_label_given_feature[(i, j)] = conditional_mutual_information(
                self.cols[i], self.label, self.cols[j]
            )
        return self._cmi_label_given_feature[(i, j)]

    def symmetrical_relevance(self, i: int, j: int) -> float:
        """SR((X_i,X_j); c) = I((X_i,X_j);c) / H(X_i,X_j,c), product-coded pair."""
        key = (min(i, j), max(i, j))
        if key not in self._sr_pair:
            pair = pair_column(self.cols[key[0]], self.cols[key[1]])
            denom = joint_entropy(pair, self.label)
            num = mutual_information(pair, self.label)
            self._sr_pair[key] = num / denom if denom > 0 else 0.0
        return self._sr_pair[key]

    def single_sr(self, i: int) -> float:
        """SR(X_i; c) = I(X_i;c) / H(X_i,c); the empty-set DISR score."""
        denom = joint_entropy(self.cols[i], self.label)
        return self.relevance(i) / denom if denom > 0 else 0.0


def criterion_score(algorithm: str, cache: MICache, i: int, selected: list[int],
                    beta: float = 1.0) -> float:
    """Score candidate i given the already-selected index list."""
    rel = cache.relevance(i)
    if algorithm == "mRMR":
        if not selected:
            return rel
        return rel - sum(cache.mi(i, j) for j in selected) / len(selected)
    if algorithm == "MIFS":
        return rel - beta * sum(cache.mi(i, j) for j in selected)
    if algorithm == "CIFE":
        return rel - sum(
            cache.mi(i, j) - cache.cmi_pair_given_label(i, j) for j in selected
        )
    if algorithm == "JMI":
        if not selected:
            return rel
        return rel - sum(
            cache.mi(i, j) - cache.cmi_pair_given_label(i, j) for j in selected
        ) / len(selected)
    if algorithm == "CMIM":
        if not selected:
            return rel
        return min(cache.cmi_label_given_feature(i, j) for j in selected)
    if algorithm == "DISR":
        if not selected:
            return cache.single_sr(i)
        return sum(cache.symmetrical_relevance(i, j) for j in selected)
    raise DataError(f"unknown ranking algorithm {algorithm!r}")


def rank(dataset: Dataset, binning: BinningConfig, algorithm: str,
         beta: float = 1.0) -> FeatureRanking:
    """Run one criterion's greedy forward selection to exhaustion."""
    if algorithm not in ALGORITHMS:
        raise DataError(f"unknown ranking algorithm {algorithm!r}")
    if dataset.n_features < 1:
        raise DataError("need at least one feature to rank")
    cache = MICache(dataset, binning)
    remaining = list(range(dataset.n_features))
    selected: list[int] = []
    entries: list[tuple[str, float]] = []
    while remaining:
        scores = [criterion_score(algorithm, cache, i, selected, beta) for i in remaining]
        top = max(scores)
        best = next(p for p, s in enumerate(scores) if s >= top - TIE_TOLERANCE)
        idx = remaining.pop(best)
        selected.append(idx)
        entries.append((dataset.feature_names[idx], float(scores[best])))
    params = {"n_bins": binning.n_bins, "strategy": binning.strategy.value,
              "tie_rule": f"smallest_column_index(tol={TIE_TOLERANCE})"}
    if algorithm == "MIFS":
        params["beta"] = beta
    return FeatureRanking(algorithm, tuple(entries), params)


def rank_mrmr(dataset, binning):
    return rank(dataset, binning, "mRMR")


def rank_mifs(dataset, binning, beta: float = 1.0):
    return rank(dataset, binning, "MIFS", beta=beta)


def rank_cife(dataset, binning):
    return rank(dataset, binning, "CIFE")


def rank_jmi(dataset, binning):
    return rank(dataset, binning, "JMI")


def rank_cmim(dataset, binning):
    return rank(dataset, binning, "CMIM")


def rank_disr(dataset, binning):
    return rank(dataset, binning, "DISR")
