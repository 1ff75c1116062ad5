import numpy as np
import pytest

from midistill.dataset import Dataset


def make_dataset(columns: dict, labels) -> Dataset:
    names = tuple(columns.keys())
    X = np.column_stack([np.asarray(columns[n], dtype=float) for n in names])
    return Dataset(names, X, np.asarray(labels))


def planted_dataset(n_informative: int, n_noise: int, n_samples: int, seed: int,
                    margin: float = 0.3) -> Dataset:
    """Linearly separable synthetic table: label = (sum of informative
    features > half their count), with a margin band removed so the linear
    gate can reach near-perfect accuracy."""
    rng = np.random.default_rng(seed)
    rows = []
    labels = []
    target = n_informative / 2.0
    while len(rows) < n_samples:
        batch = rng.random((4 * n_samples, n_informative + n_noise))
        s = batch[:, :n_informative].sum(axis=1)
        keep = np.abs(s - target) > margin
        for row, sv in zip(batch[keep], s[keep]):
            rows.append(row)
            labels.append(int(sv > target))
            if len(rows) >= n_samples:
                break
    names = tuple(f"inf{i}" for i in range(n_informative)) + tuple(
        f"noise{i}" for i in range(n_noise))
    return Dataset(names, np.asarray(rows), np.asarray(labels))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
