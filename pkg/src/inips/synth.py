"""Synthetic labeled datasets: a Gaussian-mixture benchmark over the full
feature space, and a traffic-derived set built by running the flow feature
extractor over generated benign/attack flows."""

from __future__ import annotations

import csv

import numpy as np

from .ensemble import LabeledDataset
from .flowstats import DEFAULT_REGISTRY, extract_features_arrays

SEPARATIONS = {"easy": 2.0, "medium": 1.0, "hard": 0.4}


def gaussian_dataset(n_rows: int = 4000, feature_count: int = 72,
                     separation="easy", seed: int = 0) -> LabeledDataset:
    """Two unit-variance Gaussian classes; class 1 is shifted on every
    feature so any feature subset carries signal."""
    shift = SEPARATIONS.get(separation, None)
    if shift is None:
        shift = float(separation)
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, 2, size=n_rows)
    x = rng.standard_normal((n_rows, feature_count))
    x[labels == 1] += shift
    return LabeledDataset(x, labels)


def traffic_feature_dataset(n_flows_per_class: int = 600, seed: int = 0,
                            registry=DEFAULT_REGISTRY) -> LabeledDataset:
    """Feature vectors extracted from generated flows.

    Benign flows: 10-1000 pkt/s, packet sizes 68-1500 B.  Attack flows:
    100-1000 pkt/s, sizes 68-15000 B.  This is the distribution the
    simulator's traffic generator produces, so a model trained here is the
    right reference model for simulated scenarios.
    """
    rng = np.random.default_rng(seed)
    k = registry.trigger_count
    rows = []
    labels = []
    for label in (0, 1):
        for _ in range(n_flows_per_class):
            if label == 0:
                rate = float(rng.choice([10.0, 100.0, 1000.0]))
                sizes = rng.integers(68, 1501, size=k)
            else:
                rate = float(rng.choice(np.arange(100.0, 1001.0, 100.0)))
                sizes = rng.integers(68, 15001, size=k)
            times = np.cumsum(rng.exponential(1.0 / rate, size=k))
            rows.append(extract_features_arrays(times.tolist(), sizes.tolist(), registry))
            labels.append(label)
    return LabeledDataset(np.array(rows), np.array(labels))


def train_test_split(data: LabeledDataset, test_fraction: float = 0.3, seed: int = 0):
    rng = np.random.default_rng(seed)
    idx = rng.permutation(len(data))
    n_test = int(round(test_fraction * len(data)))
    test, train = idx[:n_test], idx[n_test:]
    return (
        LabeledDataset(data.features[train], data.labels[train]),
        LabeledDataset(data.features[test], data.labels[test]),
    )


def save_dataset_csv(data: LabeledDataset, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"f{i}" for i in range(data.feature_count)] + ["label"])
        for row, label in zip(data.features, data.labels):
            w.writerow([repr(float(v)) for v in row] + [int(label)])


def load_dataset_csv(path) -> LabeledDataset:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[-1] != "label":
            raise ValueError("dataset CSV must end with a 'label' column")
        rows, labels = [], []
        for row in reader:
            rows.append([float(v) for v in row[:-1]])
            labels.append(int(row[-1]))
    if not rows:
        raise ValueError("empty dataset file")
    return LabeledDataset(np.array(rows), np.array(labels))
