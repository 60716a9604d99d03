"""Synthetic dataset generators and the dataset CSV format."""

import numpy as np
import pytest

from inips.synth import (
    gaussian_dataset,
    load_dataset_csv,
    save_dataset_csv,
    traffic_feature_dataset,
    train_test_split,
)


class TestGenerators:
    def test_gaussian_shape_and_separation(self):
        data = gaussian_dataset(n_rows=500, seed=0)
        assert data.features.shape == (500, 72)
        assert set(np.unique(data.labels)) == {0, 1}
        gap = data.features[data.labels == 1].mean() - data.features[data.labels == 0].mean()
        assert gap == pytest.approx(2.0, abs=0.2)

    def test_traffic_features_match_registry(self):
        data = traffic_feature_dataset(n_flows_per_class=20, seed=0)
        assert data.features.shape == (40, 72)
        assert data.labels.sum() == 20

    def test_generators_are_deterministic(self):
        a = gaussian_dataset(n_rows=50, seed=3)
        b = gaussian_dataset(n_rows=50, seed=3)
        assert (a.features == b.features).all() and (a.labels == b.labels).all()

    def test_split_partitions(self):
        data = gaussian_dataset(n_rows=100, seed=1)
        train, test = train_test_split(data, test_fraction=0.3, seed=1)
        assert len(train) == 70 and len(test) == 30


class TestDatasetCsv:
    def test_roundtrip_is_lossless(self, tmp_path):
        data = gaussian_dataset(n_rows=40, feature_count=5, seed=2)
        path = tmp_path / "data.csv"
        save_dataset_csv(data, path)
        loaded = load_dataset_csv(path)
        assert (loaded.features == data.features).all()
        assert (loaded.labels == data.labels).all()

    def test_header_is_validated(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(ValueError):
            load_dataset_csv(path)
