"""Decision-tree training, ensemble decomposition, and the bundle format."""

import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from inips.ensemble import (
    BundleError,
    DecisionTree,
    LabeledDataset,
    StrongLearner,
    WeakLearner,
    build_decomposed_ensemble,
    evaluate,
    load_bundle,
    majority_verdict,
    predict_majority,
    predict_tree,
    save_bundle,
    subset_size,
    train_tree,
)
from inips.synth import gaussian_dataset


def dataset(rows, labels):
    return LabeledDataset(np.array(rows, dtype=float), np.array(labels))


class TestTraining:
    def test_perfect_split_on_single_feature(self):
        data = dataset([[1.0], [2.0], [3.0], [4.0]], [0, 0, 1, 1])
        tree = train_tree(data, max_depth=3)
        # one split at the midpoint 2.5 separates the classes exactly
        assert tree.nodes[0][:2] == (0, 2.5)
        assert [predict_tree(tree, [v]) for v in (1.0, 2.49, 2.5, 2.51, 4.0)] == [0, 0, 0, 1, 1]

    def test_threshold_equal_goes_left(self):
        tree = DecisionTree(nodes=((0, 1.5, 1, 2), (-1, 0), (-1, 1)), max_depth=1)
        assert predict_tree(tree, [1.5]) == 0
        assert predict_tree(tree, [np.nextafter(1.5, 2)]) == 1

    def test_tie_breaks_to_lowest_feature(self):
        # features 0 and 1 are identical, so both admit the same best split
        data = dataset([[1.0, 1.0], [2.0, 2.0], [3.0, 3.0], [4.0, 4.0]], [0, 0, 1, 1])
        tree = train_tree(data, max_depth=2)
        assert tree.nodes[0][0] == 0

    def test_tie_breaks_to_lowest_threshold(self):
        # y = [0, 1, 0]: splitting at 1.5 or 2.5 gives the same impurity
        data = dataset([[1.0], [2.0], [3.0]], [0, 1, 0])
        tree = train_tree(data, max_depth=1)
        assert tree.nodes[0][:2] == (0, 1.5)

    def test_depth_limit(self):
        rng = np.random.default_rng(3)
        data = LabeledDataset(rng.random((200, 4)), rng.integers(0, 2, 200))
        for depth in (1, 2, 3):
            assert train_tree(data, max_depth=depth).depth() <= depth

    def test_pure_node_becomes_leaf(self):
        data = dataset([[1.0], [2.0], [3.0]], [1, 1, 1])
        tree = train_tree(data, max_depth=5)
        assert tree.nodes == ((-1, 1),)

    def test_leaf_tie_is_malicious(self):
        data = dataset([[1.0], [1.0]], [0, 1])  # unsplittable, 50/50
        tree = train_tree(data, max_depth=3)
        assert tree.nodes == ((-1, 1),)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            train_tree(dataset([[1.0]], [0]), max_depth=0)
        with pytest.raises(ValueError):
            train_tree(LabeledDataset(np.empty((0, 1)), np.empty(0, dtype=int)), max_depth=1)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_training_fits_its_own_data(self, seed):
        rng = np.random.default_rng(seed)
        x = rng.integers(0, 50, size=(60, 3)).astype(float)
        y = rng.integers(0, 2, size=60)
        tree = train_tree(LabeledDataset(x, y), max_depth=20)
        # with unlimited depth the tree is exact wherever rows are separable;
        # duplicated feature rows fall back to the majority (tie -> 1) label
        from collections import defaultdict
        groups = defaultdict(list)
        for row, label in zip(x, y):
            groups[tuple(row)].append(label)
        for row, labels in groups.items():
            want = 1 if 2 * sum(labels) >= len(labels) else 0
            assert predict_tree(tree, list(row)) == want


class TestDecomposition:
    @pytest.mark.parametrize("count,ratio,want", [
        (72, 0.33, 24), (10, 0.25, 3), (10, 0.24, 2), (4, 0.5, 2), (3, 1.0, 3),
    ])
    def test_subset_size_half_up(self, count, ratio, want):
        assert subset_size(count, ratio) == want

    def test_build_shapes(self):
        data = gaussian_dataset(n_rows=300, seed=0)
        sl = build_decomposed_ensemble(data, n_learners=3, subsample_ratio=0.33,
                                       max_depth=7, seed=0)
        assert sl.n == 3
        assert [wl.wl_id for wl in sl.learners] == [0, 1, 2]
        for wl in sl.learners:
            assert len(wl.feature_subset) == 24
            assert wl.feature_subset == tuple(sorted(set(wl.feature_subset)))
            assert wl.tree.depth() <= 7

    def test_build_is_deterministic(self):
        data = gaussian_dataset(n_rows=300, seed=0)
        a = build_decomposed_ensemble(data, seed=5)
        b = build_decomposed_ensemble(data, seed=5)
        c = build_decomposed_ensemble(data, seed=6)
        assert a == b
        assert a != c

    @pytest.mark.parametrize("votes,want", [
        ([0], 0), ([1], 1), ([0, 1], 1), ([0, 0], 0), ([1, 1], 1),
        ([0, 0, 1], 0), ([0, 1, 1], 1), ([0, 0, 1, 1], 1), ([0, 0, 0, 1], 0),
    ])
    def test_majority_verdict(self, votes, want):
        assert majority_verdict(votes) == want

    def test_predict_majority_checks_width(self):
        data = gaussian_dataset(n_rows=200, seed=1)
        sl = build_decomposed_ensemble(data, seed=1)
        with pytest.raises(ValueError):
            predict_majority(sl, [0.0] * 10)

    def test_wl_ids_must_be_contiguous(self):
        leaf = DecisionTree(nodes=((-1, 0),), max_depth=1)
        with pytest.raises(ValueError):
            StrongLearner(feature_count=4, learners=(
                WeakLearner(wl_id=1, feature_subset=(0,), tree=leaf),
            ))


class TestEvaluation:
    def test_easy_gaussian_accuracy(self):
        data = gaussian_dataset(n_rows=1500, separation="easy", seed=2)
        sl = build_decomposed_ensemble(data, seed=2)
        report = evaluate(sl, gaussian_dataset(n_rows=500, separation="easy", seed=3))
        assert report.accuracy > 0.85
        assert report.tp + report.tn + report.fp + report.fn == 500

    def test_undefined_metrics_are_flagged(self):
        data = dataset([[0.0], [1.0]], [0, 0])
        leaf = DecisionTree(nodes=((-1, 0),), max_depth=1)
        sl = StrongLearner(feature_count=1, learners=(
            WeakLearner(wl_id=0, feature_subset=(0,), tree=leaf),
        ))
        report = evaluate(sl, data)
        assert report.accuracy == 1.0
        assert "precision" in report.undefined and "fnr" in report.undefined


class TestBundleFormat:
    def test_roundtrip(self, tmp_path):
        data = gaussian_dataset(n_rows=300, seed=4)
        sl = build_decomposed_ensemble(data, seed=4)
        path = tmp_path / "bundle.json"
        save_bundle(sl, path)
        loaded = load_bundle(path)
        assert loaded == sl
        rng = np.random.default_rng(0)
        for row in rng.standard_normal((50, sl.feature_count)):
            assert predict_majority(loaded, row) == predict_majority(sl, row)

    def test_format_fields(self, tmp_path):
        data = gaussian_dataset(n_rows=200, seed=4)
        path = tmp_path / "bundle.json"
        save_bundle(build_decomposed_ensemble(data, seed=4), path)
        doc = json.loads(path.read_text())
        assert doc["format_version"] == 1
        assert doc["feature_count"] == 72
        assert len(doc["learners"]) == 3
        node = doc["learners"][0]["nodes"][0]
        assert set(node) == {"f", "t", "l", "r"} or set(node) == {"leaf"}

    @pytest.mark.parametrize("mangle", [
        lambda d: d.update(format_version=2),
        lambda d: d.pop("learners"),
        lambda d: d["learners"][0].update(feature_subset=[999] * 24),
        lambda d: d["learners"][0]["nodes"].__setitem__(0, {"f": 0, "t": 0.0, "l": 1, "r": 99}),
        lambda d: d["learners"][0].update(wl_id=7),
    ])
    def test_invalid_bundles_rejected(self, tmp_path, mangle):
        data = gaussian_dataset(n_rows=200, seed=4)
        path = tmp_path / "bundle.json"
        save_bundle(build_decomposed_ensemble(data, seed=4), path)
        doc = json.loads(path.read_text())
        mangle(doc)
        path.write_text(json.dumps(doc))
        with pytest.raises(BundleError):
            load_bundle(path)
