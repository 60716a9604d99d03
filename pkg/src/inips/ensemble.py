"""Strong-learner training, decomposition into weak learners, and bundle I/O.

The strong learner is a small forest of depth-bounded decision trees, each
trained on a random subset of the feature space.  Decomposition keeps every
tree independently executable so it can later be hosted on its own switch.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

BUNDLE_FORMAT_VERSION = 1

# Node encoding: internal nodes are (feature, threshold, left, right) with
# child node indices into the flat pre-order array; leaves are (class,).
_LEAF = -1


class BundleError(ValueError):
    """Raised for malformed or inconsistent model bundle files."""


@dataclass(frozen=True)
class LabeledDataset:
    """Feature matrix plus binary labels (1 = malicious)."""

    features: np.ndarray  # shape (n, feature_count), float64
    labels: np.ndarray  # shape (n,), int, values in {0, 1}

    def __post_init__(self):
        x = np.asarray(self.features, dtype=np.float64)
        y = np.asarray(self.labels, dtype=np.int64)
        if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0]:
            raise ValueError("features/labels shape mismatch")
        if not np.isfinite(x).all():
            raise ValueError("non-finite feature values")
        if not np.isin(y, (0, 1)).all():
            raise ValueError("labels must be 0 or 1")
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y)

    @property
    def feature_count(self) -> int:
        return self.features.shape[1]

    def __len__(self) -> int:
        return self.features.shape[0]


@dataclass(frozen=True)
class DecisionTree:
    """Flat pre-order array of nodes; index 0 is the root."""

    nodes: tuple  # mix of (f, thr, left, right) and (_LEAF, class)
    max_depth: int

    def depth(self) -> int:
        def rec(i):
            node = self.nodes[i]
            if node[0] == _LEAF:
                return 0
            return 1 + max(rec(node[2]), rec(node[3]))

        return rec(0)

    def path_length(self, features) -> int:
        """Number of comparisons made when classifying `features`."""
        i = 0
        hops = 0
        while self.nodes[i][0] != _LEAF:
            f, thr, left, right = self.nodes[i]
            i = left if features[f] <= thr else right
            hops += 1
        return hops


@dataclass(frozen=True)
class WeakLearner:
    wl_id: int
    feature_subset: tuple  # sorted global feature indices
    tree: DecisionTree  # operates on subset-local indices

    def predict(self, full_features) -> int:
        projected = [full_features[i] for i in self.feature_subset]
        return predict_tree(self.tree, projected)


@dataclass(frozen=True)
class StrongLearner:
    feature_count: int
    learners: tuple  # of WeakLearner
    vote_rule: str = "majority-tie-malicious"
    format_version: int = BUNDLE_FORMAT_VERSION

    @property
    def n(self) -> int:
        return len(self.learners)

    def __post_init__(self):
        ids = sorted(wl.wl_id for wl in self.learners)
        if ids != list(range(len(self.learners))):
            raise BundleError(f"wl_ids must be exactly 0..N-1, got {ids}")
        for wl in self.learners:
            if not wl.feature_subset:
                raise BundleError("empty feature subset")
            if max(wl.feature_subset) >= self.feature_count:
                raise BundleError("feature subset exceeds feature_count")


@dataclass(frozen=True)
class ClassifierReport:
    tp: int
    tn: int
    fp: int
    fn: int
    accuracy: float
    precision: float
    recall: float
    f1: float
    fpr: float
    fnr: float
    undefined: tuple = ()  # metric names whose denominator was zero

    def as_dict(self) -> dict:
        return {
            "tp": self.tp, "tn": self.tn, "fp": self.fp, "fn": self.fn,
            "accuracy": self.accuracy, "precision": self.precision,
            "recall": self.recall, "f1": self.f1,
            "fpr": self.fpr, "fnr": self.fnr,
            "undefined": list(self.undefined),
        }


def _gini_best_split(x: np.ndarray, y: np.ndarray):
    """Best (feature, threshold) by weighted Gini over midpoint candidates.

    Ties break toward the lowest feature index, then the lowest threshold,
    so training is fully deterministic.  Returns None when no split reduces
    impurity.
    """
    n = y.shape[0]
    total_pos = int(y.sum())
    best = None  # (impurity, feature, threshold)
    parent = 1.0 - ((total_pos / n) ** 2 + ((n - total_pos) / n) ** 2)
    if parent == 0.0:
        return None
    for f in range(x.shape[1]):
        order = np.argsort(x[:, f], kind="stable")
        xs = x[order, f]
        ys = y[order]
        pos_left = np.cumsum(ys)[:-1]
        n_left = np.arange(1, n)
        distinct = xs[1:] != xs[:-1]
        if not distinct.any():
            continue
        n_right = n - n_left
        pos_right = total_pos - pos_left
        gini_left = 1.0 - ((pos_left / n_left) ** 2 + ((n_left - pos_left) / n_left) ** 2)
        gini_right = 1.0 - ((pos_right / n_right) ** 2 + ((n_right - pos_right) / n_right) ** 2)
        weighted = (n_left * gini_left + n_right * gini_right) / n
        weighted = np.where(distinct, weighted, np.inf)
        k = int(np.argmin(weighted))  # argmin takes the first = lowest threshold
        if weighted[k] < parent - 1e-12:
            thr = (xs[k] + xs[k + 1]) / 2.0
            cand = (float(weighted[k]), f, float(thr))
            if best is None or cand[0] < best[0] - 1e-12:
                best = cand
    return None if best is None else (best[1], best[2])


def _majority_label(y: np.ndarray) -> int:
    pos = int(y.sum())
    # Exact tie classifies malicious: fail-safe for a prevention system.
    return 1 if 2 * pos >= y.shape[0] else 0


def train_tree(data: LabeledDataset, max_depth: int, seed: int = 0) -> DecisionTree:
    """Greedy CART with Gini impurity and midpoint thresholds.

    `seed` is accepted for interface uniformity; the trainer itself is
    deterministic.
    """
    if len(data) == 0:
        raise ValueError("cannot train on an empty dataset")
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    x, y = data.features, data.labels
    nodes = []

    def build(idx: np.ndarray, depth: int) -> int:
        sub_y = y[idx]
        me = len(nodes)
        if depth >= max_depth or sub_y.shape[0] < 2:
            nodes.append((_LEAF, _majority_label(sub_y)))
            return me
        split = _gini_best_split(x[idx], sub_y)
        if split is None:
            nodes.append((_LEAF, _majority_label(sub_y)))
            return me
        f, thr = split
        nodes.append(None)  # patched below; keeps pre-order placement
        go_left = x[idx, f] <= thr
        left = build(idx[go_left], depth + 1)
        right = build(idx[~go_left], depth + 1)
        nodes[me] = (f, thr, left, right)
        return me

    build(np.arange(len(data)), 0)
    return DecisionTree(nodes=tuple(nodes), max_depth=max_depth)


def predict_tree(tree: DecisionTree, features) -> int:
    i = 0
    nodes = tree.nodes
    while True:
        node = nodes[i]
        if node[0] == _LEAF:
            return node[1]
        f, thr, left, right = node
        if f >= len(features):
            raise IndexError(f"feature index {f} out of range for vector of length {len(features)}")
        i = left if features[f] <= thr else right


def subset_size(feature_count: int, ratio: float) -> int:
    """Half-up rounding of ratio * feature_count."""
    return int(math.floor(ratio * feature_count + 0.5))


def build_decomposed_ensemble(
    data: LabeledDataset,
    n_learners: int = 3,
    subsample_ratio: float = 0.33,
    max_depth: int = 7,
    seed: int = 0,
) -> StrongLearner:
    """Train N weak learners, each on a random feature subset."""
    if n_learners < 1:
        raise ValueError("n_learners must be >= 1")
    if not (0 < subsample_ratio <= 1):
        raise ValueError("subsample_ratio must be in (0, 1]")
    k = subset_size(data.feature_count, subsample_ratio)
    if k < 1:
        raise ValueError("subsample_ratio selects zero features")
    root = np.random.SeedSequence(seed)
    learners = []
    for wl_id, child in enumerate(root.spawn(n_learners)):
        rng = np.random.default_rng(child)
        subset = tuple(sorted(rng.choice(data.feature_count, size=k, replace=False).tolist()))
        sub = LabeledDataset(data.features[:, subset], data.labels)
        tree = train_tree(sub, max_depth=max_depth, seed=seed + wl_id)
        learners.append(WeakLearner(wl_id=wl_id, feature_subset=subset, tree=tree))
    return StrongLearner(feature_count=data.feature_count, learners=tuple(learners))


def majority_verdict(votes) -> int:
    """1 iff malicious votes reach half of N; even-N ties go malicious."""
    votes = list(votes)
    return 1 if 2 * sum(votes) >= len(votes) else 0


def predict_majority(sl: StrongLearner, features) -> int:
    if len(features) != sl.feature_count:
        raise ValueError(f"expected {sl.feature_count} features, got {len(features)}")
    return majority_verdict(wl.predict(features) for wl in sl.learners)


def evaluate(sl: StrongLearner, data: LabeledDataset) -> ClassifierReport:
    if len(data) == 0:
        raise ValueError("cannot evaluate on an empty dataset")
    preds = np.array([predict_majority(sl, row) for row in data.features])
    return confusion_report(preds, data.labels)


def confusion_report(preds: np.ndarray, truth: np.ndarray) -> ClassifierReport:
    preds = np.asarray(preds)
    truth = np.asarray(truth)
    tp = int(((preds == 1) & (truth == 1)).sum())
    tn = int(((preds == 0) & (truth == 0)).sum())
    fp = int(((preds == 1) & (truth == 0)).sum())
    fn = int(((preds == 0) & (truth == 1)).sum())
    undefined = []

    def ratio(num, den, name):
        if den == 0:
            undefined.append(name)
            return 0.0
        return num / den

    precision = ratio(tp, tp + fp, "precision")
    recall = ratio(tp, tp + fn, "recall")
    f1 = ratio(2 * precision * recall, precision + recall, "f1") if (precision + recall) > 0 else (
        undefined.append("f1") or 0.0
    )
    return ClassifierReport(
        tp=tp, tn=tn, fp=fp, fn=fn,
        accuracy=(tp + tn) / preds.shape[0],
        precision=precision,
        recall=recall,
        f1=f1,
        fpr=ratio(fp, fp + tn, "fpr"),
        fnr=ratio(fn, fn + tp, "fnr"),
        undefined=tuple(undefined),
    )


# --- portable bundle format ------------------------------------------------

def _tree_to_json(tree: DecisionTree) -> list:
    out = []
    for node in tree.nodes:
        if node[0] == _LEAF:
            out.append({"leaf": node[1]})
        else:
            out.append({"f": node[0], "t": node[1], "l": node[2], "r": node[3]})
    return out


def _tree_from_json(raw: list, max_depth: int, n_features: int) -> DecisionTree:
    if not raw:
        raise BundleError("tree has no nodes")
    nodes = []
    for entry in raw:
        if "leaf" in entry:
            if entry["leaf"] not in (0, 1):
                raise BundleError(f"leaf class must be 0/1, got {entry['leaf']}")
            nodes.append((_LEAF, int(entry["leaf"])))
        else:
            f, t, l, r = entry["f"], entry["t"], entry["l"], entry["r"]
            if not (0 <= f < n_features):
                raise BundleError(f"feature index {f} out of range")
            if not (0 <= l < len(raw) and 0 <= r < len(raw)):
                raise BundleError("child index out of range")
            nodes.append((int(f), float(t), int(l), int(r)))
    tree = DecisionTree(nodes=tuple(nodes), max_depth=max_depth)
    _check_tree_shape(tree)
    return tree


def _check_tree_shape(tree: DecisionTree):
    """Single root, acyclic, every node reachable exactly once."""
    seen = set()

    def rec(i, depth):
        if i in seen:
            raise BundleError("node reachable twice (cycle or shared subtree)")
        seen.add(i)
        node = tree.nodes[i]
        if node[0] == _LEAF:
            return
        if depth + 1 > tree.max_depth:
            raise BundleError(f"tree deeper than declared max_depth {tree.max_depth}")
        rec(node[2], depth + 1)
        rec(node[3], depth + 1)

    rec(0, 0)
    if len(seen) != len(tree.nodes):
        raise BundleError("unreachable nodes in tree array")


def save_bundle(sl: StrongLearner, path):
    doc = {
        "format_version": sl.format_version,
        "feature_count": sl.feature_count,
        "n_learners": sl.n,
        "vote_rule": sl.vote_rule,
        "learners": [
            {
                "wl_id": wl.wl_id,
                "feature_subset": list(wl.feature_subset),
                "max_depth": wl.tree.max_depth,
                "nodes": _tree_to_json(wl.tree),
            }
            for wl in sl.learners
        ],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_bundle(path) -> StrongLearner:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise BundleError(f"unparseable bundle file: {exc}") from exc
    if not isinstance(doc, dict) or "format_version" not in doc:
        raise BundleError("not a model bundle file")
    if doc["format_version"] != BUNDLE_FORMAT_VERSION:
        raise BundleError(
            f"unsupported bundle version {doc['format_version']} "
            f"(expected {BUNDLE_FORMAT_VERSION})"
        )
    try:
        feature_count = int(doc["feature_count"])
        learners = []
        for raw in doc["learners"]:
            subset = tuple(int(i) for i in raw["feature_subset"])
            if sorted(set(subset)) != list(subset):
                raise BundleError("feature subset must be sorted and distinct")
            depth = int(raw.get("max_depth", 7))
            tree = _tree_from_json(raw["nodes"], depth, len(subset))
            learners.append(WeakLearner(wl_id=int(raw["wl_id"]), feature_subset=subset, tree=tree))
        if len(learners) != int(doc["n_learners"]):
            raise BundleError("n_learners disagrees with learner list")
        return StrongLearner(
            feature_count=feature_count,
            learners=tuple(learners),
            vote_rule=doc.get("vote_rule", "majority-tie-malicious"),
        )
    except (KeyError, TypeError) as exc:
        raise BundleError(f"malformed bundle: {exc}") from exc
    except ValueError as exc:
        raise BundleError(str(exc)) from exc
