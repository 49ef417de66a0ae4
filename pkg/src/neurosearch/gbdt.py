"""Gradient-boosted decision trees for binary satisfaction prediction.

Logistic loss, second-order (Newton) leaf values with lambda regularization,
exact greedy splits, best-first leaf growth bounded by depth and leaf count.
Everything is deterministic: tie-breaks are fixed, so identical data and
parameters always reproduce the identical model.
"""

from __future__ import annotations

import heapq
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .features import LabeledFeatureSet
from .split_backend import scan_best_split

LAMBDA = 1.0
BASE_PROB_CLAMP = 1e-6


@dataclass(frozen=True)
class GbdtParams:
    learning_rate: float = 0.1
    n_estimators: int = 100
    max_leaf_nodes: int = 31
    max_depth: int = 5

    def __post_init__(self):
        if not 0.0 < self.learning_rate <= 1.0:
            raise DomainError("learning_rate must lie in (0, 1]")
        if self.n_estimators < 0:
            raise DomainError("n_estimators must be >= 0")
        if self.max_depth < 1:
            raise DomainError("max_depth must be >= 1")
        if self.max_leaf_nodes < 2:
            raise DomainError("max_leaf_nodes must be >= 2")


# The tuned dimensions; the grid itself is a project default.
DEFAULT_GRID = tuple(
    GbdtParams(learning_rate=lr, n_estimators=n, max_depth=d, max_leaf_nodes=m)
    for lr in (0.05, 0.1)
    for n in (50, 100, 200)
    for d in (3, 5)
    for m in (8, 31)
)


@dataclass
class RegressionTree:
    """Axis-aligned regression tree stored as parallel arrays.

    feature[i] >= 0 marks an internal node (go left when x <= threshold);
    feature[i] == -1 marks a leaf carrying value[i].
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def n_leaves(self) -> int:
        return int(np.sum(self.feature < 0))

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Leaf value per row of x, vectorized level-by-level."""
        x = np.atleast_2d(x)
        node = np.zeros(x.shape[0], dtype=np.int64)
        while True:
            feat = self.feature[node]
            internal = feat >= 0
            if not internal.any():
                break
            rows = np.nonzero(internal)[0]
            f = feat[internal]
            go_left = x[rows, f] <= self.threshold[node[internal]]
            node[rows] = np.where(go_left, self.left[node[internal]], self.right[node[internal]])
        return self.value[node]


@dataclass
class SatisfactionModel:
    params: GbdtParams
    n_features: int
    base_score: float
    trees: list[RegressionTree] = field(default_factory=list)
    train_log_loss: list[float] = field(default_factory=list)

    def raw_score(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if x.shape[1] != self.n_features:
            raise DomainError(f"model expects {self.n_features} features, got {x.shape[1]}")
        out = np.full(x.shape[0], self.base_score)
        for tree in self.trees:
            out += self.params.learning_rate * tree.apply(x)
        return out


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


def _log_loss(y: np.ndarray, p: np.ndarray) -> float:
    p = np.clip(p, 1e-12, 1.0 - 1e-12)
    return float(-np.mean(y * np.log(p) + (1 - y) * np.log(1 - p)))


@dataclass
class _LeafTask:
    node_id: int
    rows: np.ndarray
    depth: int
    sum_g: float
    sum_h: float
    best: tuple[int, float, float]  # feature, threshold, gain


class _TreeGrower:
    """Best-first growth: always split the pending leaf with the largest gain."""

    def __init__(self, values_f, presort_f, g, h, params: GbdtParams):
        self.values = values_f
        self.presort = presort_f
        self.g = g
        self.h = h
        self.params = params
        self.n = values_f.shape[0]
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[float] = []
        self._counter = 0

    def _new_node(self) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(0.0)
        return len(self.feature) - 1

    def _node_sums(self, rows: np.ndarray) -> tuple[float, float]:
        # Sequential accumulation so both split backends see identical totals.
        return float(np.cumsum(self.g[rows])[-1]), float(np.cumsum(self.h[rows])[-1])

    def _scan(self, rows: np.ndarray, sum_g: float, sum_h: float):
        in_node = np.zeros(self.n, dtype=np.uint8)
        in_node[rows] = 1
        return scan_best_split(
            self.values, self.presort, in_node, self.g, self.h, sum_g, sum_h, LAMBDA
        )

    def grow(self) -> RegressionTree:
        root_rows = np.arange(self.n, dtype=np.int64)
        root_id = self._new_node()
        sum_g, sum_h = self._node_sums(root_rows)
        self.value[root_id] = -sum_g / (sum_h + LAMBDA)
        heap: list[tuple[float, int, _LeafTask]] = []
        self._maybe_push(heap, root_id, root_rows, 0, sum_g, sum_h)
        n_leaves = 1
        while heap and n_leaves < self.params.max_leaf_nodes:
            _, _, task = heapq.heappop(heap)
            feat, thr, _gain = task.best
            rows = task.rows
            go_left = self.values[rows, feat] <= thr
            rows_l = rows[go_left]
            rows_r = rows[~go_left]
            if len(rows_l) == 0 or len(rows_r) == 0:
                continue
            left_id = self._new_node()
            right_id = self._new_node()
            self.feature[task.node_id] = feat
            self.threshold[task.node_id] = thr
            self.left[task.node_id] = left_id
            self.right[task.node_id] = right_id
            for child_id, child_rows in ((left_id, rows_l), (right_id, rows_r)):
                c_sum_g, c_sum_h = self._node_sums(child_rows)
                self.value[child_id] = -c_sum_g / (c_sum_h + LAMBDA)
                self._maybe_push(heap, child_id, child_rows, task.depth + 1, c_sum_g, c_sum_h)
            n_leaves += 1
        return RegressionTree(
            feature=np.asarray(self.feature, dtype=np.int64),
            threshold=np.asarray(self.threshold, dtype=np.float64),
            left=np.asarray(self.left, dtype=np.int64),
            right=np.asarray(self.right, dtype=np.int64),
            value=np.asarray(self.value, dtype=np.float64),
        )

    def _maybe_push(self, heap, node_id, rows, depth, sum_g, sum_h):
        if depth >= self.params.max_depth or len(rows) < 2:
            return
        feat, thr, gain = self._scan(rows, sum_g, sum_h)
        if feat < 0 or gain <= 0.0:
            return
        task = _LeafTask(node_id, rows, depth, sum_g, sum_h, (feat, thr, gain))
        # Insertion counter keeps equal-gain pops deterministic.
        heapq.heappush(heap, (-gain, self._counter, task))
        self._counter += 1


def train(data: LabeledFeatureSet, params: GbdtParams, seed: int = 0) -> SatisfactionModel:
    """Fit the boosted ensemble; deterministic given data order and params.

    ``seed`` is accepted for interface stability (no stochastic subsampling is
    used, so it does not influence the result).
    """
    del seed
    x = np.asarray(data.features, dtype=np.float64)
    y = np.asarray(data.labels, dtype=np.float64)
    classes = np.unique(y)
    if len(classes) < 2:
        raise DomainError("training data must contain both classes")
    p_hat = min(max(float(y.mean()), BASE_PROB_CLAMP), 1.0 - BASE_PROB_CLAMP)
    base = math.log(p_hat / (1.0 - p_hat))
    model = SatisfactionModel(params=params, n_features=x.shape[1], base_score=base)
    values_f = np.asfortranarray(x)
    presort_f = np.asfortranarray(np.argsort(x, axis=0, kind="stable").astype(np.int32))
    f_scores = np.full(len(y), base)
    model.train_log_loss.append(_log_loss(y, _sigmoid(f_scores)))
    for _ in range(params.n_estimators):
        p = _sigmoid(f_scores)
        g = p - y
        h = p * (1.0 - p)
        tree = _TreeGrower(values_f, presort_f, g, h, params).grow()
        model.trees.append(tree)
        f_scores += params.learning_rate * tree.apply(x)
        model.train_log_loss.append(_log_loss(y, _sigmoid(f_scores)))
    return model


def predict(model: SatisfactionModel, x) -> np.ndarray | float:
    """Satisfaction probability; scalar for a single feature vector."""
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim == 1
    probs = _sigmoid(model.raw_score(arr))
    return float(probs[0]) if single else probs


def auc(scores, labels) -> float:
    """Mann-Whitney AUC; tied scores contribute one half."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    n_pos = int(np.sum(labels == 1))
    n_neg = int(np.sum(labels == 0))
    if n_pos == 0 or n_neg == 0:
        raise DomainError("AUC needs both classes present")
    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty(len(scores), dtype=np.float64)
    sorted_scores = scores[order]
    i = 0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    pos_rank_sum = float(np.sum(ranks[labels == 1]))
    return (pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


@dataclass
class LopoResult:
    best_params: GbdtParams
    mean_auc: float
    model: SatisfactionModel
    table: list[tuple[GbdtParams, float]]


def lopo_tune(data: LabeledFeatureSet, grid=DEFAULT_GRID, seed: int = 0) -> LopoResult:
    """Leave-one-participant-out tuning.

    For every parameter set, each participant in turn is the validation fold
    and the model trains on the rest; the participant-averaged validation AUC
    picks the winner, which is then refit on all data. Folds whose held-out
    rows carry a single class are skipped with a warning.
    """
    participants = sorted(set(data.participants.tolist()))
    if len(participants) < 2:
        raise DomainError("leave-one-participant-out needs at least 2 participants")
    table = []
    best_params = None
    best_auc = -1.0
    for params in grid:
        fold_aucs = []
        for pid in participants:
            held = data.participants == pid
            test = data.subset(held)
            rest = data.subset(~held)
            if len(np.unique(test.labels)) < 2:
                warnings.warn(f"participant {pid}: single-class fold skipped", stacklevel=2)
                continue
            if len(np.unique(rest.labels)) < 2:
                warnings.warn(f"participant {pid}: single-class training rest skipped", stacklevel=2)
                continue
            model = train(rest, params, seed=seed)
            fold_aucs.append(auc(predict(model, test.features), test.labels))
        if not fold_aucs:
            raise DomainError("no evaluable folds (every participant single-class)")
        mean_auc = float(np.mean(fold_aucs))
        table.append((params, mean_auc))
        if mean_auc > best_auc:
            best_auc = mean_auc
            best_params = params
    final = train(data, best_params, seed=seed)
    return LopoResult(best_params=best_params, mean_auc=best_auc, model=final, table=table)


# --- model (de)serialization ---------------------------------------------------

MODEL_MAGIC = "neurosearch-gbdt v1"


def save_model(model: SatisfactionModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(MODEL_MAGIC + "\n")
        p = model.params
        fh.write(f"learning_rate {p.learning_rate!r}\n")
        fh.write(f"n_estimators {p.n_estimators}\n")
        fh.write(f"max_leaf_nodes {p.max_leaf_nodes}\n")
        fh.write(f"max_depth {p.max_depth}\n")
        fh.write(f"n_features {model.n_features}\n")
        fh.write(f"base_score {model.base_score!r}\n")
        for i, tree in enumerate(model.trees):
            fh.write(f"tree {i}\n")
            _dump_preorder(fh, tree, 0)
        fh.write("end\n")


def _dump_preorder(fh, tree: RegressionTree, node: int) -> None:
    if tree.feature[node] < 0:
        fh.write(f"leaf {float(tree.value[node])!r}\n")
    else:
        fh.write(f"split {int(tree.feature[node])} {float(tree.threshold[node])!r}\n")
        _dump_preorder(fh, tree, int(tree.left[node]))
        _dump_preorder(fh, tree, int(tree.right[node]))


def load_model(path) -> SatisfactionModel:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or lines[0] != MODEL_MAGIC:
        raise DomainError(f"{path}: not a {MODEL_MAGIC} file")
    header = {}
    i = 1
    while i < len(lines) and not lines[i].startswith("tree ") and lines[i] != "end":
        key, _, val = lines[i].partition(" ")
        header[key] = val
        i += 1
    try:
        params = GbdtParams(
            learning_rate=float(header["learning_rate"]),
            n_estimators=int(header["n_estimators"]),
            max_leaf_nodes=int(header["max_leaf_nodes"]),
            max_depth=int(header["max_depth"]),
        )
        model = SatisfactionModel(
            params=params,
            n_features=int(header["n_features"]),
            base_score=float(header["base_score"]),
        )
    except (KeyError, ValueError) as exc:
        raise DomainError(f"{path}: bad model header: {exc}") from exc
    while i < len(lines) and lines[i] != "end":
        if not lines[i].startswith("tree "):
            raise DomainError(f"{path}: expected tree marker at line {i + 1}")
        i += 1
        nodes: list[list] = []
        i = _parse_preorder(lines, i, nodes, path)
        model.trees.append(
            RegressionTree(
                feature=np.asarray([n[0] for n in nodes], dtype=np.int64),
                threshold=np.asarray([n[1] for n in nodes], dtype=np.float64),
                left=np.asarray([n[2] for n in nodes], dtype=np.int64),
                right=np.asarray([n[3] for n in nodes], dtype=np.int64),
                value=np.asarray([n[4] for n in nodes], dtype=np.float64),
            )
        )
    if len(model.trees) != params.n_estimators:
        raise DomainError(
            f"{path}: header claims {params.n_estimators} trees, found {len(model.trees)}"
        )
    return model


def _parse_preorder(lines, i, nodes, path) -> int:
    if i >= len(lines):
        raise DomainError(f"{path}: truncated tree dump")
    parts = lines[i].split()
    node_id = len(nodes)
    if parts[0] == "leaf":
        nodes.append([-1, 0.0, -1, -1, float(parts[1])])
        return i + 1
    if parts[0] == "split":
        nodes.append([int(parts[1]), float(parts[2]), -1, -1, 0.0])
        i = _parse_preorder(lines, i + 1, nodes, path)
        nodes[node_id][2] = node_id + 1
        right_id = len(nodes)
        i = _parse_preorder(lines, i, nodes, path)
        nodes[node_id][3] = right_id
        return i
    raise DomainError(f"{path}: unexpected node line {lines[i]!r}")
