"""Improved k-nearest neighbors over descriptor histograms, plus plain KNN baselines.

The improved model weights every class by its rarity in the training set
(derived from the label entropy), partitions the training histograms into
``m`` subgroups, routes a query to the subgroup with the nearest centroid
and runs a class-weighted nearest-neighbor vote inside that subgroup only.

All tie-breaks are by order: lower subgroup id, lower training index,
earlier class name.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .descriptors import DescriptorKind

EPS = 1e-9
WEIGHT_CLAMP = (0.1, 10.0)
MAX_CLUSTER_ROUNDS = 20


@dataclass(frozen=True)
class IknnConfig:
    k: int = 5
    m: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.m is not None and self.m < 1:
            raise ValueError("m must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def subgroups_for(self, n_train: int) -> int:
        m = self.m if self.m is not None else max(2, math.isqrt(n_train))
        return min(m, n_train)


def _arr_eq(a, b):
    return a.shape == b.shape and np.array_equal(a, b)


@dataclass(frozen=True, eq=False)
class IknnModel:
    train: np.ndarray            # (M, L) training histograms
    labels: np.ndarray           # (M,) class index per training histogram
    class_names: tuple[str, ...]
    priors: np.ndarray           # (C,) class frequencies
    entropy: float               # label entropy in bits
    class_weights: np.ndarray    # (C,) vote and distance weights
    groups: np.ndarray           # (M,) subgroup id per training histogram
    centroids: np.ndarray        # (m, L)
    config: IknnConfig = field(default_factory=IknnConfig)
    descriptor: DescriptorKind = field(default_factory=DescriptorKind)

    def __eq__(self, other):
        if not isinstance(other, IknnModel):
            return NotImplemented
        return (
            self.class_names == other.class_names
            and self.entropy == other.entropy
            and self.config == other.config
            and self.descriptor == other.descriptor
            and all(_arr_eq(getattr(self, f), getattr(other, f))
                    for f in ("train", "labels", "priors", "class_weights", "groups", "centroids"))
        )

    __hash__ = None

    @property
    def n_train(self) -> int:
        return self.train.shape[0]

    @property
    def n_bins(self) -> int:
        return self.train.shape[1]

    @property
    def n_groups(self) -> int:
        return self.centroids.shape[0]

    def subgroup_members(self, g: int) -> np.ndarray:
        return np.flatnonzero(self.groups == g)

    def with_class_weights(self, weights) -> "IknnModel":
        return replace(self, class_weights=np.asarray(weights, dtype=np.float64))


@dataclass(frozen=True)
class Prediction:
    label: str
    score: float
    neighbor_ids: tuple[int, ...]


def label_entropy(priors) -> float:
    """Shannon entropy in bits, ``-sum a log2 a`` over non-zero priors."""
    a = np.asarray(priors, dtype=np.float64)
    a = a[a > 0]
    return float(-np.sum(a * np.log2(a)))


def class_weights_from_priors(priors, entropy: float) -> np.ndarray:
    """``-log2(prior) / entropy`` clamped to ``[0.1, 10]``; rarer classes weigh more."""
    w = -np.log2(np.asarray(priors, dtype=np.float64)) / entropy
    return np.clip(w, *WEIGHT_CLAMP)


def _encode_labels(labels, class_names):
    if class_names is None:
        class_names = []
        for lab in labels:
            if lab not in class_names:
                class_names.append(lab)
    class_names = tuple(class_names)
    lookup = {c: i for i, c in enumerate(class_names)}
    try:
        y = np.array([lookup[lab] for lab in labels], dtype=np.int64)
    except KeyError as exc:
        raise ValueError(f"label {exc.args[0]!r} not in class_names") from None
    return y, class_names


def squared_distances(points, b) -> np.ndarray:
    """Squared Euclidean distance from every row of ``points`` to ``b``.

    Explicit differences rather than the |a|^2 - 2ab + |b|^2 expansion keep
    exact zeros exact, and the bins are summed strictly left to right
    (a running sum) so that distances which tie in exact arithmetic are
    rounded the same way on every platform.  ``np.sum`` uses blocked
    partial sums whose order depends on the row length and SIMD width.
    """
    sq = (np.asarray(points, dtype=np.float64) - b) ** 2
    return np.cumsum(sq, axis=-1)[..., -1]


def _sqdist(points, centers):
    return np.array([squared_distances(points, c) for c in centers]).T


def partition(X: np.ndarray, m: int, seed: int = 0,
              max_rounds: int = MAX_CLUSTER_ROUNDS) -> tuple[np.ndarray, np.ndarray]:
    """Seeded farthest-point initialization followed by mean-update rounds.

    Returns ``(groups, centroids)``; every group is non-empty and each
    centroid is exactly the mean of its members.
    """
    M = X.shape[0]
    if not 1 <= m <= M:
        raise ValueError(f"m must be in [1, {M}], got {m}")
    rng = np.random.default_rng(seed)
    chosen = [int(rng.integers(M))]
    mind = squared_distances(X, X[chosen[0]])
    while len(chosen) < m:
        nxt = int(np.argmax(mind))
        chosen.append(nxt)
        mind = np.minimum(mind, squared_distances(X, X[nxt]))
    centroids = X[chosen].astype(np.float64, copy=True)

    groups = None
    for _ in range(max_rounds):
        d = _sqdist(X, centroids)
        new = np.argmin(d, axis=1)
        own = d[np.arange(M), new]
        sizes = np.bincount(new, minlength=m)
        for g in np.flatnonzero(sizes == 0):
            # move the point farthest from its centroid out of a group that can spare it
            spare = sizes[new] > 1
            cand = np.where(spare, own, -1.0)
            p = int(np.argmax(cand))
            sizes[new[p]] -= 1
            new[p] = g
            own[p] = 0.0
            sizes[g] = 1
        centroids = np.stack([X[new == g].mean(axis=0) for g in range(m)])
        if groups is not None and np.array_equal(new, groups):
            break
        groups = new
    return groups.astype(np.int64), centroids


def fit(train, labels, cfg: IknnConfig | None = None, class_names=None,
        descriptor: DescriptorKind | None = None) -> IknnModel:
    """Fit the improved KNN on training histograms and their class labels."""
    cfg = cfg or IknnConfig()
    X = np.asarray(train, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("training histograms must form a 2D array (all the same length)")
    y, class_names = _encode_labels(list(labels), class_names)
    if y.size != X.shape[0]:
        raise ValueError("one label is needed per training histogram")
    counts = np.bincount(y, minlength=len(class_names))
    present = counts > 0
    if present.sum() < 2:
        raise ValueError("IKNN needs training data from at least two classes")
    if cfg.k > X.shape[0]:
        raise ValueError(f"k={cfg.k} exceeds the training size {X.shape[0]}")
    if cfg.m is not None and cfg.m > X.shape[0]:
        raise ValueError(f"m={cfg.m} exceeds the training size {X.shape[0]}")

    priors = counts / counts.sum()
    entropy = label_entropy(priors)
    # classes absent from training never vote; give them the upper clamp so weights stay positive
    weights = np.full(len(class_names), WEIGHT_CLAMP[1])
    weights[present] = class_weights_from_priors(priors[present], entropy)

    groups, centroids = partition(X, cfg.subgroups_for(X.shape[0]), cfg.seed)
    return IknnModel(
        train=X, labels=y, class_names=class_names, priors=priors, entropy=entropy,
        class_weights=weights, groups=groups, centroids=centroids, config=cfg,
        descriptor=descriptor or DescriptorKind(),
    )


def nearest_subgroup(model: IknnModel, b) -> int:
    b = np.asarray(b, dtype=np.float64)
    d = np.sqrt(squared_distances(model.centroids, b))
    return int(np.argmin(d))


def _vote(neighbor_classes, neighbor_dists, weights, n_classes):
    votes = np.zeros(n_classes)
    for c, d in zip(neighbor_classes, neighbor_dists):
        votes[c] += weights[c] / (d + EPS)
    winner = int(np.argmax(votes))
    return winner, float(votes[winner])


def predict(model: IknnModel, b) -> Prediction:
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if b.size != model.n_bins:
        raise ValueError(f"query has {b.size} bins, model expects {model.n_bins}")
    members = model.subgroup_members(nearest_subgroup(model, b))
    cls = model.labels[members]
    wd = np.sqrt(model.class_weights[cls]) * np.sqrt(squared_distances(model.train[members], b))
    order = np.argsort(wd, kind="stable")[: min(model.config.k, members.size)]
    winner, score = _vote(cls[order], wd[order], model.class_weights, len(model.class_names))
    return Prediction(model.class_names[winner], score, tuple(int(i) for i in members[order]))


def predict_many(model: IknnModel, queries) -> list[Prediction]:
    return [predict(model, q) for q in np.atleast_2d(np.asarray(queries, dtype=np.float64))]


# -- baselines ---------------------------------------------------------------

KNN_METRICS = ("euclidean", "cosine", "weighted")


def knn_predict(train, labels, b, k: int = 1, metric: str = "euclidean",
                class_names=None) -> str:
    """Plain KNN.

    ``euclidean`` and ``cosine`` take a majority vote; ``weighted`` is
    Euclidean with each neighbor voting ``1 / (d + eps)``.
    """
    if metric not in KNN_METRICS:
        raise ValueError(f"unknown metric {metric!r}; expected one of {KNN_METRICS}")
    X = np.asarray(train, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    y, class_names = _encode_labels(list(labels), class_names)
    if not 1 <= k <= X.shape[0]:
        raise ValueError(f"k must be in [1, {X.shape[0]}]")
    if metric == "cosine":
        norms = np.linalg.norm(X, axis=1) * np.linalg.norm(b)
        with np.errstate(invalid="ignore", divide="ignore"):
            sim = np.where(norms > 0, (X @ b) / norms, 0.0)
        d = 1.0 - sim
    else:
        d = np.sqrt(squared_distances(X, b))
    order = np.argsort(d, kind="stable")[:k]
    votes = np.zeros(len(class_names))
    for i in order:
        votes[y[i]] += 1.0 / (d[i] + EPS) if metric == "weighted" else 1.0
    return class_names[int(np.argmax(votes))]


@dataclass(frozen=True)
class KnnConfig:
    """Configuration of a plain KNN baseline, usable wherever an IknnConfig is."""

    k: int = 10
    metric: str = "weighted"

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.metric not in KNN_METRICS:
            raise ValueError(f"unknown metric {self.metric!r}; expected one of {KNN_METRICS}")


def fit_predict(cfg, train, labels, queries, class_names=None) -> list[str]:
    """Fit on ``train`` and label every row of ``queries`` with either classifier."""
    if isinstance(cfg, KnnConfig):
        return [knn_predict(train, labels, q, cfg.k, cfg.metric, class_names) for q in queries]
    model = fit(train, labels, cfg, class_names)
    return [p.label for p in predict_many(model, queries)]
