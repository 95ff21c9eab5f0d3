"""K-means used as a three-class classifier, and an ordinal three-class SVM
with one shared weight vector and two ordered thresholds."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data_pipeline import ClassLabel

KMEANS_MAX_ITER = 300
DEFAULT_RESTARTS = 10
DEFAULT_SEED = 0


@dataclass
class KMeansModel:
    centroids: np.ndarray
    inertia: float
    seed: int
    assignments: np.ndarray  # training-point cluster indices
    cluster_to_class: dict[int, ClassLabel] = field(default_factory=dict)


@dataclass
class OrdinalSvmModel:
    feature_names: list[str]
    weights: np.ndarray
    b1: float
    b2: float
    C: float
    objective_trace: list[float] = field(default_factory=list)

    def __post_init__(self):
        if not self.b1 < self.b2:
            raise ValueError("thresholds must satisfy b1 < b2")


def _assign(X: np.ndarray, centroids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    d2 = ((X[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    idx = d2.argmin(axis=1)
    return idx, d2[np.arange(X.shape[0]), idx]


def _kmeans_pp_init(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    centroids = np.empty((k, X.shape[1]))
    centroids[0] = X[rng.integers(n)]
    d2 = ((X - centroids[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0:
            centroids[j] = X[rng.integers(n)]
        else:
            centroids[j] = X[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, ((X - centroids[j]) ** 2).sum(axis=1))
    return centroids


def _lloyd(X: np.ndarray, centroids: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    prev_inertia = np.inf
    assignments = None
    for _ in range(KMEANS_MAX_ITER):
        new_assignments, d2 = _assign(X, centroids)
        inertia = float(d2.sum())
        assert inertia <= prev_inertia + 1e-9 * (1.0 + prev_inertia), "inertia increased"
        prev_inertia = inertia
        if assignments is not None and np.array_equal(new_assignments, assignments):
            break
        assignments = new_assignments
        for j in range(centroids.shape[0]):
            members = X[assignments == j]
            if len(members) == 0:
                # re-seed an empty cluster to the farthest point
                centroids[j] = X[d2.argmax()]
            else:
                centroids[j] = members.mean(axis=0)
    assignments, d2 = _assign(X, centroids)
    return centroids, assignments, float(d2.sum())


def kmeans_fit(X, k: int, seed: int = DEFAULT_SEED, restarts: int = DEFAULT_RESTARTS) -> KMeansModel:
    """Best-of-restarts Lloyd's algorithm with k-means++ seeding.

    Deterministic per (seed, restarts); inertia ties go to the lowest
    restart index so concurrent restarts cannot change the winner.
    """
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    if n < k:
        raise ValueError(f"need at least k={k} points, got {n}")
    best = None
    for r in range(restarts):
        rng = np.random.default_rng(np.random.SeedSequence([seed, r]))
        centroids = _kmeans_pp_init(X, k, rng)
        centroids, assignments, inertia = _lloyd(X, centroids.copy())
        if best is None or inertia < best[0]:
            best = (inertia, centroids, assignments)
    inertia, centroids, assignments = best
    return KMeansModel(centroids=centroids, inertia=inertia, seed=seed, assignments=assignments)


def kmeans_classify(model: KMeansModel, train_labels, X_test) -> list[ClassLabel]:
    """Label clusters by training-label majority vote, then classify test
    points by nearest centroid.  Vote ties go to the lower class."""
    train_labels = list(train_labels)
    if len(train_labels) != len(model.assignments):
        raise ValueError("training labels must align with the fitted assignments")
    k = model.centroids.shape[0]
    mapping: dict[int, ClassLabel] = {}
    for j in range(k):
        members = [train_labels[i] for i in range(len(train_labels)) if model.assignments[i] == j]
        if not members:
            mapping[j] = ClassLabel.FLOP
            continue
        counts = {lab: members.count(lab) for lab in ClassLabel}
        top = max(counts.values())
        mapping[j] = min(lab for lab, c in counts.items() if c == top)
    model.cluster_to_class = mapping
    assert all(j in mapping for j in range(k))
    idx, _ = _assign(np.asarray(X_test, dtype=float), model.centroids)
    return [mapping[int(j)] for j in idx]


def _ordinal_objective(X, y, w, b, C) -> float:
    obj = 0.5 * float(w @ w)
    scores = X @ w
    for j, bj in enumerate(b, start=1):
        sign = np.where(np.asarray(y) >= j, 1.0, -1.0)
        obj += C * float(np.maximum(0.0, 1.0 - sign * (scores - bj)).sum())
    return obj


def ordinal_svm_fit(
    X,
    labels,
    C: float = 1.0,
    epochs: int = 200,
    seed: int = DEFAULT_SEED,
    feature_names: list[str] | None = None,
) -> OrdinalSvmModel:
    """All-threshold ordinal hinge fit by stochastic subgradient descent.

    Each sample pays hinge(1 - s*(w.x - b_j)) against both thresholds, with
    s = +1 when its class sits above threshold j and -1 otherwise.  The
    final parameters are the Polyak average over all steps; the per-epoch
    objective of the running average is recorded in objective_trace.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray([int(l) for l in labels])
    if C <= 0:
        raise ValueError("C must be positive")
    present = set(y.tolist())
    if present != {0, 1, 2}:
        raise ValueError(f"all three classes must be present, got {sorted(present)}")
    n, p = X.shape
    feature_names = feature_names or [f"x{j}" for j in range(p)]

    w = np.zeros(p)
    b = np.array([-1.0, 1.0])
    avg_w = np.zeros(p)
    avg_b = np.zeros(2)
    trace: list[float] = []
    rng = np.random.default_rng(seed)
    t = 0
    for _ in range(epochs):
        order = rng.permutation(n)
        for i in order:
            t += 1
            eta = 1.0 / (C * t)
            gw = w / n
            gb = np.zeros(2)
            score = float(X[i] @ w)
            for j in (1, 2):
                s = 1.0 if y[i] >= j else -1.0
                if 1.0 - s * (score - b[j - 1]) > 0.0:
                    gw -= C * s * X[i]
                    gb[j - 1] += C * s
            w -= eta * gw
            b -= eta * gb
            avg_w += (w - avg_w) / t
            avg_b += (b - avg_b) / t
        trace.append(_ordinal_objective(X, y, avg_w, avg_b, C))

    b1, b2 = sorted(avg_b.tolist())
    if b1 == b2:
        b2 = b1 + 1e-9
    return OrdinalSvmModel(feature_names, avg_w, b1, b2, C, objective_trace=trace)


def ordinal_svm_predict(model: OrdinalSvmModel, X) -> list[ClassLabel]:
    X = np.asarray(X, dtype=float)
    if X.shape[1] != model.weights.shape[0]:
        raise ValueError("column mismatch")
    scores = X @ model.weights
    out = []
    for s in scores:
        if s < model.b1:
            out.append(ClassLabel.FLOP)
        elif s < model.b2:
            out.append(ClassLabel.NEUTRAL)
        else:
            out.append(ClassLabel.HIT)
    return out
