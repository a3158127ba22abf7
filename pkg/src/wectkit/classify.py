"""Binary classification experiments on weighted Euler characteristic transforms."""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from sklearn.svm import SVC

from .complex import complex_from_mask, with_vertex_weights
from .filtration import Wect, WectSampler, compute_wect
from .intensity import STUDY_MODELS, UNIFORM, IntensityModel
from .metrics import CurveMetric, pairwise_wect_distances
from .shapes import SHAPES, ClassSpec, image_seed, sample_intensities, stratified_test_counts, support

log = logging.getLogger(__name__)


# --------------------------------------------------------------------------
# classifiers

@dataclass
class LinearSVM:
    w: np.ndarray
    b: float
    classes: np.ndarray

    def decision_function(self, X) -> np.ndarray:
        return np.asarray(X, dtype=float) @ self.w + self.b

    def predict(self, X) -> np.ndarray:
        return self.classes[(self.decision_function(X) > 0).astype(int)]

    def score(self, X, y) -> float:
        return float(np.mean(self.predict(X) == np.asarray(y)))


def svm_objective(w: np.ndarray, b: float, X: np.ndarray, y_pm: np.ndarray, C: float) -> float:
    """Summed hinge loss plus ``||w||^2 / (2C)``; labels in {-1, +1}."""
    margins = y_pm * (X @ w + b)
    return float(np.maximum(0.0, 1.0 - margins).sum() + w @ w / (2 * C))


def _best_bias(scores: np.ndarray, y_pm: np.ndarray, b0: float) -> float:
    """Exact minimiser of the summed hinge loss over the bias, ``w`` held fixed.

    The loss is convex and piecewise linear in ``b`` with kinks at
    ``y_i - score_i``, so one of the kinks is optimal.
    """
    cand = np.append(y_pm - scores, b0)
    loss = np.maximum(0.0, 1.0 - y_pm[None, :] * (scores[None, :] + cand[:, None])).sum(axis=1)
    best = np.flatnonzero(loss <= loss.min() + 1e-12)
    return float(cand[best[np.argmin(np.abs(cand[best] - b0))]])


def train_svm(X, y, C: float = 20.0, iterations: int = 1000, seed: int = 0,
              tol: float = 1e-6) -> LinearSVM:
    """Soft-margin linear SVM, minimising ``sum(hinge) + ||w||^2 / (2C)``.

    Dual coordinate descent on the box-constrained dual (bias folded in as a
    constant feature), followed by an exact line search for the unregularised
    bias.  ``seed`` fixes the coordinate sweep order.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    classes = np.unique(y)
    if len(classes) != 2:
        raise ValueError(f"need exactly two classes, got {len(classes)}")
    if not np.all(np.isfinite(X)):
        raise ValueError("features must be finite")
    y_pm = np.where(y == classes[1], 1.0, -1.0)
    n = len(X)
    scale = max(1.0, float(np.abs(X).max()))
    Xa = np.hstack([X, np.full((n, 1), scale)])
    q = np.einsum("ij,ij->i", Xa, Xa)
    alpha = np.zeros(n)
    w = np.zeros(Xa.shape[1])
    rng = np.random.default_rng(seed)
    for _ in range(iterations):
        pg_max, pg_min = -np.inf, np.inf
        for i in rng.permutation(n):
            g = y_pm[i] * (w @ Xa[i]) - 1.0
            pg = min(g, 0.0) if alpha[i] == 0 else max(g, 0.0) if alpha[i] == C else g
            pg_max, pg_min = max(pg_max, pg), min(pg_min, pg)
            if pg != 0.0:
                old = alpha[i]
                alpha[i] = min(max(old - g / q[i], 0.0), C)
                w += (alpha[i] - old) * y_pm[i] * Xa[i]
        if pg_max - pg_min < tol:
            break
    coef, b = w[:-1], w[-1] * scale
    b = _best_bias(X @ coef, y_pm, b)
    return LinearSVM(coef, b, classes)


def train_kernel_svm(X, y, C: float = 20.0, kernel: str = "rbf") -> SVC:
    """Kernel SVM (libsvm via scikit-learn, ``gamma='scale'``)."""
    y = np.asarray(y)
    if len(np.unique(y)) != 2:
        raise ValueError("need exactly two classes")
    return SVC(C=C, kernel=kernel, gamma="scale").fit(np.asarray(X, dtype=float), y)


def knn_from_distances(distances: np.ndarray, train_labels: Sequence, K: int) -> np.ndarray:
    """Majority label among the ``K`` nearest columns of each row.

    Equal distances are resolved in favour of the lower training index.
    """
    distances = np.atleast_2d(distances)
    labels = np.asarray(train_labels)
    if labels.size == 0:
        raise ValueError("empty training set")
    if not 1 <= K <= labels.size:
        raise ValueError(f"K must lie in [1, {labels.size}], got {K}")
    if K % 2 == 0:
        raise ValueError("K must be odd")
    nearest = np.argsort(distances, axis=1, kind="stable")[:, :K]
    out = []
    for row in labels[nearest]:
        values, counts = np.unique(row, return_counts=True)
        top = values[counts == counts.max()]
        # Several labels tie only for more than two classes; take the nearest.
        out.append(next(v for v in row if v in top))
    return np.array(out)


def knn_classify(train: Sequence[Wect], labels: Sequence, query: Wect, K: int = 5,
                 metric: CurveMetric = CurveMetric(), aggregation: str = "integral",
                 t_min: float | None = None, t_max: float | None = None):
    if not train:
        raise ValueError("empty training set")
    d = pairwise_wect_distances([query], list(train), metric, aggregation, t_min, t_max)
    return knn_from_distances(d, labels, K)[0]


# --------------------------------------------------------------------------
# experiments

@dataclass(frozen=True)
class ExperimentSpec:
    class_a: ClassSpec
    class_b: ClassSpec
    extension: str = "avg"
    n_s: int = 15
    n_v: int = 91
    t_min: float = -45.0
    t_max: float = 45.0
    classifier: str = "svm"          # svm | knn
    kernel: str = "rbf"              # svm only: rbf | linear
    C: float = 20.0
    K: int = 5
    metric: str = "l2"
    aggregation: str = "integral"
    count: int = 250
    seed: int = 0
    n: int = 65

    def __post_init__(self):
        if self.classifier not in ("svm", "knn"):
            raise ValueError(f"unknown classifier {self.classifier!r}")
        if self.kernel not in ("rbf", "linear", "linear-cd"):
            raise ValueError(f"unknown kernel {self.kernel!r}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["class_a"] = {"shape": self.class_a.shape, "distribution": self.class_a.model.name}
        d["class_b"] = {"shape": self.class_b.shape, "distribution": self.class_b.model.name}
        return d

    @property
    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()[:16]


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    accuracy: float
    confusion: np.ndarray              # rows: true class, cols: predicted
    n_train: int
    n_test: int
    metadata: dict = field(default_factory=dict)

    def row(self) -> dict:
        s = self.spec
        return {
            "spec_hash": s.digest, "class_a": s.class_a.label, "class_b": s.class_b.label,
            "extension": s.extension, "n_s": s.n_s, "n_v": s.n_v, "classifier": s.classifier,
            "kernel": s.kernel if s.classifier == "svm" else "", "K": s.K if s.classifier == "knn" else "",
            "seed": s.seed, "accuracy": self.accuracy, "n_test": self.n_test,
        }


class FeatureCache:
    """Per-class WECT features, shared between experiments that reuse a class.

    Class images depend only on (shape, model, seed, class slot, image index),
    so the same class appearing in several experiments is computed once.
    """

    def __init__(self):
        self._store: dict = {}
        self._lock = threading.RLock()

    def _get(self, key, build):
        with self._lock:
            if key not in self._store:
                self._store[key] = build()
            return self._store[key]

    def weights(self, cls: ClassSpec, slot: int, size: int, seed: int, n: int) -> np.ndarray:
        def build():
            mask = support(cls.shape, n)
            return np.array([
                sample_intensities(mask, cls.model, image_seed(seed, slot, j)).intensities[mask]
                for j in range(size)])
        return self._get(("weights", cls, slot, size, seed, n), build)

    def sampler(self, shape: str, spec: ExperimentSpec) -> WectSampler:
        def build():
            cx = complex_from_mask(support(shape, spec.n))
            return WectSampler(cx, spec.n_s, spec.n_v, spec.t_min, spec.t_max)
        return self._get(("sampler", shape, spec.n, spec.n_s, spec.n_v, spec.t_min, spec.t_max), build)

    def vectors(self, cls: ClassSpec, slot: int, size: int, spec: ExperimentSpec) -> np.ndarray:
        def build():
            w = self.weights(cls, slot, size, spec.seed, spec.n)
            return self.sampler(cls.shape, spec).transform(w, spec.extension).reshape(size, -1)
        return self._get(("vectors", cls, slot, size, spec.seed, spec.n, spec.n_s, spec.n_v,
                          spec.t_min, spec.t_max, spec.extension), build)

    def wects(self, cls: ClassSpec, slot: int, size: int, spec: ExperimentSpec) -> list[Wect]:
        def build():
            geom = complex_from_mask(support(cls.shape, spec.n))
            w = self.weights(cls, slot, size, spec.seed, spec.n)
            return [compute_wect(with_vertex_weights(geom, wi, spec.extension), spec.n_s) for wi in w]
        return self._get(("wects", cls, slot, size, spec.seed, spec.n, spec.n_s, spec.extension), build)


def _split_sizes(spec: ExperimentSpec) -> tuple[list[int], list[int]]:
    sizes = [spec.count // 2 + spec.count % 2, spec.count // 2]
    return sizes, stratified_test_counts(sizes)


def run_experiment(spec: ExperimentSpec, cache: FeatureCache | None = None) -> ExperimentResult:
    """Generate both classes, train on the training split and score the test split."""
    cache = cache or FeatureCache()
    sizes, tests = _split_sizes(spec)
    classes = (spec.class_a, spec.class_b)
    train_idx, test_idx = [], []
    offset = 0
    for size, n_test in zip(sizes, tests):
        train_idx.extend(range(offset, offset + size - n_test))
        test_idx.extend(range(offset + size - n_test, offset + size))
        offset += size
    labels = np.repeat([0, 1], sizes)
    y_train, y_test = labels[train_idx], labels[test_idx]

    if spec.classifier == "svm":
        X = np.vstack([cache.vectors(c, slot, size, spec)
                       for slot, (c, size) in enumerate(zip(classes, sizes))])
        if spec.kernel == "linear-cd":
            model = train_svm(X[train_idx], y_train, spec.C, seed=spec.seed)
        else:
            model = train_kernel_svm(X[train_idx], y_train, spec.C, spec.kernel)
        pred = model.predict(X[test_idx])
    else:
        wects = [w for slot, (c, size) in enumerate(zip(classes, sizes))
                 for w in cache.wects(c, slot, size, spec)]
        train = [wects[i] for i in train_idx]
        test = [wects[i] for i in test_idx]
        D = pairwise_wect_distances(test, train, CurveMetric.parse(spec.metric), spec.aggregation,
                                    spec.t_min, spec.t_max)
        pred = knn_from_distances(D, y_train, spec.K)

    confusion = np.zeros((2, 2), dtype=int)
    for t, p in zip(y_test, pred):
        confusion[t, p] += 1
    acc = float(np.trace(confusion) / len(y_test))
    return ExperimentResult(spec, acc, confusion, len(train_idx), len(test_idx),
                            {"class_sizes": sizes, "test_sizes": tests})


def run_many(specs: Iterable[ExperimentSpec], threads: int = 1,
             cache: FeatureCache | None = None) -> list[ExperimentResult]:
    specs = list(specs)
    cache = cache or FeatureCache()
    if threads <= 1:
        return [run_experiment(s, cache) for s in specs]
    with ThreadPoolExecutor(threads) as pool:
        return list(pool.map(lambda s: run_experiment(s, cache), specs))


def same_shape_specs(shapes: Sequence[str] = SHAPES, models: Sequence[IntensityModel] = STUDY_MODELS,
                     seeds: Sequence[int] = (0,), **kw) -> list[ExperimentSpec]:
    """U(0,1) against each model on the same shape."""
    return [ExperimentSpec(ClassSpec(sh, UNIFORM), ClassSpec(sh, m), seed=sd, **kw)
            for sd in seeds for sh in shapes for m in models]


def cross_shape_specs(shapes: Sequence[str] = SHAPES, models: Sequence[IntensityModel] = STUDY_MODELS,
                      seeds: Sequence[int] = (0,), **kw) -> list[ExperimentSpec]:
    """U(0,1) images of one shape against each model on every other shape."""
    return [ExperimentSpec(ClassSpec(a, UNIFORM), ClassSpec(b, m), seed=sd, **kw)
            for sd in seeds for i, a in enumerate(shapes) for b in shapes[i + 1:] for m in models]


def direction_sweep(shape: str, directions: Sequence[int] = (2, 3, 5, 8, 15, 30),
                    seeds: Sequence[int] = (0,), model_b: IntensityModel = STUDY_MODELS[2],
                    cache: FeatureCache | None = None, threads: int = 1, **kw) -> dict[int, float]:
    """Mean test accuracy of U(0,1) vs ``model_b`` on ``shape`` for each direction count."""
    if not directions:
        raise ValueError("need at least one direction count")
    kw.setdefault("extension", "avg")
    cache = cache or FeatureCache()
    out = {}
    for n_s in directions:
        specs = [ExperimentSpec(ClassSpec(shape, UNIFORM), ClassSpec(shape, model_b),
                                n_s=n_s, seed=sd, **kw) for sd in seeds]
        out[n_s] = float(np.mean([r.accuracy for r in run_many(specs, threads, cache)]))
    return out


RESULT_FIELDS = ["spec_hash", "class_a", "class_b", "extension", "n_s", "n_v", "classifier",
                 "kernel", "K", "seed", "accuracy", "n_test"]


def append_results(results: Sequence[ExperimentResult], path: str | Path) -> None:
    path = Path(path)
    new = not path.exists()
    with open(path, "a", newline="") as fh:
        w = csv.DictWriter(fh, RESULT_FIELDS, lineterminator="\n")
        if new:
            w.writeheader()
        for r in results:
            w.writerow(r.row())


def mean_accuracy(results: Sequence[ExperimentResult], key) -> dict:
    """Average accuracy grouped by ``key(result)``."""
    groups: dict = {}
    for r in results:
        groups.setdefault(key(r), []).append(r.accuracy)
    return {k: float(np.mean(v)) for k, v in groups.items()}


__all__ = [
    "ExperimentResult", "ExperimentSpec", "FeatureCache", "LinearSVM", "append_results",
    "cross_shape_specs", "direction_sweep", "knn_classify", "knn_from_distances", "mean_accuracy",
    "run_experiment", "run_many", "same_shape_specs", "svm_objective", "train_kernel_svm", "train_svm",
]
