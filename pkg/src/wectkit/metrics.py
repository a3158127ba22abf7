"""Distances between weighted Euler characteristic curves and transforms."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.spatial.distance import cdist

from .filtration import StepFunction, VectorizedWect, Wect, default_interval


@dataclass(frozen=True)
class CurveMetric:
    """``kind`` is ``"lp"`` (with exponent ``p``) or ``"sup"``."""

    kind: str = "lp"
    p: float = 2.0

    def __post_init__(self):
        if self.kind not in ("lp", "sup"):
            raise ValueError(f"unknown curve metric {self.kind!r}")
        if self.kind == "lp" and not self.p >= 1:
            raise ValueError(f"L^p metric needs p >= 1, got {self.p}")

    @classmethod
    def parse(cls, text: str) -> "CurveMetric":
        """``"l2"``, ``"l1"``, ``"lp:3"`` or ``"sup"``."""
        text = text.lower()
        if text == "sup":
            return cls("sup")
        if text.startswith("lp:"):
            return cls("lp", float(text[3:]))
        if text.startswith("l") and text[1:].replace(".", "", 1).isdigit():
            return cls("lp", float(text[1:]))
        raise ValueError(f"cannot parse metric {text!r}")


L2 = CurveMetric("lp", 2.0)
SUP = CurveMetric("sup")


def _check_interval(t_min: float, t_max: float) -> None:
    if not (math.isfinite(t_min) and math.isfinite(t_max)) or t_min >= t_max:
        raise ValueError(f"need a finite interval with t_min < t_max, got [{t_min}, {t_max}]")


def piecewise_grid(curves: Sequence[StepFunction], t_min: float, t_max: float):
    """Common partition of ``[t_min, t_max]`` for a set of step functions.

    Returns ``(lengths, values)`` where ``values[i, k]`` is curve ``i`` on the
    ``k``-th piece and ``lengths[k]`` the piece length.  Every curve is
    constant on every piece.
    """
    _check_interval(t_min, t_max)
    cuts = [np.array([t_min, t_max])]
    cuts += [c.heights[(c.heights > t_min) & (c.heights < t_max)] for c in curves]
    edges = np.unique(np.concatenate(cuts))
    starts = edges[:-1]
    values = np.array([c(starts) for c in curves]).reshape(len(curves), len(starts))
    return np.diff(edges), values


def _pairwise(va: np.ndarray, vb: np.ndarray, lengths: np.ndarray, metric: CurveMetric) -> np.ndarray:
    if metric.kind == "sup":
        keep = lengths > 0
        return cdist(va[:, keep], vb[:, keep], "chebyshev")
    scale = lengths ** (1.0 / metric.p)
    if metric.p == 2:
        return cdist(va * scale, vb * scale, "euclidean")
    return cdist(va * scale, vb * scale, "minkowski", p=metric.p)


def curve_distance(f: StepFunction, g: StepFunction, metric: CurveMetric = L2,
                   t_min: float = -45.0, t_max: float = 45.0) -> float:
    """Exact distance between two step functions restricted to ``[t_min, t_max]``.

    ``sup`` is the essential supremum, i.e. single points are ignored.
    """
    lengths, vals = piecewise_grid([f, g], t_min, t_max)
    diff = np.abs(vals[0] - vals[1])
    if metric.kind == "sup":
        return float(diff.max(initial=0.0))
    return float(np.sum(diff ** metric.p * lengths) ** (1.0 / metric.p))


def _interval_for(w: Wect, t_min, t_max) -> tuple[float, float]:
    if t_min is not None and t_max is not None:
        return float(t_min), float(t_max)
    if w.n is None:
        raise ValueError("sampling interval required when the grid size is unknown")
    return default_interval(w.n)


def _check_directions(a: Wect, b: Wect) -> None:
    if len(a.directions) != len(b.directions) or any(
            not math.isclose(x.theta, y.theta, abs_tol=1e-12)
            for x, y in zip(a.directions, b.directions)):
        raise ValueError("transforms are sampled in different directions")


def _aggregate(per_direction: np.ndarray, aggregation: str, axis: int = 0) -> np.ndarray:
    n_s = per_direction.shape[axis]
    if aggregation == "integral":
        return per_direction.sum(axis=axis) * (2 * math.pi / n_s)
    if aggregation == "max":
        return per_direction.max(axis=axis)
    raise ValueError(f"unknown aggregation {aggregation!r}; expected 'integral' or 'max'")


def wect_distance(w1: Wect, w2: Wect, metric: CurveMetric = L2, aggregation: str = "integral",
                  t_min: float | None = None, t_max: float | None = None) -> float:
    """Distance between transforms: curve distances combined over directions.

    ``integral`` approximates the integral over the circle by
    ``(2*pi/n_s) * sum``; ``max`` takes the largest curve distance.
    """
    _check_directions(w1, w2)
    lo, hi = _interval_for(w1, t_min, t_max)
    rho = np.array([curve_distance(f, g, metric, lo, hi) for f, g in zip(w1.curves, w2.curves)])
    return float(_aggregate(rho, aggregation))


def pairwise_wect_distances(left: Sequence[Wect], right: Sequence[Wect], metric: CurveMetric = L2,
                            aggregation: str = "integral", t_min: float | None = None,
                            t_max: float | None = None) -> np.ndarray:
    """``(len(left), len(right))`` matrix of :func:`wect_distance` values, computed in bulk."""
    if not left or not right:
        return np.zeros((len(left), len(right)))
    for w in list(left) + list(right):
        _check_directions(left[0], w)
    lo, hi = _interval_for(left[0], t_min, t_max)
    n_s = left[0].n_s
    per_dir = np.empty((n_s, len(left), len(right)))
    for d in range(n_s):
        curves = [w.curves[d] for w in left] + [w.curves[d] for w in right]
        lengths, vals = piecewise_grid(curves, lo, hi)
        per_dir[d] = _pairwise(vals[:len(left)], vals[len(left):], lengths, metric)
    return _aggregate(per_dir, aggregation)


def _check_same_grid(v1: VectorizedWect, v2: VectorizedWect) -> None:
    if v1.values.shape != v2.values.shape or (v1.t_min, v1.t_max) != (v2.t_min, v2.t_max):
        raise ValueError("vectorized transforms use different sampling grids")


def vectorized_distance(v1: VectorizedWect, v2: VectorizedWect) -> float:
    """Sum over directions of the Euclidean norm of the row difference."""
    _check_same_grid(v1, v2)
    return float(np.linalg.norm(v1.values - v2.values, axis=1).sum())


def calibrated_vectorized_distance(v1: VectorizedWect, v2: VectorizedWect) -> float:
    """Vectorized distance rescaled to approximate the integral L2 distance.

    Each squared row norm is multiplied by the threshold spacing and the sum
    over directions by ``2*pi/n_s``.
    """
    _check_same_grid(v1, v2)
    dt = (v1.t_max - v1.t_min) / (v1.n_v - 1)
    rows = np.sqrt(dt * np.sum((v1.values - v2.values) ** 2, axis=1))
    return float(rows.sum() * 2 * math.pi / v1.n_s)


def vectorized_distance_matrix(a: np.ndarray, b: np.ndarray, n_s: int) -> np.ndarray:
    """Bulk :func:`vectorized_distance` between rows of flattened feature matrices."""
    a = np.asarray(a, dtype=float).reshape(len(a), n_s, -1)
    b = np.asarray(b, dtype=float).reshape(len(b), n_s, -1)
    out = np.zeros((len(a), len(b)))
    for d in range(n_s):
        out += cdist(a[:, d], b[:, d], "euclidean")
    return out


def write_distance_matrix(matrix: np.ndarray, path: str | Path) -> None:
    np.savetxt(path, np.atleast_2d(matrix), delimiter=",", fmt="%.17g", newline="\n")
