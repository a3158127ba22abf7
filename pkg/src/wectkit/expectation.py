"""Closed-form expected weighted Euler characteristics and curves.

For i.i.d. vertex intensities the expected weight of an ``i``-simplex depends
only on ``i`` and the extension: the mean ``mu`` for the average extension,
and the uniform order-statistic means ``(i+1)/(i+2)`` (max) and ``1/(i+2)``
(min).  Expectations then follow by linearity from simplex counts.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .complex import WeightedComplex, complex_from_mask, euler_characteristic
from .filtration import (StepFunction, WectSampler, as_direction, compute_wecf,
                         default_interval, sample_thresholds)
from .intensity import UNIFORM, IntensityModel, UnsupportedModelError
from .shapes import image_seed, sample_intensities


def expected_simplex_weights(extension: str, model: IntensityModel = UNIFORM) -> tuple[float, float, float]:
    """Expected weight of a vertex, an edge and a triangle."""
    if extension == "avg":
        mu = model.mean
        return mu, mu, mu
    if extension not in ("max", "min"):
        raise ValueError(f"unknown extension {extension!r}")
    if model.kind == "constant":
        return (model.value,) * 3
    if model.kind != "uniform":
        raise UnsupportedModelError(
            f"order-statistic expectations are only available for U(0,1), not {model.name}")
    if extension == "max":
        return tuple((i + 1) / (i + 2) for i in range(3))
    return tuple(1 / (i + 2) for i in range(3))


def expected_wec_avg(cx: WeightedComplex, model: IntensityModel = UNIFORM) -> float:
    return model.mean * euler_characteristic(cx)


def expected_wec_order_stat(cx: WeightedComplex, extension: str) -> float:
    if extension not in ("max", "min"):
        raise ValueError(f"order-statistic expectation needs 'max' or 'min', got {extension!r}")
    c = expected_simplex_weights(extension)
    k0, k1, k2 = cx.counts
    return c[0] * k0 - c[1] * k1 + c[2] * k2


def expected_wec(cx: WeightedComplex, extension: str, model: IntensityModel = UNIFORM) -> float:
    if extension == "avg":
        return expected_wec_avg(cx, model)
    if model.kind != "uniform":
        expected_simplex_weights(extension, model)  # raises for unsupported models
    return expected_wec_order_stat(cx, extension)


def expected_wecf(cx: WeightedComplex, s, extension: str,
                  model: IntensityModel = UNIFORM) -> StepFunction:
    """Expected weighted Euler characteristic curve in direction ``s``."""
    c0, c1, c2 = expected_simplex_weights(extension, model)
    k0, k1, k2 = cx.counts
    mean_cx = WeightedComplex(cx.coords, cx.edges, cx.triangles, np.full(k0, c0), cx.n,
                              extension, np.full(k1, c1), np.full(k2, c2))
    return compute_wecf(mean_cx, s)


def square_max_expected_wecf(n: int, t: float) -> float:
    """Expected max-extension curve of a full ``n x n`` image in direction (0, 1).

    Closed form ``(5 - n - m)/6`` where ``m`` is the number of pixel rows at
    height ``<= t``.
    """
    half = (n - 1) / 2
    if t < -half:
        return 0.0
    m = min(int(np.floor(t)) + int(half) + 1, n)
    return (5 - n - m) / 6


@dataclass
class MonteCarloCurve:
    thresholds: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    n_images: int
    expected: np.ndarray | None = None

    @property
    def standard_error(self) -> np.ndarray:
        return self.std / np.sqrt(self.n_images)

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["threshold", "mean", "std", "expected"])
            exp = self.expected if self.expected is not None else [float("nan")] * len(self.mean)
            for row in zip(self.thresholds, self.mean, self.std, exp):
                w.writerow([repr(float(v)) for v in row])


def monte_carlo_wecf_mean(mask: np.ndarray, model: IntensityModel, extension: str, s,
                          n_images: int, seed: int, n_v: int | None = None,
                          t_min: float | None = None, t_max: float | None = None,
                          with_expected: bool = True) -> MonteCarloCurve:
    """Pointwise mean and sample std of ``n_images`` sampled curves on the sampling grid."""
    if n_images < 2:
        raise ValueError("need at least two images for a standard deviation")
    mask = np.asarray(mask, dtype=bool)
    n = mask.shape[0]
    if t_min is None or t_max is None:
        t_min, t_max = default_interval(n)
    if n_v is None:
        n_v = int(round(t_max - t_min)) + 1
    geometry = complex_from_mask(mask)
    d = as_direction(s)
    sampler = WectSampler(geometry, 1, n_v, t_min, t_max, first_angle=d.theta)
    weights = np.array([sample_intensities(mask, model, image_seed(seed, 0, i)).intensities[mask]
                        for i in range(n_images)])
    curves = sampler.transform(weights, extension)[:, 0, :]
    expected = None
    if with_expected:
        try:
            expected = expected_wecf(geometry, d, extension, model)(sample_thresholds(n_v, t_min, t_max))
        except UnsupportedModelError:
            expected = None
    return MonteCarloCurve(sample_thresholds(n_v, t_min, t_max), curves.mean(axis=0),
                           curves.std(axis=0, ddof=1), n_images, expected)
