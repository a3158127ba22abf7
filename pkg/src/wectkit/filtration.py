"""Lower-star height filtrations and weighted Euler characteristic curves.

A curve (WECF) is stored exactly as a :class:`StepFunction`; a transform
(WECT) is one curve per sampled direction.  :class:`WectSampler` computes
vectorized transforms for whole batches of images sharing one support.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import sparse

from .complex import WeightedComplex, extend_cells

# Heights are snapped to this many decimals so that lattice points at equal
# exact height (e.g. along a diagonal direction) tie in floating point.
HEIGHT_DECIMALS = 10
# Height groups whose net weighted contribution is below this are not breakpoints.
MERGE_ATOL = 1e-12

DEFAULT_FIRST_ANGLE = math.pi / 2  # direction (0, 1)


@dataclass(frozen=True)
class Direction:
    theta: float

    @classmethod
    def from_vector(cls, x: float, y: float) -> "Direction":
        r = math.hypot(x, y)
        if r == 0:
            raise ValueError("zero vector has no direction")
        return cls(math.atan2(y, x) % (2 * math.pi))

    @property
    def vector(self) -> np.ndarray:
        return np.array([math.cos(self.theta), math.sin(self.theta)])


def as_direction(s) -> Direction:
    if isinstance(s, Direction):
        return s
    x, y = s
    return Direction.from_vector(float(x), float(y))


def equally_spaced_directions(n_s: int, first_angle: float = DEFAULT_FIRST_ANGLE) -> list[Direction]:
    """``n_s`` directions at angles ``first_angle + 2*pi*k/n_s``.

    Angles are not wrapped, so the list is strictly increasing in angle and
    starts at the configured first direction.
    """
    if n_s < 1:
        raise ValueError(f"need at least one direction, got n_s={n_s}")
    return [Direction(first_angle + 2 * math.pi * k / n_s) for k in range(n_s)]


def default_interval(n: int) -> tuple[float, float]:
    """Symmetric sampling interval for an ``n x n`` grid (``[-45, 45]`` at n=65)."""
    half = max(1, math.floor((n - 1) / math.sqrt(2)))
    return -float(half), float(half)


def vertex_heights(coords: np.ndarray, s) -> np.ndarray:
    v = as_direction(s).vector
    h = coords[:, 0] * v[0] + coords[:, 1] * v[1]
    return np.round(h, HEIGHT_DECIMALS) + 0.0  # + 0.0 drops negative zeros


def simplex_height(vertices: Sequence[Sequence[float]], s) -> float:
    """Lower-star height of one simplex: max over its vertices of ``v . s``."""
    return float(vertex_heights(np.asarray(vertices, dtype=float), s).max())


def height_filter(cx: WeightedComplex, s) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Heights ``H_s`` of vertices, edges and triangles of ``cx``."""
    hv = vertex_heights(cx.coords, s)
    he = hv[cx.edges].max(axis=1) if len(cx.edges) else np.zeros(0)
    ht = hv[cx.triangles].max(axis=1) if len(cx.triangles) else np.zeros(0)
    return hv, he, ht


class StepFunction:
    """Right-continuous step function, zero left of its first breakpoint.

    ``values[i]`` holds on ``[heights[i], heights[i+1])``; the last value holds
    from ``heights[-1]`` on.  Canonical form: heights strictly increasing and
    no breakpoint that repeats the value in force just before it.
    """

    __slots__ = ("heights", "values")

    def __init__(self, heights, values, canonical: bool = True):
        h = np.asarray(heights, dtype=float).reshape(-1)
        v = np.asarray(values, dtype=float).reshape(-1)
        if h.shape != v.shape:
            raise ValueError("heights and values must have equal length")
        if np.any(np.diff(h) <= 0):
            raise ValueError("heights must be strictly increasing")
        if canonical and len(v):
            prev = np.concatenate([[0.0], v[:-1]])
            keep = v != prev
            h, v = h[keep], v[keep]
        self.heights = h
        self.values = v
        self.heights.setflags(write=False)
        self.values.setflags(write=False)

    @classmethod
    def zero(cls) -> "StepFunction":
        return cls([], [])

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.heights, t, side="right") - 1
        vals = np.concatenate([[0.0], self.values])
        out = vals[idx + 1]
        return out if out.ndim else float(out)

    def __len__(self) -> int:
        return len(self.heights)

    def __eq__(self, other) -> bool:
        if not isinstance(other, StepFunction):
            return NotImplemented
        return (np.array_equal(self.heights, other.heights)
                and np.array_equal(self.values, other.values))

    def __repr__(self) -> str:
        pairs = ", ".join(f"({h:g}, {v:g})" for h, v in self.pairs())
        return f"StepFunction([{pairs}])"

    def pairs(self) -> list[tuple[float, float]]:
        return list(zip(self.heights.tolist(), self.values.tolist()))

    @property
    def final_value(self) -> float:
        return float(self.values[-1]) if len(self.values) else 0.0

    def to_json(self) -> list[list[float]]:
        return [[h, v] for h, v in self.pairs()]

    @classmethod
    def from_json(cls, data) -> "StepFunction":
        if not data:
            return cls.zero()
        arr = np.asarray(data, dtype=float)
        return cls(arr[:, 0], arr[:, 1])


def _signed_terms(cx: WeightedComplex, s):
    hv, he, ht = height_filter(cx, s)
    heights = np.concatenate([hv, he, ht])
    signed = np.concatenate([cx.weights(0), -cx.weights(1), cx.weights(2)])
    dims = np.repeat([0, 1, 2], cx.counts)
    # Canonical tie order: sorted vertex codes of each simplex, so the sum
    # within a height group does not depend on input order.
    codes = (cx.coords[:, 0] + (1 << 20)) * (1 << 21) + (cx.coords[:, 1] + (1 << 20))
    keys = np.full((len(heights), 3), -1, dtype=np.int64)
    offset = 0
    for dim in range(3):
        cells = cx.cells(dim)
        keys[offset:offset + len(cells), :dim + 1] = np.sort(codes[cells], axis=1)
        offset += len(cells)
    return heights, signed, dims, keys


def compute_wecf(cx: WeightedComplex, s) -> StepFunction:
    """Exact weighted Euler characteristic curve of ``cx`` in direction ``s``.

    Simplices are swept in order of height; every distinct height becomes a
    breakpoint carrying the running alternating weight sum.
    """
    heights, signed, dims, keys = _signed_terms(cx, s)
    if len(heights) == 0:
        return StepFunction.zero()
    order = np.lexsort(tuple(keys[:, ::-1].T) + (dims, heights))
    h = heights[order]
    w = signed[order]
    starts = np.flatnonzero(np.concatenate([[True], h[1:] != h[:-1]]))
    group = np.add.reduceat(w, starts)
    keep = np.abs(group) > MERGE_ATOL
    running = np.cumsum(group)
    return StepFunction(h[starts][keep], running[keep])


@dataclass(frozen=True)
class Wect:
    directions: tuple[Direction, ...]
    curves: tuple[StepFunction, ...]
    extension: str | None = None
    n: int | None = None

    def __post_init__(self):
        if len(self.directions) != len(self.curves):
            raise ValueError("one curve per direction required")
        th = [d.theta for d in self.directions]
        if any(b <= a for a, b in zip(th, th[1:])):
            raise ValueError("directions must be strictly increasing in angle")

    @property
    def n_s(self) -> int:
        return len(self.directions)

    def to_json(self) -> dict:
        return {
            "directions": [d.theta for d in self.directions],
            "curves": [c.to_json() for c in self.curves],
            "extension": self.extension,
            "n": self.n,
        }

    @classmethod
    def from_json(cls, data: dict) -> "Wect":
        return cls(tuple(Direction(float(t)) for t in data["directions"]),
                   tuple(StepFunction.from_json(c) for c in data["curves"]),
                   data.get("extension"), data.get("n"))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "Wect":
        return cls.from_json(json.loads(Path(path).read_text()))


def compute_wect(cx: WeightedComplex, n_s: int, first_angle: float = DEFAULT_FIRST_ANGLE,
                 threads: int = 1) -> Wect:
    """WECFs in ``n_s`` equally spaced directions, in increasing angle order."""
    dirs = equally_spaced_directions(n_s, first_angle)
    cx.weights(1)  # fail early on unextended complexes
    if threads > 1 and n_s > 1:
        with ThreadPoolExecutor(threads) as pool:
            curves = list(pool.map(lambda d: compute_wecf(cx, d), dirs))
    else:
        curves = [compute_wecf(cx, d) for d in dirs]
    return Wect(tuple(dirs), tuple(curves), cx.extension, cx.n)


def sample_thresholds(n_v: int, t_min: float, t_max: float) -> np.ndarray:
    if n_v < 2:
        raise ValueError(f"n_v must be at least 2, got {n_v}")
    if not t_min < t_max:
        raise ValueError(f"degenerate interval [{t_min}, {t_max}]")
    step = (t_max - t_min) / (n_v - 1)
    return t_min + np.arange(n_v) * step


@dataclass(frozen=True)
class VectorizedWect:
    values: np.ndarray  # (n_s, n_v)
    t_min: float
    t_max: float

    @property
    def n_s(self) -> int:
        return self.values.shape[0]

    @property
    def n_v(self) -> int:
        return self.values.shape[1]

    @property
    def thresholds(self) -> np.ndarray:
        return sample_thresholds(self.n_v, self.t_min, self.t_max)

    def as_vector(self) -> np.ndarray:
        return self.values.reshape(-1)

    def header(self) -> dict:
        return {"n_s": self.n_s, "n_v": self.n_v, "t_min": self.t_min, "t_max": self.t_max}

    def save(self, csv_path: str | Path) -> Path:
        """Write one CSV row per direction and a ``.json`` header next to it."""
        csv_path = Path(csv_path)
        np.savetxt(csv_path, self.values, delimiter=",", fmt="%.17g", newline="\n")
        header = csv_path.with_suffix(".json")
        header.write_text(json.dumps(self.header()) + "\n")
        return header

    @classmethod
    def load(cls, csv_path: str | Path) -> "VectorizedWect":
        csv_path = Path(csv_path)
        head = json.loads(csv_path.with_suffix(".json").read_text())
        vals = np.loadtxt(csv_path, delimiter=",", ndmin=2)
        if vals.shape != (head["n_s"], head["n_v"]):
            raise ValueError(f"CSV shape {vals.shape} disagrees with header {head}")
        return cls(vals, float(head["t_min"]), float(head["t_max"]))


def vectorize(wect: Wect, n_v: int, t_min: float, t_max: float) -> VectorizedWect:
    ts = sample_thresholds(n_v, t_min, t_max)
    values = np.array([c(ts) for c in wect.curves]).reshape(wect.n_s, n_v)
    return VectorizedWect(values, float(t_min), float(t_max))


class WectSampler:
    """Vectorized WECTs for many weightings of one fixed complex.

    Lower-star heights depend on geometry only, so for a fixed support the
    sampled transform is a linear map of the signed simplex weights.  The map
    is assembled once and applied to whole batches of vertex weights.
    """

    def __init__(self, cx: WeightedComplex, n_s: int, n_v: int, t_min: float, t_max: float,
                 first_angle: float = DEFAULT_FIRST_ANGLE):
        self.cx = cx
        self.directions = equally_spaced_directions(n_s, first_angle)
        self.thresholds = sample_thresholds(n_v, t_min, t_max)
        self.t_min, self.t_max = float(t_min), float(t_max)
        n_simp = sum(cx.counts)
        cols, rows = [], []
        for d, s in enumerate(self.directions):
            h = np.concatenate(height_filter(cx, s))
            first = np.searchsorted(self.thresholds, h, side="left")
            inside = first < n_v
            rows.append(np.flatnonzero(inside))
            cols.append(d * n_v + first[inside])
        rows = np.concatenate(rows) if rows else np.zeros(0, int)
        cols = np.concatenate(cols) if cols else np.zeros(0, int)
        self._onehot = sparse.csr_matrix(
            (np.ones(len(rows)), (rows, cols)), shape=(n_simp, n_s * n_v))
        self.shape = (n_s, n_v)

    def signed_weights(self, vertex_weights: np.ndarray, extension: str) -> np.ndarray:
        vw = np.atleast_2d(np.asarray(vertex_weights, dtype=float))
        return np.concatenate([
            vw,
            -extend_cells(vw, self.cx.edges, extension),
            extend_cells(vw, self.cx.triangles, extension),
        ], axis=1)

    def transform(self, vertex_weights: np.ndarray, extension: str) -> np.ndarray:
        """``(B, n_s, n_v)`` sampled WECTs for a ``(B, V)`` batch of vertex weights."""
        sw = self.signed_weights(vertex_weights, extension)
        jumps = np.asarray((self._onehot.T @ sw.T).T).reshape((len(sw),) + self.shape)
        return np.cumsum(jumps, axis=2)

    def vectorized(self, vertex_weights: np.ndarray, extension: str) -> VectorizedWect:
        return VectorizedWect(self.transform(vertex_weights, extension)[0], self.t_min, self.t_max)
