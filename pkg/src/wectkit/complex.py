"""Images, Freudenthal triangulations and weighted simplicial complexes.

Pixel ``(row, col)`` of an ``n x n`` image sits at the integer point
``x = col - (n - 1) / 2``, ``y = (n - 1) / 2 - row``: row 0 is the top of the
image and the centre pixel maps to the origin.  Every unit square of the grid
is split along the diagonal joining its top-left and bottom-right corners.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np

EXTENSIONS = ("max", "min", "avg")


class UnextendedWeightsError(RuntimeError):
    """Raised when edge/triangle weights are read before ``extend_weights``."""


@dataclass(frozen=True)
class Image:
    """Odd ``n x n`` grid of pixel intensities in ``[0, 1]``."""

    intensities: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.intensities, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"image must be square, got shape {a.shape}")
        if a.shape[0] % 2 == 0:
            raise ValueError(f"image side must be odd, got {a.shape[0]}")
        if not np.all(np.isfinite(a)) or a.min() < 0.0 or a.max() > 1.0:
            raise ValueError("intensities must lie in [0, 1]")
        a.setflags(write=False)
        object.__setattr__(self, "intensities", a)

    @property
    def n(self) -> int:
        return self.intensities.shape[0]

    @property
    def half(self) -> int:
        return (self.n - 1) // 2


def pixel_coordinates(n: int) -> np.ndarray:
    """``(n, n, 2)`` array of integer ``(x, y)`` locations of pixel centres."""
    h = (n - 1) // 2
    rows, cols = np.indices((n, n))
    return np.stack([cols - h, h - rows], axis=-1)


@dataclass(frozen=True)
class Simplex:
    dim: int
    vertices: tuple[tuple[int, int], ...]

    @property
    def key(self) -> tuple[int, tuple[tuple[int, int], ...]]:
        return (self.dim, tuple(sorted(self.vertices)))


@dataclass(frozen=True, eq=False)
class WeightedComplex:
    """Subcomplex of the Freudenthal triangulation with simplex weights.

    Simplices are stored as index arrays into ``coords``; ``edges`` is
    ``(E, 2)`` and ``triangles`` is ``(T, 3)``.  ``edge_weights`` and
    ``triangle_weights`` stay ``None`` until :func:`extend_weights` runs.
    """

    coords: np.ndarray
    edges: np.ndarray
    triangles: np.ndarray
    vertex_weights: np.ndarray
    n: int
    extension: str | None = None
    edge_weights: np.ndarray | None = None
    triangle_weights: np.ndarray | None = None
    _index: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        for name in ("coords", "edges", "triangles", "vertex_weights",
                     "edge_weights", "triangle_weights"):
            arr = getattr(self, name)
            if arr is not None:
                arr.setflags(write=False)

    @property
    def counts(self) -> tuple[int, int, int]:
        return len(self.coords), len(self.edges), len(self.triangles)

    @property
    def is_extended(self) -> bool:
        return self.extension is not None

    def weights(self, dim: int) -> np.ndarray:
        if dim == 0:
            return self.vertex_weights
        if not self.is_extended:
            raise UnextendedWeightsError(
                "edge and triangle weights are unset; call extend_weights first")
        return self.edge_weights if dim == 1 else self.triangle_weights

    def cells(self, dim: int) -> np.ndarray:
        """Vertex-index array of the ``dim``-simplices, shape ``(k, dim + 1)``."""
        if dim == 0:
            return np.arange(len(self.coords)).reshape(-1, 1)
        return self.edges if dim == 1 else self.triangles

    def simplices(self) -> Iterator[tuple[Simplex, float | None]]:
        """Yield every simplex with its weight (``None`` if not extended)."""
        for dim in range(3):
            w = self.weights(dim) if (dim == 0 or self.is_extended) else None
            for i, verts in enumerate(self.cells(dim)):
                pts = tuple(tuple(int(c) for c in self.coords[v]) for v in verts)
                yield Simplex(dim, pts), (None if w is None else float(w[i]))

    def vertex_index(self) -> dict[tuple[int, int], int]:
        if not self._index:
            self._index.update(
                {(int(x), int(y)): i for i, (x, y) in enumerate(self.coords)})
        return self._index


def _mask_complex(mask: np.ndarray):
    """Vertex, edge and triangle index arrays of the triangulation induced by ``mask``."""
    n = mask.shape[0]
    ids = -np.ones((n, n), dtype=np.int64)
    rows, cols = np.nonzero(mask)
    ids[rows, cols] = np.arange(len(rows))
    coords = pixel_coordinates(n)[rows, cols]

    def pairs(a, b):
        keep = (a >= 0) & (b >= 0)
        return np.stack([a[keep], b[keep]], axis=1)

    def triples(a, b, c):
        keep = (a >= 0) & (b >= 0) & (c >= 0)
        return np.stack([a[keep], b[keep], c[keep]], axis=1)

    tl, tr = ids[:-1, :-1], ids[:-1, 1:]
    bl, br = ids[1:, :-1], ids[1:, 1:]
    edges = np.concatenate([
        pairs(ids[:, :-1].ravel(), ids[:, 1:].ravel()),   # horizontal
        pairs(ids[:-1, :].ravel(), ids[1:, :].ravel()),   # vertical
        pairs(tl.ravel(), br.ravel()),                    # diagonal
    ]).reshape(-1, 2)
    triangles = np.concatenate([
        triples(tl.ravel(), tr.ravel(), br.ravel()),
        triples(tl.ravel(), bl.ravel(), br.ravel()),
    ]).reshape(-1, 3)
    return coords.astype(np.int64), edges, triangles, rows, cols


def triangulate(image: Image | np.ndarray, threshold: float = 0.0) -> WeightedComplex:
    """Freudenthal subcomplex on pixels brighter than ``threshold``.

    A pixel is kept iff its intensity is strictly greater than ``threshold``;
    an edge or triangle is kept iff all of its vertices are.
    """
    if not isinstance(image, Image):
        image = Image(image)
    if not 0.0 <= threshold < 1.0:
        raise ValueError(f"threshold must lie in [0, 1), got {threshold}")
    a = image.intensities
    coords, edges, triangles, rows, cols = _mask_complex(a > threshold)
    return WeightedComplex(coords, edges, triangles, a[rows, cols].copy(), image.n)


def complex_from_mask(mask: np.ndarray, vertex_weights: np.ndarray | None = None) -> WeightedComplex:
    """Complex induced by a boolean mask; weights default to 1 on the support."""
    mask = np.asarray(mask, dtype=bool)
    Image(mask.astype(float))  # shape validation
    coords, edges, triangles, rows, cols = _mask_complex(mask)
    if vertex_weights is None:
        w = np.ones(len(coords))
    else:
        w = np.asarray(vertex_weights, dtype=float)
        if w.shape == mask.shape:
            w = w[rows, cols]
        if w.shape != (len(coords),):
            raise ValueError("vertex_weights must be per-pixel or per-vertex")
    return WeightedComplex(coords, edges, triangles, w.copy(), mask.shape[0])


def extend_cells(vertex_weights: np.ndarray, cells: np.ndarray, extension: str) -> np.ndarray:
    """Extend vertex weights to the simplices in ``cells`` (last axis = vertices).

    ``vertex_weights`` may carry leading batch axes; the result has shape
    ``vertex_weights.shape[:-1] + (len(cells),)``.
    """
    if extension not in EXTENSIONS:
        raise ValueError(f"unknown extension {extension!r}; expected one of {EXTENSIONS}")
    vw = np.asarray(vertex_weights, dtype=float)
    if len(cells) == 0:
        return np.zeros(vw.shape[:-1] + (0,))
    gathered = vw[..., cells]
    if extension == "max":
        return gathered.max(axis=-1)
    if extension == "min":
        return gathered.min(axis=-1)
    return gathered.mean(axis=-1)


def extend_weights(cx: WeightedComplex, extension: str) -> WeightedComplex:
    """Return a copy of ``cx`` whose edges and triangles carry extended weights."""
    ew = extend_cells(cx.vertex_weights, cx.edges, extension)
    tw = extend_cells(cx.vertex_weights, cx.triangles, extension)
    return WeightedComplex(cx.coords, cx.edges, cx.triangles, cx.vertex_weights,
                           cx.n, extension, ew, tw)


def with_vertex_weights(cx: WeightedComplex, vertex_weights: np.ndarray,
                        extension: str | None = None) -> WeightedComplex:
    """Same geometry, new vertex weights (optionally extended right away)."""
    w = np.array(vertex_weights, dtype=float)
    if w.shape != (len(cx.coords),):
        raise ValueError("one weight per vertex required")
    out = WeightedComplex(cx.coords, cx.edges, cx.triangles, w, cx.n)
    return extend_weights(out, extension) if extension else out


def euler_characteristic(cx: WeightedComplex) -> int:
    v, e, t = cx.counts
    return v - e + t


def weighted_euler_characteristic(cx: WeightedComplex) -> float:
    return float(cx.weights(0).sum() - cx.weights(1).sum() + cx.weights(2).sum())


def read_image_csv(path: str | Path) -> Image:
    return Image(np.loadtxt(path, delimiter=",", ndmin=2))


def write_image_csv(image: Image, path: str | Path) -> None:
    np.savetxt(path, image.intensities, delimiter=",", fmt="%.17g", newline="\n")
