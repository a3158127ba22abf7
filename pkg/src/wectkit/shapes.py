"""Synthetic shape supports, intensity sampling and seeded datasets."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from .complex import Image, write_image_csv
from .intensity import IntensityModel

SHAPES = ("disc", "square", "tetris", "annulus", "clusters", "swiss_cheese", "square_annulus")


@lru_cache(maxsize=1)
def _geometry_table() -> dict:
    return json.loads(resources.files("wectkit").joinpath("data/shapes.json").read_text())


def table_pixel_counts() -> dict[str, int]:
    return dict(_geometry_table()["pixel_counts"])


@dataclass(frozen=True)
class ShapeSpec:
    kind: str
    params: dict = field(default_factory=dict, hash=False, compare=True)
    n: int = 65

    @classmethod
    def named(cls, name: str, n: int | None = None) -> "ShapeSpec":
        table = _geometry_table()
        if name not in table["shapes"]:
            raise ValueError(f"unknown shape {name!r}; expected one of {SHAPES}")
        return cls(name, dict(table["shapes"][name]), n or table["n"])

    def __hash__(self):
        return hash((self.kind, json.dumps(self.params, sort_keys=True), self.n))


def _lattice(n: int):
    h = (n - 1) // 2
    y, x = np.mgrid[h:-h - 1:-1, -h:h + 1]
    return x, y


def _disc(x, y, r2, cx=0, cy=0):
    return (x - cx) ** 2 + (y - cy) ** 2 <= r2


def _box(x, y, width, height, cx=0, cy=0):
    # Odd sides stay centred on a lattice point; even sides extend to the right/top.
    left = cx - (width - 1) // 2
    bottom = cy - (height - 1) // 2
    return (x >= left) & (x < left + width) & (y >= bottom) & (y < bottom + height)


def generate_support(spec: ShapeSpec) -> np.ndarray:
    """Boolean ``n x n`` mask of the shape; raises if it reaches the outer pixel ring."""
    x, y = _lattice(spec.n)
    p = spec.params
    geom = p.get("kind", spec.kind)
    cx, cy = p.get("center", (0, 0))
    if geom == "disc":
        mask = _disc(x, y, p["r2"], cx, cy)
    elif geom == "rect":
        mask = _box(x, y, p["width"], p["height"], cx, cy)
    elif geom == "annulus":
        mask = _disc(x, y, p["outer_r2"], cx, cy) & ~_disc(x, y, p["inner_r2"], cx, cy)
    elif geom == "square_ring":
        mask = _box(x, y, p["outer"], p["outer"], cx, cy) & ~_box(x, y, p["inner"], p["inner"], cx, cy)
    elif geom == "discs":
        mask = np.zeros_like(x, dtype=bool)
        for dx, dy, r2 in p["discs"]:
            mask |= _disc(x, y, r2, dx, dy)
    elif geom == "holed_disc":
        mask = _disc(x, y, p["r2"], cx, cy)
        for hx, hy, r2 in p["holes"]:
            mask &= ~_disc(x, y, r2, hx, hy)
    elif geom == "tee":
        top = p["top"]
        bar_bottom = top - p["bar_height"] + 1
        stem_bottom = bar_bottom - p["stem_height"]
        bar = (np.abs(x) <= (p["bar_width"] - 1) // 2) & (y >= bar_bottom) & (y <= top)
        stem = (np.abs(x) <= (p["stem_width"] - 1) // 2) & (y >= stem_bottom) & (y < bar_bottom)
        mask = bar | stem
    else:
        raise ValueError(f"unknown geometry {geom!r}")
    ring = np.ones_like(mask)
    ring[1:-1, 1:-1] = False
    if np.any(mask & ring):
        raise ValueError(f"shape {spec.kind!r} does not fit strictly inside the {spec.n}x{spec.n} grid")
    return mask


@lru_cache(maxsize=64)
def support(name: str, n: int = 65) -> np.ndarray:
    m = generate_support(ShapeSpec.named(name, n))
    m.setflags(write=False)
    return m


def calibrate_disc_r2(target: int, n: int = 65) -> int:
    """Smallest integer squared radius whose lattice disc has ``target`` points."""
    x, y = _lattice(n)
    r2 = x ** 2 + y ** 2
    for k in range(int(r2.max()) + 1):
        c = int((r2 <= k).sum())
        if c == target:
            return k
        if c > target:
            break
    raise ValueError(f"no centred lattice disc has exactly {target} points")


def image_seed(seed: int, class_index: int, image_index: int) -> int:
    ss = np.random.SeedSequence(seed, spawn_key=(class_index, image_index))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def sample_intensities(mask: np.ndarray, model: IntensityModel, seed) -> Image:
    """Image that is 0 off the mask and i.i.d. ``model`` draws on it (row-major)."""
    mask = np.asarray(mask, dtype=bool)
    rng = np.random.default_rng(seed)
    img = np.zeros(mask.shape)
    img[mask] = model.sample(int(mask.sum()), rng)
    return Image(img)


@dataclass(frozen=True)
class ClassSpec:
    shape: str
    model: IntensityModel

    @property
    def label(self) -> str:
        return f"{self.shape}/{self.model.name}"


@dataclass(frozen=True)
class DatasetSpec:
    classes: tuple[ClassSpec, ...]
    count: int = 250
    seed: int = 0
    extension: str = "max"
    n: int = 65
    test_fraction: float = 0.2

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("count must be positive")
        if not self.classes:
            raise ValueError("at least one class required")

    def class_sizes(self) -> list[int]:
        k = len(self.classes)
        return [self.count // k + (1 if i < self.count % k else 0) for i in range(k)]


def stratified_test_counts(sizes: Sequence[int], test_fraction: float = 0.2) -> list[int]:
    """Per-class test counts.

    The total is ``ceil(test_fraction * N)`` (at least one image stays in
    training when ``N >= 2``), shared proportionally to class size by largest
    remainder, ties to the lower class index.
    """
    total = sum(sizes)
    n_test = math.ceil(round(test_fraction * total, 9))
    if total >= 2:
        n_test = min(max(n_test, 1), total - 1)
    quotas = [test_fraction * s if total else 0.0 for s in sizes]
    scale = n_test / sum(quotas) if sum(quotas) else 0.0
    quotas = [q * scale for q in quotas]
    counts = [min(int(math.floor(q)), s) for q, s in zip(quotas, sizes)]
    order = sorted(range(len(sizes)), key=lambda i: (-(quotas[i] - counts[i]), i))
    for i in order:
        if sum(counts) >= n_test:
            break
        if counts[i] < sizes[i]:
            counts[i] += 1
    return counts


@dataclass
class Dataset:
    spec: DatasetSpec
    images: list[Image]
    labels: np.ndarray
    seeds: list[int]
    split: list[str]

    def manifest(self) -> dict:
        s = self.spec
        return {
            "count": s.count,
            "seed": s.seed,
            "n": s.n,
            "extension": s.extension,
            "classes": [{"shape": c.shape, "distribution": c.model.name} for c in s.classes],
            "images": [
                {"file": f"img_{i:05d}.csv", "label": int(lab), "seed": sd, "split": sp}
                for i, (lab, sd, sp) in enumerate(zip(self.labels, self.seeds, self.split))
            ],
        }

    def indices(self, split: str) -> np.ndarray:
        return np.array([i for i, s in enumerate(self.split) if s == split], dtype=int)


def generate_dataset(spec: DatasetSpec) -> Dataset:
    """Seeded images for every class plus a stratified train/test split.

    Each class keeps its last images for testing.
    """
    sizes = spec.class_sizes()
    tests = stratified_test_counts(sizes, spec.test_fraction)
    images, labels, seeds, split = [], [], [], []
    for ci, (cls, size, n_test) in enumerate(zip(spec.classes, sizes, tests)):
        mask = support(cls.shape, spec.n)
        for j in range(size):
            sd = image_seed(spec.seed, ci, j)
            images.append(sample_intensities(mask, cls.model, sd))
            labels.append(ci)
            seeds.append(sd)
            split.append("test" if j >= size - n_test else "train")
    return Dataset(spec, images, np.array(labels, dtype=int), seeds, split)


def write_dataset(ds: Dataset, out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = ds.manifest()
    for entry, img in zip(manifest["images"], ds.images):
        write_image_csv(img, out / entry["file"])
        sidecar = {"n": img.n, "seed": entry["seed"],
                   "shape": ds.spec.classes[entry["label"]].shape,
                   "distribution": ds.spec.classes[entry["label"]].model.name}
        (out / entry["file"]).with_suffix(".json").write_text(json.dumps(sidecar, sort_keys=True) + "\n")
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    return path


def directory_digest(path: str | Path) -> str:
    """SHA-256 over relative file names and contents, in sorted order."""
    root = Path(path)
    h = hashlib.sha256()
    for f in sorted(p for p in root.rglob("*") if p.is_file()):
        h.update(str(f.relative_to(root)).encode())
        h.update(f.read_bytes())
    return h.hexdigest()
