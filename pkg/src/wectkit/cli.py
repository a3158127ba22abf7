"""Command-line entry point: ``wectkit <subcommand> [--config PATH] [--out DIR] ...``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from pathlib import Path

import jsonschema
import numpy as np

from . import plotting
from .classify import (ExperimentSpec, FeatureCache, append_results, cross_shape_specs,
                       direction_sweep, mean_accuracy, run_many, same_shape_specs)
from .complex import EXTENSIONS, complex_from_mask, extend_weights, read_image_csv, triangulate
from .expectation import expected_wecf, monte_carlo_wecf_mean
from .filtration import Direction, as_direction, compute_wect, default_interval, sample_thresholds, vectorize
from .intensity import STUDY_MODELS, IntensityModel
from .metrics import CurveMetric, pairwise_wect_distances, vectorized_distance_matrix, write_distance_matrix
from .shapes import SHAPES, ClassSpec, DatasetSpec, generate_dataset, support, write_dataset

log = logging.getLogger("wectkit")

_class = {
    "type": "object",
    "properties": {"shape": {"enum": list(SHAPES)}, "distribution": {"type": "string"}},
    "required": ["shape", "distribution"],
    "additionalProperties": False,
}
_grid = {
    "n_s": {"type": "integer", "minimum": 1},
    "n_v": {"type": "integer", "minimum": 2},
    "t_min": {"type": "number"},
    "t_max": {"type": "number"},
    "extension": {"enum": list(EXTENSIONS)},
}
SCHEMAS = {
    "generate": {
        "type": "object",
        "properties": {
            "shape": {"enum": list(SHAPES)},
            "distribution": {"type": "string"},
            "classes": {"type": "array", "items": _class, "minItems": 1},
            "count": {"type": "integer", "minimum": 1},
            "seed": {"type": "integer"},
            "extension": {"enum": list(EXTENSIONS)},
            "n": {"type": "integer", "minimum": 1},
        },
        "additionalProperties": False,
    },
    "wect": {
        "type": "object",
        "properties": {"image": {"type": "string"}, "threshold": {"type": "number"}, **_grid},
        "additionalProperties": False,
    },
    "expect": {
        "type": "object",
        "properties": {
            "support": {"type": "string"},
            "n": {"type": "integer", "minimum": 1},
            "direction": {"oneOf": [{"type": "number"},
                                    {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}]},
            "distribution": {"type": "string"},
            "n_images": {"type": "integer", "minimum": 2},
            "seed": {"type": "integer"},
            **_grid,
        },
        "additionalProperties": False,
    },
    "distance": {
        "type": "object",
        "properties": {
            "images": {"type": "array", "items": {"type": "string"}, "minItems": 2},
            "metric": {"type": "string"},
            "aggregation": {"enum": ["integral", "max"]},
            "vectorized": {"type": "boolean"},
            **_grid,
        },
        "additionalProperties": False,
    },
    "experiment": {
        "type": "object",
        "properties": {
            "preset": {"enum": ["control", "same-shape", "knn", "cross"]},
            "experiments": {"type": "array", "items": {
                "type": "object",
                "properties": {"class_a": _class, "class_b": _class},
                "required": ["class_a", "class_b"],
            }},
            "shapes": {"type": "array", "items": {"enum": list(SHAPES)}},
            "seeds": {"type": "array", "items": {"type": "integer"}, "minItems": 1},
            "classifier": {"enum": ["svm", "knn"]},
            "kernel": {"enum": ["rbf", "linear", "linear-cd"]},
            "C": {"type": "number", "exclusiveMinimum": 0},
            "K": {"type": "integer", "minimum": 1},
            "metric": {"type": "string"},
            "aggregation": {"enum": ["integral", "max"]},
            "count": {"type": "integer", "minimum": 2},
            **_grid,
        },
        "additionalProperties": False,
    },
    "sweep": {
        "type": "object",
        "properties": {
            "shapes": {"type": "array", "items": {"enum": list(SHAPES)}, "minItems": 1},
            "directions": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
            "seeds": {"type": "array", "items": {"type": "integer"}, "minItems": 1},
            "distribution": {"type": "string"},
            "kernel": {"enum": ["rbf", "linear", "linear-cd"]},
            "count": {"type": "integer", "minimum": 2},
            **_grid,
        },
        "additionalProperties": False,
    },
}


class ConfigError(Exception):
    pass


def load_config(command: str, path: str | None) -> dict:
    cfg = {}
    if path:
        try:
            cfg = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        jsonschema.validate(cfg, SCHEMAS[command])
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"invalid {command} config at {where}: {exc.message}") from exc
    return cfg


def thread_count(flag: int | None) -> int:
    if flag:
        return flag
    env = os.environ.get("WECTKIT_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _model(text: str) -> IntensityModel:
    try:
        return IntensityModel.parse(text)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _interval(cfg: dict, n: int) -> tuple[float, float]:
    lo, hi = default_interval(n)
    return float(cfg.get("t_min", lo)), float(cfg.get("t_max", hi))


def _default_n_v(t_min: float, t_max: float) -> int:
    return max(2, int(round(t_max - t_min)) + 1)


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


# ---------------------------------------------------------------- subcommands

def cmd_generate(cfg: dict, out: Path, seed: int | None, threads: int, plot: bool) -> list[Path]:
    if "classes" in cfg:
        classes = tuple(ClassSpec(c["shape"], _model(c["distribution"])) for c in cfg["classes"])
    else:
        classes = (ClassSpec(cfg.get("shape", "square"), _model(cfg.get("distribution", "uniform"))),)
    spec = DatasetSpec(classes, cfg.get("count", 250), seed if seed is not None else cfg.get("seed", 0),
                       cfg.get("extension", "max"), cfg.get("n", 65))
    ds = generate_dataset(spec)
    manifest = write_dataset(ds, out)
    outputs = [manifest]
    if plot:
        fig, axes = plotting.plt.subplots(1, len(classes), figsize=(3 * len(classes), 3), squeeze=False)
        for ax, ci in zip(axes[0], range(len(classes))):
            first = int(np.flatnonzero(ds.labels == ci)[0])
            ax.imshow(ds.images[first].intensities, cmap="magma", vmin=0, vmax=1)
            ax.set_title(classes[ci].label, fontsize=8)
            ax.axis("off")
        outputs.append(plotting._save(fig, out / "examples.png"))
    return outputs


def cmd_wect(cfg: dict, out: Path, image_path: str | None, threads: int, plot: bool) -> list[Path]:
    path = image_path or cfg.get("image")
    if not path:
        raise ConfigError("an image path is required")
    image = read_image_csv(path)
    ext = cfg.get("extension", "max")
    cx = extend_weights(triangulate(image, cfg.get("threshold", 0.0)), ext)
    n_s = cfg.get("n_s", 15)
    t_min, t_max = _interval(cfg, image.n)
    n_v = cfg.get("n_v", _default_n_v(t_min, t_max))
    wect = compute_wect(cx, n_s, threads=threads)
    out.mkdir(parents=True, exist_ok=True)
    wect.save(out / "wect.json")
    vec = vectorize(wect, n_v, t_min, t_max)
    header = vec.save(out / "vector.csv")
    outputs = [out / "wect.json", out / "vector.csv", header]
    if plot:
        outputs.append(plotting.plot_wect_matrix(vec.values, t_min, t_max, out / "wect.png",
                                                 f"WECT ({ext} extension, {n_s} directions)"))
    return outputs


def _support_mask(name: str, n: int) -> np.ndarray:
    if name == "full":
        return np.ones((n, n), dtype=bool)
    if name == "empty":
        return np.zeros((n, n), dtype=bool)
    if name in SHAPES:
        return support(name, n)
    raise ConfigError(f"unknown support {name!r}; use full, empty or one of {SHAPES}")


def _direction(value) -> Direction:
    if value is None:
        return Direction(math.pi / 2)
    if isinstance(value, (int, float)):
        return Direction(float(value))
    return as_direction(value)


def cmd_expect(cfg: dict, out: Path, seed: int | None, threads: int, plot: bool) -> list[Path]:
    name = cfg.get("support", "full")
    n = cfg.get("n", 65 if name in SHAPES else 9)
    if n % 2 == 0:
        raise ConfigError("grid size n must be odd")
    mask = _support_mask(name, n)
    ext = cfg.get("extension", "avg")
    model = _model(cfg.get("distribution", "uniform"))
    s = _direction(cfg.get("direction"))
    t_min, t_max = _interval(cfg, n)
    n_v = cfg.get("n_v", _default_n_v(t_min, t_max))
    geometry = extend_weights(complex_from_mask(mask), ext)
    curve = expected_wecf(geometry, s, ext, model)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "expected_breakpoints.csv", ["height", "value"], curve.pairs())
    outputs = [out / "expected_breakpoints.csv"]
    ts = sample_thresholds(n_v, t_min, t_max)
    if cfg.get("n_images"):
        mc = monte_carlo_wecf_mean(mask, model, ext, s, cfg["n_images"],
                                   seed if seed is not None else cfg.get("seed", 0), n_v, t_min, t_max)
        mc.expected = curve(ts)
        mc.write_csv(out / "expected.csv")
        if plot:
            outputs.append(plotting.plot_mean_curve(ts, mc.mean, mc.std, out / "expected.png", mc.expected,
                                                    f"{model.name}, {ext}", f"{name} support"))
    else:
        _write_csv(out / "expected.csv", ["threshold", "expected"],
                   [[repr(float(t)), repr(float(v))] for t, v in zip(ts, curve(ts))])
        if plot:
            outputs.append(plotting.plot_step_curves({f"E[WECF] {ext}": curve}, t_min, t_max,
                                                     out / "expected.png", f"{name} support"))
    outputs.append(out / "expected.csv")
    return outputs


def cmd_distance(cfg: dict, out: Path, images: list[str], threads: int, plot: bool) -> list[Path]:
    paths = images or cfg.get("images", [])
    if len(paths) < 2:
        raise ConfigError("need at least two images")
    imgs = [read_image_csv(p) for p in paths]
    if len({im.n for im in imgs}) != 1:
        raise ConfigError("images must share a grid size")
    ext = cfg.get("extension", "max")
    n_s = cfg.get("n_s", 8)
    t_min, t_max = _interval(cfg, imgs[0].n)
    wects = [compute_wect(extend_weights(triangulate(im), ext), n_s, threads=threads) for im in imgs]
    out.mkdir(parents=True, exist_ok=True)
    if cfg.get("vectorized"):
        n_v = cfg.get("n_v", _default_n_v(t_min, t_max))
        vecs = np.array([vectorize(w, n_v, t_min, t_max).as_vector() for w in wects])
        D = vectorized_distance_matrix(vecs, vecs, n_s)
    else:
        D = pairwise_wect_distances(wects, wects, CurveMetric.parse(cfg.get("metric", "l2")),
                                    cfg.get("aggregation", "integral"), t_min, t_max)
    write_distance_matrix(D, out / "distances.csv")
    outputs = [out / "distances.csv"]
    if plot:
        fig, ax = plotting.plt.subplots(figsize=(4, 3.5))
        im = ax.imshow(D, cmap="viridis")
        ax.grid(False)
        fig.colorbar(im, ax=ax)
        outputs.append(plotting._save(fig, out / "distances.png"))
    print(json.dumps({"distances": D.tolist()}))
    return outputs


def _experiment_specs(cfg: dict, seed: int | None) -> list[ExperimentSpec]:
    seeds = cfg.get("seeds", [seed if seed is not None else 0])
    keys = ("extension", "n_s", "n_v", "t_min", "t_max", "classifier", "kernel", "C", "K",
            "metric", "aggregation", "count")
    kw = {k: cfg[k] for k in keys if k in cfg}
    shapes = tuple(cfg.get("shapes", SHAPES))
    preset = cfg.get("preset")
    if "experiments" in cfg:
        return [ExperimentSpec(ClassSpec(e["class_a"]["shape"], _model(e["class_a"]["distribution"])),
                               ClassSpec(e["class_b"]["shape"], _model(e["class_b"]["distribution"])),
                               seed=sd, **kw)
                for sd in seeds for e in cfg["experiments"]]
    if preset == "control":
        return same_shape_specs(shapes, STUDY_MODELS[:1], seeds, **kw)
    if preset == "knn":
        kw = {"classifier": "knn", "n_s": 8, "extension": "max", **kw}
        return same_shape_specs(shapes, STUDY_MODELS, seeds, **kw)
    if preset == "cross":
        return cross_shape_specs(shapes, STUDY_MODELS, seeds, **kw)
    return same_shape_specs(shapes, STUDY_MODELS, seeds, **kw)


def cmd_experiment(cfg: dict, out: Path, seed: int | None, threads: int, plot: bool) -> list[Path]:
    specs = _experiment_specs(cfg, seed)
    results = run_many(specs, threads)
    out.mkdir(parents=True, exist_ok=True)
    append_results(results, out / "results.csv")
    outputs = [out / "results.csv"]
    if plot:
        means = mean_accuracy(results, lambda r: (r.spec.class_b.shape, r.spec.class_b.model.name))
        table: dict = {}
        for (shape, dist), acc in means.items():
            table.setdefault(shape, {})[dist] = acc
        outputs.append(plotting.plot_accuracy_bars(table, out / "accuracy.png"))
    for r in results:
        log.info("%s vs %s seed=%d acc=%.3f", r.spec.class_a.label, r.spec.class_b.label, r.spec.seed, r.accuracy)
    return outputs


def cmd_sweep(cfg: dict, out: Path, seed: int | None, threads: int, plot: bool) -> list[Path]:
    shapes = cfg.get("shapes", list(SHAPES))
    dirs = cfg.get("directions", [2, 3, 5, 8, 15, 30])
    seeds = cfg.get("seeds", [seed if seed is not None else 0])
    model = _model(cfg.get("distribution", "N(0.5,0.25)"))
    kw = {k: cfg[k] for k in ("extension", "n_v", "t_min", "t_max", "kernel", "count") if k in cfg}
    cache = FeatureCache()
    table = {sh: direction_sweep(sh, dirs, seeds, model, cache, threads, **kw) for sh in shapes}
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "sweep.csv", ["shape", "n_s", "mean_accuracy", "seeds"],
               [[sh, k, repr(v), len(seeds)] for sh, acc in table.items() for k, v in acc.items()])
    outputs = [out / "sweep.csv"]
    if plot:
        outputs.append(plotting.plot_sweep(table, out / "sweep.png", f"U(0,1) vs {model.name}"))
    return outputs


# ---------------------------------------------------------------- entry point

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file")
    common.add_argument("--out", default="wectkit-out", help="output directory")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--threads", type=int, default=None,
                        help="parallelism cap (default: $WECTKIT_THREADS or all cores)")
    common.add_argument("--no-plot", dest="plot", action="store_false", help="skip PNG figures")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="wectkit", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("generate", parents=[common], help="write a seeded image dataset")
    w = sub.add_parser("wect", parents=[common], help="WECT of one image (JSON + vector CSV)")
    w.add_argument("image", nargs="?")
    sub.add_parser("expect", parents=[common], help="expected WECF curve (optionally with Monte Carlo)")
    d = sub.add_parser("distance", parents=[common], help="pairwise WECT distances between images")
    d.add_argument("images", nargs="*")
    sub.add_parser("experiment", parents=[common], help="classification experiments -> results CSV")
    sub.add_parser("sweep", parents=[common], help="accuracy against number of directions")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    out = Path(args.out)
    try:
        cfg = load_config(args.command, args.config)
        threads = thread_count(args.threads)
        if args.command == "generate":
            outputs = cmd_generate(cfg, out, args.seed, threads, args.plot)
        elif args.command == "wect":
            outputs = cmd_wect(cfg, out, args.image, threads, args.plot)
        elif args.command == "expect":
            outputs = cmd_expect(cfg, out, args.seed, threads, args.plot)
        elif args.command == "distance":
            outputs = cmd_distance(cfg, out, args.images, threads, args.plot)
        elif args.command == "experiment":
            outputs = cmd_experiment(cfg, out, args.seed, threads, args.plot)
        else:
            outputs = cmd_sweep(cfg, out, args.seed, threads, args.plot)
    except ConfigError as exc:
        print(f"wectkit: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"wectkit: error: {exc}", file=sys.stderr)
        return 1
    missing = [str(p) for p in outputs if not Path(p).is_file()]
    if missing:
        print(f"wectkit: error: outputs not written: {missing}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
