import json

import numpy as np
import pytest

from wectkit.complex import complex_from_mask, euler_characteristic
from wectkit.intensity import STUDY_MODELS, UNIFORM, IntensityModel
from wectkit.shapes import (SHAPES, ClassSpec, DatasetSpec, ShapeSpec, calibrate_disc_r2,
                            directory_digest, generate_dataset, generate_support, image_seed,
                            sample_intensities, stratified_test_counts, support, table_pixel_counts,
                            write_dataset)

EXPECTED_EC = {"disc": 1, "square": 1, "tetris": 1, "annulus": 0, "clusters": 5,
               "swiss_cheese": -5, "square_annulus": 0}


@pytest.mark.parametrize("name", SHAPES)
def test_pixel_counts_match_table(name):
    mask = support(name)
    assert mask.shape == (65, 65)
    assert int(mask.sum()) == table_pixel_counts()[name]


@pytest.mark.parametrize("name", SHAPES)
def test_boundary_ring_is_empty(name):
    m = support(name)
    assert not (m[0].any() or m[-1].any() or m[:, 0].any() or m[:, -1].any())


@pytest.mark.parametrize("name", SHAPES)
def test_topology(name):
    assert euler_characteristic(complex_from_mask(support(name))) == EXPECTED_EC[name]


@pytest.mark.parametrize("name", ["disc", "annulus", "square", "square_annulus"])
def test_four_fold_rotation_invariance(name):
    m = support(name)
    for k in range(1, 4):
        assert np.array_equal(np.rot90(m, k), m)


def test_disc_calibration_and_degenerate_disc():
    assert calibrate_disc_r2(1257) == 400
    assert int(generate_support(ShapeSpec("disc", {"r2": 0})).sum()) == 1
    with pytest.raises(ValueError):
        calibrate_disc_r2(2)
    with pytest.raises(ValueError):
        generate_support(ShapeSpec("disc", {"r2": 33 ** 2}))
    with pytest.raises(ValueError):
        ShapeSpec.named("star")


def test_support_is_read_only():
    with pytest.raises(ValueError):
        support("disc")[0, 0] = True


def test_sampling_determinism_and_support():
    mask = support("annulus")
    a = sample_intensities(mask, UNIFORM, 42)
    b = sample_intensities(mask, UNIFORM, 42)
    assert np.array_equal(a.intensities, b.intensities)
    assert not a.intensities[~mask].any()
    assert a.intensities[mask].min() > 0


def test_uniform_mean():
    x = sample_intensities(np.ones((317, 317), bool), UNIFORM, 1).intensities
    assert x.size > 10**5
    assert abs(x.mean() - 0.5) < 0.01


def test_truncated_normals_in_unit_interval():
    r = np.random.default_rng(0)
    raw = r.normal(0.5, 0.17, 10**5)
    assert np.mean((raw > 0) & (raw <= 1)) >= 0.99
    for model in STUDY_MODELS[1:]:
        x = model.sample(10**5, r)
        assert x.min() > 0 and x.max() <= 1
        assert abs(x.mean() - 0.5) < 0.01
    # spread shrinks as sigma shrinks
    stds = [m.sample(20000, r).std() for m in STUDY_MODELS[1:]]
    assert stds[0] < stds[1] < stds[2] < np.sqrt(1 / 12) + 0.01


def test_model_parsing():
    assert IntensityModel.parse("N(0.5,0.17)") == STUDY_MODELS[1]
    assert IntensityModel.parse("normal:0.25") == STUDY_MODELS[2]
    assert IntensityModel.parse("U(0,1)") == UNIFORM
    assert IntensityModel.parse("const:0.3").sample(3, None).tolist() == [0.3] * 3
    with pytest.raises(ValueError):
        IntensityModel.parse("poisson")


def test_image_seeds_are_distinct():
    seeds = {image_seed(0, c, i) for c in range(2) for i in range(200)}
    assert len(seeds) == 400
    assert image_seed(0, 0, 0) != image_seed(1, 0, 0)


@pytest.mark.parametrize("sizes,want", [([125, 125], [25, 25]), ([1, 1], [1, 0]), ([2], [1]),
                                        ([1], [1]), ([10, 5], [2, 1]), ([3, 3, 3], [1, 1, 0])])
def test_stratified_counts(sizes, want):
    assert stratified_test_counts(sizes) == want


def test_dataset_split_250():
    spec = DatasetSpec((ClassSpec("square", UNIFORM), ClassSpec("square", STUDY_MODELS[1])), count=250)
    ds = generate_dataset(spec)
    assert len(ds.images) == 250 and np.bincount(ds.labels).tolist() == [125, 125]
    assert len(ds.indices("train")) == 200 and len(ds.indices("test")) == 50
    assert np.bincount(ds.labels[ds.indices("test")]).tolist() == [25, 25]


def test_dataset_count_two():
    spec = DatasetSpec((ClassSpec("disc", UNIFORM),), count=2)
    ds = generate_dataset(spec)
    assert ds.split == ["train", "test"]
    with pytest.raises(ValueError):
        DatasetSpec((ClassSpec("disc", UNIFORM),), count=0)


def test_dataset_files_are_reproducible(tmp_path):
    spec = DatasetSpec((ClassSpec("tetris", STUDY_MODELS[3]),), count=4, seed=7)
    write_dataset(generate_dataset(spec), tmp_path / "a")
    write_dataset(generate_dataset(spec), tmp_path / "b")
    assert (tmp_path / "a/manifest.json").read_bytes() == (tmp_path / "b/manifest.json").read_bytes()
    assert directory_digest(tmp_path / "a") == directory_digest(tmp_path / "b")
    side = json.loads((tmp_path / "a/img_00000.json").read_text())
    assert side == {"n": 65, "seed": image_seed(7, 0, 0), "shape": "tetris", "distribution": "N(0.5,0.5)"}
