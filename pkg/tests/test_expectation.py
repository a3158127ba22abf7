import numpy as np
import pytest

from wectkit.complex import complex_from_mask, extend_weights, triangulate, weighted_euler_characteristic
from wectkit.expectation import (expected_simplex_weights, expected_wec, expected_wec_avg,
                                 expected_wec_order_stat, expected_wecf, monte_carlo_wecf_mean,
                                 square_max_expected_wecf)
from wectkit.filtration import Direction, compute_wecf, equally_spaced_directions
from wectkit.intensity import STUDY_MODELS, UNIFORM, IntensityModel, UnsupportedModelError
from wectkit.shapes import support


def full(n, m=None):
    m = m or n
    side = max(n, m) | 1
    mask = np.zeros((side, side), bool)
    mask[:n, :m] = True
    return complex_from_mask(mask)


@pytest.mark.parametrize("n", [1, 3, 9, 17])
def test_square_avg_is_half(n):
    for model in STUDY_MODELS:
        assert expected_wec_avg(full(n), model) == pytest.approx(0.5)


def test_avg_empty_and_annulus():
    assert expected_wec_avg(complex_from_mask(np.zeros((3, 3), bool))) == 0
    assert expected_wec_avg(complex_from_mask(support("annulus"))) == 0


@pytest.mark.parametrize("n", [1, 2, 3, 4, 9, 15])
def test_square_max_min(n):
    assert expected_wec_order_stat(full(n), "max") == pytest.approx((5 - 2 * n) / 6)
    assert expected_wec_order_stat(full(n), "min") == pytest.approx((2 * n + 1) / 6)


@pytest.mark.parametrize("n,m", [(2, 5), (3, 7), (6, 4)])
def test_rectangle_max_min(n, m):
    assert expected_wec_order_stat(full(n, m), "min") == pytest.approx((n + m + 1) / 6)
    assert expected_wec_order_stat(full(n, m), "max") == pytest.approx((5 - n - m) / 6)


def test_single_vertex_both_extensions():
    for ext in ("max", "min"):
        assert expected_wec_order_stat(full(1), ext) == pytest.approx(0.5)
    assert expected_wec_order_stat(full(3), "max") == pytest.approx(-1 / 6)


def test_order_statistic_constants_by_simulation():
    r = np.random.default_rng(0)
    u = r.random((10**6, 3))
    assert u[:, :2].max(axis=1).mean() == pytest.approx(2 / 3, abs=1e-2)
    assert u.max(axis=1).mean() == pytest.approx(3 / 4, abs=1e-2)
    assert u.min(axis=1).mean() == pytest.approx(1 / 4, abs=1e-2)
    assert expected_simplex_weights("max") == pytest.approx((1 / 2, 2 / 3, 3 / 4))
    assert expected_simplex_weights("min") == pytest.approx((1 / 2, 1 / 3, 1 / 4))


def test_order_statistics_refuse_normal_models():
    with pytest.raises(UnsupportedModelError):
        expected_wec(full(3), "max", STUDY_MODELS[1])
    with pytest.raises(UnsupportedModelError):
        expected_wecf(full(3), (0, 1), "min", STUDY_MODELS[2])
    assert expected_wec(full(3), "avg", STUDY_MODELS[1]) == pytest.approx(0.5)


@pytest.mark.parametrize("n", [3, 9, 65])
def test_square_max_wecf_piecewise(n):
    cx = full(n)
    f = expected_wecf(cx, (0, 1), "max")
    h = (n - 1) / 2
    ts = np.concatenate([np.linspace(-h - 3, h + 3, 4 * n + 1), np.arange(-h, h + 1)])
    want = [square_max_expected_wecf(n, t) for t in ts]
    assert np.allclose(f(ts), want, atol=1e-12)
    assert f(-h - 0.5) == 0
    assert f(h) == pytest.approx((5 - 2 * n) / 6)
    # junction at t = (n-1)/2: (5 - n - n)/6 equals the terminal value
    assert square_max_expected_wecf(n, h) == pytest.approx((5 - n - n) / 6)
    assert square_max_expected_wecf(n, h + 10) == pytest.approx((5 - 2 * n) / 6)


def test_expected_avg_wecf_is_half_of_sublevel_ec():
    mask = support("tetris")
    cx = complex_from_mask(mask)
    ones = extend_weights(cx, "avg")
    for d in equally_spaced_directions(5):
        f = expected_wecf(cx, d, "avg")
        g = compute_wecf(ones, d)
        assert np.array_equal(f.heights, g.heights)
        assert np.allclose(f.values, 0.5 * g.values)


def test_expected_wecf_terminal_value():
    for name in ("disc", "swiss_cheese"):
        cx = complex_from_mask(support(name))
        for ext in ("max", "min", "avg"):
            f = expected_wecf(cx, Direction(0.3), ext)
            assert f.final_value == pytest.approx(expected_wec(cx, ext))


def test_single_vertex_expected_wecf():
    cx = full(1)
    for ext in ("max", "min", "avg"):
        assert expected_wecf(cx, Direction(2.0), ext).pairs() == [(0.0, 0.5)]


def test_monte_carlo_constant_model_has_zero_std():
    mask = support("square")
    mc = monte_carlo_wecf_mean(mask, IntensityModel("constant", value=0.7), "max", (0, 1), 5, seed=1)
    assert not mc.std.any()
    cx = extend_weights(triangulate(np.where(mask, 0.7, 0.0)), "max")
    assert np.allclose(mc.mean, compute_wecf(cx, (0, 1))(mc.thresholds))


def test_monte_carlo_square_max_tracks_closed_form():
    mask = np.ones((15, 15), bool)
    mc = monte_carlo_wecf_mean(mask, UNIFORM, "max", (0, 1), 400, seed=3)
    se = mc.standard_error
    assert np.all(np.abs(mc.mean - mc.expected) <= 4 * se + 1e-12)


def test_monte_carlo_csv(tmp_path):
    mc = monte_carlo_wecf_mean(np.ones((5, 5), bool), UNIFORM, "avg", (1, 0), 10, seed=0)
    mc.write_csv(tmp_path / "e.csv")
    lines = (tmp_path / "e.csv").read_text().splitlines()
    assert lines[0] == "threshold,mean,std,expected"
    assert len(lines) == len(mc.thresholds) + 1
    with pytest.raises(ValueError):
        monte_carlo_wecf_mean(np.ones((3, 3), bool), UNIFORM, "avg", (1, 0), 1, seed=0)


def test_full_grid_weighted_ec_mean_is_distribution_free():
    r = np.random.default_rng(11)
    cx = complex_from_mask(np.ones((9, 9), bool))
    for model in STUDY_MODELS:
        vals = [weighted_euler_characteristic(extend_weights(
            triangulate(model.sample((9, 9), r)), "avg")) for _ in range(2000)]
        assert abs(np.mean(vals) - 0.5) < 4 * np.std(vals, ddof=1) / np.sqrt(len(vals))
