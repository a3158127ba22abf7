import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from wectkit.cli import main, thread_count
from wectkit.complex import write_image_csv, Image
from wectkit.filtration import VectorizedWect, Wect
from wectkit.shapes import directory_digest, support


def write_json(path, data):
    path.write_text(json.dumps(data))
    return str(path)


def test_generate_and_digest(tmp_path):
    cfg = write_json(tmp_path / "g.json", {"shape": "square", "distribution": "uniform", "count": 6})
    assert main(["generate", "--config", cfg, "--out", str(tmp_path / "a"), "--seed", "7", "--no-plot"]) == 0
    assert main(["generate", "--config", cfg, "--out", str(tmp_path / "b"), "--seed", "7", "--no-plot"]) == 0
    assert len(list((tmp_path / "a").glob("img_*.csv"))) == 6
    assert directory_digest(tmp_path / "a") == directory_digest(tmp_path / "b")
    manifest = json.loads((tmp_path / "a/manifest.json").read_text())
    assert manifest["seed"] == 7 and [e["split"] for e in manifest["images"]].count("test") == 2


def test_generate_writes_figure(tmp_path):
    cfg = write_json(tmp_path / "g.json", {"classes": [{"shape": "disc", "distribution": "U(0,1)"},
                                                       {"shape": "tetris", "distribution": "N(0.5,0.17)"}],
                                           "count": 4})
    assert main(["generate", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    assert (tmp_path / "o/examples.png").read_bytes()[:4] == b"\x89PNG"


def test_invalid_shape_is_schema_error(tmp_path, capsys):
    cfg = write_json(tmp_path / "bad.json", {"shape": "star"})
    assert main(["generate", "--config", cfg, "--out", str(tmp_path / "o")]) != 0
    err = capsys.readouterr().err
    assert "invalid generate config" in err and "star" in err
    assert not (tmp_path / "o").exists()


def test_unreadable_config(tmp_path, capsys):
    (tmp_path / "x.json").write_text("{not json")
    assert main(["sweep", "--config", str(tmp_path / "x.json")]) == 2
    assert "cannot read config" in capsys.readouterr().err


def test_wect_on_square_image(tmp_path):
    img = np.where(support("square"), 1 - np.random.default_rng(0).random((65, 65)), 0.0)
    write_image_csv(Image(img), tmp_path / "sq.csv")
    cfg = write_json(tmp_path / "w.json", {"n_s": 15, "n_v": 91, "t_min": -45, "t_max": 45, "extension": "max"})
    assert main(["wect", str(tmp_path / "sq.csv"), "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    vec = VectorizedWect.load(tmp_path / "o/vector.csv")
    assert vec.values.shape == (15, 91)
    w = Wect.load(tmp_path / "o/wect.json")
    assert w.n_s == 15 and w.extension == "max"
    assert (tmp_path / "o/wect.png").exists()
    text = (tmp_path / "o/vector.csv").read_text()
    assert "\r" not in text and ";" not in text


def test_wect_single_pixel_and_all_ones(tmp_path):
    write_image_csv(Image(np.array([[0.7]])), tmp_path / "one.csv")
    assert main(["wect", str(tmp_path / "one.csv"), "--out", str(tmp_path / "a"), "--no-plot"]) == 0
    w = json.loads((tmp_path / "a/wect.json").read_text())
    assert all(c == [[0.0, 0.7]] for c in w["curves"])
    write_image_csv(Image(np.ones((9, 9))), tmp_path / "ones.csv")
    assert main(["wect", str(tmp_path / "ones.csv"), "--out", str(tmp_path / "b"), "--no-plot"]) == 0
    vals = VectorizedWect.load(tmp_path / "b/vector.csv").values
    assert np.array_equal(vals, np.round(vals)) and vals[:, -1].tolist() == [1.0] * 15


def test_expect_square_max_and_empty(tmp_path):
    cfg = write_json(tmp_path / "e.json", {"support": "full", "n": 9, "extension": "max", "direction": [0, 1]})
    assert main(["expect", "--config", cfg, "--out", str(tmp_path / "a")]) == 0
    rows = list(csv.DictReader(open(tmp_path / "a/expected.csv")))
    by_t = {float(r["threshold"]): float(r["expected"]) for r in rows}
    assert by_t[-5.0] == 0 and by_t[-4.0] == pytest.approx(-5 / 6) and by_t[5.0] == pytest.approx(-13 / 6)
    cfg = write_json(tmp_path / "z.json", {"support": "empty", "n": 5, "extension": "avg"})
    assert main(["expect", "--config", cfg, "--out", str(tmp_path / "b"), "--no-plot"]) == 0
    assert (tmp_path / "b/expected_breakpoints.csv").read_text() == "height,value\n"


def test_expect_monte_carlo(tmp_path):
    cfg = write_json(tmp_path / "e.json", {"support": "square", "extension": "avg",
                                           "distribution": "N(0.5,0.25)", "n_images": 20})
    assert main(["expect", "--config", cfg, "--out", str(tmp_path / "a"), "--seed", "3"]) == 0
    head = (tmp_path / "a/expected.csv").read_text().splitlines()[0]
    assert head == "threshold,mean,std,expected"
    assert (tmp_path / "a/expected.png").exists()


def test_expect_rejects_max_for_normal_model(tmp_path, capsys):
    cfg = write_json(tmp_path / "e.json", {"support": "full", "n": 5, "extension": "max",
                                           "distribution": "N(0.5,0.17)"})
    assert main(["expect", "--config", cfg, "--out", str(tmp_path / "a")]) == 1
    assert "only available for U(0,1)" in capsys.readouterr().err


def test_distance(tmp_path, capsys):
    r = np.random.default_rng(0)
    paths = []
    for i in range(3):
        p = tmp_path / f"i{i}.csv"
        write_image_csv(Image(1 - r.random((7, 7))), p)
        paths.append(str(p))
    assert main(["distance", *paths, "--out", str(tmp_path / "d"), "--no-plot"]) == 0
    D = np.loadtxt(tmp_path / "d/distances.csv", delimiter=",")
    assert D.shape == (3, 3) and np.allclose(D, D.T) and not np.diag(D).any()
    out = json.loads(capsys.readouterr().out)
    assert np.allclose(out["distances"], D)
    cfg = write_json(tmp_path / "v.json", {"vectorized": True, "n_s": 4})
    assert main(["distance", *paths[:2], "--config", cfg, "--out", str(tmp_path / "v"), "--no-plot"]) == 0


def test_experiment_and_sweep(tmp_path):
    cfg = write_json(tmp_path / "x.json", {"experiments": [
        {"class_a": {"shape": "disc", "distribution": "uniform"},
         "class_b": {"shape": "disc", "distribution": "N(0.5,0.17)"}}], "count": 30, "seeds": [0, 1]})
    assert main(["experiment", "--config", cfg, "--out", str(tmp_path / "r"), "--threads", "2"]) == 0
    assert main(["experiment", "--config", cfg, "--out", str(tmp_path / "r"), "--no-plot"]) == 0
    rows = list(csv.DictReader(open(tmp_path / "r/results.csv")))
    assert len(rows) == 4 and rows[0]["accuracy"] == rows[2]["accuracy"]
    assert (tmp_path / "r/accuracy.png").exists()
    cfg = write_json(tmp_path / "s.json", {"shapes": ["square"], "directions": [2, 4], "count": 20})
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path / "s")]) == 0
    lines = (tmp_path / "s/sweep.csv").read_text().splitlines()
    assert lines[0] == "shape,n_s,mean_accuracy,seeds" and len(lines) == 3


def test_thread_count(monkeypatch):
    monkeypatch.setenv("WECTKIT_THREADS", "3")
    assert thread_count(None) == 3
    assert thread_count(5) == 5
    monkeypatch.delenv("WECTKIT_THREADS")
    assert thread_count(None) >= 1


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "wectkit.cli", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "generate" in proc.stdout
