import json

import numpy as np
import pytest

import mane


def test_swiss_roll_and_split():
    points, labels = mane.gen_swiss_roll(300, 0.0, 1)
    assert points.shape == (300, 3)
    assert len(labels) == 300
    split = mane.split_shared(300, 50, 2, 7)
    assert len(split["seed_indices"]) == 50
    assert sorted(len(p) for p in split["partitions"]) == [125, 125]


def test_knn_matches_numpy():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(80, 4))
    idx, dist = mane.knn(x, 5)
    d2 = ((x[:, None, :] - x[None, :, :]) ** 2).sum(-1)
    np.fill_diagonal(d2, np.inf)
    expected = np.argsort(d2, axis=1, kind="stable")[:, :5]
    assert np.array_equal(idx, expected)
    assert np.allclose(dist, np.sqrt(np.take_along_axis(d2, expected, axis=1)))


def test_fuzzy_graph_and_kernel():
    rng = np.random.default_rng(1)
    i, j, w = mane.fuzzy_graph(rng.normal(size=(60, 3)), 6)
    assert all(a < b for a, b in zip(i, j))
    assert max(w) == 1.0 and min(w) > 0.0
    a, b = mane.fit_ab(0.1)
    assert abs(a - 1.58) < 0.02 and abs(b - 0.90) < 0.02


def test_pca_axes_orthonormal():
    rng = np.random.default_rng(2)
    x = rng.normal(size=(100, 6)) * np.array([5, 3, 1, 1, 1, 1])
    mean, axes, var = mane.pca_axes(x, 2)
    assert axes.shape == (6, 2)
    assert np.allclose(axes.T @ axes, np.eye(2), atol=1e-10)
    assert var[0] >= var[1]


def test_mane_anchors_shared():
    points, _ = mane.gen_swiss_roll(400, 0.0, 3)
    split = mane.split_shared(400, 80, 2, 3)
    cfg = mane.OptimizerConfig()
    cfg.n_epochs = 30
    cfg.n_neighbors = 10
    views = mane.embed_mane(points, split, cfg)
    assert len(views) == 2
    assert np.array_equal(views[0][:80], views[1][:80])
    assert mane.anchor_drift(views, 80) == 0.0
    assert mane.procrustes_distance(views[0][:80], views[1][:80]) == 0.0
    report = mane.evaluate(points, split, views)
    assert report["anchor_drift"] == 0.0
    assert 0.0 <= report["trustworthiness_union"] <= 1.0


def test_umap_trustworthiness():
    points, _ = mane.gen_swiss_roll(300, 0.0, 4)
    cfg = mane.OptimizerConfig()
    cfg.n_epochs = 50
    cfg.n_neighbors = 10
    y = mane.embed_umap(points, cfg)
    assert y.shape == (300, 2)
    assert mane.trustworthiness(points, y, 5) > 0.9


def test_errors_are_raised():
    with pytest.raises(mane.Error):
        mane.knn(np.zeros((3, 2)), 5)
    with pytest.raises(mane.Error):
        mane.split_shared(10, 10, 2)


def test_experiment(tmp_path):
    cfg = mane.OptimizerConfig()
    cfg.n_epochs = 20
    cfg.n_neighbors = 8
    report = mane.run_swiss_roll_experiment(300, 0.0, 60, 2, cfg, str(tmp_path / "run"))
    assert report["metrics"]["anchor_drift"] == 0.0
    assert (tmp_path / "run" / "coordinates.csv").exists()
    assert json.loads((tmp_path / "run" / "report.json").read_text())["init_spread"] == 10.0
