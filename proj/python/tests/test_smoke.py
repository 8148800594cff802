import numpy as np
import pytest

import dtwar


def test_dtw_matches_dist_p_on_its_path():
    rng = np.random.default_rng(0)
    x, z = rng.normal(size=(2, 9)), rng.normal(size=(2, 9))
    value, path = dtwar.dtw(x, z)
    assert path[0] == (1, 1) and path[-1] == (9, 9)
    assert dtwar.dist_p(x, z, path) == pytest.approx(value, abs=1e-12)
    assert dtwar.dist_p(x, z, dtwar.diagonal_path(9)) >= value
    assert dtwar.dtw_value(x, x) == 0.0


def test_soft_dtw_gradient_matches_finite_differences():
    rng = np.random.default_rng(1)
    x, z = rng.normal(size=6), rng.normal(size=6)
    value, grad = dtwar.soft_dtw(x, z, gamma=0.5)
    h = 1e-6
    for t in range(6):
        zp, zm = z.copy(), z.copy()
        zp[t] += h
        zm[t] -= h
        fd = (dtwar.soft_dtw(x, zp, 0.5)[0] - dtwar.soft_dtw(x, zm, 0.5)[0]) / (2 * h)
        assert grad[0, t] == pytest.approx(fd, rel=1e-5, abs=1e-7)


def test_paths():
    p = dtwar.random_path(12, 0.5, seed=3)
    assert p == dtwar.random_path(12, 0.5, seed=3)
    assert all(abs(i - j) <= 6 for i, j in p)
    assert dtwar.path_sim(p, p) == 0.0
    d = dtwar.diagonal_path(12)
    assert dtwar.path_sim(p, d) == dtwar.path_sim(d, p) > 0.0
    with pytest.raises(dtwar.Error):
        dtwar.path_sim([(1, 1), (3, 3)], [(1, 1), (2, 2), (3, 3)])


def test_train_attack_round_trip(tmp_path):
    xs, ys = dtwar.synth_two_class(60, 1, 16, seed=2)
    model = dtwar.Classifier("mlp", 1, 16, 2, seed=1)
    losses = model.fit(xs, ys, epochs=20)
    assert losses[-1] < losses[0]
    acc = np.mean([model.predict(x) == y for x, y in zip(xs, ys)])
    assert acc > 0.8

    ckpt = tmp_path / "m.ckpt"
    model.save(ckpt)
    loaded = dtwar.Classifier.load(ckpt)
    assert loaded.spec == model.spec
    assert loaded.forward(xs[0]) == model.forward(xs[0])

    delta = dtwar.calibrate_delta(xs, ys)
    y = model.predict(xs[0])
    r = dtwar.attack(model, xs[0], 1 - y, max_iters=300, delta=delta, path_seed=1001)
    assert r["x_adv"].shape == (1, 16)
    assert r["fooled"] == (model.predict(r["x_adv"]) == 1 - y)
    assert r["final_dtw"] == pytest.approx(dtwar.dtw_value(xs[0], r["x_adv"], "lp:2"))
    assert len(r["trace"]) == 301

    f = dtwar.attack(model, xs[0], 1 - y, method="fgs", eps=0.0)
    np.testing.assert_array_equal(f["x_adv"], xs[0])


def test_mds_and_errors():
    xs, ys = dtwar.synth_two_class(30, 1, 16, seed=4)
    coords, sil = dtwar.mds(xs, ys, "dtw")
    assert coords.shape == (30, 2)
    assert -1.0 <= sil <= 1.0
    with pytest.raises(dtwar.ConfigError):
        dtwar.mds(xs, ys, "cosine")
    with pytest.raises(ValueError):
        dtwar.dtw(np.zeros((2, 2, 2)), np.zeros(2))
