import numpy as np
import pytest

import pmtnet


def test_generate_shapes_and_balance():
    x, y = pmtnet.generate(4, seed=3)
    assert x.shape == (20, pmtnet.RINGS, pmtnet.COLUMNS)
    assert np.bincount(y, minlength=5).tolist() == [4] * 5
    assert (x >= 0).all()
    x2, y2 = pmtnet.generate(4, seed=3)
    assert np.array_equal(x, x2) and np.array_equal(y, y2)


def test_prepare_centers_hottest_column():
    x, _ = pmtnet.generate(3, seed=1)
    v = pmtnet.prepare(x)
    assert ((v >= 0) & (v <= 1)).all()
    assert (v.max(axis=1).argmax(axis=1) == 12).all()
    assert np.allclose(pmtnet.prepare(x, center=False), np.log1p(x) / 10)


def test_models_train_and_predict():
    x, y = pmtnet.generate(6, seed=2)
    v = pmtnet.prepare(x)
    cnn = pmtnet.Model.cnn(seed=1)
    assert cnn.kind == "cnn" and cnn.param_count == 37391
    trace = cnn.fit(v, y, epochs=2)
    assert len(trace) == 2
    p = cnn.predict_proba(v)
    assert p.shape == (30, 5) and np.allclose(p.sum(axis=1), 1)
    assert cnn.features(v).shape == (30, 26)

    cae = pmtnet.Model.cae()
    cae.fit(pmtnet.prepare(x, center=False), epochs=1)
    assert cae.features(v).shape == (30, 10)
    assert cae.reconstruct(v).shape == v.shape


def test_save_load_round_trip(tmp_path):
    x, _ = pmtnet.generate(2)
    v = pmtnet.prepare(x)
    m = pmtnet.Model.cnn(seed=5)
    m.save(str(tmp_path / "m.nlns"))
    back = pmtnet.Model.load(str(tmp_path / "m.nlns"))
    assert np.array_equal(back.predict_proba(v), m.predict_proba(v))


def test_errors_carry_kind():
    cae = pmtnet.Model.cae()
    with pytest.raises(pmtnet.PmtnetError, match="KindError"):
        cae.predict_proba(np.zeros((1, 8, 24)))
    with pytest.raises(pmtnet.PmtnetError, match="ShapeError"):
        pmtnet.prepare(np.zeros((2, 8, 23)))
    with pytest.raises(pmtnet.PmtnetError, match="ConfigError"):
        pmtnet.run_command("fly")


def test_metrics_tsne_kmeans():
    y = np.array([0, 1, 2, 3, 4])
    assert pmtnet.macro_f1(y, y) == 1.0
    rng = np.random.default_rng(0)
    pts = np.concatenate([rng.normal(c * 20, 1, size=(20, 3)) for c in range(3)])
    emb = pmtnet.tsne(pts, perplexity=10, iterations=300)
    assert emb.shape == (60, 2)
    labels = np.repeat(np.arange(3), 20)
    a = np.array(pmtnet.kmeans(emb, 3))
    assert all(len(set(a[labels == c])) == 1 for c in range(3))


def test_run_command_generate(tmp_path):
    log = pmtnet.run_command("generate", {"out": str(tmp_path), "counts": "2"})
    assert "train 10" in log
    assert (tmp_path / "train.dybs").stat().st_size == 10 + 769 * 10
