import json

import numpy as np
import pytest

import knock


def test_default_config_matches_protocol():
    c = knock.default_config()
    assert c["hidden"] == [200, 200, 200]
    assert c["split"]["train_per_class"] == 100
    assert c["dataset"]["n_classes"] == 30


def test_synth_corpus_shapes():
    x, y = knock.synth_corpus(3, 4, seed=1)
    assert x.shape == (12, 500)
    assert sorted(set(y)) == [0, 1, 2]
    assert np.abs(x).max() <= 1.0


def test_window_anchors_at_peak():
    s = np.zeros(800)
    s[300] = -0.5
    s[301] = 0.25
    w = knock.window(s)
    assert w.shape == (500,)
    assert w[0] == -0.5 and w[1] == 0.25


def test_mfcc_feature_length():
    rng = np.random.default_rng(0)
    f = knock.mfcc_feature(rng.uniform(-1, 1, 500))
    assert f.shape == (36,)
    assert np.all(np.isfinite(f))


def test_wav_round_trip(tmp_path):
    s = np.sin(np.linspace(0, 20, 1000)) * 0.5
    knock.save_wav(tmp_path / "a.wav", s, 8000)
    back, rate = knock.load_wav(tmp_path / "a.wav")
    assert rate == 8000
    assert np.max(np.abs(back - s)) <= 1.0 / 32768


def test_bad_wav_raises(tmp_path):
    (tmp_path / "bad.wav").write_bytes(b"not a wav file at all")
    with pytest.raises(knock.KnockError):
        knock.load_wav(tmp_path / "bad.wav")


def test_grad_check():
    assert knock.grad_check_random(5, seed=3) < 1e-6


@pytest.mark.parametrize("method", ["svm-mfcc", "sdae"])
def test_train_evaluate_save_load(tmp_path, method):
    c = knock.fast_config()
    c["method"] = method
    c["train"]["pretrain_epochs"] = 3
    c["train"]["finetune_epochs"] = 10
    c["timing_repetitions"] = 1
    model = knock.train(c)
    assert model.kind == method
    report = knock.evaluate(c, model)
    assert 0.0 <= report["accuracy"] <= 1.0
    assert len(report["confusion"]) == 3

    model.save(tmp_path / "m.json")
    back = knock.Model.load(tmp_path / "m.json")
    x, _ = knock.load_dataset(c)
    for w in x[:10]:
        assert back.predict(w) == model.predict(w)
        assert np.array_equal(back.scores(w), model.scores(w))


def test_run_experiment_is_deterministic():
    c = knock.fast_config()
    c["method"] = "svm-raw"
    a = knock.run_experiment(c)
    b = knock.run_experiment(c)
    assert a["accuracy"] == b["accuracy"]
    assert json.dumps(a["confusion"]) == json.dumps(b["confusion"])


def test_sweep_rows():
    c = knock.fast_config()
    c["method"] = "svm-raw"
    rows = knock.sweep(c, "denoising", repetitions=2)
    assert [r["value"] for r in rows] == ["0", "0.25"]
    assert all(len(r["accuracies"]) == 2 for r in rows)


def test_invalid_config_raises():
    with pytest.raises(knock.KnockError):
        knock.run_experiment({"method": "knn"})
