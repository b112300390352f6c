import csv
import json
import os

import numpy as np
import pytest

from idkamc import harness as H
from idkamc.channel import ChannelCondition
from idkamc.constellation import get_format
from idkamc.errors import ConfigError

CONFIGS = os.path.join(os.path.dirname(__file__), "..", "configs")


def cfg(**over):
    base = {
        "formats": ["BPSK", "QPSK", "8PSK"],
        "seed": 5,
        "batch_size": 30,
        "signal_length": 256,
        "train": {"num_samples": 30, "condition": {"snr_db": 15}},
        "stream": [{"num_batches": 3, "condition": {"snr_db": [10, 20]}, "lots": 2}],
        "classifiers": ["idk_ogd", "idk_static", "fknn"],
        "idk": {"psi": 16, "t": 10},
    }
    base.update(over)
    return H.ExperimentConfig.from_dict(base)


def test_config_roundtrip_through_dict():
    c = cfg(trials=2)
    again = H.ExperimentConfig.from_dict(c.to_dict())
    assert again == c
    assert c.num_batches == 6 and len(c.lots) == 2


def test_bundled_configs_validate():
    for name in sorted(os.listdir(CONFIGS)):
        c = H.ExperimentConfig.from_json(os.path.join(CONFIGS, name))
        assert c.batch_size % c.m == 0


@pytest.mark.parametrize("over,field", [
    ({"formats": ["BPSK", "NOPE"]}, "formats"),
    ({"batch_size": 31}, "batch_size"),
    ({"train": {"num_samples": 1}}, "train.num_samples"),
    ({"stream": [{"num_batches": 0}]}, "stream[0].num_batches"),
    ({"stream": [{"num_batches": 2, "condition": {"snr_db": [20, 10]}}]}, "stream[0].condition.snr_db"),
    ({"stream": [{"num_batches": 2, "condition": {"snr": 3}}]}, "stream[0].condition"),
    ({"idk": {"psi": 16, "eta": 1}}, "idk.eta"),
    ({"classifiers": ["cnn"]}, "classifiers"),
    ({"trials": 1.5}, "trials"),
    ({"extra": 1}, "extra"),
])
def test_config_problems_name_the_field(over, field):
    with pytest.raises(ConfigError) as exc:
        cfg(**over)
    assert any(p.startswith(field) for p in exc.value.problems), exc.value.problems


def test_config_lists_every_problem():
    with pytest.raises(ConfigError) as exc:
        cfg(batch_size=31, classifiers=["cnn"], trials=0)
    assert len(exc.value.problems) == 3


def test_condition_spec_draws():
    spec = H.ConditionSpec.from_value({"snr_db": [10, 20], "iq_imbalance_db": {"choices": [0, 3]}})
    rng = np.random.default_rng(0)
    draws = [spec.draw(rng) for _ in range(200)]
    assert all(10 <= d.snr_db <= 20 for d in draws)
    assert {d.iq_imbalance_db for d in draws} == {0.0, 3.0}
    fixed = H.ConditionSpec.from_value({"snr_db": 7})
    assert fixed.fixed and not spec.fixed
    state = rng.bit_generator.state
    assert fixed.draw(rng) == ChannelCondition(7.0)
    assert rng.bit_generator.state == state


def test_training_labels_cover_every_format():
    fm = [get_format(n) for n in ("BPSK", "QPSK", "8PSK", "16QAM")]
    lab = H.training_labels(fm, 4, np.random.default_rng(1))
    assert sorted(lab) == sorted(f.id for f in fm)
    lab = H.training_labels(fm, 400, np.random.default_rng(1))
    assert set(lab) == {f.id for f in fm}


def test_stratified_batches():
    fm = [get_format(n) for n in ("BPSK", "QPSK", "8PSK")]
    lab = H.stratified_labels(fm, 30, np.random.default_rng(2))
    assert np.all(np.bincount(lab, minlength=10)[[f.id for f in fm]] == 10)


def test_separable_pair_at_30db():
    c = H.ExperimentConfig.from_dict({
        "formats": ["BPSK", "8ASK"], "seed": 0, "batch_size": 100, "signal_length": 1024,
        "train": {"num_samples": 100, "condition": {"snr_db": 30}},
        "stream": [{"num_batches": 1, "condition": {"snr_db": 30}}],
        "classifiers": ["idk_ogd", "fknn"],
    })
    log = H.run_experiment(c)
    assert log.accuracy("idk_ogd")[0, 0] >= 0.95
    assert log.accuracy("fknn")[0, 0] >= 0.95


def test_rows_confusion_and_accuracy_agree():
    c = cfg(trials=2)
    log = H.run_experiment(c)
    assert len(log.rows) == 2 * c.num_batches
    for tr in log.trials:
        for clf in c.classifiers:
            cm = tr.confusion[clf]
            assert np.all(cm.sum(axis=2) == c.batch_size // c.m)
            acc = np.trace(cm, axis1=1, axis2=2) / c.batch_size
            np.testing.assert_array_equal(acc, [r[f"acc_{clf}"] for r in tr.rows])
    # lot conditions are shared within a lot and inside the configured range
    rows = log.trials[0].rows
    assert rows[0]["snr_db"] == rows[2]["snr_db"] != rows[3]["snr_db"]
    assert all(10 <= r["snr_db"] <= 20 for r in rows)
    total = log.confusion("fknn")
    assert total.sum() == 2 * c.num_batches * c.batch_size


def test_trials_differ_and_threads_do_not_matter():
    c = cfg(trials=3)
    a = H.run_experiment(c, threads=1)
    b = H.run_experiment(c, threads=3)
    assert a.rows == b.rows
    assert a.trials[0].seed_entropy != a.trials[1].seed_entropy
    for x, y in zip(a.trials, b.trials):
        assert all(np.array_equal(u, v) for u, v in zip(x.final_weights, y.final_weights))


def test_static_copy_matches_warm_model_predictions():
    c = cfg(classifiers=["idk_static"])
    c2 = cfg(classifiers=["idk_ogd", "idk_static"], stream=[{"num_batches": 3, "labels_available": False}])
    a, b = H.run_trial(c, 0), H.run_trial(c2, 0)
    assert a.warm_weights is not None and a.final_weights is None
    # without labels the online model never moves, so it agrees with its frozen copy
    assert [r["acc_idk_ogd"] for r in b.rows] == [r["acc_idk_static"] for r in b.rows]


def test_labels_withheld_keeps_warm_weights():
    c = cfg(stream=[{"num_batches": 2, "labels_available": False, "lots": 2}])
    tr = H.run_trial(c, 0)
    assert all(np.array_equal(w, f) for w, f in zip(tr.warm_weights, tr.final_weights))
    assert all(r["labels_available"] == 0 for r in tr.rows)
    labeled = H.run_trial(cfg(), 0)
    assert not all(np.array_equal(w, f) for w, f in zip(labeled.warm_weights, labeled.final_weights))


def test_summary_windows():
    c = cfg(trials=2, window=4)
    log = H.run_experiment(c)
    s = [r for r in log.summary() if r["classifier"] == "fknn"]
    assert [(r["batch_start"], r["batch_end"]) for r in s] == [(0, 3), (4, 5)]
    acc = log.accuracy("fknn")
    per_trial = acc[:, :4].mean(axis=1)
    assert s[0]["mean_accuracy"] == pytest.approx(per_trial.mean())
    assert s[0]["stderr"] == pytest.approx(per_trial.std(ddof=1) / np.sqrt(2))


def test_write_metrics(tmp_path):
    c = cfg(trials=2)
    paths = H.write_metrics(H.run_experiment(c), tmp_path)
    with open(paths["metrics"]) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 12
    assert set(rows[0]) == set(H.METRICS_COLUMNS) | {f"acc_{x}" for x in c.classifiers}
    with open(paths["confusion"]) as fh:
        conf = list(csv.DictReader(fh))
    assert len(conf) == 3 * 9
    manifest = json.loads(open(paths["manifest"]).read())
    assert manifest["config"] == c.to_dict()
    assert set(manifest["trial_seed_entropy"]) == {"0", "1"}
    with open(paths["timings"]) as fh:
        stages = {r["stage"] for r in csv.DictReader(fh)}
    assert {"fit", "warm_start", "predict", "update"} <= stages


def test_write_metrics_deterministic(tmp_path):
    for d in ("a", "b"):
        H.write_metrics(H.run_experiment(cfg(trials=2)), tmp_path / d)
    for name in ("metrics.csv", "confusion.csv", "summary.csv", "manifest.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


@pytest.mark.slow
def test_su1_style_logs_110_rows():
    c = H.ExperimentConfig.from_json(os.path.join(CONFIGS, "su1.json"))
    assert c.num_batches == 110 and c.num_batches * c.batch_size == 11000
    # reduced signal length and kernel size keep this quick; the row contract is unchanged
    small = c.replace(signal_length=128, psi=32, t=10, train=H.TrainSpec(200, c.train.condition))
    log = H.run_experiment(small)
    assert len(log.rows) == 110
    assert len({r["lot"] for r in log.rows}) == 11
    assert all(0.0 <= r["acc_idk_ogd"] <= 1.0 for r in log.rows)


def psk_apsk_cells():
    return [(f, ChannelCondition(s)) for f in ("8PSK", "16APSK") for s in (15.0, 20.0)]


def test_similarity_matrix_shape_and_symmetry():
    labels, m = H.similarity_matrix(psk_apsk_cells(), seed=0)
    assert labels == ["8PSK@15dB", "8PSK@20dB", "16APSK@15dB", "16APSK@20dB"]
    assert m.shape == (4, 4)
    assert np.max(np.abs(m - m.T)) <= 1e-12
    assert np.all((m >= 0) & (m <= 1))
    same = [m[0, 1], m[2, 3]]
    cross = m[:2, 2:].ravel()
    assert min(same) > cross.max()


def test_similarity_matrix_cauchy_schwarz_and_row_max_block():
    # the diagonal itself need not be the row maximum: a sharper 20 dB
    # embedding can out-score the 15 dB cell's self-similarity
    for seed in range(20):
        _, m = H.similarity_matrix(psk_apsk_cells(), seed=seed, psi=64, t=30, length=512)
        d = np.diag(m)
        assert np.all(m <= np.sqrt(np.outer(d, d)) * (1 + 1e-12))
        assert np.all(m.argmax(axis=1) // 2 == np.arange(4) // 2)


def test_similarity_matrix_needs_two_cells():
    with pytest.raises(ConfigError):
        H.similarity_matrix([("BPSK", ChannelCondition(10.0))])


def test_single_format_two_snrs_overlap():
    _, m = H.similarity_matrix([("QPSK", {"snr_db": 10.0}), ("QPSK", {"snr_db": 20.0})], seed=1)
    assert m.shape == (2, 2) and m[0, 1] > 0


def test_fit_line():
    slope, icpt, r2 = H.fit_line([1, 2, 3, 4], [3, 5, 7, 9])
    assert (slope, icpt) == pytest.approx((2.0, 1.0)) and r2 == pytest.approx(1.0)


def test_runtime_benchmark_rows():
    c = cfg(classifiers=["idk_ogd", "fknn"])
    rows = H.runtime_benchmark(c, [60, 120])
    assert [(r["size"], r["classifier"]) for r in rows] == [
        (60, "idk_ogd"), (60, "fknn"), (120, "idk_ogd"), (120, "fknn")]
    for r in rows:
        assert r["total_time"] == pytest.approx(r["train_time"] + r["stream_time"])
        assert r["ratio"] == pytest.approx(r["total_time"] / r["train_time"])
    with pytest.raises(ConfigError):
        H.runtime_benchmark(c, [100])
    with pytest.raises(ConfigError):
        H.runtime_benchmark(c, [200, 100])
