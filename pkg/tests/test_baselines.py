import numpy as np
import pytest
from hypothesis import given, strategies as st

from idkamc import baselines as B
from idkamc.classifier import LabeledBatch
from idkamc.constellation import generate_signal, get_format, build_table
from idkamc.errors import ConfigError, FeatureError

from . import oracles


def table_signal(name):
    return np.asarray(build_table(name), dtype=complex)


@pytest.mark.parametrize("name,expected", [
    ("BPSK", oracles.BPSK_MOMENTS),
    ("QPSK", oracles.QPSK_MOMENTS),
    ("8PSK", oracles.PSK8_MOMENTS),
])
def test_moments_on_full_tables(name, expected):
    np.testing.assert_allclose(B.extract_moments(table_signal(name)), expected, atol=1e-12)


def test_bpsk_sample_signal():
    f = B.extract_moments(np.array([1, -1, -1, 1, 1], dtype=complex))
    np.testing.assert_allclose(f, oracles.BPSK_MOMENTS, atol=1e-15)


def test_feature_shape_and_finite():
    rng = np.random.default_rng(0)
    for name in oracles.TABLE1_ORDER:
        f = B.extract_moments(generate_signal(name, 512, rng))
        assert f.shape == (8,) and np.all(np.isfinite(f))


def test_feature_errors():
    with pytest.raises(FeatureError):
        B.extract_moments(np.zeros(0, complex))
    with pytest.raises(FeatureError):
        B.extract_moments(np.zeros(10, complex))


@given(st.floats(1e-3, 1e3), st.integers(0, 10 ** 6))
def test_scaling_invariance(c, seed):
    rng = np.random.default_rng(seed)
    s = rng.normal(size=64) + 1j * rng.normal(size=64)
    np.testing.assert_allclose(B.extract_moments(c * s), B.extract_moments(s), rtol=1e-9, atol=1e-12)


def test_single_example_store():
    store = B.KnnStore(k=15, features=np.zeros((1, 8)), labels=[7])
    assert B.knn_predict(store, np.full(8, 3.0)) == 7


def test_exact_match_with_k1():
    rng = np.random.default_rng(1)
    feats = rng.normal(size=(20, 8))
    store = B.KnnStore(k=1, features=feats, labels=np.arange(20) % 5)
    for i in range(20):
        assert B.knn_predict(store, feats[i]) == i % 5


def test_vote_ties_go_to_lowest_id():
    store = B.KnnStore(k=2, features=np.array([[1.0] * 8, [-1.0] * 8]), labels=[4, 2])
    assert B.knn_predict(store, np.zeros(8)) == 2


def test_store_errors():
    with pytest.raises(ConfigError):
        B.KnnStore(k=0)
    with pytest.raises(ConfigError):
        B.knn_predict(B.KnnStore(), np.zeros(8))


def test_bpsk_vs_8ask_clean():
    rng = np.random.default_rng(2)
    ids = {n: get_format(n).id for n in ("BPSK", "8ASK")}
    store = B.KnnStore(k=15)
    for name, fid in ids.items():
        store.add(B.extract_many(generate_signal(name, 256, rng) for _ in range(100)), [fid] * 100)
    queries, truth = [], []
    for i in range(200):
        name = ("BPSK", "8ASK")[i % 2]
        queries.append(generate_signal(name, 256, rng))
        truth.append(ids[name])
    pred = B.knn_predict_many(store, B.extract_many(queries))
    assert (pred == np.array(truth)).mean() >= 0.99


@given(st.integers(0, 10 ** 6))
def test_predict_permutation_invariant(seed):
    rng = np.random.default_rng(seed)
    feats = rng.normal(size=(40, 8))
    labels = rng.integers(0, 4, size=40)
    q = rng.normal(size=(10, 8))
    perm = rng.permutation(40)
    a = B.knn_predict_many(B.KnnStore(5, feats, labels), q)
    b = B.knn_predict_many(B.KnnStore(5, feats[perm], labels[perm]), q)
    assert np.array_equal(a, b)


def test_retrain_grows_store_and_self_neighbour():
    rng = np.random.default_rng(3)
    names = ("BPSK", "QPSK", "16QAM")
    sig = [generate_signal(names[i % 3], 128, rng) for i in range(9)]
    labels = [get_format(names[i % 3]).id for i in range(9)]
    store = B.KnnStore(k=1)
    store = B.knn_retrain(store, LabeledBatch(sig, labels))
    assert len(store) == 9
    for s, c in zip(sig, labels):
        assert B.knn_predict(store, B.extract_moments(s)) == c
    assert len(B.knn_retrain(store, LabeledBatch(sig))) == 9


def test_fewer_examples_than_k_all_vote():
    store = B.KnnStore(k=15, features=np.array([[0.0] * 8, [1.0] * 8, [1.1] * 8]), labels=[1, 3, 3])
    assert B.knn_predict(store, np.zeros(8)) == 3
