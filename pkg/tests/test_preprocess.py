import numpy as np
import pytest

from kan_dfm.preprocess import Scaler, apply_scaler, fit_scaler, kfold, one_hot, split
from kan_dfm.scenarios import DRILLING, Dataset, get_schema


def make_dataset(n=100, seed=0, balance=True):
    rng = np.random.default_rng(seed)
    schema = get_schema(DRILLING)
    lo = np.array([f.min for f in schema.features])
    hi = np.array([f.max for f in schema.features])
    X = rng.uniform(lo, hi, size=(n, len(lo)))
    if balance:
        y = np.array([i % 2 for i in range(n)], dtype=np.int8)
    else:
        y = rng.integers(0, 2, n).astype(np.int8)
    return Dataset(DRILLING, X, y)


def test_scaler_endpoints():
    X = np.array([[0.0, 10.0], [4.0, 30.0]])
    s = Scaler(mins=X.min(0), maxs=X.max(0))
    np.testing.assert_allclose(s.apply(np.array([0.0, 10.0])), [0.0, 0.0])
    np.testing.assert_allclose(s.apply(np.array([4.0, 30.0])), [1.0, 1.0])
    np.testing.assert_allclose(s.apply(np.array([2.0, 20.0])), [0.5, 0.5])


def test_scaler_roundtrip():
    ds = make_dataset(50, seed=3)
    s = fit_scaler(ds)
    back = s.invert(s.apply(ds.X))
    np.testing.assert_allclose(back, ds.X, atol=1e-10)


def test_scaler_rejects_constant_feature():
    X = np.ones((5, 2))
    X[:, 0] = np.arange(5)
    with pytest.raises(ValueError, match="constant"):
        fit_scaler(X, feature_names=["a", "b"])


def test_apply_scaler_on_record():
    ds = make_dataset(20, seed=1)
    s = fit_scaler(ds)
    rec = ds.record(0)
    np.testing.assert_allclose(apply_scaler(s, rec), s.apply(ds.X[0]))


def test_one_hot():
    np.testing.assert_array_equal(one_hot(1, 3), [0, 1, 0])
    np.testing.assert_array_equal(one_hot(0, 1), [1])
    assert one_hot(4, 9).sum() == 1.0
    with pytest.raises(IndexError):
        one_hot(3, 3)


def test_split_sizes_and_determinism():
    ds = make_dataset(100, seed=7)
    tr, te = split(ds, 0.8, seed=42)
    assert len(tr) == 80 and len(te) == 20
    tr2, te2 = split(ds, 0.8, seed=42)
    np.testing.assert_array_equal(tr.X, tr2.X)
    np.testing.assert_array_equal(te.y, te2.y)


def test_split_stratification():
    ds = make_dataset(400, seed=11)
    tr, te = split(ds, 0.8, seed=1)
    for part in (tr, te):
        ratio = part.y.mean()
        assert abs(ratio - 0.5) <= 0.02


def test_split_no_overlap_covers_all():
    ds = make_dataset(60, seed=2)
    tr, te = split(ds, 0.75, seed=5)
    combined = np.vstack([tr.X, te.X])
    assert combined.shape[0] == 60
    # every original row appears exactly once
    orig = {tuple(row) for row in ds.X}
    assert {tuple(row) for row in combined} == orig


def test_split_bad_fraction():
    ds = make_dataset(10)
    with pytest.raises(ValueError):
        split(ds, 1.0, seed=0)


def test_kfold_balanced():
    ds = make_dataset(1000, seed=4)
    folds = kfold(ds, 10, seed=9)
    assert len(folds) == 10
    for tr, va in folds:
        assert len(va) == 100
        assert abs(va.y.mean() - 0.5) <= 0.02


def test_kfold_partition():
    ds = make_dataset(120, seed=8)
    folds = kfold(ds, 5, seed=3)
    seen = []
    for _, va in folds:
        seen.extend(map(tuple, va.X))
    assert len(seen) == 120
    assert {tuple(r) for r in ds.X} == set(seen)


def test_kfold_determinism():
    ds = make_dataset(100, seed=6)
    f1 = kfold(ds, 4, seed=13)
    f2 = kfold(ds, 4, seed=13)
    for (a, _), (b, _) in zip(f1, f2):
        np.testing.assert_array_equal(a.X, b.X)


def test_kfold_class_too_small():
    ds = make_dataset(10, seed=1)
    ds.y[:] = 0
    ds.y[0] = 1
    with pytest.raises(ValueError):
        kfold(ds, 3, seed=0)
