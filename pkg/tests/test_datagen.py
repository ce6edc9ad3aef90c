import numpy as np
import pytest

from kan_dfm.datagen import (
    GenConfig,
    boundary_proximity_fraction,
    generate_dataset,
    relabel,
    sample_boundary,
    sample_matrix,
    sample_random,
    write_dataset,
)
from kan_dfm.rules import RuleConfig, build_catalog, check_drilling, config_hash
from kan_dfm.scenarios import COMBINED, DRILLING, MILLING, get_schema, read_csv

CFG = RuleConfig()
CATALOG = build_catalog(CFG)


def test_random_samples_within_ranges():
    schema = get_schema(DRILLING)
    rng = np.random.default_rng(0)
    X = sample_matrix(schema, 10_000, rng)
    lo = np.array([f.min for f in schema.features])
    hi = np.array([f.max for f in schema.features])
    assert np.all(X >= lo - 1e-12)
    assert np.all(X <= hi + 1e-12)


def test_random_samples_structural_constraint():
    schema = get_schema(DRILLING)
    rng = np.random.default_rng(1)
    X = sample_matrix(schema, 5000, rng)
    names = schema.feature_names
    h2 = X[:, names.index("H2")]
    b3 = X[:, names.index("B3")]
    assert np.all(h2 <= b3 + 1e-12)


def test_random_samples_tolerance_ordering():
    schema = get_schema(MILLING)
    rng = np.random.default_rng(2)
    X = sample_matrix(schema, 2000, rng)
    names = schema.feature_names
    for d in ("P1", "P2", "P4", "P5", "P6"):
        ut = X[:, names.index(f"{d}_UT")]
        lt = X[:, names.index(f"{d}_LT")]
        assert np.all(ut >= lt)


def test_random_sampling_reproducible():
    schema = get_schema(COMBINED)
    X1 = sample_matrix(schema, 500, np.random.default_rng(42))
    X2 = sample_matrix(schema, 500, np.random.default_rng(42))
    np.testing.assert_array_equal(X1, X2)


def test_sample_random_record_valid():
    schema = get_schema(DRILLING)
    rec = sample_random(schema, np.random.default_rng(3))
    assert schema.validate_values(rec.values) == []


# ---------------------------------------------------------------------------
# Boundary sampling
# ---------------------------------------------------------------------------

def test_boundary_sample_near_some_threshold():
    schema = get_schema(DRILLING)
    rng = np.random.default_rng(4)
    records = [sample_boundary(schema, rng, CFG, CATALOG) for _ in range(300)]
    from kan_dfm.scenarios import as_dataset

    ds = as_dataset(records, DRILLING)
    frac = boundary_proximity_fraction(ds, CFG, CATALOG)
    assert frac >= 0.3  # audit metric


def test_boundary_depth_ratio_lands_in_band():
    # H1=5, zero tolerances: threshold at depth 25, perturbation +-2%
    schema = get_schema(DRILLING)
    rng = np.random.default_rng(5)
    from kan_dfm.datagen import _perturbed_boundary_value

    values = {"B1": 100.0, "B2": 100.0, "B3": 60.0, "H1": 5.0, "H2": 10.0,
              "H3": 50.0, "H4": 50.0}
    for d in ("H1", "H2", "H3", "H4"):
        values[f"{d}_UT"] = 0.0
        values[f"{d}_LT"] = 0.0
    seen = []
    for _ in range(50):
        feature, value = _perturbed_boundary_value(
            values, "D2_DEPTH_RATIO", schema, rng, CFG, CATALOG
        )
        assert feature == "H2"
        seen.append(value)
    seen = np.array(seen)
    assert np.all(seen >= 24.5 - 1e-9) and np.all(seen <= 25.5 + 1e-9)
    assert seen.min() < 25.0 < seen.max()  # both sides of the threshold


def test_boundary_sign_flips_rule():
    values = {"B1": 100.0, "B2": 100.0, "B3": 60.0, "H1": 5.0, "H2": 10.0,
              "H3": 50.0, "H4": 50.0}
    for d in ("H1", "H2", "H3", "H4"):
        values[f"{d}_UT"] = 0.1
        values[f"{d}_LT"] = -0.1
    from kan_dfm.rules import boundary_target
    from kan_dfm.scenarios import DesignRecord

    feature, target = boundary_target(values, "D2_DEPTH_RATIO", CFG, CATALOG)
    hi = check_drilling(DesignRecord(DRILLING, dict(values, **{feature: target + 0.1})))
    lo = check_drilling(DesignRecord(DRILLING, dict(values, **{feature: target - 0.1})))
    assert "R-D2" in hi.rule_ids()
    assert "R-D2" not in lo.rule_ids()


# ---------------------------------------------------------------------------
# Dataset generation
# ---------------------------------------------------------------------------

def test_generate_balanced_exact_split():
    ds, manifest = generate_dataset(GenConfig(DRILLING, 1000, seed=7))
    assert len(ds) == 1000
    assert int(ds.y.sum()) == 500
    assert manifest["class_counts"] == {"0": 500, "1": 500}


def test_generate_labels_rederivable():
    ds, _ = generate_dataset(GenConfig(DRILLING, 600, seed=8))
    np.testing.assert_array_equal(relabel(ds, CFG, CATALOG), ds.y)


def test_generate_manifest_rule_hash():
    ds, manifest = generate_dataset(GenConfig(MILLING, 200, seed=9), CFG, CATALOG)
    assert manifest["rule_config_hash"] == config_hash(CFG, CATALOG)


def test_generate_deterministic_bytes(tmp_path):
    cfgen = GenConfig(DRILLING, 400, seed=11)
    ds1, m1 = generate_dataset(cfgen)
    ds2, m2 = generate_dataset(cfgen)
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    write_dataset(ds1, m1, p1)
    write_dataset(ds2, m2, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_generate_csv_roundtrip(tmp_path):
    ds, manifest = generate_dataset(GenConfig(COMBINED, 100, seed=12))
    path = tmp_path / "combined.csv"
    write_dataset(ds, manifest, path)
    loaded = read_csv(path)
    assert loaded.scenario_id == COMBINED
    np.testing.assert_allclose(loaded.X, ds.X)
    np.testing.assert_array_equal(loaded.y, ds.y)


def test_generate_unbalanced():
    ds, _ = generate_dataset(GenConfig(DRILLING, 300, balance=False, seed=13))
    assert len(ds) == 300


def test_generate_rejects_odd_balanced_total():
    with pytest.raises(ValueError):
        GenConfig(DRILLING, 999, balance=True)


def test_generated_mix_has_boundary_records():
    ds, manifest = generate_dataset(GenConfig(DRILLING, 800, seed=14))
    assert manifest["boundary_fraction_accepted"] > 0.15
    assert boundary_proximity_fraction(ds.subset(np.arange(200)), CFG, CATALOG) > 0.1
