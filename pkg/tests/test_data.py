import json

import numpy as np
import pytest

from rulemine import (
    CategoricalSchema,
    InvalidConfigError,
    MiningError,
    SyntheticSpec,
    gen_synthetic1,
    gen_synthetic2,
    ingest_categorical,
    read_features_csv,
    synthetic2_spec,
    write_features_csv,
)
from rulemine.data import _cluster_centroids


def test_spec_validation():
    with pytest.raises(InvalidConfigError):
        SyntheticSpec(variant="synthetic3")
    with pytest.raises(InvalidConfigError):
        SyntheticSpec(n_transactions=0)
    with pytest.raises(InvalidConfigError):
        SyntheticSpec(length_scale=0.0)
    with pytest.raises(InvalidConfigError):
        synthetic2_spec(n_items=16)  # not divisible into 3 clusters
    with pytest.raises(InvalidConfigError):
        synthetic2_spec(items_per_transaction=(1, 6))
    with pytest.raises(InvalidConfigError):
        synthetic2_spec(clusters_per_transaction=(2, 4))


def test_synthetic1_defaults():
    data, X = gen_synthetic1(SyntheticSpec())
    assert data.rows.shape == (1000, 10)
    assert X.shape == (10, 10)
    sizes = data.rows.sum(axis=1)
    assert (sizes >= 1).all()  # empty rows are redrawn
    marginals = data.rows.mean(axis=0)
    assert (marginals >= 0.2).all() and (marginals <= 0.8).all()


def test_synthetic1_deterministic():
    spec = SyntheticSpec(seed=42)
    d1, x1 = gen_synthetic1(spec)
    d2, x2 = gen_synthetic1(spec)
    assert np.array_equal(d1.rows, d2.rows)
    assert np.array_equal(x1, x2)
    d3, _ = gen_synthetic1(SyntheticSpec(), seed=42)  # explicit seed wins
    assert np.array_equal(d1.rows, d3.rows)
    d4, _ = gen_synthetic1(SyntheticSpec(seed=43))
    assert not np.array_equal(d1.rows, d4.rows)


def test_synthetic1_huge_length_scale_survives_jitter():
    # near-singular latent covariance exercises the jittered retry
    data, _ = gen_synthetic1(SyntheticSpec(n_transactions=50, length_scale=1e9))
    assert data.rows.shape == (50, 10)
    assert (data.rows.sum(axis=1) >= 1).all()


def test_synthetic1_variant_mismatch():
    with pytest.raises(InvalidConfigError):
        gen_synthetic1(synthetic2_spec())
    with pytest.raises(InvalidConfigError):
        gen_synthetic2(SyntheticSpec())


def test_cluster_centroids():
    mu = _cluster_centroids(10)
    assert np.linalg.norm(mu[0] - mu[1]) == 5.0
    assert np.linalg.norm(mu[1] - mu[2]) == pytest.approx(61.85, abs=0.01)


def test_synthetic2_structure():
    spec = synthetic2_spec(seed=5)
    data, X = gen_synthetic2(spec)
    assert data.rows.shape == (1000, 15)
    assert X.shape == (15, 10)
    sizes = data.rows.sum(axis=1)
    assert sizes.min() >= 2 and sizes.max() <= 6
    # items 0-4 / 5-9 / 10-14 belong to clusters near the three centroids
    mu = _cluster_centroids(10)
    for c in range(3):
        block = X[5 * c:5 * c + 5]
        assert np.abs(block - mu[c]).max() < 6.0  # unit spread, 5 rows
    # every transaction spans at least two clusters
    cluster_hit = np.stack([data.rows[:, 5 * c:5 * c + 5].any(axis=1) for c in range(3)])
    n_clusters = cluster_hit.sum(axis=0)
    assert n_clusters.min() >= 2 and n_clusters.max() <= 3


def test_synthetic2_deterministic():
    d1, x1 = gen_synthetic2(synthetic2_spec(seed=9))
    d2, x2 = gen_synthetic2(synthetic2_spec(seed=9))
    assert np.array_equal(d1.rows, d2.rows)
    assert np.array_equal(x1, x2)


def _write_csv(path, text):
    path.write_text(text)
    return str(path)


BASIC_CSV = """color,shape,weight,price
red,circle,1.0,10
red,square,2.0,20
blue,circle,3.0,30
blue,square,4.0,40
"""


def test_ingest_basic(tmp_path):
    p = _write_csv(tmp_path / "t.csv", BASIC_CSV)
    schema = CategoricalSchema(("color", "shape"), ("weight", "price"))
    data, feats, labels = ingest_categorical(p, schema)
    assert labels == ("color=blue", "color=red", "shape=circle", "shape=square")
    assert data.rows.shape == (4, 4)
    # one item per row per categorical column
    assert np.array_equal(data.rows[:, :2].sum(axis=1), np.ones(4, dtype=np.uint8))
    assert np.array_equal(data.rows[:, 2:].sum(axis=1), np.ones(4, dtype=np.uint8))
    # two-value column gives complementary presence columns
    assert np.array_equal(data.rows[:, 0] + data.rows[:, 1], np.ones(4, dtype=np.uint8))
    # feature vector = mean over rows containing the item
    assert np.allclose(feats[labels.index("color=red")], [1.5, 15.0])
    assert np.allclose(feats[labels.index("shape=circle")], [2.0, 20.0])
    for i in range(4):
        mask = data.rows[:, i].astype(bool)
        raw = np.array([[1.0, 10], [2, 20], [3, 30], [4, 40]])
        assert np.abs(feats[i] - raw[mask].mean(axis=0)).max() < 1e-12


def test_ingest_single_row(tmp_path):
    p = _write_csv(tmp_path / "t.csv", "a,b,x\nfoo,bar,7.5\n")
    data, feats, labels = ingest_categorical(p, CategoricalSchema(("a", "b"), ("x",)))
    assert labels == ("a=foo", "b=bar")
    assert np.array_equal(data.rows, [[1, 1]])
    assert np.array_equal(feats, [[7.5], [7.5]])


def test_ingest_missing_cells_warn(tmp_path):
    p = _write_csv(tmp_path / "t.csv",
                   "a,x\nfoo,1\n,2\nbar,\nbaz,4\n")
    with pytest.warns(UserWarning, match="dropped 2 rows with missing values"):
        data, feats, labels = ingest_categorical(p, CategoricalSchema(("a",), ("x",)))
    assert labels == ("a=baz", "a=foo")
    assert data.rows.shape == (2, 2)


def test_ingest_parse_error_carries_line(tmp_path):
    p = _write_csv(tmp_path / "t.csv", "a,x\nfoo,1\nbar,oops\n")
    with pytest.raises(MiningError, match=r"t\.csv:3: cannot parse 'oops'"):
        ingest_categorical(p, CategoricalSchema(("a",), ("x",)))


def test_ingest_missing_column(tmp_path):
    p = _write_csv(tmp_path / "t.csv", "a,x\nfoo,1\n")
    with pytest.raises(InvalidConfigError, match="columns missing"):
        ingest_categorical(p, CategoricalSchema(("a", "nope"), ("x",)))


def test_ingest_row_filters(tmp_path):
    p = _write_csv(tmp_path / "t.csv",
                   "sev,item,x\n1,foo,1\n3,bar,2\n2,baz,3\n")
    schema = CategoricalSchema(("item",), ("x",),
                               row_filters=(("sev", ("1", "2")),))
    data, feats, labels = ingest_categorical(p, schema)
    assert labels == ("item=baz", "item=foo")
    assert data.rows.shape == (2, 2)
    schema_none = CategoricalSchema(("item",), ("x",),
                                    row_filters=(("sev", ()),))
    with pytest.raises(MiningError, match="no rows survived"):
        ingest_categorical(p, schema_none)


def test_schema_validation_and_json(tmp_path):
    with pytest.raises(InvalidConfigError):
        CategoricalSchema(())
    with pytest.raises(InvalidConfigError):
        CategoricalSchema(("a",), ("a",))
    sp = tmp_path / "schema.json"
    sp.write_text(json.dumps({
        "item_columns": ["item"],
        "feature_columns": ["x"],
        "row_filters": {"sev": [1, 2]},
    }))
    schema = CategoricalSchema.from_json(sp)
    assert schema.item_columns == ("item",)
    assert schema.row_filters == (("sev", ("1", "2")),)
    sp.write_text(json.dumps(["not", "a", "dict"]))
    with pytest.raises(InvalidConfigError):
        CategoricalSchema.from_json(sp)


def test_features_csv_roundtrip(tmp_path):
    X = np.random.default_rng(0).standard_normal((6, 3))
    p = tmp_path / "f.csv"
    write_features_csv(X, p)
    assert np.array_equal(read_features_csv(p), X)  # repr keeps full precision
    with pytest.raises(InvalidConfigError):
        write_features_csv(np.ones(3), p)


def test_features_csv_errors(tmp_path):
    p = tmp_path / "f.csv"
    p.write_text("")
    with pytest.raises(MiningError, match="empty feature file"):
        read_features_csv(p)
    p.write_text("feat_0,feat_1\n")
    with pytest.raises(MiningError, match="no feature rows"):
        read_features_csv(p)
    p.write_text("feat_0,feat_1\n1.0,2.0\n3.0\n")
    with pytest.raises(MiningError, match="ragged"):
        read_features_csv(p)
    p.write_text("feat_0\nabc\n")
    with pytest.raises(MiningError, match=r"f\.csv:2"):
        read_features_csv(p)
