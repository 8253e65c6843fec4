"""Dataset builders: two synthetic generators and a categorical ingester.

The first generator draws item features at random and turns a smooth
kernel over them into correlated presence patterns (sign of a latent
Gaussian). The second places items in three well-separated feature
clusters and samples transactions that deliberately span clusters. The
ingester one-hot encodes categorical CSV columns into items and averages
numeric columns into per-item feature vectors.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import InvalidConfigError, MiningError, TransactionMatrix
from .kernels import KernelError, KernelSpec, build_covariance

VARIANTS = ("synthetic1", "synthetic2")


@dataclass(frozen=True)
class SyntheticSpec:
    """Shape and distribution parameters for the synthetic generators.

    length_scale drives the latent kernel of variant 1; cluster_spread,
    items_per_transaction and clusters_per_transaction only matter for
    variant 2, which always uses three clusters of n_items/3 items.
    """

    variant: str = "synthetic1"
    n_items: int = 10
    n_features: int = 10
    n_transactions: int = 1000
    seed: int = 0
    length_scale: float = 10.0
    cluster_spread: float = 1.0
    items_per_transaction: tuple[int, int] = (2, 6)
    clusters_per_transaction: tuple[int, int] = (2, 3)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise InvalidConfigError(f"unknown variant {self.variant!r}")
        if self.n_items < 1 or self.n_features < 1 or self.n_transactions < 1:
            raise InvalidConfigError("n_items, n_features, n_transactions must be >= 1")
        if self.length_scale <= 0 or self.cluster_spread <= 0:
            raise InvalidConfigError("length_scale and cluster_spread must be > 0")
        lo, hi = self.items_per_transaction
        clo, chi = self.clusters_per_transaction
        if self.variant == "synthetic2":
            if self.n_items % 3:
                raise InvalidConfigError(
                    f"variant 2 uses three equal clusters; n_items={self.n_items}"
                )
            if not 2 <= lo <= hi <= self.n_items:
                raise InvalidConfigError(
                    f"items_per_transaction must satisfy 2 <= lo <= hi <= M, got ({lo}, {hi})"
                )
            if not 2 <= clo <= chi <= 3:
                raise InvalidConfigError(
                    f"clusters_per_transaction must sit inside [2, 3], got ({clo}, {chi})"
                )


def synthetic2_spec(**overrides) -> SyntheticSpec:
    """Variant-2 defaults: 15 items in 3 clusters, 10 features, 1000 rows."""
    base = dict(variant="synthetic2", n_items=15, n_features=10, n_transactions=1000)
    base.update(overrides)
    return SyntheticSpec(**base)


def gen_synthetic1(spec: SyntheticSpec, seed: int | None = None):
    """Correlated-presence generator.

    Features are standard normal, the item covariance is an RBF kernel
    over them, and each transaction keeps the items whose latent Gaussian
    draw is positive. Empty rows are redrawn, consuming extra draws only
    for the affected row, so output is deterministic given the seed.
    """
    if spec.variant != "synthetic1":
        raise InvalidConfigError(f"spec variant is {spec.variant!r}")
    rng = np.random.default_rng(spec.seed if seed is None else seed)
    M, d, N = spec.n_items, spec.n_features, spec.n_transactions
    X = rng.standard_normal((M, d))
    K = build_covariance(KernelSpec("rbf", length_scale=spec.length_scale), X)
    try:
        L = np.linalg.cholesky(K)
    except np.linalg.LinAlgError:
        try:
            L = np.linalg.cholesky(K + 1e-8 * np.eye(M))
        except np.linalg.LinAlgError as exc:
            raise KernelError("latent covariance is not positive definite") from exc
    rows = np.zeros((N, M), dtype=np.uint8)
    for j in range(N):
        while True:
            row = (rng.standard_normal(M) @ L.T) > 0
            if row.any():
                break
        rows[j] = row
    return TransactionMatrix(rows), X


def _cluster_centroids(d: int) -> np.ndarray:
    mu = np.zeros((3, d))
    mu[1, 0] = 5.0
    mu[2, :] = 20.0
    return mu


def gen_synthetic2(spec: SyntheticSpec, seed: int | None = None):
    """Clustered-catalog generator.

    Item features sit in three Gaussian clusters (contiguous item blocks);
    each transaction picks a size in items_per_transaction, spans 2 or 3
    clusters (never more than its size), takes one item from each chosen
    cluster, and fills up uniformly from the chosen clusters' remaining
    items. Every transaction therefore touches at least two clusters.
    """
    if spec.variant != "synthetic2":
        raise InvalidConfigError(f"spec variant is {spec.variant!r}")
    rng = np.random.default_rng(spec.seed if seed is None else seed)
    M, d, N = spec.n_items, spec.n_features, spec.n_transactions
    per = M // 3
    mu = _cluster_centroids(d)
    X = np.vstack(
        [mu[c] + spec.cluster_spread * rng.standard_normal((per, d)) for c in range(3)]
    )
    members = [np.arange(c * per, (c + 1) * per) for c in range(3)]

    lo, hi = spec.items_per_transaction
    clo, chi = spec.clusters_per_transaction
    rows = np.zeros((N, M), dtype=np.uint8)
    for j in range(N):
        size = int(rng.integers(lo, hi + 1))
        n_clusters = int(rng.integers(clo, min(chi, size) + 1))
        clusters = rng.choice(3, size=n_clusters, replace=False)
        picked = [int(rng.choice(members[c])) for c in clusters]
        pool = np.setdiff1d(np.concatenate([members[c] for c in clusters]), picked)
        extra = size - n_clusters
        if extra:
            picked.extend(int(i) for i in rng.choice(pool, size=extra, replace=False))
        rows[j, picked] = 1
    return TransactionMatrix(rows), X


@dataclass(frozen=True)
class CategoricalSchema:
    """Which CSV columns become items, features, and row filters.

    Every distinct value of an item column becomes one binary item named
    "column=value". Feature columns must parse as numbers. row_filters
    maps a column to the raw string values allowed through.
    """

    item_columns: tuple[str, ...]
    feature_columns: tuple[str, ...] = ()
    row_filters: tuple[tuple[str, tuple[str, ...]], ...] = field(default=())

    def __post_init__(self):
        if not self.item_columns:
            raise InvalidConfigError("schema needs at least one item column")
        cols = list(self.item_columns) + list(self.feature_columns)
        if len(set(cols)) != len(cols):
            raise InvalidConfigError("item and feature columns must be distinct")

    @staticmethod
    def from_json(path) -> "CategoricalSchema":
        with open(path) as fh:
            raw = json.load(fh)
        if not isinstance(raw, dict) or "item_columns" not in raw:
            raise InvalidConfigError(f"{path}: schema JSON needs an item_columns list")
        filters = tuple(
            (col, tuple(str(v) for v in vals))
            for col, vals in raw.get("row_filters", {}).items()
        )
        return CategoricalSchema(
            item_columns=tuple(raw["item_columns"]),
            feature_columns=tuple(raw.get("feature_columns", ())),
            row_filters=filters,
        )


def ingest_categorical(path, schema: CategoricalSchema):
    """CSV -> (TransactionMatrix, per-item feature means, item labels).

    Rows failing a filter are skipped; rows with empty item or feature
    cells are dropped and counted in one warning. A non-numeric feature
    cell is an error carrying the file line number. Each item's feature
    vector is the mean of the numeric columns over the rows containing it.
    """
    kept_items: list[list[str]] = []
    kept_feats: list[list[float]] = []
    dropped = 0
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in (*schema.item_columns, *schema.feature_columns,
                               *(col for col, _ in schema.row_filters))
                   if c not in header]
        if missing:
            raise InvalidConfigError(f"{path}: columns missing from header: {missing}")
        for row in reader:
            if any(row[col] not in allowed for col, allowed in schema.row_filters):
                continue
            cells = [row[c] for c in schema.item_columns]
            raw_feats = [row[c] for c in schema.feature_columns]
            if any(v is None or v == "" for v in cells + raw_feats):
                dropped += 1
                continue
            feats = []
            for col, v in zip(schema.feature_columns, raw_feats):
                try:
                    feats.append(float(v))
                except ValueError:
                    raise MiningError(
                        f"{path}:{reader.line_num}: cannot parse {v!r} in column {col}"
                    ) from None
            kept_items.append(cells)
            kept_feats.append(feats)
    if dropped:
        warnings.warn(f"dropped {dropped} rows with missing values", stacklevel=2)
    if not kept_items:
        raise MiningError(f"{path}: no rows survived filtering")

    # item order: schema column order, values sorted within each column
    labels: list[str] = []
    index: dict[tuple[int, str], int] = {}
    for ci, col in enumerate(schema.item_columns):
        for value in sorted({r[ci] for r in kept_items}):
            index[(ci, value)] = len(labels)
            labels.append(f"{col}={value}")

    N, M, d = len(kept_items), len(labels), len(schema.feature_columns)
    rows = np.zeros((N, M), dtype=np.uint8)
    sums = np.zeros((M, d))
    counts = np.zeros(M, dtype=np.int64)
    feats_arr = np.asarray(kept_feats) if d else np.zeros((N, 0))
    for j, cells in enumerate(kept_items):
        for ci, value in enumerate(cells):
            i = index[(ci, value)]
            rows[j, i] = 1
            sums[i] += feats_arr[j]
            counts[i] += 1
    features = sums / counts[:, None]
    return TransactionMatrix(rows, labels), features, tuple(labels)


def write_features_csv(X: np.ndarray, path) -> None:
    """Write a per-item feature matrix, one row per item, full precision."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise InvalidConfigError(f"feature matrix must be 2-d, got shape {X.shape}")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"feat_{j}" for j in range(X.shape[1])])
        for row in X:
            writer.writerow([repr(float(v)) for v in row])


def read_features_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise MiningError(f"{path}: empty feature file")
        rows = []
        for row in reader:
            if not row:
                continue
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise MiningError(f"{path}:{reader.line_num}: {exc}") from None
    if not rows:
        raise MiningError(f"{path}: no feature rows")
    if any(len(r) != len(header) for r in rows):
        raise MiningError(f"{path}: ragged feature rows")
    return np.asarray(rows, dtype=float)
