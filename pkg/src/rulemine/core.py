"""Shared data model and exact frequency metrics for association rule mining.

Transactions are an N x M binary matrix. An itemset is a sorted tuple of
column indices. Every miner in this package consumes these types and the
counting helpers below; metrics are computed from integer counts with a
single division so that worked-example values come out exact in doubles.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Iterator, Sequence

import numpy as np

Itemset = tuple[int, ...]


class MiningError(ValueError):
    """Base for contract violations raised by this package."""


class InvalidItemsetError(MiningError):
    """Itemset indices out of range, unsorted, or duplicated."""


class UndefinedMetricError(MiningError):
    """Confidence or lift requested where a marginal support is zero."""


class InvalidConfigError(MiningError):
    """Mining configuration violates its bounds."""


class InvalidSplitError(MiningError):
    """Rule split requested on an itemset with fewer than two items."""


def make_itemset(items: Iterable[int]) -> Itemset:
    """Normalize to a sorted duplicate-free tuple of nonnegative ints."""
    out = tuple(sorted({int(i) for i in items}))
    if any(i < 0 for i in out):
        raise InvalidItemsetError(f"negative item index in {out}")
    return out


def mask_of(itemset: Itemset) -> int:
    """Bitmask with bit i set for each item i. Items must fit in 63 bits."""
    m = 0
    for i in itemset:
        m |= 1 << i
    return m


def itemset_of_mask(mask: int) -> Itemset:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


class TransactionMatrix:
    """N x M binary presence table with optional item labels.

    Immutable after construction. Rows are kept both as a uint8 matrix and,
    for M <= 63, as per-row bitmasks so subset counting is a vectorized
    mask-and-compare.
    """

    def __init__(self, rows, item_labels: Sequence[str] | None = None):
        arr = np.asarray(rows)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InvalidConfigError(f"transaction matrix must be 2-d and non-empty, got shape {arr.shape}")
        if not np.isin(arr, (0, 1)).all():
            raise InvalidConfigError("transaction matrix cells must be 0 or 1")
        self.rows = arr.astype(np.uint8)
        self.rows.setflags(write=False)
        self.n_transactions, self.n_items = self.rows.shape
        if item_labels is not None:
            if len(item_labels) != self.n_items:
                raise InvalidConfigError(
                    f"{len(item_labels)} labels for {self.n_items} items"
                )
            self.item_labels = tuple(str(s) for s in item_labels)
        else:
            self.item_labels = None
        if self.n_items <= 63:
            weights = (1 << np.arange(self.n_items, dtype=np.int64))
            self._row_masks = self.rows.astype(np.int64) @ weights
            self._row_masks.setflags(write=False)
        else:
            self._row_masks = None

    def _check(self, itemset: Itemset) -> None:
        for i in itemset:
            if not 0 <= i < self.n_items:
                raise InvalidItemsetError(f"item {i} out of range for M={self.n_items}")

    def count(self, itemset: Itemset) -> int:
        """Number of transactions containing every item of the itemset."""
        self._check(itemset)
        if not itemset:
            return self.n_transactions
        if self._row_masks is not None:
            m = mask_of(itemset)
            return int(np.count_nonzero((self._row_masks & m) == m))
        sub = self.rows[:, list(itemset)]
        return int(np.count_nonzero(sub.all(axis=1)))

    def count_mask(self, mask: int) -> int:
        """count() for callers that already hold a bitmask (M <= 63 only)."""
        if self._row_masks is None:
            return self.count(itemset_of_mask(mask))
        return int(np.count_nonzero((self._row_masks & mask) == mask))

    def labels_for(self, itemset: Itemset) -> tuple[str, ...]:
        if self.item_labels is not None:
            return tuple(self.item_labels[i] for i in itemset)
        return tuple(f"item_{i}" for i in itemset)


def support(itemset: Itemset, data: TransactionMatrix) -> float:
    """Fraction of transactions containing the itemset. support(()) is 1.0."""
    return data.count(itemset) / data.n_transactions


def confidence(antecedent: Itemset, consequent: Itemset, data: TransactionMatrix) -> float:
    """support(A u B) / support(A), computed as a single ratio of counts."""
    _check_disjoint(antecedent, consequent)
    n_a = data.count(antecedent)
    if n_a == 0:
        raise UndefinedMetricError(f"confidence undefined, support({antecedent}) = 0")
    n_ab = data.count(make_itemset(antecedent + consequent))
    return n_ab / n_a


def lift(antecedent: Itemset, consequent: Itemset, data: TransactionMatrix) -> float:
    """support(A u B) / (support(A) * support(B)) from integer counts.

    Computed as joint*N / (n_A*n_B): one division keeps table values like
    5/3 exact where chained float divisions would not.
    """
    _check_disjoint(antecedent, consequent)
    n_a = data.count(antecedent)
    n_b = data.count(consequent)
    if n_a == 0 or n_b == 0:
        raise UndefinedMetricError("lift undefined, a marginal support is 0")
    n_ab = data.count(make_itemset(antecedent + consequent))
    return (n_ab * data.n_transactions) / (n_a * n_b)


def _check_disjoint(antecedent: Itemset, consequent: Itemset) -> None:
    if not antecedent or not consequent:
        raise InvalidItemsetError("antecedent and consequent must be non-empty")
    if set(antecedent) & set(consequent):
        raise InvalidItemsetError(
            f"antecedent {antecedent} and consequent {consequent} overlap"
        )


def enumerate_itemsets(M: int, m_min: int, m_max: int) -> Iterator[Itemset]:
    """All itemsets of sizes m_min..m_max, lexicographic within each size."""
    if not 1 <= m_min <= m_max <= M:
        raise InvalidConfigError(f"need 1 <= m_min <= m_max <= M, got ({m_min}, {m_max}, {M})")
    for m in range(m_min, m_max + 1):
        yield from combinations(range(M), m)


def split_rule(itemset: Itemset) -> Iterator[tuple[Itemset, Itemset]]:
    """Every ordered (antecedent, consequent) partition, 2^|I| - 2 of them.

    Antecedents are enumerated by ascending size, lexicographic within size;
    the consequent is the complement.
    """
    if len(itemset) < 2:
        raise InvalidSplitError(f"cannot split itemset of size {len(itemset)}")
    items = tuple(itemset)
    full = set(items)
    for k in range(1, len(items)):
        for ante in combinations(items, k):
            cons = tuple(sorted(full - set(ante)))
            yield ante, cons


@dataclass(frozen=True)
class Rule:
    """A -> B with its metrics. antecedent and consequent are disjoint, non-empty.

    confidence may exceed 1 for miners that estimate the two probabilities
    independently; frequency-based miners always produce values in [0, 1].
    """

    antecedent: Itemset
    consequent: Itemset
    support: float
    confidence: float
    lift: float

    def __post_init__(self):
        _check_disjoint(self.antecedent, self.consequent)

    @property
    def itemset(self) -> Itemset:
        return tuple(sorted(self.antecedent + self.consequent))

    def key(self) -> tuple[Itemset, Itemset]:
        return (self.antecedent, self.consequent)


@dataclass(frozen=True)
class MiningConfig:
    """Thresholds shared by every miner.

    min_support doubles as the minimum probability threshold for the
    probabilistic miners. max_itemset_size is validated against M at mine
    time since the config does not know the dataset.
    """

    min_support: float
    min_confidence: float
    max_itemset_size: int = 10
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.min_support <= 1.0:
            raise InvalidConfigError(f"min_support must be in (0, 1], got {self.min_support}")
        if not 0.0 < self.min_confidence <= 1.0:
            raise InvalidConfigError(f"min_confidence must be in (0, 1], got {self.min_confidence}")
        if self.max_itemset_size < 2:
            raise InvalidConfigError(f"max_itemset_size must be >= 2, got {self.max_itemset_size}")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidConfigError("seed must fit in 64 bits")

    def check_against(self, data: TransactionMatrix) -> None:
        if self.max_itemset_size > data.n_items:
            raise InvalidConfigError(
                f"max_itemset_size {self.max_itemset_size} exceeds M={data.n_items}"
            )


def rule_sort_key(rule: Rule):
    # deterministic tie order: lexicographic (antecedent, consequent)
    return (rule.antecedent, rule.consequent)


class SupportCache:
    """Memoized itemset counting keyed by bitmask, for miners that revisit
    the same itemsets many times (rollouts, reward evaluation, beams)."""

    def __init__(self, data: TransactionMatrix):
        self.data = data
        self.n = data.n_transactions
        self._counts: dict[int, int] = {}

    def count(self, mask: int) -> int:
        c = self._counts.get(mask)
        if c is None:
            c = self.data.count_mask(mask)
            self._counts[mask] = c
        return c

    def support(self, mask: int) -> float:
        return self.count(mask) / self.n


def write_transactions_csv(data: TransactionMatrix, path) -> None:
    """Header of item labels, then one 0/1 row per transaction."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(data.labels_for(tuple(range(data.n_items))))
        for row in data.rows:
            w.writerow(int(v) for v in row)


def read_transactions_csv(path) -> TransactionMatrix:
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        try:
            labels = next(r)
        except StopIteration:
            raise InvalidConfigError(f"{path}: empty transaction CSV") from None
        rows = []
        for lineno, row in enumerate(r, start=2):
            if not row:
                continue
            try:
                rows.append([int(v) for v in row])
            except ValueError:
                raise InvalidConfigError(f"{path}:{lineno}: non-integer cell") from None
    if not rows:
        raise InvalidConfigError(f"{path}: no transaction rows")
    return TransactionMatrix(np.array(rows), item_labels=labels)


def write_rules_csv(rules: Sequence[Rule], path, item_labels: Sequence[str] | None = None) -> None:
    """antecedent|consequent as pipe-joined labels, metrics at 4 decimals.

    Rounding is display only; ranking and dedup elsewhere always use the
    unrounded values.
    """

    def name(i: int) -> str:
        return item_labels[i] if item_labels is not None else f"item_{i}"

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["antecedent", "consequent", "support", "confidence", "lift"])
        for r in rules:
            w.writerow(
                [
                    "|".join(name(i) for i in r.antecedent),
                    "|".join(name(i) for i in r.consequent),
                    f"{r.support:.4f}",
                    f"{r.confidence:.4f}",
                    f"{r.lift:.4f}",
                ]
            )
