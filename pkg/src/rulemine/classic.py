"""Frequency-based miners: Apriori, FP-Growth, and Eclat.

All three return the identical (table, rules) pair for the same input: the
table holds every itemset of size 1..max_itemset_size with support >=
min_support, and the rules are every split of a frequent itemset of size
>= 2 whose confidence >= min_confidence. Supports are exact empirical
counts divided by N.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .core import (
    Itemset,
    MiningConfig,
    Rule,
    TransactionMatrix,
    rule_sort_key,
    split_rule,
)


@dataclass(frozen=True)
class FrequentItemsetTable:
    """Map from itemset to support fraction, ordered by (size, lexicographic)."""

    entries: dict[Itemset, float]

    def __contains__(self, itemset) -> bool:
        return tuple(itemset) in self.entries

    def __getitem__(self, itemset) -> float:
        return self.entries[tuple(itemset)]

    def __len__(self) -> int:
        return len(self.entries)

    def itemsets(self):
        return self.entries.keys()


def min_count(min_support: float, N: int) -> int:
    """Smallest integer c with c/N >= min_support under double comparison.

    Count thresholds must agree bit-for-bit with the float test support >=
    min_support, so the ceil seed is nudged across representation error.
    """
    c = int(math.ceil(min_support * N))
    while c > 0 and (c - 1) / N >= min_support:
        c -= 1
    while c <= N and c / N < min_support:
        c += 1
    return c


def _finalize(
    counts: dict[Itemset, int], data: TransactionMatrix, cfg: MiningConfig
) -> tuple[FrequentItemsetTable, list[Rule]]:
    """Shared table/rule assembly from a complete frequent-count map.

    Downward closure guarantees every split part is present in counts, so
    confidence and lift come out as exact count ratios.
    """
    N = data.n_transactions
    ordered = sorted(counts, key=lambda s: (len(s), s))
    table = FrequentItemsetTable({s: counts[s] / N for s in ordered})
    rules = []
    for iset in ordered:
        if len(iset) < 2:
            continue
        n_i = counts[iset]
        for ante, cons in split_rule(iset):
            n_a = counts[ante]
            conf = n_i / n_a
            if conf >= cfg.min_confidence:
                n_b = counts[cons]
                rules.append(
                    Rule(ante, cons, n_i / N, conf, (n_i * N) / (n_a * n_b))
                )
    rules.sort(key=rule_sort_key)
    return table, rules


def mine_apriori(
    data: TransactionMatrix, cfg: MiningConfig
) -> tuple[FrequentItemsetTable, list[Rule]]:
    """Level-wise candidate generation with prefix join and subset pruning."""
    cfg.check_against(data)
    mc = min_count(cfg.min_support, data.n_transactions)
    counts: dict[Itemset, int] = {}
    level: list[Itemset] = []
    for i in range(data.n_items):
        c = data.count((i,))
        if c >= mc:
            counts[(i,)] = c
            level.append((i,))
    size = 1
    while level and size < cfg.max_itemset_size:
        level.sort()
        level_set = set(level)
        candidates = []
        for a_pos, a in enumerate(level):
            for b in level[a_pos + 1 :]:
                if a[:-1] != b[:-1]:
                    break  # sorted level: shared prefixes are contiguous
                cand = a + (b[-1],)
                if all(
                    cand[:j] + cand[j + 1 :] in level_set for j in range(len(cand))
                ):
                    candidates.append(cand)
        level = []
        for cand in candidates:
            c = data.count(cand)
            if c >= mc:
                counts[cand] = c
                level.append(cand)
        size += 1
    return _finalize(counts, data, cfg)


class _FpNode:
    __slots__ = ("item", "count", "parent", "children", "next")

    def __init__(self, item, parent):
        self.item = item
        self.count = 0
        self.parent = parent
        self.children = {}
        self.next = None


class FpTree:
    """Prefix-tree of transactions with a per-item header chain.

    Items must be inserted in a fixed rank order (descending frequency,
    ties by index) so shared prefixes merge. Header chains link every node
    of one item; a chain's count sum equals that item's total count in the
    inserted transactions.
    """

    def __init__(self, rank: dict[int, int]):
        self.rank = rank
        self.root = _FpNode(None, None)
        self.header: dict[int, _FpNode] = {}
        self._tail: dict[int, _FpNode] = {}

    def insert(self, items, count: int) -> None:
        node = self.root
        for i in items:
            child = node.children.get(i)
            if child is None:
                child = _FpNode(i, node)
                node.children[i] = child
                if i in self._tail:
                    self._tail[i].next = child
                else:
                    self.header[i] = child
                self._tail[i] = child
            child.count += count
            node = child

    def chain_count(self, item: int) -> int:
        total = 0
        node = self.header.get(item)
        while node is not None:
            total += node.count
            node = node.next
        return total

    def prefix_paths(self, item: int):
        """(path items root-to-parent, count) for each node of the item."""
        out = []
        node = self.header.get(item)
        while node is not None:
            path = []
            p = node.parent
            while p.item is not None:
                path.append(p.item)
                p = p.parent
            if path:
                out.append((path, node.count))
            node = node.next
        return out


def _fp_mine(tree: FpTree, suffix: Itemset, mc: int, max_size: int, out: dict):
    # least frequent first so conditional bases stay small
    for item in sorted(tree.header, key=lambda i: tree.rank[i], reverse=True):
        found = tuple(sorted(suffix + (item,)))
        out[found] = tree.chain_count(item)
        if len(found) >= max_size:
            continue
        base = tree.prefix_paths(item)
        if not base:
            continue
        ccounts: Counter = Counter()
        for path, c in base:
            for i in path:
                ccounts[i] += c
        keep = {i for i, c in ccounts.items() if c >= mc}
        if not keep:
            continue
        crank = {
            i: r
            for r, i in enumerate(sorted(keep, key=lambda i: (-ccounts[i], i)))
        }
        ctree = FpTree(crank)
        for path, c in base:
            items = sorted((i for i in path if i in keep), key=crank.__getitem__)
            if items:
                ctree.insert(items, c)
        _fp_mine(ctree, found, mc, max_size, out)


def mine_fpgrowth(
    data: TransactionMatrix, cfg: MiningConfig
) -> tuple[FrequentItemsetTable, list[Rule]]:
    """Two-pass FP-tree construction followed by conditional-tree recursion."""
    cfg.check_against(data)
    mc = min_count(cfg.min_support, data.n_transactions)
    item_counts = data.rows.sum(axis=0, dtype=np.int64)
    freq = [i for i in range(data.n_items) if item_counts[i] >= mc]
    rank = {
        i: r for r, i in enumerate(sorted(freq, key=lambda i: (-item_counts[i], i)))
    }
    tree = FpTree(rank)
    for row in data.rows:
        items = sorted((i for i in freq if row[i]), key=rank.__getitem__)
        if items:
            tree.insert(items, 1)
    counts: dict[Itemset, int] = {}
    _fp_mine(tree, (), mc, cfg.max_itemset_size, counts)
    return _finalize(counts, data, cfg)


@dataclass(frozen=True)
class TidsetIndex:
    """Vertical layout: per-item strictly ascending transaction id arrays."""

    tidsets: dict[int, np.ndarray]

    @classmethod
    def build(cls, data: TransactionMatrix) -> "TidsetIndex":
        return cls({i: np.flatnonzero(data.rows[:, i]) for i in range(data.n_items)})


def mine_eclat(
    data: TransactionMatrix, cfg: MiningConfig
) -> tuple[FrequentItemsetTable, list[Rule]]:
    """Depth-first tidset intersection over prefix equivalence classes."""
    cfg.check_against(data)
    mc = min_count(cfg.min_support, data.n_transactions)
    index = TidsetIndex.build(data)
    counts: dict[Itemset, int] = {}

    def recurse(prefix: Itemset, members):
        # members: (item, tidset) pairs frequent under the prefix, ascending item
        for pos, (i, t_i) in enumerate(members):
            grown = prefix + (i,)
            counts[grown] = len(t_i)
            if len(grown) >= cfg.max_itemset_size:
                continue
            nxt = []
            for j, t_j in members[pos + 1 :]:
                t = np.intersect1d(t_i, t_j, assume_unique=True)
                if len(t) >= mc:
                    nxt.append((j, t))
            if nxt:
                recurse(grown, nxt)

    seed = [
        (i, index.tidsets[i])
        for i in range(data.n_items)
        if len(index.tidsets[i]) >= mc
    ]
    recurse((), seed)
    return _finalize(counts, data, cfg)
