import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_matrix
from oracles import brute_frequent, brute_rules, rows_to_sets
from rulemine import (
    FrequentItemsetTable,
    MiningConfig,
    TransactionMatrix,
    min_count,
    mine_apriori,
    mine_eclat,
    mine_fpgrowth,
)

MINERS = (mine_apriori, mine_fpgrowth, mine_eclat)


@given(st.floats(0.001, 1.0), st.integers(1, 2000))
@settings(max_examples=300, deadline=None)
def test_min_count_matches_ratio_comparison(ms, N):
    mc = min_count(ms, N)
    # the integer gate and the float gate agree for every possible count
    for c in range(N + 1):
        assert (c >= mc) == (c / N >= ms)


@pytest.mark.parametrize("miner", MINERS)
def test_grocery_example(miner, grocery_data):
    cfg = MiningConfig(0.4, 0.5, max_itemset_size=7)
    table, rules = miner(grocery_data, cfg)
    assert table[(0, 1)] == 0.4
    got = {r.key(): r for r in rules}
    mb = got[((0,), (1,))]
    assert mb.confidence == 1.0
    assert mb.lift == 5 / 3


def _oracle_check(rows, cfg):
    data = TransactionMatrix(rows)
    tx = rows_to_sets(rows)
    want_tab = brute_frequent(tx, data.n_items, cfg.min_support,
                              min(cfg.max_itemset_size, data.n_items))
    want_rules = brute_rules(tx, want_tab, cfg.min_confidence)
    outs = [miner(data, cfg) for miner in MINERS]
    for table, rules in outs:
        assert dict(table.entries) == want_tab
        got = {r.key(): (r.support, r.confidence, r.lift) for r in rules}
        assert got == want_rules
    # identical output across all three, including order
    assert outs[0][0].entries == outs[1][0].entries == outs[2][0].entries
    assert outs[0][1] == outs[1][1] == outs[2][1]


def test_three_way_equivalence_random():
    rng = np.random.default_rng(2024)
    for _ in range(25):
        rows = random_matrix(rng, max_n=50, max_m=7, min_m=2)
        ms = float(rng.uniform(0.05, 0.6))
        mconf = float(rng.uniform(0.2, 0.9))
        _oracle_check(rows, MiningConfig(ms, mconf, max_itemset_size=max(2, rows.shape[1])))


def test_boundary_support_membership():
    # count == threshold exactly: 2/5 with min_support 0.4 must be kept
    rows = np.zeros((5, 2), dtype=np.uint8)
    rows[:2] = 1
    data = TransactionMatrix(rows)
    for miner in MINERS:
        table, _ = miner(data, MiningConfig(0.4, 0.5, max_itemset_size=2))
        assert (0, 1) in table
        table2, _ = miner(data, MiningConfig(0.4000001, 0.5, max_itemset_size=2))
        assert (0, 1) not in table2


def test_max_size_cap(grocery_data):
    cfg = MiningConfig(0.2, 0.5, max_itemset_size=2)
    for miner in MINERS:
        table, rules = miner(grocery_data, cfg)
        assert all(len(i) <= 2 for i in table.itemsets())
        assert all(len(r.itemset) <= 2 for r in rules)


def test_table_type():
    t = FrequentItemsetTable({(0,): 0.5, (0, 1): 0.25})
    assert (0,) in t and (1,) not in t
    assert t[(0, 1)] == 0.25
    assert len(t) == 2
    assert list(t.itemsets()) == [(0,), (0, 1)]


def test_all_ones_and_all_zeros():
    ones = TransactionMatrix(np.ones((4, 3), dtype=np.uint8))
    cfg = MiningConfig(0.9, 0.9, max_itemset_size=3)
    for miner in MINERS:
        table, rules = miner(ones, cfg)
        assert len(table) == 7  # every non-empty subset
        assert all(v == 1.0 for v in table.entries.values())
        assert len(rules) == sum(2**m - 2 for m in (2, 2, 2)) + (2**3 - 2)
    zeros = TransactionMatrix(np.zeros((4, 3), dtype=np.uint8))
    for miner in MINERS:
        table, rules = miner(zeros, cfg)
        assert len(table) == 0 and rules == []


def test_rule_confidence_boundary():
    # conf exactly at threshold is kept (>= semantics)
    rows = np.array([[1, 1], [1, 0]], dtype=np.uint8)
    data = TransactionMatrix(rows)
    for miner in MINERS:
        _, rules = miner(data, MiningConfig(0.5, 0.5, max_itemset_size=2))
        keys = {r.key() for r in rules}
        assert ((0,), (1,)) in keys  # conf = 0.5 == threshold
