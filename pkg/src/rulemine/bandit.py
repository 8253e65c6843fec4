"""UCB-guided miners over the itemset lattice.

Three searchers share one idea: spend a fixed evaluation budget where an
upper confidence bound points. The flat bandit treats each candidate
itemset as an arm; the enhanced variant adds an optimistic superset update
so one evaluation informs many arms; the tree search grows itemsets one
item at a time and scores them by random rollout.

Every emitted support is an exact empirical frequency. The bandit framing
decides where the budget goes, never what the numbers mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .classic import FrequentItemsetTable, min_count
from .core import (
    InvalidConfigError,
    Itemset,
    MiningConfig,
    Rule,
    SupportCache,
    TransactionMatrix,
    enumerate_itemsets,
    itemset_of_mask,
    mask_of,
    rule_sort_key,
    split_rule,
)

EMAB_MAX_ITEMS = 24

REWARD_MODES = ("max_confidence", "support", "rule_count", "support_confidence")


def ucb_score(p_hat: float, n: int, t: int) -> float:
    """p_hat + sqrt(2 ln t / n); an unvisited arm scores +inf."""
    if t < 1:
        raise InvalidConfigError(f"step must be >= 1, got {t}")
    if n < 0:
        raise InvalidConfigError(f"count must be >= 0, got {n}")
    if n == 0:
        return math.inf
    return p_hat + math.sqrt(2.0 * math.log(t) / n)


@dataclass(frozen=True)
class PruningPolicy:
    """Periodic deactivation of low-scoring, well-evaluated arms.

    Every `period` iterations, arms with at least `protect_below`
    evaluations whose UCB falls strictly below the `quantile` quantile of
    the eligible arms' scores are dropped. Arms with fewer evaluations are
    always retained so rare itemsets keep getting explored.
    """

    period: int = 100
    protect_below: int = 10
    quantile: float = 0.1

    def __post_init__(self):
        if self.period < 1:
            raise InvalidConfigError(f"period must be >= 1, got {self.period}")
        if self.protect_below < 0:
            raise InvalidConfigError("protect_below must be >= 0")
        if not 0.0 < self.quantile < 1.0:
            raise InvalidConfigError(f"quantile must be in (0, 1), got {self.quantile}")


def _ucb_vector(p_hat: np.ndarray, n: np.ndarray, t: int) -> np.ndarray:
    out = p_hat + np.sqrt(2.0 * math.log(t) / np.maximum(n, 1))
    out[n == 0] = np.inf
    return out


def _run_bandit(
    data: TransactionMatrix,
    cfg: MiningConfig,
    T_max: int,
    m_min: int,
    m_max: int,
    pruning: PruningPolicy | None,
    associative: bool,
):
    if T_max < 1:
        raise InvalidConfigError(f"T_max must be >= 1, got {T_max}")
    M = data.n_items
    N = data.n_transactions
    cache = SupportCache(data)
    mc = min_count(cfg.min_support, N)

    # global lexicographic candidate order; argmax then breaks UCB ties by
    # the lexicographically smallest itemset
    itemsets = sorted(enumerate_itemsets(M, m_min, m_max))
    masks = np.array([mask_of(s) for s in itemsets], dtype=np.int64)
    n = np.zeros(len(itemsets), dtype=np.int64)
    p_hat = np.zeros(len(itemsets))
    active = np.ones(len(itemsets), dtype=bool)

    evaluated: dict[int, int] = {}  # candidate index -> exact count
    rules: list[Rule] = []
    seen: set[tuple[Itemset, Itemset]] = set()

    for t in range(1, T_max + 1):
        if not active.any():
            break
        ucb = _ucb_vector(p_hat, n, t)
        ucb[~active] = -np.inf
        k = int(np.argmax(ucb))

        cnt = cache.count(int(masks[k]))
        n[k] += 1
        p = cnt / N
        p_hat[k] = p
        evaluated[k] = cnt

        if associative:
            up = active & ((masks & masks[k]) == masks[k]) & (masks != masks[k])
            p_hat[up] = np.maximum(p_hat[up], p)

        if p > cfg.min_support and len(itemsets[k]) >= 2:
            for ante, cons in split_rule(itemsets[k]):
                n_a = cache.count(mask_of(ante))
                conf = cnt / n_a
                if conf >= cfg.min_confidence and (ante, cons) not in seen:
                    seen.add((ante, cons))
                    n_b = cache.count(mask_of(cons))
                    rules.append(Rule(ante, cons, p, conf, (cnt * N) / (n_a * n_b)))

        if pruning is not None and t % pruning.period == 0:
            elig = active & (n >= pruning.protect_below)
            if elig.any():
                cur = _ucb_vector(p_hat, n, t)
                cutoff = np.quantile(cur[elig], pruning.quantile)
                # strictly below: a sole surviving arm equals the quantile
                # of itself and must not prune the search to a halt
                active &= ~(elig & (cur < cutoff))

    entries = {
        itemsets[k]: cnt / N
        for k, cnt in sorted(evaluated.items(), key=lambda kv: (len(itemsets[kv[0]]), itemsets[kv[0]]))
        if cnt >= mc
    }
    visit_log = {itemsets[k]: int(n[k]) for k in range(len(itemsets))}
    return FrequentItemsetTable(entries), rules, visit_log


def mine_mab(
    data: TransactionMatrix,
    cfg: MiningConfig,
    T_max: int,
    m_min: int = 2,
    m_max: int | None = None,
    pruning: PruningPolicy | None = None,
    seed: int | None = None,
) -> tuple[FrequentItemsetTable, list[Rule], dict[Itemset, int]]:
    """Flat bandit: arms are all itemsets of sizes m_min..m_max.

    Each iteration evaluates the max-UCB arm's empirical frequency and, if
    it clears min_support strictly, emits every split with confidence >=
    min_confidence. Evaluation is deterministic, so `seed` is accepted only
    for interface parity. visit_log maps every candidate to its final
    evaluation count, including never-visited and pruned arms.
    """
    del seed
    if m_max is None:
        m_max = min(cfg.max_itemset_size, data.n_items)
    return _run_bandit(data, cfg, T_max, m_min, m_max, pruning, associative=False)


def mine_emab(
    data: TransactionMatrix,
    cfg: MiningConfig,
    T_max: int,
    m_min: int = 2,
    m_max: int | None = None,
    seed: int | None = None,
) -> tuple[FrequentItemsetTable, list[Rule], dict[Itemset, int]]:
    """Bandit with an optimistic superset update.

    After evaluating an arm, every strict-superset arm whose estimate is
    lower is lifted to the fresh value. The lift is a search heuristic: it
    raises UCB scores so underestimated supersets get picked sooner, but it
    never touches evaluation counts, and the table and rules are built from
    freshly evaluated frequencies only. The superset scan is a bitmask
    filter over all candidates, so M is capped at 24.
    """
    del seed
    if data.n_items > EMAB_MAX_ITEMS:
        raise InvalidConfigError(
            f"associative update scans all candidates; M={data.n_items} exceeds {EMAB_MAX_ITEMS}"
        )
    if m_max is None:
        m_max = min(cfg.max_itemset_size, data.n_items)
    return _run_bandit(data, cfg, T_max, m_min, m_max, None, associative=True)


class MctsNode:
    """One itemset in the search tree. Children extend it by one item."""

    __slots__ = ("itemset", "mask", "visits", "total_reward", "parent", "children", "expanded")

    def __init__(self, itemset: Itemset, parent: "MctsNode | None"):
        self.itemset = itemset
        self.mask = mask_of(itemset)
        self.visits = 0
        self.total_reward = 0.0
        self.parent = parent
        self.children: list[MctsNode] = []
        self.expanded = False

    @property
    def average_reward(self) -> float:
        return self.total_reward / self.visits if self.visits else 0.0


def _select(root: MctsNode, c: float, t: int) -> MctsNode:
    # first unvisited child wins at any depth; otherwise descend by UCT,
    # ties to the earliest child (item order)
    node = root
    while node.children:
        for child in node.children:
            if child.visits == 0:
                return child
        log_t = math.log(t)
        node = max(
            node.children,
            key=lambda ch: ch.average_reward + c * math.sqrt(log_t / ch.visits),
        )
    return node


def _expand(node: MctsNode, M: int, m_max: int, cache: SupportCache, mc: int) -> None:
    if len(node.itemset) < m_max:
        for i in range(M):
            bit = 1 << i
            if node.mask & bit:
                continue
            if cache.count(node.mask | bit) >= mc:
                extended = tuple(sorted(node.itemset + (i,)))
                node.children.append(MctsNode(extended, node))
    node.expanded = True


def _rollout_reward(
    mask: int,
    size: int,
    M: int,
    m_max: int,
    cache: SupportCache,
    cfg: MiningConfig,
    mc: int,
    rng: np.random.Generator,
    reward_mode: str,
    penalty: float,
) -> float:
    while size < m_max:
        outside = [i for i in range(M) if not (mask >> i) & 1]
        mask |= 1 << outside[int(rng.integers(len(outside)))]
        size += 1
        if cache.count(mask) < mc:
            return penalty if reward_mode == "support" else 0.0
    cnt = cache.count(mask)
    if cnt < mc:
        # only reachable when the start node already sits at m_max
        return penalty if reward_mode == "support" else 0.0
    supp = cnt / cache.n
    if reward_mode == "support":
        return supp
    n_rules = 0
    best_conf = 0.0
    if size >= 2:
        for ante, _ in split_rule(itemset_of_mask(mask)):
            conf = cnt / cache.count(mask_of(ante))
            if conf >= cfg.min_confidence:
                n_rules += 1
                if conf > best_conf:
                    best_conf = conf
    if reward_mode == "rule_count":
        return float(n_rules)
    if reward_mode == "support_confidence":
        return supp * best_conf
    return best_conf


def mine_mcts(
    data: TransactionMatrix,
    cfg: MiningConfig,
    T_max: int,
    m_max: int | None = None,
    c: float = math.sqrt(2.0),
    seed: int | None = None,
    reward_mode: str = "max_confidence",
    penalty: float = 0.0,
) -> tuple[FrequentItemsetTable, list[Rule]]:
    """Tree search from the empty itemset, one item added per edge.

    Each iteration selects by UCT (exploration constant c, ln of the
    iteration counter), expands a node with every frequent one-item
    extension at once, rolls out a random completion to m_max, and
    backpropagates the reward to the root. Rollouts score 0 the moment
    support drops below threshold (the support mode returns `penalty`
    instead); at full size the default reward is the best confidence among
    splits clearing min_confidence. Rules come from the visited tree nodes
    afterwards, never from rollout estimates.
    """
    if T_max < 1:
        raise InvalidConfigError(f"T_max must be >= 1, got {T_max}")
    if c <= 0:
        raise InvalidConfigError(f"exploration constant must be > 0, got {c}")
    if reward_mode not in REWARD_MODES:
        raise InvalidConfigError(f"unknown reward mode {reward_mode!r}")
    if not -1.0 <= penalty <= 0.0:
        raise InvalidConfigError(f"penalty must be in [-1, 0], got {penalty}")
    M = data.n_items
    N = data.n_transactions
    if m_max is None:
        m_max = min(cfg.max_itemset_size, M)
    if not 1 <= m_max <= M:
        raise InvalidConfigError(f"need 1 <= m_max <= M, got {m_max}")

    cache = SupportCache(data)
    mc = min_count(cfg.min_support, N)
    rng = np.random.default_rng(cfg.seed if seed is None else seed)
    root = MctsNode((), None)

    for t in range(1, T_max + 1):
        node = _select(root, c, t)
        if len(node.itemset) < m_max and not node.expanded:
            _expand(node, M, m_max, cache, mc)
        unvisited = [ch for ch in node.children if ch.visits == 0]
        if unvisited:
            new_node = unvisited[int(rng.integers(len(unvisited)))]
        else:
            new_node = node
        reward = _rollout_reward(
            new_node.mask, len(new_node.itemset), M, m_max, cache, cfg, mc,
            rng, reward_mode, penalty,
        )
        walk: MctsNode | None = new_node
        while walk is not None:
            walk.visits += 1
            walk.total_reward += reward
            walk = walk.parent

    entries: dict[Itemset, float] = {}
    rules: list[Rule] = []
    seen: set[tuple[Itemset, Itemset]] = set()
    stack = [root]
    while stack:
        node = stack.pop()
        stack.extend(reversed(node.children))
        if node.visits == 0 or not node.itemset:
            continue
        cnt = cache.count(node.mask)
        if cnt < mc:
            continue
        entries[node.itemset] = cnt / N
        if len(node.itemset) >= 2:
            for ante, cons in split_rule(node.itemset):
                if (ante, cons) in seen:
                    continue
                n_a = cache.count(mask_of(ante))
                conf = cnt / n_a
                if conf >= cfg.min_confidence:
                    seen.add((ante, cons))
                    n_b = cache.count(mask_of(cons))
                    rules.append(Rule(ante, cons, cnt / N, conf, (cnt * N) / (n_a * n_b)))

    ordered = dict(sorted(entries.items(), key=lambda kv: (len(kv[0]), kv[0])))
    rules.sort(key=rule_sort_key)
    return FrequentItemsetTable(ordered), rules
