"""Q-learning miner: learn which item toggles lead to high-quality rules.

The environment walks the itemset lattice. A state is the current itemset
(bit-vector plus its support, best split confidence, and size), an action
toggles one item, and the reward scores the resulting itemset by its best
rule. A small from-scratch MLP approximates the action values; training
follows the replay-buffer / target-network recipe, and rules are read off
afterwards by a beam walk over the learned Q-values.

Every reported rule metric is an exact empirical frequency. The network
only decides which itemsets get visited.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .core import (
    InvalidConfigError,
    Itemset,
    MiningConfig,
    MiningError,
    Rule,
    SupportCache,
    TransactionMatrix,
    itemset_of_mask,
    mask_of,
    rule_sort_key,
    split_rule,
)


@dataclass(frozen=True)
class TrainConfig:
    """Episode loop and network settings.

    epsilon decays exponentially from epsilon_start to epsilon_min over
    decay_steps global steps; the target network is refreshed every
    target_update global steps.
    """

    episodes: int = 1000
    max_steps: int = 100
    gamma: float = 0.99
    epsilon_start: float = 1.0
    epsilon_min: float = 0.1
    decay_steps: int = 1000
    target_update: int = 1000
    m_max: int = 10
    w1: float = 0.5
    w2: float = 0.5
    top_k: int = 3
    learning_rate: float = 1e-3
    buffer_capacity: int = 10_000
    batch_size: int = 32
    hidden: tuple[int, ...] = (128, 128, 128)
    add_only: bool = False
    normalize_lift: bool = False

    def __post_init__(self):
        if self.episodes < 0:
            raise InvalidConfigError(f"episodes must be >= 0, got {self.episodes}")
        if self.max_steps < 1:
            raise InvalidConfigError(f"max_steps must be >= 1, got {self.max_steps}")
        if not 0.0 <= self.gamma < 1.0:
            raise InvalidConfigError(f"gamma must be in [0, 1), got {self.gamma}")
        if not 0.0 < self.epsilon_min <= self.epsilon_start <= 1.0:
            raise InvalidConfigError(
                f"need 0 < epsilon_min <= epsilon_start <= 1, got "
                f"({self.epsilon_min}, {self.epsilon_start})"
            )
        if self.decay_steps < 1 or self.target_update < 1:
            raise InvalidConfigError("decay_steps and target_update must be >= 1")
        if self.m_max < 1:
            raise InvalidConfigError(f"m_max must be >= 1, got {self.m_max}")
        if self.top_k < 1:
            raise InvalidConfigError(f"top_k must be >= 1, got {self.top_k}")
        if self.learning_rate <= 0:
            raise InvalidConfigError("learning_rate must be > 0")
        if not 1 <= self.batch_size <= self.buffer_capacity:
            raise InvalidConfigError(
                f"need 1 <= batch_size <= buffer_capacity, got "
                f"({self.batch_size}, {self.buffer_capacity})"
            )
        if not self.hidden or any(h < 1 for h in self.hidden):
            raise InvalidConfigError(f"hidden widths must be positive, got {self.hidden}")


@dataclass(frozen=True)
class RlState:
    """Itemset observation: bit-vector, support, best split confidence, size."""

    bits: np.ndarray
    support: float
    max_confidence: float
    size: int

    def vector(self) -> np.ndarray:
        return np.concatenate(
            [self.bits, [self.support, self.max_confidence, float(self.size)]]
        )


def observe(mask: int, M: int, cache: SupportCache) -> RlState:
    bits = np.zeros(M)
    size = mask.bit_count()
    for i in range(M):
        if (mask >> i) & 1:
            bits[i] = 1.0
    supp = cache.support(mask) if mask else 1.0
    best = 0.0
    if size >= 2:
        cnt = cache.count(mask)
        for ante, _ in split_rule(itemset_of_mask(mask)):
            n_a = cache.count(mask_of(ante))
            if n_a and cnt / n_a > best:
                best = cnt / n_a
    return RlState(bits, supp, best, size)


def compute_reward(
    itemset: Itemset,
    data: TransactionMatrix,
    cfg: MiningConfig,
    w1: float = 0.5,
    w2: float = 0.5,
    normalize_lift: bool = False,
    cache: SupportCache | None = None,
) -> float:
    """-1 below min_support, else the best w1*conf + w2*lift over splits
    clearing min_confidence, else 0. The empty itemset scores 0."""
    if not itemset:
        return 0.0
    if cache is None:
        cache = SupportCache(data)
    N = cache.n
    cnt = cache.count(mask_of(itemset))
    if cnt / N < cfg.min_support:
        return -1.0
    if len(itemset) < 2:
        return 0.0
    valid: list[tuple[float, float]] = []
    for ante, cons in split_rule(itemset):
        n_a = cache.count(mask_of(ante))
        conf = cnt / n_a
        if conf >= cfg.min_confidence:
            n_b = cache.count(mask_of(cons))
            valid.append((conf, (cnt * N) / (n_a * n_b)))
    if not valid:
        return 0.0
    if normalize_lift:
        lift_max = max(lift for _, lift in valid)
        return max(w1 * conf + w2 * lift / lift_max for conf, lift in valid)
    return max(w1 * conf + w2 * lift for conf, lift in valid)


class QNetwork:
    """Fully connected ReLU network: M+3 inputs, M action values out."""

    def __init__(self, n_items: int, hidden: tuple[int, ...] = (128, 128, 128), seed=0):
        if n_items < 1:
            raise InvalidConfigError(f"n_items must be >= 1, got {n_items}")
        if not hidden or any(h < 1 for h in hidden):
            raise InvalidConfigError(f"hidden widths must be positive, got {hidden}")
        self.n_items = n_items
        self.hidden = tuple(int(h) for h in hidden)
        sizes = [n_items + 3, *self.hidden, n_items]
        rng = np.random.default_rng(seed)
        self.weights = [
            rng.standard_normal((a, b)) * np.sqrt(2.0 / a)
            for a, b in zip(sizes[:-1], sizes[1:])
        ]
        self.biases = [np.zeros(b) for b in sizes[1:]]

    @property
    def n_parameters(self) -> int:
        return sum(w.size for w in self.weights) + sum(b.size for b in self.biases)

    def copy(self) -> "QNetwork":
        twin = QNetwork.__new__(QNetwork)
        twin.n_items = self.n_items
        twin.hidden = self.hidden
        twin.weights = [w.copy() for w in self.weights]
        twin.biases = [b.copy() for b in self.biases]
        return twin


def _forward_batch(net: QNetwork, X: np.ndarray):
    """Returns (hidden activations incl. input, pre-activations, output)."""
    acts = [X]
    pre = []
    h = X
    last = len(net.weights) - 1
    for li, (W, b) in enumerate(zip(net.weights, net.biases)):
        z = h @ W + b
        if li == last:
            return acts, pre, z
        pre.append(z)
        h = np.maximum(z, 0.0)
        acts.append(h)
    raise AssertionError("unreachable")


def mlp_forward(net: QNetwork, state: np.ndarray) -> np.ndarray:
    """Q-values for all M toggle actions at one state."""
    x = np.asarray(state, dtype=float).ravel()
    if x.shape != (net.n_items + 3,):
        raise InvalidConfigError(
            f"state must have {net.n_items + 3} entries, got {x.shape}"
        )
    _, _, out = _forward_batch(net, x[None, :])
    return out[0]


def td_loss(net: QNetwork, states: np.ndarray, actions: np.ndarray, targets: np.ndarray) -> float:
    _, _, out = _forward_batch(net, np.asarray(states, dtype=float))
    chosen = out[np.arange(len(actions)), actions]
    return float(np.mean((chosen - np.asarray(targets, dtype=float)) ** 2))


def td_targets(
    target_net: QNetwork,
    rewards: np.ndarray,
    next_states: np.ndarray,
    terminal: np.ndarray,
    gamma: float,
) -> np.ndarray:
    """Bootstrapped regression targets; terminal rows are exactly the reward."""
    _, _, q_next = _forward_batch(target_net, np.asarray(next_states, dtype=float))
    rewards = np.asarray(rewards, dtype=float)
    return np.where(terminal, rewards, rewards + gamma * q_next.max(axis=1))


def mlp_backward(
    net: QNetwork,
    states: np.ndarray,
    actions: np.ndarray,
    targets: np.ndarray,
    learning_rate: float = 1e-3,
    apply: bool = True,
) -> tuple[float, list[np.ndarray]]:
    """Exact gradients of the mean squared TD error over the minibatch.

    Only the chosen action's output enters the loss for each sample.
    Returns (loss, gradients ordered [dW0, db0, dW1, db1, ...]) and applies
    one SGD step unless apply is False.
    """
    X = np.asarray(states, dtype=float)
    actions = np.asarray(actions, dtype=int)
    y = np.asarray(targets, dtype=float)
    B = len(actions)
    acts, pre, out = _forward_batch(net, X)

    chosen = out[np.arange(B), actions]
    diff = chosen - y
    loss = float(np.mean(diff**2))
    if not np.isfinite(loss):
        raise MiningError(
            f"non-finite TD loss {loss}; max|target|={np.max(np.abs(y))}, "
            f"max|q|={np.max(np.abs(out))}"
        )

    d_out = np.zeros_like(out)
    d_out[np.arange(B), actions] = 2.0 * diff / B

    grads: list[np.ndarray] = []
    delta = d_out
    for li in range(len(net.weights) - 1, -1, -1):
        grads.append(delta.sum(axis=0))  # db
        grads.append(acts[li].T @ delta)  # dW
        if li > 0:
            delta = (delta @ net.weights[li].T) * (pre[li - 1] > 0.0)
    grads.reverse()  # now [dW0, db0, dW1, db1, ...]

    if apply:
        for li in range(len(net.weights)):
            net.weights[li] -= learning_rate * grads[2 * li]
            net.biases[li] -= learning_rate * grads[2 * li + 1]
    return loss, grads


class ReplayBuffer:
    """Ring buffer of (state, action, reward, next_state, terminal)."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise InvalidConfigError(f"capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self._items: list[tuple] = []
        self._pos = 0

    def __len__(self) -> int:
        return len(self._items)

    def push(self, state, action, reward, next_state, terminal) -> None:
        entry = (state, int(action), float(reward), next_state, bool(terminal))
        if len(self._items) < self.capacity:
            self._items.append(entry)
        else:
            self._items[self._pos] = entry
        self._pos = (self._pos + 1) % self.capacity

    def sample(self, batch_size: int, rng: np.random.Generator):
        if len(self._items) < batch_size:
            raise MiningError(
                f"buffer holds {len(self._items)} transitions, need {batch_size}"
            )
        idx = rng.choice(len(self._items), size=batch_size, replace=False)
        states = np.stack([self._items[i][0] for i in idx])
        actions = np.array([self._items[i][1] for i in idx], dtype=int)
        rewards = np.array([self._items[i][2] for i in idx])
        next_states = np.stack([self._items[i][3] for i in idx])
        terminals = np.array([self._items[i][4] for i in idx], dtype=bool)
        return states, actions, rewards, next_states, terminals


def _valid_actions(mask: int, M: int, add_only: bool) -> list[int]:
    if add_only:
        return [i for i in range(M) if not (mask >> i) & 1]
    return list(range(M))


def train_dqn(
    data: TransactionMatrix,
    train: TrainConfig,
    cfg: MiningConfig,
    seed: int = 0,
) -> tuple[QNetwork, np.ndarray]:
    """Episode loop of Q-learning over item toggles.

    Episodes start from the empty itemset and end at m_max items, on a
    below-threshold support right after an add, or after max_steps steps;
    all three cases mark the stored transition terminal, so its TD target
    is the bare reward. Returns the trained network and the per-episode
    cumulative reward trace (length = episodes).
    """
    M = data.n_items
    if train.m_max > M:
        raise InvalidConfigError(f"m_max {train.m_max} exceeds M={M}")
    ss = np.random.SeedSequence(seed)
    net_ss, env_ss = ss.spawn(2)
    net = QNetwork(M, train.hidden, seed=net_ss)
    target = net.copy()
    rng = np.random.default_rng(env_ss)
    buffer = ReplayBuffer(train.buffer_capacity)
    cache = SupportCache(data)

    decay_rate = (train.epsilon_min / train.epsilon_start) ** (1.0 / train.decay_steps)
    global_step = 0
    trace = np.zeros(train.episodes)

    for e in range(train.episodes):
        mask = 0
        state_vec = observe(mask, M, cache).vector()
        episode_reward = 0.0
        for step in range(train.max_steps):
            valid = _valid_actions(mask, M, train.add_only)
            if not valid:
                break
            eps = max(train.epsilon_min, train.epsilon_start * decay_rate**global_step)
            if rng.random() < eps:
                a = valid[int(rng.integers(len(valid)))]
            else:
                q = mlp_forward(net, state_vec)
                masked = np.full(M, -np.inf)
                masked[valid] = q[valid]
                a = int(np.argmax(masked))

            new_mask = mask ^ (1 << a)
            was_add = new_mask > mask
            reward = compute_reward(
                itemset_of_mask(new_mask), data, cfg,
                train.w1, train.w2, train.normalize_lift, cache,
            )
            next_state = observe(new_mask, M, cache)
            terminal = (
                next_state.size >= train.m_max
                or (was_add and next_state.support < cfg.min_support)
                or step + 1 >= train.max_steps
            )
            next_vec = next_state.vector()
            buffer.push(state_vec, a, reward, next_vec, terminal)
            episode_reward += reward

            if len(buffer) >= train.batch_size:
                bs, ba, br, bn, bt = buffer.sample(train.batch_size, rng)
                targets = td_targets(target, br, bn, bt, train.gamma)
                mlp_backward(net, bs, ba, targets, train.learning_rate)

            global_step += 1
            if global_step % train.target_update == 0:
                target = net.copy()
            mask, state_vec = new_mask, next_vec
            if terminal:
                break
        trace[e] = episode_reward
    return net, trace


def extract_rules(
    net: QNetwork,
    data: TransactionMatrix,
    cfg: MiningConfig,
    m_max: int,
    S_max: int,
    k: int,
) -> list[Rule]:
    """Beam walk over the learned Q-values, widest-first.

    From the empty itemset, each surviving trajectory grows along its k
    highest-Q actions. Extraction only ever adds items (a remove action
    would revisit a smaller itemset, never reach a new one), so with k = 1
    the walk is a single greedy chain of at most one itemset per size.
    Extensions are kept when the itemset stays within m_max items and its
    empirical support clears min_support, and every split with confidence
    >= min_confidence is emitted. Trajectories reaching an already-visited
    itemset are merged. Every emitted rule is re-verified against
    brute-force counts.
    """
    if k < 1:
        raise InvalidConfigError(f"k must be >= 1, got {k}")
    if S_max < 1:
        raise InvalidConfigError(f"S_max must be >= 1, got {S_max}")
    M = net.n_items
    if M != data.n_items:
        raise InvalidConfigError(
            f"network was built for {M} items, data has {data.n_items}"
        )
    cache = SupportCache(data)
    N = data.n_transactions
    rules: list[Rule] = []
    seen: set[tuple[Itemset, Itemset]] = set()
    visited = {0}
    trajectories = [0]

    for _ in range(S_max):
        if not trajectories:
            break
        new_trajectories: list[int] = []
        for mask in trajectories:
            q = mlp_forward(net, observe(mask, M, cache).vector())
            taken = 0
            for a in np.argsort(-q, kind="stable"):
                if taken >= k:
                    break
                bit = 1 << int(a)
                if mask & bit:
                    continue
                taken += 1
                new_mask = mask | bit
                if new_mask.bit_count() > m_max or new_mask in visited:
                    continue
                visited.add(new_mask)
                cnt = cache.count(new_mask)
                if cnt / N < cfg.min_support:
                    continue
                new_trajectories.append(new_mask)
                itemset = itemset_of_mask(new_mask)
                if len(itemset) < 2:
                    continue
                for ante, cons in split_rule(itemset):
                    if (ante, cons) in seen:
                        continue
                    n_a = cache.count(mask_of(ante))
                    conf = cnt / n_a
                    if conf >= cfg.min_confidence:
                        seen.add((ante, cons))
                        n_b = cache.count(mask_of(cons))
                        rules.append(
                            Rule(ante, cons, cnt / N, conf, (cnt * N) / (n_a * n_b))
                        )
        trajectories = new_trajectories

    for rule in rules:
        cnt = data.count(rule.itemset)
        n_a = data.count(rule.antecedent)
        if cnt / N < cfg.min_support or cnt / n_a < cfg.min_confidence:
            raise MiningError(f"extracted rule fails verification: {rule}")
    rules.sort(key=rule_sort_key)
    return rules


def save_qnetwork(net: QNetwork, path) -> None:
    """Architecture header plus flat parameter arrays, npz format."""
    payload = {
        "n_items": np.array(net.n_items),
        "hidden": np.array(net.hidden, dtype=int),
    }
    for li, (w, b) in enumerate(zip(net.weights, net.biases)):
        payload[f"W{li}"] = w
        payload[f"b{li}"] = b
    np.savez(path, **payload)


def load_qnetwork(path) -> QNetwork:
    with np.load(path) as blob:
        n_items = int(blob["n_items"])
        hidden = tuple(int(h) for h in blob["hidden"])
        net = QNetwork(n_items, hidden, seed=0)
        for li in range(len(net.weights)):
            w, b = blob[f"W{li}"], blob[f"b{li}"]
            if w.shape != net.weights[li].shape or b.shape != net.biases[li].shape:
                raise InvalidConfigError(f"{path}: parameter shape mismatch at layer {li}")
            net.weights[li] = w
            net.biases[li] = b
    return net


def write_reward_trace(trace, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["episode", "cumulative_reward"])
        for e, r in enumerate(trace):
            w.writerow([e, repr(float(r))])
