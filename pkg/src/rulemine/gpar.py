"""Gaussian-process miner over item feature vectors.

Item presence/absence is modeled as the sign pattern of a latent Gaussian
vector whose covariance comes from a kernel over item features. Kernel
hyper-parameters are fitted by maximizing the summed Gaussian log-density
of the 0/1 transaction vectors; itemset probability is then the chance
that the corresponding latent coordinates are jointly positive, estimated
analytically for sizes 1 and 2 and by Monte Carlo beyond that.

Confidence is the ratio of two independently estimated probabilities, so
unlike the frequency miners it can exceed 1; it is reported unclamped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from itertools import combinations, product

import numpy as np
from scipy.linalg import solve_triangular
from scipy.optimize import minimize

from .classic import FrequentItemsetTable
from .core import (
    InvalidConfigError,
    InvalidItemsetError,
    Itemset,
    MiningConfig,
    Rule,
    TransactionMatrix,
    make_itemset,
    mask_of,
    rule_sort_key,
    split_rule,
)
from .kernels import (
    KernelError,
    KernelSpec,
    build_covariance,
    kernel_eval,
    orthant_prob_analytic,
    psd_check,
    psd_repair,
)

# latent dimension equals the item count; co-occurrence estimation scales
# exponentially in practice, so refuse silly sizes outright
MAX_ITEMS = 20

_MASK64 = (1 << 64) - 1


def _splitmix(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def derived_seed(seed: int, mask: int) -> int:
    """Stable per-itemset RNG seed, independent of evaluation order."""
    return _splitmix((seed & _MASK64) ^ _splitmix(mask & _MASK64))


@dataclass(frozen=True)
class GpModel:
    """Fitted kernel, features, and covariance pieces.

    K is the noise-free (post-repair) kernel matrix used for orthant
    sampling; K_t = K + noise * I is the training covariance whose lower
    Cholesky factor is stored.
    """

    spec: KernelSpec | None
    X: np.ndarray | None
    K: np.ndarray
    K_t: np.ndarray
    chol: np.ndarray
    objective: float

    @property
    def n_items(self) -> int:
        return self.K.shape[0]


@dataclass(frozen=True)
class OrthantEstimate:
    itemset: Itemset
    probability: float
    samples: int
    std_error: float


def _as_features(X, M: int | None = None) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if M is not None and X.shape[0] != M:
        raise InvalidConfigError(f"feature matrix has {X.shape[0]} rows for {M} items")
    return X


def gp_objective(spec: KernelSpec, X, data: TransactionMatrix) -> float:
    """Summed per-transaction Gaussian log-density of the 0/1 vectors.

    Each transaction contributes -1/2 t'K_t^{-1}t - 1/2 log|K_t| minus the
    M/2 log(2 pi) constant (M is the transaction vector length). Raises
    KernelError when the covariance cannot be factorized.
    """
    M = data.n_items
    X = _as_features(X, M)
    K = build_covariance(spec, X)
    if spec.needs_repair():
        K = psd_repair(K)
    K_t = K + spec.noise * np.eye(M)
    try:
        L = np.linalg.cholesky(K_t)
    except np.linalg.LinAlgError:
        raise KernelError("training covariance is not positive definite") from None
    T = data.rows.astype(float)
    alpha = solve_triangular(L, T.T, lower=True)
    quad = float(np.sum(alpha * alpha))
    logdet = 2.0 * float(np.sum(np.log(np.diag(L))))
    N = data.n_transactions
    return -0.5 * quad - 0.5 * N * logdet - N * (M / 2.0) * math.log(2.0 * math.pi)


_LOG_FIELDS = {
    "rbf": ("sigma_f2", "length_scale"),
    "shifted_rbf": ("length_scale",),
    "eimq": ("c", "beta"),
    "absolute_rbf": ("length_scale",),
    "arcsin_nn": (),
    "ntk3": ("width",),
}


def _encode(spec: KernelSpec, d: int):
    """Pack tunable hyper-parameters into an unconstrained vector.

    Positive scales optimize in log space; shifted_rbf's shift optimizes
    raw and is folded through abs(), snapping to 0 below 1e-6.
    """
    names = _LOG_FIELDS[spec.kind]
    x0 = [math.log(getattr(spec, n)) for n in names]
    n_weights = 0
    if spec.kind == "arcsin_nn":
        w = spec.weight_var if spec.weight_var is not None else tuple([1.0] * (d + 1))
        n_weights = len(w)
        x0.extend(math.log(v) for v in w)
    if spec.kind == "shifted_rbf":
        x0.append(spec.shift)
    x0.append(math.log(max(spec.noise, 1e-6)))

    def decode(x) -> KernelSpec:
        vals = {}
        i = 0
        for n in names:
            vals[n] = math.exp(min(max(x[i], -30.0), 30.0))
            i += 1
        if n_weights:
            vals["weight_var"] = tuple(
                math.exp(min(max(v, -30.0), 30.0)) for v in x[i : i + n_weights]
            )
            i += n_weights
        if spec.kind == "shifted_rbf":
            s = abs(x[i])
            i += 1
            vals["shift"] = 0.0 if s < 1e-6 else s
        vals["noise"] = math.exp(min(max(x[i], -30.0), 30.0))
        return replace(spec, **vals)

    return np.array(x0, dtype=float), decode


def fit_gp(X, data: TransactionMatrix, spec: KernelSpec, maxiter: int = 200) -> GpModel:
    """Deterministic multistart simplex search over kernel hyper-parameters.

    Candidates whose covariance cannot be factorized are rejected; if every
    candidate fails the fit errors out. A kernel whose seed Gram fails the
    PSD check is refused unless repair is enabled for it.
    """
    M = data.n_items
    if M > MAX_ITEMS:
        raise InvalidConfigError(f"M={M} exceeds the supported cap of {MAX_ITEMS} items")
    X = _as_features(X, M)
    K0 = build_covariance(spec, X)
    ok, _ = psd_check(K0, 1e-8)
    if not ok and not spec.needs_repair():
        raise KernelError(
            f"{spec.kind} Gram fails the PSD check; enable repair to train with it"
        )

    x0, decode = _encode(spec, X.shape[1])

    def neg(x) -> float:
        try:
            return -gp_objective(decode(x), X, data)
        except (KernelError, np.linalg.LinAlgError):
            return math.inf

    # deterministic coarse multistart: one decade up/down per parameter,
    # full grid while small, axis-wise beyond that
    step = math.log(10.0)
    P = len(x0)
    starts = [x0.copy()]
    if 3**P <= 243:
        for deltas in product((-step, 0.0, step), repeat=P):
            if any(deltas):
                starts.append(x0 + np.array(deltas))
    else:
        for i in range(P):
            for s in (-step, step):
                shifted = x0.copy()
                shifted[i] += s
                starts.append(shifted)

    scored = [(neg(s), tuple(s)) for s in starts]
    best_val, best_x = min(scored, key=lambda t: t[0])
    if not math.isfinite(best_val):
        raise KernelError("hyper-parameter training failed: every candidate rejected")

    res = minimize(
        neg,
        np.array(best_x),
        method="Nelder-Mead",
        options={"maxiter": maxiter, "xatol": 1e-6, "fatol": 1e-9},
    )
    if math.isfinite(res.fun) and res.fun < best_val:
        best_val, best_x = res.fun, tuple(res.x)

    fitted = decode(np.array(best_x))
    return build_model(fitted, X, data)


def build_model(spec: KernelSpec, X, data: TransactionMatrix | None = None) -> GpModel:
    """Assemble a GpModel at fixed hyper-parameters (no optimization)."""
    X = _as_features(X)
    K = build_covariance(spec, X)
    if spec.needs_repair():
        K = psd_repair(K)
    K_t = K + spec.noise * np.eye(K.shape[0])
    try:
        L = np.linalg.cholesky(K_t)
    except np.linalg.LinAlgError:
        raise KernelError("covariance is not positive definite after assembly") from None
    obj = gp_objective(spec, X, data) if data is not None else math.nan
    return GpModel(spec=spec, X=X, K=K, K_t=K_t, chol=L, objective=obj)


def model_from_covariance(K, noise: float = 0.0) -> GpModel:
    """Wrap an explicit covariance (no kernel, no features) for estimation."""
    K = np.asarray(K, dtype=float)
    K_t = K + noise * np.eye(K.shape[0])
    return GpModel(
        spec=None,
        X=None,
        K=K,
        K_t=K_t,
        chol=np.linalg.cholesky(K_t),
        objective=math.nan,
    )


def mc_orthant(K_I, S: int, seed: int) -> tuple[float, float]:
    """Monte Carlo positive-orthant probability and its binomial std error."""
    K_I = np.asarray(K_I, dtype=float)
    try:
        L = np.linalg.cholesky(K_I)
    except np.linalg.LinAlgError:
        raise KernelError(
            "itemset sub-covariance is not positive definite; repair the kernel first"
        ) from None
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((S, K_I.shape[0])) @ L.T
    p = float(np.count_nonzero((z > 0.0).all(axis=1))) / S
    return p, math.sqrt(p * (1.0 - p) / S)


def estimate_cooccurrence(
    model: GpModel, itemset, S: int, seed: int = 0
) -> OrthantEstimate:
    """p(all latent coordinates of the itemset > 0).

    Sizes 1 and 2 use the closed form (exact, zero std error); larger sets
    draw S Gaussian samples through the Cholesky factor of the noise-free
    sub-covariance.
    """
    iset = make_itemset(itemset)
    if not iset:
        raise InvalidItemsetError("itemset must be non-empty")
    if S < 1:
        raise InvalidConfigError(f"sample count must be >= 1, got {S}")
    if iset[-1] >= model.n_items:
        raise InvalidItemsetError(f"item {iset[-1]} out of range for M={model.n_items}")
    idx = list(iset)
    K_I = model.K[np.ix_(idx, idx)]
    if len(iset) <= 2:
        return OrthantEstimate(iset, orthant_prob_analytic(K_I), S, 0.0)
    p, se = mc_orthant(K_I, S, seed)
    return OrthantEstimate(iset, p, S, se)


def mine_gpar(
    X, data: TransactionMatrix, spec: KernelSpec, cfg: MiningConfig, S: int = 1000
) -> tuple[FrequentItemsetTable, list[Rule]]:
    """Fit, then enumerate itemsets of sizes 2..max and emit rules.

    An itemset is kept when its estimated probability strictly exceeds
    min_support; each split's antecedent probability is estimated from its
    own independent sample stream and the rule is emitted when the ratio
    strictly exceeds min_confidence. Per-itemset seeds derive from
    (cfg.seed, itemset), so results do not depend on evaluation order.
    """
    cfg.check_against(data)
    model = fit_gp(X, data, spec)
    cache: dict[int, float] = {}

    def prob(iset: Itemset) -> float:
        m = mask_of(iset)
        if m not in cache:
            est = estimate_cooccurrence(model, iset, S, seed=derived_seed(cfg.seed, m))
            cache[m] = est.probability
        return cache[m]

    entries: dict[Itemset, float] = {}
    rules: list[Rule] = []
    M = data.n_items
    for m in range(2, min(cfg.max_itemset_size, M) + 1):
        for iset in combinations(range(M), m):
            p = prob(iset)
            if p > cfg.min_support:
                entries[iset] = p
                for ante, cons in split_rule(iset):
                    p_a = prob(ante)
                    if p_a <= 0.0:
                        continue
                    conf = p / p_a
                    if conf > cfg.min_confidence:
                        p_b = prob(cons)
                        lift_v = p / (p_a * p_b) if p_b > 0.0 else math.inf
                        rules.append(Rule(ante, cons, p, conf, lift_v))
    rules.sort(key=rule_sort_key)
    return FrequentItemsetTable(entries), rules


def extend_items(model: GpModel, x_new) -> GpModel:
    """Augment a fitted model with one new item, without re-optimizing.

    The old covariance block is copied bit-for-bit; only the new row and
    column are kernel evaluations. If the augmented matrix fails the PSD
    check it is repaired when the kernel opted in, otherwise this errors.
    """
    if model.spec is None or model.X is None:
        raise KernelError("model has no kernel spec or features to extend from")
    x_new = np.asarray(x_new, dtype=float).ravel()
    if x_new.shape[0] != model.X.shape[1]:
        raise KernelError(
            f"new item has {x_new.shape[0]} features, model expects {model.X.shape[1]}"
        )
    M = model.n_items
    if M + 1 > MAX_ITEMS:
        raise InvalidConfigError(f"extension would exceed the {MAX_ITEMS}-item cap")
    spec = model.spec
    k_vec = np.array([kernel_eval(spec, x_new, model.X[i]) for i in range(M)])
    k_self = kernel_eval(spec, x_new, x_new)
    K_new = np.empty((M + 1, M + 1))
    K_new[:M, :M] = model.K
    K_new[:M, M] = k_vec
    K_new[M, :M] = k_vec
    K_new[M, M] = k_self
    ok, _ = psd_check(K_new, 1e-8)
    if not ok:
        if spec.needs_repair():
            K_new = psd_repair(K_new)
        else:
            raise KernelError("augmented covariance fails the PSD check; enable repair")
    K_t_new = K_new + spec.noise * np.eye(M + 1)
    try:
        L = np.linalg.cholesky(K_t_new)
    except np.linalg.LinAlgError:
        raise KernelError("augmented covariance is not positive definite") from None
    return GpModel(
        spec=spec,
        X=np.vstack([model.X, x_new[None, :]]),
        K=K_new,
        K_t=K_t_new,
        chol=L,
        objective=model.objective,
    )
