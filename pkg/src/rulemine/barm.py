"""Bayesian miner over per-item Bernoulli probabilities.

Two inference paths share the mining loop. The dependency-free path uses
the conjugate Beta posterior and draws one shared set of S joint samples;
itemset probability is the sample mean of the per-item probability
product. The correlated path runs Metropolis-Hastings over (logit p_i,
log ell) and can evaluate joint presence through a Gaussian copula whose
correlations come from item feature distances.

Because every probability is estimated from the same sample set, p(I) can
never exceed p(A) for A inside I, so confidence stays in [0, 1] here
(checked per rule), and lift collapses toward 1 as S grows.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.special import ndtri

from .classic import FrequentItemsetTable
from .core import (
    InvalidConfigError,
    Itemset,
    MiningConfig,
    MiningError,
    Rule,
    TransactionMatrix,
    mask_of,
    rule_sort_key,
    split_rule,
)


@dataclass(frozen=True)
class BetaBelief:
    """Per-item Beta prior and its conjugate posterior after counting."""

    prior_alpha: np.ndarray
    prior_beta: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    counts: np.ndarray

    @property
    def mean(self) -> np.ndarray:
        return self.alpha / (self.alpha + self.beta)


def _prior_arrays(priors, M: int) -> tuple[np.ndarray, np.ndarray]:
    if priors is None:
        return np.ones(M), np.ones(M)
    arr = np.asarray(priors, dtype=float)
    if arr.shape != (M, 2):
        raise InvalidConfigError(f"priors must be shaped ({M}, 2), got {arr.shape}")
    if (arr <= 0).any():
        raise InvalidConfigError("Beta prior parameters must be > 0")
    return arr[:, 0].copy(), arr[:, 1].copy()


def beta_posterior(priors, data) -> BetaBelief:
    """Conjugate update: posterior_i = Beta(alpha_i + n_i, beta_i + N - n_i).

    n_i is the column sum. The update is integer arithmetic on top of the
    prior, exact in doubles. data may be a TransactionMatrix or a raw 0/1
    array (possibly with zero rows, in which case posterior = prior).
    """
    if isinstance(data, TransactionMatrix):
        rows = data.rows
    else:
        rows = np.asarray(data)
        if rows.ndim != 2:
            raise InvalidConfigError("data must be a 2-d 0/1 array")
    N, M = rows.shape
    a0, b0 = _prior_arrays(priors, M)
    n = rows.sum(axis=0, dtype=np.int64).astype(float) if N else np.zeros(M)
    return BetaBelief(
        prior_alpha=a0,
        prior_beta=b0,
        alpha=a0 + n,
        beta=b0 + (N - n),
        counts=n,
    )


def draw_posterior_samples(belief: BetaBelief, S: int, seed: int) -> np.ndarray:
    """One shared (S, M) matrix of joint draws from the item posteriors."""
    if S < 1:
        raise InvalidConfigError(f"sample count must be >= 1, got {S}")
    rng = np.random.default_rng(seed)
    return rng.beta(belief.alpha, belief.beta, size=(S, len(belief.alpha)))


def _mine_from_prob(prob, M: int, cfg: MiningConfig):
    """Shared mining loop over a cached per-itemset probability function.

    Keeps itemsets with p(I) strictly above min_support; rules need conf >=
    min_confidence. With shared samples conf <= 1 is guaranteed; a violation
    means the estimator broke containment, so it is checked per rule.
    """
    entries: dict[Itemset, float] = {}
    rules: list[Rule] = []
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
                    if conf > 1.0 + 1e-9:
                        raise MiningError(
                            f"shared-sample confidence {conf} > 1 for {ante} -> {cons}"
                        )
                    if conf >= cfg.min_confidence:
                        p_b = prob(cons)
                        lift_v = p / (p_a * p_b) if p_b > 0.0 else math.inf
                        rules.append(Rule(ante, cons, p, min(conf, 1.0), lift_v))
    rules.sort(key=rule_sort_key)
    return FrequentItemsetTable(entries), rules


def _product_prob_fn(P: np.ndarray):
    cache: dict[int, float] = {}

    def prob(iset: Itemset) -> float:
        m = mask_of(iset)
        v = cache.get(m)
        if v is None:
            v = float(P[:, list(iset)].prod(axis=1).mean())
            cache[m] = v
        return v

    return prob


def mine_barm_free(
    data: TransactionMatrix,
    priors,
    cfg: MiningConfig,
    S: int = 10_000,
    seed: int | None = None,
) -> tuple[FrequentItemsetTable, list[Rule]]:
    """Dependency-free path: conjugate posterior, product co-occurrence.

    p(I) = (1/S) sum_s prod_{i in I} p_i^(s) over one shared sample set;
    p(A) for confidence comes from the same set. Support values here are
    posterior-mean probabilities, not empirical frequencies.
    """
    cfg.check_against(data)
    belief = beta_posterior(priors, data)
    P = draw_posterior_samples(belief, S, cfg.seed if seed is None else seed)
    return _mine_from_prob(_product_prob_fn(P), data.n_items, cfg)


@dataclass(frozen=True)
class McmcConfig:
    """Metropolis-Hastings settings for the correlated path.

    mode "identity" ignores item features; "gaussian-copula-mc" evaluates
    joint presence by thresholding correlated latent Gaussians with
    rho_ij = exp(-||x_i - x_j||^2 / ell^2), ell drawn with the chain.
    """

    chain_length: int = 20_000
    burn_in: int = 5_000
    step_logit: float = 0.1
    step_log_ell: float = 0.1
    gamma_a: float = 2.0
    gamma_b: float = 1.0
    mode: str = "identity"
    copula_draws: int = 500

    def __post_init__(self):
        if self.burn_in >= self.chain_length:
            raise InvalidConfigError(
                f"burn-in {self.burn_in} must be < chain length {self.chain_length}"
            )
        if self.step_logit <= 0 or self.step_log_ell <= 0:
            raise InvalidConfigError("proposal step sizes must be > 0")
        if self.gamma_a <= 0 or self.gamma_b <= 0:
            raise InvalidConfigError("Gamma prior parameters must be > 0")
        if self.mode not in ("identity", "gaussian-copula-mc"):
            raise InvalidConfigError(f"unknown correlation mode {self.mode!r}")
        if self.copula_draws < 1:
            raise InvalidConfigError("copula_draws must be >= 1")


def _log_target(u: np.ndarray, v: float, counts, N, a0, b0, mcmc: McmcConfig) -> float:
    # Bernoulli likelihood + Beta prior + Gamma prior on ell, all in the
    # transformed space (logit p, log ell), Jacobians included
    p = 1.0 / (1.0 + np.exp(-u))
    logp = -np.logaddexp(0.0, -u)  # log p, stable
    log1mp = -np.logaddexp(0.0, u)  # log (1 - p)
    ll = float(np.sum(counts * logp + (N - counts) * log1mp))
    prior = float(np.sum((a0 - 1.0) * logp + (b0 - 1.0) * log1mp))
    jac_p = float(np.sum(logp + log1mp))
    ell = math.exp(v)
    prior_ell = (mcmc.gamma_a - 1.0) * v - mcmc.gamma_b * ell
    jac_ell = v
    return ll + prior + jac_p + prior_ell + jac_ell


def run_mh_chain(
    data: TransactionMatrix, priors, mcmc: McmcConfig, seed: int
) -> tuple[np.ndarray, np.ndarray, float]:
    """MH over ({logit p_i}, log ell). Returns (p draws, ell draws, accept rate).

    Draws are post burn-in, one row per kept step. Acceptance rate outside
    [0.05, 0.95] raises a warning, not an error.
    """
    M = data.n_items
    N = data.n_transactions
    a0, b0 = _prior_arrays(priors, M)
    counts = data.rows.sum(axis=0, dtype=np.int64).astype(float)
    rng = np.random.default_rng(seed)

    # start at the posterior mean in logit space, ell at the prior mean
    p0 = (a0 + counts) / (a0 + b0 + N)
    u = np.log(p0 / (1.0 - p0))
    v = math.log(mcmc.gamma_a / mcmc.gamma_b)
    cur = _log_target(u, v, counts, N, a0, b0, mcmc)

    kept_p = np.empty((mcmc.chain_length - mcmc.burn_in, M))
    kept_ell = np.empty(mcmc.chain_length - mcmc.burn_in)
    accepted = 0
    for t in range(mcmc.chain_length):
        u_prop = u + mcmc.step_logit * rng.standard_normal(M)
        v_prop = v + mcmc.step_log_ell * rng.standard_normal()
        cand = _log_target(u_prop, v_prop, counts, N, a0, b0, mcmc)
        if math.log(rng.random()) < cand - cur:
            u, v, cur = u_prop, v_prop, cand
            accepted += 1
        if t >= mcmc.burn_in:
            kept_p[t - mcmc.burn_in] = 1.0 / (1.0 + np.exp(-u))
            kept_ell[t - mcmc.burn_in] = math.exp(v)
    rate = accepted / mcmc.chain_length
    if not 0.05 <= rate <= 0.95:
        warnings.warn(
            f"MH acceptance rate {rate:.3f} outside [0.05, 0.95]; "
            "consider adjusting proposal steps",
            stacklevel=2,
        )
    return kept_p, kept_ell, rate


def _copula_indicators(
    P: np.ndarray, ells: np.ndarray, X: np.ndarray, draws: int, seed: int
) -> np.ndarray:
    """Latent-Gaussian presence indicators, (S * draws) x M.

    For each kept chain sample, draws latent vectors with correlation
    rho_ij = exp(-||x_i - x_j||^2 / ell^2) and thresholds coordinate i at
    the (1 - p_i) quantile, so marginals match the sampled p_i while the
    copula injects the feature-driven dependence.
    """
    S, M = P.shape
    d2 = np.sum((X[:, None, :] - X[None, :, :]) ** 2, axis=-1)
    rng = np.random.default_rng(seed)
    out = np.empty((S * draws, M), dtype=np.uint8)
    for s in range(S):
        R = np.exp(-d2 / (ells[s] ** 2))
        L = np.linalg.cholesky(R + 1e-9 * np.eye(M))
        z = rng.standard_normal((draws, M)) @ L.T
        thresh = ndtri(1.0 - np.clip(P[s], 1e-12, 1.0 - 1e-12))
        out[s * draws : (s + 1) * draws] = z > thresh
    return out


def mine_barm_mcmc(
    data: TransactionMatrix,
    X,
    priors,
    mcmc: McmcConfig,
    cfg: MiningConfig,
    S: int = 200,
    seed: int | None = None,
) -> tuple[FrequentItemsetTable, list[Rule]]:
    """Correlated path: MH chain thinned to S samples, then the shared loop.

    With identity mode the co-occurrence is the per-item product, which
    must statistically match the dependency-free path; with the copula
    mode joint presence is counted from correlated latent indicators.
    """
    cfg.check_against(data)
    if mcmc.mode != "identity" and X is None:
        raise InvalidConfigError("feature matrix required for correlated mode")
    base_seed = cfg.seed if seed is None else seed
    kept_p, kept_ell, _ = run_mh_chain(data, priors, mcmc, base_seed)
    if S > len(kept_p):
        raise InvalidConfigError(
            f"S={S} exceeds kept chain length {len(kept_p)}"
        )
    idx = np.linspace(0, len(kept_p) - 1, S).round().astype(int)
    P = kept_p[idx]
    ells = kept_ell[idx]
    if mcmc.mode == "identity":
        prob = _product_prob_fn(P)
    else:
        Xa = np.asarray(X, dtype=float)
        if Xa.ndim == 1:
            Xa = Xa[:, None]
        if Xa.shape[0] != data.n_items:
            raise InvalidConfigError(
                f"feature matrix has {Xa.shape[0]} rows for {data.n_items} items"
            )
        indicators = _copula_indicators(
            P, ells, Xa, mcmc.copula_draws, base_seed ^ 0x5EED
        )
        pseudo = TransactionMatrix(indicators)
        cache: dict[int, float] = {}

        def prob(iset: Itemset) -> float:
            m = mask_of(iset)
            v = cache.get(m)
            if v is None:
                v = pseudo.count(iset) / pseudo.n_transactions
                cache[m] = v
            return v

    return _mine_from_prob(prob, data.n_items, cfg)


def read_priors_csv(path, M: int) -> np.ndarray:
    """(item, alpha, beta) rows; items absent from the file get Beta(1,1)."""
    out = np.ones((M, 2))
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r, None)
        if header is None:
            return out
        for lineno, row in enumerate(r, start=2):
            if not row:
                continue
            try:
                i = int(row[0])
                a, b = float(row[1]), float(row[2])
            except (ValueError, IndexError):
                raise InvalidConfigError(f"{path}:{lineno}: bad prior row") from None
            if not 0 <= i < M:
                raise InvalidConfigError(f"{path}:{lineno}: item {i} out of range")
            if a <= 0 or b <= 0:
                raise InvalidConfigError(f"{path}:{lineno}: priors must be > 0")
            out[i] = (a, b)
    return out
