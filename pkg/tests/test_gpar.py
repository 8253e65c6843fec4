import math

import numpy as np
import pytest
from scipy.stats import multivariate_normal

from rulemine import (
    InvalidConfigError,
    KernelError,
    KernelSpec,
    MiningConfig,
    TransactionMatrix,
    build_model,
    estimate_cooccurrence,
    extend_items,
    fit_gp,
    mc_orthant,
    mine_gpar,
    model_from_covariance,
)
from rulemine.gpar import derived_seed, gp_objective
from rulemine.kernels import kernel_eval


def _toy(seed=0, N=80, M=4, d=2):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((M, d))
    rows = (rng.random((N, M)) < 0.5).astype(np.uint8)
    return X, TransactionMatrix(rows)


def test_derived_seed_stable_and_distinct():
    assert derived_seed(1, 0b101) == derived_seed(1, 0b101)
    seen = {derived_seed(7, m) for m in range(1, 200)}
    assert len(seen) == 199


def test_gp_objective_matches_mvn_logpdf():
    X, data = _toy(3)
    spec = KernelSpec("rbf", sigma_f2=1.3, length_scale=0.8, noise=0.5)
    got = gp_objective(spec, X, data)
    from rulemine.kernels import build_covariance

    K_t = build_covariance(spec, X) + 0.5 * np.eye(4)
    want = multivariate_normal(mean=np.zeros(4), cov=K_t).logpdf(
        data.rows.astype(float)
    ).sum()
    assert got == pytest.approx(want, rel=1e-10)


def test_fit_improves_on_seed_spec():
    X, data = _toy(5)
    seed_spec = KernelSpec("rbf", sigma_f2=1.0, length_scale=1.0, noise=1.0)
    model = fit_gp(X, data, seed_spec, maxiter=120)
    assert model.objective >= gp_objective(seed_spec, X, data) - 1e-9
    assert model.spec.kind == "rbf"
    # training covariance factor is consistent
    assert np.allclose(model.chol @ model.chol.T, model.K_t)


def test_fit_refuses_nonpsd_kernel_without_repair():
    X = np.arange(4.0)[:, None]
    data = TransactionMatrix(np.ones((5, 4), dtype=np.uint8))
    with pytest.raises(KernelError):
        fit_gp(X, data, KernelSpec("absolute_rbf"))


def test_fit_item_cap():
    M = 21
    data = TransactionMatrix(np.ones((2, M), dtype=np.uint8))
    with pytest.raises(InvalidConfigError):
        fit_gp(np.zeros((M, 1)), data, KernelSpec("rbf"))


def test_mc_orthant_deterministic_and_calibrated():
    K = np.array([[1.0, 0.6], [0.6, 1.0]])
    p1, se1 = mc_orthant(K, 50_000, seed=9)
    p2, _ = mc_orthant(K, 50_000, seed=9)
    assert p1 == p2
    want = 0.25 + math.asin(0.6) / (2 * math.pi)
    assert abs(p1 - want) < 4 * se1
    with pytest.raises(KernelError):
        mc_orthant(np.array([[1.0, 2.0], [2.0, 1.0]]), 100, seed=0)


def test_estimate_cooccurrence_paths():
    rng = np.random.default_rng(12)
    A = rng.standard_normal((3, 3))
    K = A @ A.T + 3 * np.eye(3)
    model = model_from_covariance(K)
    one = estimate_cooccurrence(model, (1,), 10)
    assert one.probability == 0.5 and one.std_error == 0.0
    two = estimate_cooccurrence(model, (0, 2), 10)
    rho = K[0, 2] / math.sqrt(K[0, 0] * K[2, 2])
    assert two.probability == pytest.approx(0.25 + math.asin(rho) / (2 * math.pi))
    three = estimate_cooccurrence(model, (0, 1, 2), 200_000, seed=4)
    want = multivariate_normal(mean=np.zeros(3), cov=K, allow_singular=False).cdf(
        np.zeros(3)
    )  # sign symmetry: P(all > 0) = P(all < 0)
    assert abs(three.probability - want) < 4 * max(three.std_error, 1e-4)
    with pytest.raises(InvalidConfigError):
        estimate_cooccurrence(model, (0,), 0)


def test_mine_gpar_contracts():
    X, data = _toy(8, N=120, M=5)
    cfg = MiningConfig(0.15, 0.5, max_itemset_size=3, seed=21)
    out1 = mine_gpar(X, data, KernelSpec("rbf"), cfg, S=400)
    out2 = mine_gpar(X, data, KernelSpec("rbf"), cfg, S=400)
    assert out1[0].entries == out2[0].entries  # bit-reproducible
    assert out1[1] == out2[1]
    table, rules = out1
    assert all(2 <= len(i) <= 3 for i in table.itemsets())
    assert all(v > cfg.min_support for v in table.entries.values())
    for r in rules:
        assert r.confidence > cfg.min_confidence
        assert r.itemset in table.entries
        assert r.support == table[r.itemset]


def test_extend_items_preserves_old_block():
    X, data = _toy(2)
    model = build_model(KernelSpec("rbf", length_scale=1.2), X, data)
    x_new = np.array([0.3, -0.8])
    bigger = extend_items(model, x_new)
    assert bigger.n_items == model.n_items + 1
    assert np.array_equal(bigger.K[:4, :4], model.K)
    for i in range(4):
        assert bigger.K[4, i] == kernel_eval(model.spec, x_new, X[i])
    with pytest.raises(KernelError):
        extend_items(model, np.zeros(3))
    bare = model_from_covariance(np.eye(2))
    with pytest.raises(KernelError):
        extend_items(bare, np.zeros(2))
