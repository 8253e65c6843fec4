import numpy as np
import pytest

from rulemine import (
    InvalidConfigError,
    McmcConfig,
    MiningConfig,
    TransactionMatrix,
    beta_posterior,
    draw_posterior_samples,
    mine_barm_free,
    mine_barm_mcmc,
    run_mh_chain,
)
from rulemine.barm import read_priors_csv


def _bernoulli(seed=0, N=200, M=8, p=0.35):
    rng = np.random.default_rng(seed)
    return TransactionMatrix(rng.binomial(1, p, size=(N, M)).astype(np.uint8))


def test_conjugate_update_exact():
    rows = np.array([[1, 0], [1, 1], [0, 1], [1, 0]], dtype=np.uint8)
    bel = beta_posterior(None, TransactionMatrix(rows))
    assert np.array_equal(bel.counts, [3, 2])
    assert np.array_equal(bel.alpha, [4.0, 3.0])  # 1 + n_i
    assert np.array_equal(bel.beta, [2.0, 3.0])  # 1 + N - n_i
    priors = np.array([[2.0, 5.0], [1.0, 1.0]])
    bel2 = beta_posterior(priors, rows)
    assert np.array_equal(bel2.alpha, [5.0, 3.0])
    assert np.array_equal(bel2.beta, [6.0, 3.0])
    assert np.allclose(bel2.mean, [5 / 11, 0.5])


def test_posterior_zero_rows_is_prior():
    bel = beta_posterior(None, np.zeros((0, 3), dtype=np.uint8))
    assert np.array_equal(bel.alpha, np.ones(3))
    assert np.array_equal(bel.beta, np.ones(3))


def test_prior_validation():
    with pytest.raises(InvalidConfigError):
        beta_posterior(np.ones((3, 2)), np.zeros((2, 2), dtype=np.uint8))
    with pytest.raises(InvalidConfigError):
        beta_posterior(np.zeros((2, 2)), np.zeros((2, 2), dtype=np.uint8))


def test_draw_samples_deterministic():
    bel = beta_posterior(None, _bernoulli())
    P1 = draw_posterior_samples(bel, 50, seed=3)
    P2 = draw_posterior_samples(bel, 50, seed=3)
    assert np.array_equal(P1, P2)
    assert P1.shape == (50, 8)
    assert ((P1 > 0) & (P1 < 1)).all()
    with pytest.raises(InvalidConfigError):
        draw_posterior_samples(bel, 0, seed=1)


def test_free_path_lift_near_one_and_conf_bounded():
    data = _bernoulli(5, N=300, M=6, p=0.6)
    cfg = MiningConfig(0.2, 0.3, max_itemset_size=4, seed=11)
    table, rules = mine_barm_free(data, None, cfg, S=4000)
    t2, r2 = mine_barm_free(data, None, cfg, S=4000)
    assert table.entries == t2.entries and rules == r2  # reproducible
    assert len(rules) > 0
    assert all(r.confidence <= 1.0 for r in rules)
    lifts = np.array([r.lift for r in rules])
    assert np.median(np.abs(lifts - 1.0)) < 0.05
    assert all(len(i) >= 2 for i in table.itemsets())
    assert all(p > cfg.min_support for p in table.entries.values())


def test_free_path_containment_is_deterministic():
    # p(I) <= p(A) holds per shared sample set, so no rule ever errors
    data = _bernoulli(9, N=100, M=7, p=0.7)
    cfg = MiningConfig(0.1, 0.1, max_itemset_size=5, seed=2)
    for s in range(5):
        _, rules = mine_barm_free(data, None, cfg, S=500, seed=s)
        assert all(r.confidence <= 1.0 for r in rules)


def test_mcmc_config_validation():
    with pytest.raises(InvalidConfigError):
        McmcConfig(chain_length=100, burn_in=100)
    with pytest.raises(InvalidConfigError):
        McmcConfig(step_logit=0.0)
    with pytest.raises(InvalidConfigError):
        McmcConfig(mode="bogus")
    with pytest.raises(InvalidConfigError):
        McmcConfig(copula_draws=0)


def test_mh_chain_matches_conjugate_means():
    data = _bernoulli(2)
    mcmc = McmcConfig(chain_length=20_000, burn_in=5_000)
    kept_p, kept_ell, rate = run_mh_chain(data, None, mcmc, seed=4)
    again, _, _ = run_mh_chain(data, None, mcmc, seed=4)
    assert np.array_equal(kept_p, again)
    assert kept_p.shape == (15_000, 8)
    assert 0.05 <= rate <= 0.95
    want = beta_posterior(None, data).mean
    rel = np.abs(kept_p.mean(axis=0) - want) / want
    assert rel.max() < 0.02
    assert (kept_ell > 0).all()


def test_mh_warns_on_bad_acceptance():
    data = _bernoulli(3, N=500)
    mcmc = McmcConfig(chain_length=300, burn_in=100, step_logit=60.0, step_log_ell=60.0)
    with pytest.warns(UserWarning, match="acceptance rate"):
        run_mh_chain(data, None, mcmc, seed=0)


def test_mine_mcmc_identity():
    data = _bernoulli(7, N=150, M=5, p=0.55)
    cfg = MiningConfig(0.15, 0.3, max_itemset_size=3, seed=6)
    mcmc = McmcConfig(chain_length=3_000, burn_in=1_000)
    t1, r1 = mine_barm_mcmc(data, None, None, mcmc, cfg, S=100)
    t2, r2 = mine_barm_mcmc(data, None, None, mcmc, cfg, S=100)
    assert t1.entries == t2.entries and r1 == r2
    assert all(r.confidence <= 1.0 for r in r1)
    with pytest.raises(InvalidConfigError):
        mine_barm_mcmc(data, None, None, mcmc, cfg, S=2_001)


def test_mine_mcmc_copula_requires_features():
    data = _bernoulli(8, N=80, M=4)
    cfg = MiningConfig(0.05, 0.2, max_itemset_size=3, seed=1)
    mcmc = McmcConfig(chain_length=800, burn_in=300, mode="gaussian-copula-mc",
                      copula_draws=40)
    with pytest.raises(InvalidConfigError):
        mine_barm_mcmc(data, None, None, mcmc, cfg, S=20)
    X = np.random.default_rng(4).standard_normal((4, 2))
    t1, r1 = mine_barm_mcmc(data, X, None, mcmc, cfg, S=20)
    t2, r2 = mine_barm_mcmc(data, X, None, mcmc, cfg, S=20)
    assert t1.entries == t2.entries and r1 == r2
    assert all(r.confidence <= 1.0 for r in r1)
    with pytest.raises(InvalidConfigError):
        mine_barm_mcmc(data, X[:3], None, mcmc, cfg, S=20)


def test_read_priors_csv(tmp_path):
    p = tmp_path / "priors.csv"
    p.write_text("item,alpha,beta\n0,2.0,3.0\n2,1.5,1.5\n")
    arr = read_priors_csv(p, 4)
    assert np.array_equal(arr[0], [2.0, 3.0])
    assert np.array_equal(arr[1], [1.0, 1.0])
    assert np.array_equal(arr[2], [1.5, 1.5])
    bad = tmp_path / "bad.csv"
    bad.write_text("item,alpha,beta\n0,2.0,x\n")
    with pytest.raises(InvalidConfigError, match="bad.csv:2"):
        read_priors_csv(bad, 4)
    oob = tmp_path / "oob.csv"
    oob.write_text("item,alpha,beta\n9,1.0,1.0\n")
    with pytest.raises(InvalidConfigError, match="out of range"):
        read_priors_csv(oob, 4)
