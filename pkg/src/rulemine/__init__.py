"""Association rule mining with exact, sampled, and learned search."""

from .core import (
    InvalidConfigError,
    InvalidItemsetError,
    InvalidSplitError,
    MiningConfig,
    MiningError,
    Rule,
    SupportCache,
    TransactionMatrix,
    UndefinedMetricError,
    confidence,
    enumerate_itemsets,
    lift,
    make_itemset,
    read_transactions_csv,
    split_rule,
    support,
    write_rules_csv,
    write_transactions_csv,
)
from .classic import FrequentItemsetTable, min_count, mine_apriori, mine_eclat, mine_fpgrowth
from .kernels import (
    KERNEL_KINDS,
    KernelError,
    KernelSpec,
    build_covariance,
    kernel_eval,
    orthant_prob_analytic,
    psd_check,
    psd_repair,
)
from .gpar import (
    GpModel,
    build_model,
    estimate_cooccurrence,
    extend_items,
    fit_gp,
    mc_orthant,
    mine_gpar,
    model_from_covariance,
)
from .barm import (
    BetaBelief,
    McmcConfig,
    beta_posterior,
    draw_posterior_samples,
    mine_barm_free,
    mine_barm_mcmc,
    run_mh_chain,
)
from .bandit import PruningPolicy, mine_emab, mine_mab, mine_mcts, ucb_score
from .rlar import (
    QNetwork,
    ReplayBuffer,
    TrainConfig,
    compute_reward,
    extract_rules,
    mlp_backward,
    mlp_forward,
    train_dqn,
)
from .data import (
    CategoricalSchema,
    SyntheticSpec,
    gen_synthetic1,
    gen_synthetic2,
    ingest_categorical,
    read_features_csv,
    synthetic2_spec,
    write_features_csv,
)

__version__ = "0.1.0"

__all__ = [
    "BetaBelief",
    "CategoricalSchema",
    "FrequentItemsetTable",
    "GpModel",
    "InvalidConfigError",
    "InvalidItemsetError",
    "InvalidSplitError",
    "KERNEL_KINDS",
    "KernelError",
    "KernelSpec",
    "McmcConfig",
    "MiningConfig",
    "MiningError",
    "PruningPolicy",
    "QNetwork",
    "ReplayBuffer",
    "Rule",
    "SupportCache",
    "SyntheticSpec",
    "TrainConfig",
    "TransactionMatrix",
    "UndefinedMetricError",
    "beta_posterior",
    "build_covariance",
    "build_model",
    "compute_reward",
    "confidence",
    "draw_posterior_samples",
    "enumerate_itemsets",
    "estimate_cooccurrence",
    "extend_items",
    "extract_rules",
    "fit_gp",
    "gen_synthetic1",
    "gen_synthetic2",
    "ingest_categorical",
    "kernel_eval",
    "lift",
    "make_itemset",
    "mc_orthant",
    "min_count",
    "mine_apriori",
    "mine_barm_free",
    "mine_barm_mcmc",
    "mine_eclat",
    "mine_emab",
    "mine_fpgrowth",
    "mine_gpar",
    "mine_mab",
    "mine_mcts",
    "mlp_backward",
    "mlp_forward",
    "model_from_covariance",
    "orthant_prob_analytic",
    "psd_check",
    "psd_repair",
    "read_features_csv",
    "read_transactions_csv",
    "run_mh_chain",
    "split_rule",
    "support",
    "synthetic2_spec",
    "train_dqn",
    "ucb_score",
    "write_features_csv",
    "write_rules_csv",
    "write_transactions_csv",
]
