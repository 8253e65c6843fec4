"""Command-line front end: generate data, mine rules, benchmark, rank.

Subcommands write their artifacts atomically (temp file + rename) into
--out-dir. A --config JSON file overrides any flag of the same name, so a
whole run can be captured in one reviewable file. Exit codes: 0 success,
1 runtime failure, 2 usage.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import json
import os
import platform
import sys
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .bandit import mine_emab, mine_mab, mine_mcts
from .barm import McmcConfig, mine_barm_free, mine_barm_mcmc, read_priors_csv
from .classic import FrequentItemsetTable, mine_apriori, mine_eclat, mine_fpgrowth
from .core import (
    InvalidConfigError,
    MiningConfig,
    MiningError,
    Rule,
    TransactionMatrix,
    make_itemset,
    read_transactions_csv,
    write_rules_csv,
    write_transactions_csv,
)
from .data import (
    SyntheticSpec,
    gen_synthetic1,
    gen_synthetic2,
    read_features_csv,
    synthetic2_spec,
    write_features_csv,
)
from .gpar import mine_gpar
from .kernels import KERNEL_KINDS, KernelSpec
from .rlar import TrainConfig, extract_rules, save_qnetwork, train_dqn, write_reward_trace

ALGORITHMS = (
    "apriori", "fpgrowth", "eclat", "gpar", "barm", "barm-mcmc",
    "mab", "emab", "mcts", "rlar",
)
RANK_KEYS = ("support", "confidence", "lift")
DEFAULT_SWEEP = (0.1, 0.2, 0.3, 0.4, 0.5)
SYNTHETIC2_SWEEP = (0.1, 0.15, 0.2, 0.25, 0.3)


def _atomic_write(path, write_fn) -> None:
    """Run write_fn against a temp path, then rename over the target."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=f".{path.name}.")
    os.close(fd)
    try:
        write_fn(tmp)
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(OSError):
            os.unlink(tmp)
        raise


def _environment() -> dict:
    return {
        "package_version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "platform": platform.platform(),
    }


def _peak_rss_mb() -> float:
    import resource

    peak = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    # Linux reports kilobytes, macOS bytes
    return peak / 1024.0 if sys.platform != "darwin" else peak / (1024.0 * 1024.0)


@dataclass(frozen=True)
class BenchRecord:
    min_support: float
    runtime_s: float | None
    peak_memory_mb: float | None
    n_itemsets: int | None
    n_rules: int | None
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "min_support": self.min_support,
            "runtime_s": self.runtime_s,
            "peak_memory_mb": self.peak_memory_mb,
            "n_itemsets": self.n_itemsets,
            "n_rules": self.n_rules,
            "error": self.error,
        }


@dataclass(frozen=True)
class MinerReport:
    """One algorithm's sweep results plus the machine fingerprint."""

    algorithm: str
    records: tuple[BenchRecord, ...]
    environment: dict
    parallel: bool = False

    def __post_init__(self):
        thresholds = [r.min_support for r in self.records]
        if any(b <= a for a, b in zip(thresholds, thresholds[1:])):
            raise InvalidConfigError(f"thresholds must strictly increase: {thresholds}")
        for r in self.records:
            for v in (r.n_itemsets, r.n_rules):
                if v is not None and v < 0:
                    raise InvalidConfigError("counts must be non-negative")

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "parallel": self.parallel,
            "environment": self.environment,
            "records": [r.to_dict() for r in self.records],
        }

    @staticmethod
    def from_dict(raw: dict) -> "MinerReport":
        return MinerReport(
            algorithm=raw["algorithm"],
            records=tuple(BenchRecord(**r) for r in raw["records"]),
            environment=raw["environment"],
            parallel=raw.get("parallel", False),
        )


@dataclass(frozen=True)
class RankedRule:
    rule: Rule
    support_count: int | None
    example_indices: tuple[int, ...]


@dataclass(frozen=True)
class RankedRuleTable:
    key: str
    rows: tuple[RankedRule, ...]


def rank_rules(
    rules,
    key: str,
    k: int,
    data: TransactionMatrix | None = None,
) -> RankedRuleTable:
    """Stable descending sort by one metric, lexicographic tiebreak, top k.

    With transactions supplied, each row carries the rule itemset's exact
    support count and up to three example transaction indices.
    """
    if key not in RANK_KEYS:
        raise InvalidConfigError(f"rank key must be one of {RANK_KEYS}, got {key!r}")
    if k < 1:
        raise InvalidConfigError(f"k must be >= 1, got {k}")
    ordered = sorted(
        rules, key=lambda r: (-getattr(r, key), r.antecedent, r.consequent)
    )[:k]
    rows = []
    for rule in ordered:
        count = None
        examples: tuple[int, ...] = ()
        if data is not None:
            itemset = rule.itemset
            count = data.count(itemset)
            hits = np.flatnonzero(data.rows[:, list(itemset)].all(axis=1))
            examples = tuple(int(i) for i in hits[:3])
        rows.append(RankedRule(rule, count, examples))
    return RankedRuleTable(key, tuple(rows))


def _label_index(data: TransactionMatrix) -> dict[str, int]:
    labels = data.item_labels or tuple(f"item_{i}" for i in range(data.n_items))
    return {lab: i for i, lab in enumerate(labels)}


def read_rules_csv(path, data: TransactionMatrix) -> list[Rule]:
    """Parse a rules CSV back into Rule objects using the data's labels.

    Metric columns are read as written (display precision), so they rank
    the same way the emitting miner reported them.
    """
    lookup = _label_index(data)
    rules = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        needed = {"antecedent", "consequent", "support", "confidence", "lift"}
        if not needed.issubset(reader.fieldnames or ()):
            raise MiningError(f"{path}: rules CSV needs columns {sorted(needed)}")
        for row in reader:
            try:
                ante = make_itemset(lookup[n] for n in row["antecedent"].split("|"))
                cons = make_itemset(lookup[n] for n in row["consequent"].split("|"))
            except KeyError as exc:
                raise MiningError(
                    f"{path}:{reader.line_num}: unknown item label {exc}"
                ) from None
            rules.append(
                Rule(ante, cons, float(row["support"]),
                     float(row["confidence"]), float(row["lift"]))
            )
    return rules


def _write_itemsets_csv(table: FrequentItemsetTable, data: TransactionMatrix, path) -> None:
    def write(tmp):
        with open(tmp, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["itemset", "size", "support"])
            for itemset, supp in table.entries.items():
                w.writerow(["|".join(data.labels_for(itemset)), len(itemset), f"{supp:.4f}"])

    _atomic_write(path, write)


def _write_ranked_csv(table: RankedRuleTable, data: TransactionMatrix, path) -> None:
    def write(tmp):
        with open(tmp, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([
                "rank", "antecedent", "consequent", "support", "confidence",
                "lift", "support_count", "example_indices",
            ])
            for rank, row in enumerate(table.rows, start=1):
                r = row.rule
                w.writerow([
                    rank,
                    "|".join(data.labels_for(r.antecedent)),
                    "|".join(data.labels_for(r.consequent)),
                    f"{r.support:.4f}", f"{r.confidence:.4f}", f"{r.lift:.4f}",
                    row.support_count,
                    ";".join(str(i) for i in row.example_indices),
                ])

    _atomic_write(path, write)


def _write_visit_log(visit_log, data: TransactionMatrix, path) -> None:
    def write(tmp):
        with open(tmp, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["itemset", "n_evaluations"])
            for itemset, n in visit_log.items():
                w.writerow(["|".join(data.labels_for(itemset)), n])

    _atomic_write(path, write)


def _write_json(payload: dict, path) -> None:
    def write(tmp):
        with open(tmp, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")

    _atomic_write(path, write)


def _load_config_overrides(args: argparse.Namespace) -> dict:
    """--config JSON wins over flags; nested dicts are returned untouched."""
    if not getattr(args, "config", None):
        return {}
    with open(args.config) as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise MiningError(f"{args.config}: config must be a JSON object")
    nested = {}
    for key, value in raw.items():
        dest = key.replace("-", "_")
        if isinstance(value, dict):
            nested[dest] = value
        elif hasattr(args, dest):
            setattr(args, dest, value)
        else:
            raise MiningError(f"{args.config}: unknown config key {key!r}")
    return nested


def _mining_config(args, data: TransactionMatrix) -> MiningConfig:
    m_max = args.m_max if args.m_max is not None else min(10, data.n_items)
    return MiningConfig(
        min_support=args.min_support,
        min_confidence=args.min_conf,
        max_itemset_size=m_max,
        seed=args.seed,
    )


def _require_features(args, algo: str) -> np.ndarray:
    if not getattr(args, "features", None):
        raise MiningError(f"features required for {algo}: pass --features <csv>")
    return read_features_csv(args.features)


def _dispatch(algo: str, data: TransactionMatrix, cfg: MiningConfig, args, nested: dict):
    """Run one miner; returns (table, rules, extras for the report/outputs)."""
    extras: dict = {}
    if algo == "apriori":
        table, rules = mine_apriori(data, cfg)
    elif algo == "fpgrowth":
        table, rules = mine_fpgrowth(data, cfg)
    elif algo == "eclat":
        table, rules = mine_eclat(data, cfg)
    elif algo == "gpar":
        X = _require_features(args, algo)
        spec = KernelSpec(kind=args.kernel, **nested.get("kernel_params", {}))
        table, rules = mine_gpar(X, data, spec, cfg, S=args.samples)
    elif algo == "barm":
        priors = read_priors_csv(args.priors, data.n_items) if args.priors else None
        table, rules = mine_barm_free(data, priors, cfg, S=args.samples)
    elif algo == "barm-mcmc":
        priors = read_priors_csv(args.priors, data.n_items) if args.priors else None
        mcmc = McmcConfig(**nested.get("mcmc", {}))
        X = _require_features(args, algo) if mcmc.mode != "identity" else None
        table, rules = mine_barm_mcmc(data, X, priors, mcmc, cfg, S=args.samples)
    elif algo in ("mab", "emab"):
        t_max = args.t_max if args.t_max is not None else 1000
        if algo == "mab":
            table, rules, visit_log = mine_mab(data, cfg, t_max)
        else:
            table, rules, visit_log = mine_emab(data, cfg, t_max)
        extras["visit_log"] = visit_log
    elif algo == "mcts":
        t_max = args.t_max if args.t_max is not None else 10_000
        table, rules = mine_mcts(data, cfg, t_max, **nested.get("mcts", {}))
    elif algo == "rlar":
        train = TrainConfig(
            episodes=args.episodes,
            m_max=cfg.max_itemset_size,
            **nested.get("train", {}),
        )
        net, trace = train_dqn(data, train, cfg, seed=cfg.seed)
        rules = extract_rules(net, data, cfg, train.m_max, train.max_steps, train.top_k)
        entries = {}
        for rule in rules:
            itemset = rule.itemset
            entries.setdefault(itemset, data.count(itemset) / data.n_transactions)
        table = FrequentItemsetTable(
            dict(sorted(entries.items(), key=lambda kv: (len(kv[0]), kv[0])))
        )
        extras["reward_trace"] = trace
        extras["network"] = net
    else:  # pragma: no cover - argparse choices guard this
        raise MiningError(f"unknown algorithm {algo!r}")
    return table, rules, extras


def run_mine(args) -> int:
    nested = _load_config_overrides(args)
    data = read_transactions_csv(args.transactions)
    cfg = _mining_config(args, data)
    cfg.check_against(data)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    start = time.perf_counter()
    table, rules, extras = _dispatch(args.algo, data, cfg, args, nested)
    runtime = time.perf_counter() - start

    labels = data.item_labels or tuple(f"item_{i}" for i in range(data.n_items))
    _atomic_write(out / "rules.csv", lambda tmp: write_rules_csv(rules, tmp, labels))
    _write_itemsets_csv(table, data, out / "itemsets.csv")
    if "visit_log" in extras:
        _write_visit_log(extras["visit_log"], data, out / "visit_log.csv")
    if "reward_trace" in extras:
        _atomic_write(
            out / "reward_trace.csv",
            lambda tmp: write_reward_trace(extras["reward_trace"], tmp),
        )
        _atomic_write(
            out / "qnetwork.npz", lambda tmp: save_qnetwork(extras["network"], tmp)
        )
    report = {
        "command": "mine",
        "algorithm": args.algo,
        "config": {
            "min_support": cfg.min_support,
            "min_confidence": cfg.min_confidence,
            "max_itemset_size": cfg.max_itemset_size,
            "seed": cfg.seed,
        },
        "inputs": {"transactions": str(args.transactions),
                   "features": str(args.features) if args.features else None},
        "n_itemsets": len(table),
        "n_rules": len(rules),
        "runtime_s": runtime,
        "environment": _environment(),
    }
    _write_json(report, out / "report.json")
    print(f"{args.algo}: {len(table)} itemsets, {len(rules)} rules -> {out}")
    return 0


def _bench_cell(algo: str, data: TransactionMatrix, threshold: float, args, nested) -> BenchRecord:
    cfg = MiningConfig(
        min_support=threshold,
        min_confidence=args.min_conf,
        max_itemset_size=args.m_max if args.m_max is not None else min(10, data.n_items),
        seed=args.seed,
    )
    before = _peak_rss_mb()
    start = time.perf_counter()
    try:
        table, rules, _ = _dispatch(algo, data, cfg, args, nested)
    except Exception as exc:
        return BenchRecord(threshold, None, None, None, None, f"{type(exc).__name__}: {exc}")
    runtime = time.perf_counter() - start
    delta = max(0.0, _peak_rss_mb() - before)
    return BenchRecord(threshold, runtime, delta, len(table), len(rules))


def run_bench(args) -> int:
    nested = _load_config_overrides(args)
    algos = [a.strip() for a in args.algo.split(",") if a.strip()]
    if not algos:
        raise MiningError("at least one algorithm required")
    for a in algos:
        if a not in ALGORITHMS:
            raise MiningError(f"unknown algorithm {a!r}; choose from {ALGORITHMS}")
    if args.thresholds:
        thresholds = tuple(float(t) for t in args.thresholds.split(","))
    else:
        thresholds = SYNTHETIC2_SWEEP if args.preset == "synthetic2" else DEFAULT_SWEEP
    thresholds = tuple(sorted(thresholds))
    if len(set(thresholds)) != len(thresholds):
        raise MiningError(f"duplicate thresholds: {thresholds}")

    data = read_transactions_csv(args.transactions)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    cells = [(algo, th) for algo in algos for th in thresholds]
    results: dict[tuple[str, float], BenchRecord] = {}
    if args.parallel:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=min(4, len(cells))) as pool:
            futmap = {
                pool.submit(_bench_cell, algo, data, th, args, nested): (algo, th)
                for algo, th in cells
            }
            for fut, key in futmap.items():
                results[key] = fut.result()
    else:
        for algo, th in cells:
            results[(algo, th)] = _bench_cell(algo, data, th, args, nested)

    reports = []
    for algo in algos:
        report = MinerReport(
            algorithm=algo,
            records=tuple(results[(algo, th)] for th in thresholds),
            environment=_environment(),
            parallel=args.parallel,
        )
        reports.append(report)
        _write_json(report.to_dict(), out / f"bench_{algo.replace('-', '_')}.json")

    def write_comparison(tmp):
        with open(tmp, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["metric", "min_support", *algos])
            metrics = (
                ("runtime_s", "runtime_s"),
                ("peak_memory_mb", "peak_memory_mb"),
                ("n_itemsets", "n_itemsets"),
                ("n_rules", "n_rules"),
            )
            for name, attr in metrics:
                for th in thresholds:
                    row = [name, th]
                    for algo in algos:
                        rec = results[(algo, th)]
                        value = getattr(rec, attr)
                        row.append("failed" if rec.error is not None else value)
                    w.writerow(row)

    _atomic_write(out / "comparison.csv", write_comparison)
    n_failed = sum(1 for r in results.values() if r.error)
    print(f"bench: {len(cells)} cells, {n_failed} failed -> {out}")
    return 0


def run_gen_data(args) -> int:
    nested = _load_config_overrides(args)
    overrides = nested.get("spec", {})
    if args.variant == "synthetic2":
        spec = synthetic2_spec(seed=args.seed, **overrides)
        data, X = gen_synthetic2(spec)
    else:
        spec = SyntheticSpec(variant="synthetic1", seed=args.seed, **overrides)
        data, X = gen_synthetic1(spec)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _atomic_write(out / "transactions.csv", lambda tmp: write_transactions_csv(data, tmp))
    _atomic_write(out / "features.csv", lambda tmp: write_features_csv(X, tmp))
    report = {
        "command": "gen-data",
        "variant": args.variant,
        "seed": args.seed,
        "n_transactions": data.n_transactions,
        "n_items": data.n_items,
        "n_features": X.shape[1],
        "environment": _environment(),
    }
    _write_json(report, out / "report.json")
    print(f"{args.variant}: {data.n_transactions}x{data.n_items} -> {out}")
    return 0


def run_rank(args) -> int:
    _load_config_overrides(args)
    data = read_transactions_csv(args.transactions)
    rules = read_rules_csv(args.rules, data)
    table = rank_rules(rules, args.key, args.top_k, data)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_ranked_csv(table, data, out / "ranked_rules.csv")
    print(f"rank: top {len(table.rows)} of {len(rules)} rules by {args.key} -> {out}")
    return 0


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default=".")
    p.add_argument("--config", default=None, help="JSON file overriding flags")


def _add_mine_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--transactions", required=True)
    p.add_argument("--features", default=None)
    p.add_argument("--priors", default=None, help="per-item Beta priors CSV")
    p.add_argument("--kernel", choices=KERNEL_KINDS, default="rbf")
    p.add_argument("--min-conf", type=float, default=0.5)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--t-max", type=int, default=None)
    p.add_argument("--m-max", type=int, default=None)
    p.add_argument("--episodes", type=int, default=50)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rulemine", description="Association rule mining toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen-data", help="generate a synthetic dataset")
    p_gen.add_argument("--variant", choices=("synthetic1", "synthetic2"),
                       default="synthetic1")
    _add_common(p_gen)

    p_mine = sub.add_parser("mine", help="run one miner on a dataset")
    p_mine.add_argument("--algo", choices=ALGORITHMS, required=True)
    p_mine.add_argument("--min-support", type=float, default=0.1)
    _add_mine_flags(p_mine)
    _add_common(p_mine)

    p_bench = sub.add_parser("bench", help="sweep thresholds across algorithms")
    p_bench.add_argument("--algo", required=True,
                         help="comma-separated algorithm list")
    p_bench.add_argument("--thresholds", default=None,
                         help="comma-separated min-support sweep")
    p_bench.add_argument("--preset", choices=("default", "synthetic2"),
                         default="default")
    p_bench.add_argument("--parallel", action="store_true",
                         help="run cells in threads (timings become indicative)")
    _add_mine_flags(p_bench)
    _add_common(p_bench)

    p_rank = sub.add_parser("rank", help="rank a rules CSV by one metric")
    p_rank.add_argument("--rules", required=True)
    p_rank.add_argument("--transactions", required=True)
    p_rank.add_argument("--key", choices=RANK_KEYS, default="lift")
    p_rank.add_argument("--top-k", type=int, default=10)
    _add_common(p_rank)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "gen-data": run_gen_data,
        "mine": run_mine,
        "bench": run_bench,
        "rank": run_rank,
    }
    try:
        return handlers[args.command](args)
    except (MiningError, OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
