"""Experiment driver: configuration, seeded runs, persistence, summaries.

A JSON configuration names a dataset and one engine/approach combination
(the similarity bounds may be lists, expanded into a grid of runs). Every
seed becomes one fully deterministic run: the seed drives the train/test
split and the evolution, results are written atomically, and re-running the
same configuration and seed reproduces the files byte for byte.
"""

from __future__ import annotations

import json
import math
import statistics
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from .dataset import load_csv, minmax_apply, minmax_fit, stratified_split
from .emo import EngineParams
from .gp_core import GPParams, evaluate_semantics, parse_prefix
from .objectives import classify, confusion, objective_vector
from .results import RunResult, load_run, save_run
from .semantic_emo import APPROACHES, ENGINES, SemanticConfig, run_variant
from .semantics import DISTANCE_RULES, SimilarityBounds


def _as_bound(value) -> float:
    if isinstance(value, str):
        value = float(value)
    return float(value)


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce a batch of runs.

    lbss and ubss may be single values or lists; expand_grid turns lists
    into the cross-product of single-valued configurations.
    """

    dataset: str
    label_column: int = -1
    positive_label: str | None = None
    engine: str = "nsga2"
    approach: str = "canonical"
    lbss: float | list = 0.01
    ubss: float | list = 0.5
    distance_rule: str = "band"
    ssc_max_trials: int = 4
    ssc_subset_fraction: float = 1.0
    ssc_parent_distance: bool = False
    allow_scd_moead: bool = False
    pop_size: int = 100
    generations: int = 30
    init_min_depth: int = 2
    init_max_depth: int = 6
    max_depth: int = 17
    crossover_rate: float = 0.9
    mutation_rate: float = 0.1
    mutation_subtree_depth: int = 4
    train_fraction: float = 0.7
    scale_features: bool = False
    threshold: float = 0.0
    archive_size: int | None = None
    moead_neighbors: int = 20
    moead_delta: float = 0.9
    moead_max_replacements: int = 2
    seeds: list[int] = field(default_factory=lambda: [0])
    output_dir: str = "results"
    n_workers: int = 1

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path) as handle:
            raw = json.load(handle)
        known = {f.name for f in cls.__dataclass_fields__.values()}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if "dataset" not in raw:
            raise ValueError("config must name a dataset file")
        return cls(**raw)

    def validate(self):
        if self.engine not in ENGINES:
            raise ValueError(f"unknown engine {self.engine!r}")
        if self.approach not in APPROACHES:
            raise ValueError(f"unknown approach {self.approach!r}")
        if self.distance_rule not in DISTANCE_RULES:
            raise ValueError(f"unknown distance rule {self.distance_rule!r}")
        if not self.seeds:
            raise ValueError("seeds must be non-empty")
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError("seeds must be distinct")

    def is_grid(self) -> bool:
        return isinstance(self.lbss, (list, tuple)) or isinstance(self.ubss, (list, tuple))

    def bounds(self) -> SimilarityBounds:
        return SimilarityBounds(_as_bound(self.lbss), _as_bound(self.ubss))

    def semantic_config(self) -> SemanticConfig:
        return SemanticConfig(
            approach=self.approach,
            bounds=self.bounds(),
            distance_rule=self.distance_rule,
            ssc_max_trials=self.ssc_max_trials,
            ssc_subset_fraction=self.ssc_subset_fraction,
            ssc_parent_distance=self.ssc_parent_distance,
            allow_scd_moead=self.allow_scd_moead,
        )

    def gp_params(self) -> GPParams:
        return GPParams(
            pop_size=self.pop_size,
            generations=self.generations,
            init_min_depth=self.init_min_depth,
            init_max_depth=self.init_max_depth,
            max_depth=self.max_depth,
            crossover_rate=self.crossover_rate,
            mutation_rate=self.mutation_rate,
            mutation_subtree_depth=self.mutation_subtree_depth,
        )

    def engine_params(self) -> EngineParams:
        return EngineParams(
            archive_size=self.archive_size,
            moead_neighbors=self.moead_neighbors,
            moead_delta=self.moead_delta,
            moead_max_replacements=self.moead_max_replacements,
        )

    def echo(self, seed: int) -> dict:
        """Config record stored with each run, sufficient to re-run it.

        Operational knobs that cannot change the computed results
        (output_dir, n_workers) are excluded so files for the same
        configuration and seed stay byte-identical wherever and however
        they were produced.
        """
        payload = asdict(self)
        payload["lbss"] = _as_bound(self.lbss)
        payload["ubss"] = _as_bound(self.ubss)
        payload["seeds"] = [seed]
        del payload["output_dir"]
        del payload["n_workers"]
        return payload


def expand_grid(cfg: ExperimentConfig) -> list[ExperimentConfig]:
    """Cross-product of the lbss and ubss lists, as single-valued configs."""
    lbss_values = list(cfg.lbss) if isinstance(cfg.lbss, (list, tuple)) else [cfg.lbss]
    ubss_values = list(cfg.ubss) if isinstance(cfg.ubss, (list, tuple)) else [cfg.ubss]
    if not lbss_values or not ubss_values:
        raise ValueError("lbss/ubss lists must be non-empty")
    return [
        replace(cfg, lbss=_as_bound(lb), ubss=_as_bound(ub))
        for lb in lbss_values
        for ub in ubss_values
    ]


def _attach_test_metrics(result: RunResult, test_ds, threshold: float):
    # Programs round-trip exactly through their prefix text.
    for member in result.front:
        tree = parse_prefix(member.program)
        semantics = evaluate_semantics(tree, test_ds.features)
        counts = confusion(classify(semantics, threshold), test_ds.labels)
        member.test_objectives = tuple(float(x) for x in objective_vector(counts))


def run_experiment(cfg: ExperimentConfig) -> list[RunResult]:
    """Run every seed of a single-valued configuration and persist results.

    Each seed drives both the stratified split and the evolution, so a
    (configuration, seed) pair fully determines its output files. The
    headline metrics are computed on the training split; each front member
    also carries its objectives on the held-out split.
    """
    cfg.validate()
    if cfg.is_grid():
        raise ValueError("grid configs must be expanded first (expand_grid)")
    full = load_csv(cfg.dataset, cfg.label_column, cfg.positive_label)
    results = []
    for seed in cfg.seeds:
        train, test = stratified_split(full, cfg.train_fraction, seed)
        if cfg.scale_features:
            mins, maxs = minmax_fit(train)
            train = minmax_apply(train, mins, maxs)
            test = minmax_apply(test, mins, maxs)
        result = run_variant(
            cfg.engine,
            cfg.semantic_config(),
            train,
            cfg.gp_params(),
            cfg.engine_params(),
            seed=seed,
            n_workers=cfg.n_workers,
            threshold=cfg.threshold,
            config_echo=cfg.echo(seed),
        )
        _attach_test_metrics(result, test, cfg.threshold)
        save_run(result, cfg.output_dir)
        results.append(result)
    return results


def load_results(directory) -> list[RunResult]:
    """Load every run result found in a directory, sorted by file name."""
    directory = Path(directory)
    paths = sorted(directory.glob("*.json"))
    if not paths:
        raise ValueError(f"no result files in {directory}")
    return [load_run(path) for path in paths]


@dataclass(frozen=True)
class ConfigKey:
    engine: str
    approach: str
    lbss: float
    ubss: float
    distance_rule: str


@dataclass
class ConfigSummary:
    key: ConfigKey
    n_runs: int
    metrics: dict[str, dict[str, float]]


@dataclass
class Summary:
    configs: list[ConfigSummary]
    unique_ratios: list[dict]


def _config_key(result: RunResult) -> ConfigKey:
    cfg = result.config
    return ConfigKey(
        engine=result.engine,
        approach=result.approach,
        lbss=float(cfg.get("lbss", math.nan)),
        ubss=float(cfg.get("ubss", math.nan)),
        distance_rule=str(cfg.get("distance_rule", "band")),
    )


def summarize(results) -> Summary:
    """Aggregate final-generation metrics per configuration.

    Also builds the pairwise table of median unique-solution counts between
    approaches, engine by engine: each row reports median(a) / median(b).
    """
    results = list(results)
    if not results:
        raise ValueError("no results to summarize")
    groups: dict[ConfigKey, list[RunResult]] = {}
    for result in results:
        groups.setdefault(_config_key(result), []).append(result)

    configs = []
    for key in sorted(groups, key=lambda k: (k.engine, k.approach, k.lbss, k.ubss, k.distance_rule)):
        rows = [r.generations[-1] for r in groups[key]]
        metrics = {}
        for name, values in (
            ("hypervolume", [row.hypervolume for row in rows]),
            ("unique_count", [float(row.unique_count) for row in rows]),
            ("mean_nodes", [row.mean_nodes for row in rows]),
        ):
            metrics[name] = {
                "mean": statistics.fmean(values),
                "median": statistics.median(values),
                "min": min(values),
                "max": max(values),
            }
        configs.append(ConfigSummary(key=key, n_runs=len(groups[key]), metrics=metrics))

    by_engine_approach: dict[tuple[str, str], list[float]] = {}
    for result in results:
        pair = (result.engine, result.approach)
        by_engine_approach.setdefault(pair, []).append(
            float(result.generations[-1].unique_count)
        )
    medians = {pair: statistics.median(vals) for pair, vals in by_engine_approach.items()}
    ratios = []
    engines = sorted({pair[0] for pair in medians})
    for engine in engines:
        approaches = sorted(pair[1] for pair in medians if pair[0] == engine)
        for a in approaches:
            for b in approaches:
                if a == b:
                    continue
                denom = medians[(engine, b)]
                ratio = math.inf if denom == 0 else medians[(engine, a)] / denom
                ratios.append(
                    {"engine": engine, "approach_a": a, "approach_b": b, "ratio": ratio}
                )
    return Summary(configs=configs, unique_ratios=ratios)


def format_summary(summary: Summary) -> str:
    """Plain-text tables for terminal display."""
    lines = []
    header = (
        f"{'engine':<8}{'approach':<11}{'lbss':<9}{'ubss':<9}{'rule':<7}{'runs':<6}"
        f"{'hv med':<10}{'uniq med':<10}{'nodes med':<10}"
    )
    lines.append(header)
    lines.append("-" * len(header))
    for cs in summary.configs:
        key = cs.key
        lines.append(
            f"{key.engine:<8}{key.approach:<11}{key.lbss:<9g}{key.ubss:<9g}"
            f"{key.distance_rule:<7}{cs.n_runs:<6}"
            f"{cs.metrics['hypervolume']['median']:<10.4f}"
            f"{cs.metrics['unique_count']['median']:<10g}"
            f"{cs.metrics['mean_nodes']['median']:<10.2f}"
        )
    if summary.unique_ratios:
        lines.append("")
        lines.append("median unique-solution ratios (approach A / approach B):")
        for row in summary.unique_ratios:
            lines.append(
                f"  {row['engine']}: {row['approach_a']} / {row['approach_b']}"
                f" = {row['ratio']:.2f}"
            )
    return "\n".join(lines)
