"""Semantic mechanisms wired into the engines.

Three approaches modify one mechanism each, leaving the engine loops
untouched:

* ssc  - crossover is retried until the exchanged subtrees' mean absolute
         semantic difference falls inside the similarity bounds.
* scd  - the crowding role (NSGA-II crowding, SPEA2 density) is replaced by
         each member's case-count distance to a pivot chosen from the
         sparsest region of the current first front.
* sdo  - that same pivot distance, negated and normalized, is appended as a
         third minimization objective and selection runs on three entries.

Reported fronts always carry the plain two-entry objective vectors.
"""

from __future__ import annotations

import random
import statistics
import time
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .emo import (
    EngineParams,
    MoeadEngine,
    Nsga2Engine,
    Spea2Engine,
    crowding_distance,
    fast_nondominated_sort,
)
from .gp_core import (
    GPParams,
    Individual,
    Node,
    Population,
    PrimitiveSet,
    Variation,
    evaluate_semantics,
    node_count,
    pick_crossover_point,
    replace_subtree,
    subtree_at,
    to_prefix,
    tree_depth,
)
from .metrics import HV_REFERENCE, GenerationStats, hypervolume_2d, unique_solutions
from .objectives import CLASSIFICATION_THRESHOLD, ClassificationEvaluator
from .results import FrontMember, RunResult
from .semantics import (
    DISTANCE_RULES,
    RULE_BAND,
    Pivot,
    SimilarityBounds,
    count_distances,
    select_pivot,
    ssc_distance,
)

ENGINES = ("nsga2", "spea2", "moead")
APPROACHES = ("canonical", "ssc", "scd", "sdo")


@dataclass(frozen=True)
class SemanticConfig:
    """Which semantic approach runs and how distances are measured.

    distance_rule selects the case-count distance: "above" counts cases
    whose output difference exceeds the upper bound, "band" counts cases
    whose difference lies inside [lower, upper]. The similarity bounds are
    shared by the crossover gate and the case-count distances.
    """

    approach: str = "canonical"
    bounds: SimilarityBounds = SimilarityBounds()
    distance_rule: str = RULE_BAND
    ssc_max_trials: int = 4
    ssc_subset_fraction: float = 1.0
    ssc_parent_distance: bool = False
    allow_scd_moead: bool = False

    def __post_init__(self):
        if self.approach not in APPROACHES:
            raise ValueError(f"unknown approach {self.approach!r}")
        if self.distance_rule not in DISTANCE_RULES:
            raise ValueError(f"unknown distance rule {self.distance_rule!r}")
        if self.ssc_max_trials < 1:
            raise ValueError("ssc_max_trials must be at least 1")
        if not 0.0 < self.ssc_subset_fraction <= 1.0:
            raise ValueError("ssc_subset_fraction must lie in (0, 1]")


@dataclass
class SscCounters:
    """Tally of gated-crossover activity, for reporting and tests."""

    calls: int = 0
    trials: int = 0
    accepted: int = 0


def ssc_crossover(
    p1: Individual,
    p2: Individual,
    cfg: SemanticConfig,
    rng: random.Random,
    max_depth: int,
    features: np.ndarray,
    stats: SscCounters | None = None,
) -> tuple[Node, Node]:
    """Subtree crossover gated on the similarity of the exchanged subtrees.

    Candidate point pairs are drawn up to cfg.ssc_max_trials times; a trial
    is accepted when the mean absolute difference between the two selected
    subtrees' outputs lies in [lbss, ubss] and both offspring respect
    max_depth. If no trial qualifies, the final trial's offspring are
    returned as-is (or the parents, if those offspring were too deep).

    With cfg.ssc_parent_distance the gate compares the parents' cached
    whole-program semantics instead of the exchanged subtrees. When
    cfg.ssc_subset_fraction < 1, one random case subset per call feeds every
    trial's distance.
    """
    subset = None
    n_cases = features.shape[0]
    if cfg.ssc_subset_fraction < 1.0:
        k = max(1, int(cfg.ssc_subset_fraction * n_cases + 0.5))
        subset = sorted(rng.sample(range(n_cases), k))
    parent_distance = None
    if cfg.ssc_parent_distance:
        parent_distance = ssc_distance(p1.semantics, p2.semantics, subset)
    if stats is not None:
        stats.calls += 1
    final_pair: tuple[Node, Node] | None = None
    for _ in range(cfg.ssc_max_trials):
        if stats is not None:
            stats.trials += 1
        point1 = pick_crossover_point(p1.tree, rng)
        point2 = pick_crossover_point(p2.tree, rng)
        sub1 = subtree_at(p1.tree, point1)
        sub2 = subtree_at(p2.tree, point2)
        if parent_distance is not None:
            distance = parent_distance
        else:
            distance = ssc_distance(
                evaluate_semantics(sub1, features),
                evaluate_semantics(sub2, features),
                subset,
            )
        child1 = replace_subtree(p1.tree, point1, sub2)
        child2 = replace_subtree(p2.tree, point2, sub1)
        depth_ok = tree_depth(child1) <= max_depth and tree_depth(child2) <= max_depth
        if depth_ok and cfg.bounds.lbss <= distance <= cfg.bounds.ubss:
            if stats is not None:
                stats.accepted += 1
            return child1, child2
        final_pair = (child1, child2) if depth_ok else None
    if final_pair is not None:
        return final_pair
    return p1.tree, p2.tree


def _require_semantics(members: Population):
    for ind in members:
        if ind.semantics is None:
            raise ValueError("members must carry cached semantics")


def scd_assign(members: Population, pivot: Pivot, cfg: SemanticConfig) -> np.ndarray:
    """Crowding surrogate: each member's case-count distance to the pivot.

    Larger values play the role of larger crowding distances, so members
    whose behaviour relates to the pivot on many cases are preferred by the
    engines' diversity mechanisms.
    """
    members = list(members)
    if not members:
        raise ValueError("members must be non-empty")
    _require_semantics(members)
    matrix = np.stack([ind.semantics for ind in members])
    return count_distances(matrix, pivot.semantics, cfg.bounds, cfg.distance_rule)


def sdo_extend(members: Population, pivot: Pivot, cfg: SemanticConfig) -> np.ndarray:
    """Objective matrix extended with a third entry -d/l per member.

    d is the member's case-count distance to the pivot and l the number of
    cases, so minimizing the third entry maximizes the count. The first two
    columns are the members' objective vectors, bitwise unchanged.
    """
    members = list(members)
    counts = scd_assign(members, pivot, cfg)
    base = np.stack([ind.objectives for ind in members])
    if base.shape[1] != 2:
        raise ValueError("expected 2-entry objective vectors to extend")
    third = -counts / pivot.semantics.size
    return np.column_stack([base, third])


def select_front_pivot(members: Population, rng: random.Random) -> Pivot:
    """Pivot from the sparsest region of the pool's first front.

    The first front and its crowding distances are computed on the plain
    two-entry objective vectors; the returned source_index refers to the
    full member list.
    """
    members = list(members)
    _require_semantics(members)
    base = np.stack([ind.objectives for ind in members])
    front = fast_nondominated_sort(base)[0]
    crowd = crowding_distance(base[front])
    picked = select_pivot([members[i].semantics for i in front], crowd, rng)
    return Pivot(picked.semantics, front[picked.source_index])


class SdoObjectives:
    """Selection space of (objective 1, objective 2, -pivot distance / l).

    refresh re-selects the pivot from the pool's current first front and
    extends every member; vector extends a single later individual against
    that same pivot.
    """

    n_objectives = 3

    def __init__(self, cfg: SemanticConfig):
        self.cfg = cfg
        self.pivot: Pivot | None = None

    def refresh(self, members: Population, rng: random.Random) -> np.ndarray:
        self.pivot = select_front_pivot(members, rng)
        return sdo_extend(members, self.pivot, self.cfg)

    def vector(self, ind: Individual) -> np.ndarray:
        if self.pivot is None:
            raise ValueError("refresh must run before extending single members")
        counts = count_distances(
            ind.semantics[None, :], self.pivot.semantics, self.cfg.bounds, self.cfg.distance_rule
        )
        third = -float(counts[0]) / self.pivot.semantics.size
        return np.append(ind.objectives, third)


@dataclass
class ScdCrowding:
    """NSGA-II crowding policy: pivot distance counts for the whole pool."""

    cfg: SemanticConfig

    def __call__(self, members, fronts, objs, rng):
        front = fronts[0]
        crowd = crowding_distance(objs[front])
        picked = select_pivot([members[i].semantics for i in front], crowd, rng)
        pivot = Pivot(picked.semantics, front[picked.source_index])
        return scd_assign(members, pivot, self.cfg)


@dataclass
class ScdDensity:
    """SPEA2 density replacement: 1 / (pivot distance count + 2).

    Mirrors the canonical 1 / (sigma_k + 2) shape so values stay below the
    dominance granularity of the raw fitness.
    """

    cfg: SemanticConfig

    def __call__(self, members, objs, raw, rng):
        front = [i for i in range(len(members)) if raw[i] == 0]
        crowd = crowding_distance(objs[front])
        picked = select_pivot([members[i].semantics for i in front], crowd, rng)
        pivot = Pivot(picked.semantics, front[picked.source_index])
        counts = scd_assign(members, pivot, self.cfg)
        return 1.0 / (counts + 2.0)


@dataclass
class ScdArchiveRank:
    """MOEA/D archive ordering by pivot distance counts (larger kept)."""

    cfg: SemanticConfig

    def __call__(self, members, objs, rng):
        crowd = crowding_distance(objs)
        picked = select_pivot([ind.semantics for ind in members], crowd, rng)
        pivot = Pivot(picked.semantics, picked.source_index)
        return scd_assign(members, pivot, self.cfg)


def _generation_stats(generation: int, front: Population) -> GenerationStats:
    objs = [ind.objectives for ind in front]
    return GenerationStats(
        generation=generation,
        hypervolume=hypervolume_2d(objs, HV_REFERENCE),
        unique_count=unique_solutions(front),
        mean_nodes=statistics.fmean(node_count(ind.tree) for ind in front),
        front_size=len(front),
    )


def build_engine(
    engine: str,
    cfg: SemanticConfig,
    evaluator: ClassificationEvaluator,
    variation: Variation,
    rng: random.Random,
    engine_params: EngineParams | None = None,
):
    """Assemble an engine with the approach's hooks installed."""
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}")
    if cfg.approach == "scd" and engine == "moead" and not cfg.allow_scd_moead:
        raise ValueError(
            "scd replaces a crowding mechanism moead does not have; "
            "set allow_scd_moead to study the combination anyway"
        )
    params = engine_params if engine_params is not None else EngineParams()
    space = SdoObjectives(cfg) if cfg.approach == "sdo" else None
    if engine == "nsga2":
        return Nsga2Engine(
            evaluator,
            variation,
            rng,
            objective_space=space,
            crowding_policy=ScdCrowding(cfg) if cfg.approach == "scd" else None,
        )
    if engine == "spea2":
        return Spea2Engine(
            evaluator,
            variation,
            rng,
            archive_size=params.archive_size,
            objective_space=space,
            density_policy=ScdDensity(cfg) if cfg.approach == "scd" else None,
        )
    return MoeadEngine(
        evaluator,
        variation,
        rng,
        neighbors=params.moead_neighbors,
        delta=params.moead_delta,
        max_replacements=params.moead_max_replacements,
        objective_space=space,
        archive_rank=ScdArchiveRank(cfg) if cfg.approach == "scd" else None,
    )


def run_variant(
    engine: str,
    cfg: SemanticConfig,
    dataset: Dataset,
    gp: GPParams | None = None,
    engine_params: EngineParams | None = None,
    *,
    seed: int = 0,
    rng: random.Random | None = None,
    n_workers: int = 1,
    threshold: float = CLASSIFICATION_THRESHOLD,
    config_echo: dict | None = None,
) -> RunResult:
    """Run one engine/approach combination on a dataset for one seed.

    Records one GenerationStats row per generation, starting with the
    initial population (generation 0), each describing the first front in
    the plain two-objective space. The returned final front is that first
    front, sorted by objectives then program text.
    """
    gp = gp if gp is not None else GPParams()
    if rng is None:
        rng = random.Random(seed)
    evaluator = ClassificationEvaluator(dataset, threshold, n_workers)
    variation = Variation(PrimitiveSet(dataset.n_features), gp)
    ssc_stats = SscCounters()
    if cfg.approach == "ssc":
        variation.crossover = lambda a, b, r: ssc_crossover(
            a, b, cfg, r, gp.max_depth, dataset.features, ssc_stats
        )
    eng = build_engine(engine, cfg, evaluator, variation, rng, engine_params)

    start = time.perf_counter()
    eng.initialize()
    stats = [_generation_stats(0, eng.front())]
    for generation in range(1, gp.generations):
        eng.step()
        stats.append(_generation_stats(generation, eng.front()))
    wall = time.perf_counter() - start

    front = sorted(
        eng.front(),
        key=lambda ind: (float(ind.objectives[0]), float(ind.objectives[1]), to_prefix(ind.tree)),
    )
    members = [
        FrontMember(
            program=to_prefix(ind.tree),
            objectives=(float(ind.objectives[0]), float(ind.objectives[1])),
            nodes=node_count(ind.tree),
        )
        for ind in front
    ]
    echo = config_echo if config_echo is not None else _default_echo(engine, cfg, gp, seed)
    result = RunResult(
        engine=engine,
        approach=cfg.approach,
        seed=seed,
        config=echo,
        front=members,
        generations=stats,
        wall_time_s=wall,
    )
    result.validate()
    return result


def _default_echo(engine: str, cfg: SemanticConfig, gp: GPParams, seed: int) -> dict:
    return {
        "engine": engine,
        "approach": cfg.approach,
        "lbss": cfg.bounds.lbss,
        "ubss": cfg.bounds.ubss,
        "distance_rule": cfg.distance_rule,
        "ssc_max_trials": cfg.ssc_max_trials,
        "ssc_subset_fraction": cfg.ssc_subset_fraction,
        "pop_size": gp.pop_size,
        "generations": gp.generations,
        "seed": seed,
    }
