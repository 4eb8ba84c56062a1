"""Evolutionary search for the best feasible hybrid policy.

Every individual that is ever evaluated satisfies the compression
constraint: infeasible offspring are redrawn, and after a bounded number of
retries replaced by a fresh feasible individual.  The top parents survive
each generation, so the best fitness never decreases.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from ..constants import (
    DEFAULT_EVAL_SAMPLES,
    DEFAULT_GENERATIONS,
    DEFAULT_MUTATION_PROB,
    DEFAULT_PARENTS,
    DEFAULT_POPULATION,
    OFFSPRING_RETRIES,
    env_eval_workers,
)
from ..datasets import DataSplit
from ..errors import ConfigError, FormatError, InfeasibleError
from ..hypernet import MetaQuantNet
from ..target_net import TargetNetSpec
from .accounting import CompressionConstraint, compression_ratio, is_feasible, model_size_bits
from .bitwidth import BitwidthPolicy, preset_bit_range, validate_bit_range
from .evaluate import evaluate_policy, selection_key

logger = logging.getLogger(__name__)

CROSSOVER_KINDS = ("uniform",)


@dataclass(frozen=True)
class SearchConfig:
    """Genetic search settings.  ``bit_range=None`` picks the preset for the target ratio."""

    population_size: int = DEFAULT_POPULATION
    generations: int = DEFAULT_GENERATIONS
    parent_count: int = DEFAULT_PARENTS
    mutation_prob: float = DEFAULT_MUTATION_PROB
    crossover: str = "uniform"
    bit_range: tuple[int, int] | None = None
    eval_samples: int = DEFAULT_EVAL_SAMPLES
    seed: int = 0
    workers: int = field(default_factory=env_eval_workers)
    offspring_retries: int = OFFSPRING_RETRIES

    def __post_init__(self) -> None:
        if self.population_size < 1:
            raise ConfigError("search.population_size", "must be positive")
        if self.generations < 1:
            raise ConfigError("search.generations", "must be positive")
        if not 1 <= self.parent_count <= self.population_size:
            raise ConfigError("search.parent_count", "must lie in [1, population_size]")
        if not 0 < self.mutation_prob < 1:
            raise ConfigError("search.mutation_prob", "must lie strictly between 0 and 1")
        if self.crossover not in CROSSOVER_KINDS:
            raise ConfigError("search.crossover", f"unsupported crossover {self.crossover!r}")
        if self.bit_range is not None:
            object.__setattr__(self, "bit_range", validate_bit_range(self.bit_range, "search.bit_range"))
        if self.eval_samples < 1:
            raise ConfigError("search.eval_samples", "must be positive")
        if self.workers < 1:
            raise ConfigError("search.workers", "must be positive")
        if self.offspring_retries < 1:
            raise ConfigError("search.offspring_retries", "must be positive")

    def resolved_bit_range(self, constraint: CompressionConstraint) -> tuple[int, int]:
        return self.bit_range if self.bit_range is not None else preset_bit_range(constraint.target_ratio)


@dataclass
class GenerationStats:
    generation: int
    best_fitness: float
    mean_fitness: float
    best_policy: list[int]


@dataclass
class SearchReport:
    """Outcome of one search run."""

    best_policy: BitwidthPolicy
    best_accuracy: float
    best_ratio: float
    best_size_bits: int
    target_ratio: float
    include_side_params: bool
    bit_range: tuple[int, int]
    evaluations: int
    generations: list[GenerationStats] = field(default_factory=list)
    evaluated: dict[tuple[int, ...], float] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "policy": list(self.best_policy.bits),
            "accuracy": self.best_accuracy,
            "ratio": self.best_ratio,
            "size_bits": self.best_size_bits,
            "target_ratio": self.target_ratio,
            "include_side_params": self.include_side_params,
            "bit_range": list(self.bit_range),
            "evaluations": self.evaluations,
            "generations": [asdict(g) for g in self.generations],
            "evaluated": [{"policy": list(p), "accuracy": a} for p, a in self.evaluated.items()],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> SearchReport:
        try:
            return cls(
                best_policy=BitwidthPolicy(tuple(data["policy"])),
                best_accuracy=float(data["accuracy"]),
                best_ratio=float(data["ratio"]),
                best_size_bits=int(data["size_bits"]),
                target_ratio=float(data["target_ratio"]),
                include_side_params=bool(data["include_side_params"]),
                bit_range=(int(data["bit_range"][0]), int(data["bit_range"][1])),
                evaluations=int(data["evaluations"]),
                generations=[GenerationStats(**g) for g in data.get("generations", [])],
                evaluated={tuple(e["policy"]): float(e["accuracy"]) for e in data.get("evaluated", [])},
            )
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise FormatError(f"malformed search report: {exc}") from exc

    @classmethod
    def from_json(cls, text: str) -> SearchReport:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FormatError(f"search report is not valid JSON: {exc.msg}", exc.pos) from exc
        if not isinstance(data, dict):
            raise FormatError("search report must be a JSON object")
        return cls.from_dict(data)


class _FeasibleSampler:
    """Draws policies inside the bit range that satisfy the constraint."""

    def __init__(
        self,
        spec: TargetNetSpec,
        constraint: CompressionConstraint,
        bit_range: tuple[int, int],
        rng: np.random.Generator,
        retries: int,
    ) -> None:
        self.spec = spec
        self.constraint = constraint
        self.low, self.high = bit_range
        self.rng = rng
        self.retries = retries

    def feasible(self, bits: np.ndarray) -> bool:
        return is_feasible(tuple(int(q) for q in bits), self.spec, self.constraint)

    def random(self) -> np.ndarray:
        return self.rng.integers(self.low, self.high + 1, size=self.spec.layer_count)

    def random_feasible(self) -> np.ndarray:
        candidate = self.random()
        for _ in range(self.retries):
            if self.feasible(candidate):
                return candidate
            candidate = self.random()
        return self.repair(candidate)

    def repair(self, bits: np.ndarray) -> np.ndarray:
        """Lower random genes until the policy fits; terminates at all-minimum bits."""
        bits = bits.copy()
        while not self.feasible(bits):
            lowerable = np.flatnonzero(bits > self.low)
            bits[self.rng.choice(lowerable)] -= 1
        return bits

    def offspring(self, parents: list[np.ndarray], mutation_prob: float) -> np.ndarray:
        for attempt in range(self.retries):
            if len(parents) > 1:
                i, j = self.rng.choice(len(parents), size=2, replace=False)
            else:
                i = j = 0
            mask = self.rng.random(self.spec.layer_count) < 0.5
            child = np.where(mask, parents[i], parents[j])
            mutate = self.rng.random(self.spec.layer_count) < mutation_prob
            child[mutate] = self.rng.integers(self.low, self.high + 1, size=int(mutate.sum()))
            if self.feasible(child):
                return child
            logger.debug("offspring attempt %d infeasible: %s", attempt, child.tolist())
        return self.random_feasible()


def check_feasible_space(
    spec: TargetNetSpec, constraint: CompressionConstraint, bit_range: tuple[int, int]
) -> None:
    """Raise ``InfeasibleError`` unless the all-minimum policy meets the constraint."""
    floor = BitwidthPolicy.uniform(bit_range[0], spec.layer_count)
    best_ratio = compression_ratio(floor, spec, constraint)
    if best_ratio < constraint.target_ratio:
        raise InfeasibleError(
            f"target ratio {constraint.target_ratio}x unreachable in bit range {list(bit_range)}: "
            f"all-{bit_range[0]}-bit policy reaches {best_ratio:.3f}x"
        )


def genetic_search(
    net: MetaQuantNet,
    spec: TargetNetSpec,
    constraint: CompressionConstraint,
    config: SearchConfig,
    val_subset: DataSplit,
) -> SearchReport:
    """Search the feasible policy with the best validation accuracy."""
    bit_range = config.resolved_bit_range(constraint)
    check_feasible_space(spec, constraint, bit_range)
    subset = val_subset.head(config.eval_samples)
    rng = np.random.default_rng(config.seed)
    sampler = _FeasibleSampler(spec, constraint, bit_range, rng, config.offspring_retries)
    cache: dict[tuple[int, ...], float] = {}

    def score(population: list[np.ndarray]) -> list[float]:
        keys = [tuple(int(q) for q in bits) for bits in population]
        pending = list(dict.fromkeys(k for k in keys if k not in cache))
        if config.workers > 1 and len(pending) > 1:
            with ThreadPoolExecutor(max_workers=config.workers) as pool:
                results = list(pool.map(lambda k: evaluate_policy(net, spec, k, subset), pending))
        else:
            results = [evaluate_policy(net, spec, k, subset) for k in pending]
        cache.update(zip(pending, results, strict=True))
        return [cache[k] for k in keys]

    def ratio_of(key: tuple[int, ...]) -> float:
        return compression_ratio(key, spec, constraint)

    logger.info(
        "Searching %s at %.2fx in bits %s: population %d, %d generations",
        spec.name, constraint.target_ratio, list(bit_range), config.population_size, config.generations,
    )
    population = [sampler.random_feasible() for _ in range(config.population_size)]
    stats: list[GenerationStats] = []
    best_key: tuple[int, ...] | None = None
    for generation in range(config.generations):
        fitness = score(population)
        ranked = sorted(
            {tuple(int(q) for q in bits): fit for bits, fit in zip(population, fitness, strict=True)}.items(),
            key=lambda item: selection_key(item[0], item[1], ratio_of(item[0])),
        )
        leader, leader_fit = ranked[0]
        if best_key is None or selection_key(leader, leader_fit, ratio_of(leader)) < selection_key(
            best_key, cache[best_key], ratio_of(best_key)
        ):
            best_key = leader
        stats.append(
            GenerationStats(
                generation=generation,
                best_fitness=cache[best_key],
                mean_fitness=float(np.mean(fitness)),
                best_policy=list(best_key),
            )
        )
        logger.info(
            "generation %d: best %.4f (%s), mean %.4f, %d evaluations",
            generation, cache[best_key], "-".join(map(str, best_key)), stats[-1].mean_fitness, len(cache),
        )
        if generation == config.generations - 1:
            break
        parents = [np.array(key) for key, _ in ranked[: config.parent_count]]
        offspring = [
            sampler.offspring(parents, config.mutation_prob)
            for _ in range(config.population_size - len(parents))
        ]
        population = parents + offspring

    assert best_key is not None
    return SearchReport(
        best_policy=BitwidthPolicy(best_key),
        best_accuracy=cache[best_key],
        best_ratio=ratio_of(best_key),
        best_size_bits=model_size_bits(best_key, spec, constraint),
        target_ratio=constraint.target_ratio,
        include_side_params=constraint.include_side_params,
        bit_range=bit_range,
        evaluations=len(cache),
        generations=stats,
        evaluated=dict(cache),
    )
