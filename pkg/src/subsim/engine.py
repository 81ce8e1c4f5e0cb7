"""Generic Subset Simulation engine.

Estimates a small probability P(response <= threshold) by descending through
nested response levels: level 0 is plain Monte Carlo from the prior; each
further level grows Markov chains from the best-performing samples of the
previous one, so the sample population migrates toward the rare region.  The
per-level populations are merged into a CCDF table from which the probability
is read off.

The engine is parameterized over an abstract system (prior sampler, response
function, conditional chain kernel); samples are opaque ndarrays with a
leading sample axis.  Smaller response means closer to the rare event.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from . import rng as _rng

logger = logging.getLogger(__name__)


class IntervalVariant(Enum):
    """Probability-interval layout for the CCDF.

    STANDARD assigns (N-n)/N fractions scaled by p0^level, so the last entry
    of a level is 0.  SHIFTED moves the whole ladder up one slot, making the
    last entry p0^level / N: when no rare sample is ever found the read-off is
    a small positive floor ("the probability is below this") instead of 0.
    """

    STANDARD = "standard"
    SHIFTED = "shifted"


@dataclass(frozen=True)
class SubsetConfig:
    """Engine parameters: samples per level, level probability, level cap."""

    n_samples: int
    level_probability: float = 0.1
    max_levels: int = 7
    interval_variant: IntervalVariant = IntervalVariant.SHIFTED

    def __post_init__(self):
        n, p0 = self.n_samples, self.level_probability
        if n < 1:
            raise ValueError(f"n_samples must be positive, got {n}")
        if not 0.0 < p0 < 1.0:
            raise ValueError(f"level_probability must lie in (0, 1), got {p0}")
        if self.max_levels < 1:
            raise ValueError(f"max_levels must be positive, got {self.max_levels}")
        n_c = p0 * n
        if abs(n_c - round(n_c)) > 1e-9 or round(n_c) < 1:
            raise ValueError(f"p0 * N must be a positive integer, got {n_c}")
        n_s = 1.0 / p0
        if abs(n_s - round(n_s)) > 1e-9:
            raise ValueError(f"1 / p0 must be a positive integer, got {n_s}")
        if round(n_c) * round(n_s) != n:
            raise ValueError(
                f"chain count times chain length must equal N: {round(n_c)} * {round(n_s)} != {n}"
            )

    @property
    def n_chains(self) -> int:
        """Chains per level (seeds promoted from the previous level)."""
        return round(self.level_probability * self.n_samples)

    @property
    def chain_length(self) -> int:
        """Samples generated per chain."""
        return round(1.0 / self.level_probability)


@dataclass(frozen=True)
class CcdfRow:
    probability: float
    response: float
    sample: np.ndarray


@dataclass(frozen=True)
class CcdfTable:
    """Merged CCDF rows across levels, probabilities non-increasing."""

    rows: list[CcdfRow]
    levels_completed: int

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([r.probability for r in self.rows])

    @property
    def responses(self) -> np.ndarray:
        return np.array([r.response for r in self.rows])


@dataclass(frozen=True)
class RareEventSystem:
    """Abstract system the engine drives.

    sample_prior(rng, n) draws n samples (ndarray, leading sample axis).
    evaluate(samples) maps them to scalar responses (smaller = closer to the
    rare event).  conditional_chain(seed, seed_response, threshold, length,
    rng) grows a Markov chain of exactly `length` new samples whose responses
    never exceed `threshold`.
    """

    sample_prior: Callable[[np.random.Generator, int], np.ndarray]
    evaluate: Callable[[np.ndarray], np.ndarray]
    conditional_chain: Callable[
        [np.ndarray, float, float, int, np.random.Generator],
        tuple[np.ndarray, np.ndarray],
    ]


@dataclass(frozen=True)
class SubsetDiagnostics:
    levels_completed: int
    conflict_count: int
    samples_used: int
    floor_reached: bool
    thresholds: tuple[float, ...] = field(default_factory=tuple)


@dataclass(frozen=True)
class SubsetResult:
    estimate: float
    table: CcdfTable
    diagnostics: SubsetDiagnostics


def probability_intervals(level: int, config: SubsetConfig) -> np.ndarray:
    """Probability ladder for one level, highest first.

    Computed from integer numerators over the exact integer denominator
    N * chain_length**level, so entries like the level-6 floor 1e-8 come out
    exactly (level_probability**level would not).
    """
    if not 0 <= level < config.max_levels:
        raise ValueError(f"level must lie in [0, {config.max_levels}), got {level}")
    n = config.n_samples
    denom = float(n * config.chain_length**level)
    if config.interval_variant is IntervalVariant.SHIFTED:
        numer = np.arange(n, 0, -1, dtype=np.float64)
    else:
        numer = np.arange(n - 1, -1, -1, dtype=np.float64)
    return numer / denom


def intermediate_threshold(sorted_responses: Sequence[float], config: SubsetConfig) -> float:
    """Next level's threshold: the (N - N_c)-th largest response (1-based)."""
    r = np.asarray(sorted_responses, dtype=np.float64)
    if r.ndim != 1 or r.shape[0] != config.n_samples:
        raise ValueError(f"expected {config.n_samples} responses, got shape {r.shape}")
    if np.any(np.diff(r) > 0):
        raise ValueError("responses must be sorted in descending order")
    return float(r[config.n_samples - config.n_chains - 1])


def select_seeds(sorted_samples: np.ndarray, config: SubsetConfig) -> np.ndarray:
    """The N_c samples with the smallest responses (tail of the sorted set)."""
    if sorted_samples.shape[0] != config.n_samples:
        raise ValueError(
            f"expected {config.n_samples} samples, got {sorted_samples.shape[0]}"
        )
    return np.copy(sorted_samples[config.n_samples - config.n_chains :])


def assemble_ccdf(
    level_blocks: Sequence[tuple[np.ndarray, np.ndarray, np.ndarray]],
    config: SubsetConfig,
) -> CcdfTable:
    """Merge per-level (intervals, sorted responses, sorted samples) blocks.

    Every non-final level drops its last N_c rows (those samples were consumed
    as seeds and are replaced by the next level); the final level keeps all N.
    """
    if len(level_blocks) == 0:
        raise ValueError("at least one level block is required")
    n, n_c = config.n_samples, config.n_chains
    rows: list[CcdfRow] = []
    last = len(level_blocks) - 1
    for i, (intervals, responses, samples) in enumerate(level_blocks):
        if not (len(intervals) == len(responses) == samples.shape[0] == n):
            raise ValueError(f"level {i} block must have {n} rows")
        keep = n if i == last else n - n_c
        for j in range(keep):
            rows.append(
                CcdfRow(
                    probability=float(intervals[j]),
                    response=float(responses[j]),
                    sample=np.copy(samples[j]),
                )
            )
    probs = np.array([r.probability for r in rows])
    if np.any(np.diff(probs) > 0):
        raise ValueError("assembled probabilities must be non-increasing")
    return CcdfTable(rows=rows, levels_completed=len(level_blocks))


def estimate_probability(
    table: CcdfTable, conflict_count: int, final_level: int, config: SubsetConfig
) -> float:
    """Read the probability off the final level's interval ladder.

    With D rare samples on the final level the estimate is the interval at
    1-based position N - D + 1; with D = 0 it is the last interval, meaning
    "the probability is below this value".
    """
    n = config.n_samples
    if not 0 <= conflict_count <= n:
        raise ValueError(f"conflict count must lie in [0, {n}], got {conflict_count}")
    if table.levels_completed != final_level + 1:
        raise ValueError(
            f"table has {table.levels_completed} levels but final level is {final_level}"
        )
    intervals = probability_intervals(final_level, config)
    if conflict_count > 0:
        return float(intervals[n - conflict_count])
    return float(intervals[n - 1])


def run_subset_simulation(
    system: RareEventSystem,
    config: SubsetConfig,
    failure_threshold: float,
    seed: _rng.SeedLike,
    stop_on_rare_count: bool = True,
) -> SubsetResult:
    """Run the full multi-level simulation against `system`.

    Level 0 draws N prior samples.  While levels remain, the engine promotes
    the N_c best samples as chain seeds, grows N new conditional samples
    under the intermediate threshold, and repeats.  Total cost is N per
    level.

    With `stop_on_rare_count` (the conflict-driver behavior) the descent also
    stops as soon as a level holds at least N_c samples at or below
    `failure_threshold`; without it (the reference-problem behavior) all
    `max_levels` levels run unconditionally.
    """
    root = _rng.derive(seed)
    n, n_c, n_s = config.n_samples, config.n_chains, config.chain_length

    samples = system.sample_prior(_rng.generator(_rng.child(root, 0)), n)
    responses = np.asarray(system.evaluate(samples), dtype=np.float64)
    level = 0
    sorted_r, sorted_x = _sort_block(samples, responses, n, level)
    blocks = [(probability_intervals(level, config), sorted_r, sorted_x)]
    conflicts = int(np.count_nonzero(sorted_r <= failure_threshold))
    thresholds: list[float] = []

    while (conflicts < n_c or not stop_on_rare_count) and level < config.max_levels - 1:
        b = intermediate_threshold(sorted_r, config)
        if thresholds and b >= thresholds[-1]:
            logger.warning(
                "intermediate threshold did not decrease (level %d: %.6g >= %.6g); "
                "chains may be stalling",
                level + 1,
                b,
                thresholds[-1],
            )
        thresholds.append(b)
        seeds = select_seeds(sorted_x, config)
        seed_r = sorted_r[n - n_c :]
        level += 1

        chain_x = []
        chain_r = []
        for j in range(n_c):
            gen = _rng.generator(_rng.child(root, level, j))
            cx, cr = system.conditional_chain(seeds[j], float(seed_r[j]), b, n_s, gen)
            cr = np.asarray(cr, dtype=np.float64)
            if cx.shape[0] != n_s or cr.shape[0] != n_s:
                raise ValueError(
                    f"conditional chain returned {cx.shape[0]} samples, expected {n_s}"
                )
            if np.any(cr > b):
                raise ValueError(
                    f"conditional chain violated its threshold: max response "
                    f"{cr.max():.6g} > {b:.6g}"
                )
            chain_x.append(cx)
            chain_r.append(cr)

        samples = np.concatenate(chain_x, axis=0)
        responses = np.concatenate(chain_r, axis=0)
        sorted_r, sorted_x = _sort_block(samples, responses, n, level)
        blocks.append((probability_intervals(level, config), sorted_r, sorted_x))
        conflicts = int(np.count_nonzero(sorted_r <= failure_threshold))

    table = assemble_ccdf(blocks, config)
    estimate = estimate_probability(table, conflicts, level, config)
    diagnostics = SubsetDiagnostics(
        levels_completed=level + 1,
        conflict_count=conflicts,
        samples_used=n * (level + 1),
        floor_reached=conflicts == 0,
        thresholds=tuple(thresholds),
    )
    return SubsetResult(estimate=estimate, table=table, diagnostics=diagnostics)


def _sort_block(samples: np.ndarray, responses: np.ndarray, n: int, level: int):
    """Stable descending sort of one level's population, ties by draw index."""
    if responses.shape[0] != n or samples.shape[0] != n:
        raise ValueError(f"level {level} produced {responses.shape[0]} samples, expected {n}")
    if not np.all(np.isfinite(responses)):
        raise ValueError(f"level {level} produced non-finite responses")
    order = np.argsort(-responses, kind="stable")
    return responses[order], samples[order]
