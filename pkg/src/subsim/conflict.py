"""Per-time-step probability of conflict between an observer and a tracked intruder.

Intruder states are sampled from the Kalman posterior, propagated over the
prediction horizon alongside the observer's intended track, and scored by
miss distance against the protected radius.  A matched-budget Direct Monte
Carlo estimator and the subset-simulation estimator share the same sampling
machinery, and a scenario driver runs both across a full encounter while the
filter tracks the (noisy-measured) intruder.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import rng as _rng
from ._tilt import TiltSpec, resolve_tilt
from .dynamics import AircraftState, propagate, transition_matrix
from .engine import CcdfTable, RareEventSystem, SubsetConfig, run_subset_simulation
from .scenarios import ScenarioSpec, initial_states
from .tracking import (
    KalmanEstimate,
    initial_estimate,
    kf_step,
    simulate_measurement,
)
from ._kernels import miss_distance_batch

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConflictQuery:
    """One estimation instant: observer intent, intruder belief, zone and horizon."""

    observer: AircraftState
    intruder_estimate: KalmanEstimate
    protected_radius: float = 152.4
    horizon: float = 20.0
    sample_rate: float = 20.0

    def __post_init__(self):
        if self.protected_radius <= 0:
            raise ValueError(f"protected radius must be positive, got {self.protected_radius}")
        if self.horizon <= 0:
            raise ValueError(f"horizon must be positive, got {self.horizon}")
        steps = self.horizon * self.sample_rate
        if abs(steps - round(steps)) > 1e-9 or round(steps) < 1:
            raise ValueError(f"horizon * sample_rate must be a positive integer, got {steps}")


@dataclass(frozen=True)
class PcResult:
    """Conflict probability with its sampling diagnostics.

    When `floor_reached` is set no conflicting sample was found and `pc` is
    the smallest representable interval: read it as "P_c is below this value".
    """

    pc: float
    conflict_count: int
    levels_used: int
    samples_used: int
    floor_reached: bool


def _observer_positions(query: ConflictQuery) -> np.ndarray:
    traj = propagate(query.observer, f=query.sample_rate, t=query.horizon)
    return traj.positions


def _cholesky_with_jitter(cov: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor, adding the smallest diagonal jitter that works.

    Escalates from 1e-12 to 1e-6 of the largest diagonal entry; anything
    worse than that is treated as a genuinely indefinite covariance.
    """
    cov = np.asarray(cov, dtype=np.float64)
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        pass
    scale = float(np.max(np.abs(np.diag(cov)))) or 1.0
    jitter = 1e-12 * scale
    while jitter <= 1e-6 * scale:
        try:
            factor = np.linalg.cholesky(cov + jitter * np.eye(6))
        except np.linalg.LinAlgError:
            jitter *= 10.0
            continue
        logger.warning("covariance required diagonal jitter %.3e to factorize", jitter)
        return factor
    raise np.linalg.LinAlgError(
        "intruder covariance is not positive semidefinite (jitter up to 1e-6*scale failed)"
    )


def _sample_states(gen: np.random.Generator, n: int, mean: np.ndarray, chol: np.ndarray) -> np.ndarray:
    z = gen.standard_normal((n, 6))
    return mean + z @ chol.T


def pc_dmc(query: ConflictQuery, n: int, seed: _rng.SeedLike) -> PcResult:
    """Direct Monte Carlo: fraction of n posterior draws whose trajectories conflict."""
    if n < 1:
        raise ValueError(f"sample count must be positive, got {n}")
    gen = _rng.generator(_rng.child(_rng.derive(seed), 0))
    mean = query.intruder_estimate.mean.as_array()
    chol = _cholesky_with_jitter(query.intruder_estimate.covariance)
    obs_xy = _observer_positions(query)
    states = _sample_states(gen, n, mean, chol)
    miss, _ = miss_distance_batch(states, obs_xy, 1.0 / query.sample_rate)
    conflicts = int(np.count_nonzero(miss <= query.protected_radius))
    return PcResult(
        pc=conflicts / n,
        conflict_count=conflicts,
        levels_used=1,
        samples_used=n,
        floor_reached=False,
    )


def _log_acceptance(
    cand_miss: float,
    cur_miss: float,
    cand_maha: float,
    cur_maha: float,
    sigma2: float,
) -> float:
    """Log acceptance ratio: miss-distance tilt about the observer's closest
    point times the posterior density ratio (symmetric proposal cancels)."""
    log_target = (cur_miss * cur_miss - cand_miss * cand_miss) / (2.0 * sigma2)
    log_prior = 0.5 * (cur_maha - cand_maha)
    return log_target + log_prior


def _conflict_chain(
    seed_state: np.ndarray,
    seed_miss: float,
    threshold: float,
    length: int,
    gen: np.random.Generator,
    obs_xy: np.ndarray,
    dt: float,
    mean: np.ndarray,
    chol_inv: np.ndarray,
    sigma: float,
) -> tuple[np.ndarray, np.ndarray]:
    """One conditional chain of `length` new intruder states under `threshold`.

    Candidates perturb only the acceleration components by unit-variance
    draws; a candidate whose miss distance reaches the threshold is rejected
    outright.
    """
    sigma2 = sigma * sigma
    cur = np.array(seed_state, dtype=np.float64)
    cur_miss = float(seed_miss)
    diff = chol_inv @ (cur - mean)
    cur_maha = float(diff @ diff)
    out_x = np.empty((length, 6))
    out_r = np.empty(length)
    cand = np.empty(6)
    for k in range(length):
        acc = gen.standard_normal(2)
        cand[:] = cur
        cand[2] += acc[0]
        cand[5] += acc[1]
        cand_miss_arr, _ = miss_distance_batch(cand[None, :], obs_xy, dt)
        cand_miss = float(cand_miss_arr[0])
        diff = chol_inv @ (cand - mean)
        cand_maha = float(diff @ diff)
        log_beta = _log_acceptance(cand_miss, cur_miss, cand_maha, cur_maha, sigma2)
        e = gen.random()
        if cand_miss < threshold and e < math.exp(min(0.0, log_beta)):
            cur = cand.copy()
            cur_miss = cand_miss
            cur_maha = cand_maha
        out_x[k] = cur
        out_r[k] = cur_miss
    return out_x, out_r


def mh_conflict_samples(
    query: ConflictQuery,
    seeds: np.ndarray,
    chain_length: int,
    threshold: float,
    seed: _rng.SeedLike,
    target_scale: TiltSpec = None,
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Grow one conditional chain per seed state; returns (states, misses) per chain.

    Trajectories are deterministic in the states and can be rebuilt with
    `dynamics.propagate`; re-evaluating a returned state reproduces its miss
    distance exactly.
    """
    seeds = np.asarray(seeds, dtype=np.float64)
    if seeds.ndim != 2 or seeds.shape[1] != 6:
        raise ValueError(f"seeds must be (n, 6), got {seeds.shape}")
    if chain_length < 1:
        raise ValueError(f"chain length must be positive, got {chain_length}")
    root = _rng.derive(seed)
    obs_xy = _observer_positions(query)
    dt = 1.0 / query.sample_rate
    mean = query.intruder_estimate.mean.as_array()
    chol = _cholesky_with_jitter(query.intruder_estimate.covariance)
    chol_inv = np.linalg.inv(chol)
    sigma = resolve_tilt(target_scale, query.protected_radius, threshold)
    seed_miss, _ = miss_distance_batch(seeds, obs_xy, dt)
    chains = []
    for j in range(seeds.shape[0]):
        if seed_miss[j] > threshold:
            raise ValueError(
                f"seed {j} violates the threshold: miss {seed_miss[j]:.6g} > {threshold:.6g}"
            )
        gen = _rng.generator(_rng.child(root, 1, j))
        chains.append(
            _conflict_chain(
                seeds[j], float(seed_miss[j]), threshold, chain_length, gen,
                obs_xy, dt, mean, chol_inv, sigma,
            )
        )
    return chains


def conflict_system(query: ConflictQuery, target_scale: TiltSpec = None) -> RareEventSystem:
    """Wire one conflict query into the generic engine."""
    obs_xy = _observer_positions(query)
    dt = 1.0 / query.sample_rate
    mean = query.intruder_estimate.mean.as_array()
    chol = _cholesky_with_jitter(query.intruder_estimate.covariance)
    chol_inv = np.linalg.inv(chol)

    def sample_prior(gen: np.random.Generator, n: int) -> np.ndarray:
        return _sample_states(gen, n, mean, chol)

    def evaluate(states: np.ndarray) -> np.ndarray:
        miss, _ = miss_distance_batch(states, obs_xy, dt)
        return miss

    def conditional_chain(seed_state, seed_miss, threshold, length, gen):
        sigma = resolve_tilt(target_scale, query.protected_radius, threshold)
        return _conflict_chain(
            seed_state, seed_miss, threshold, length, gen,
            obs_xy, dt, mean, chol_inv, sigma,
        )

    return RareEventSystem(
        sample_prior=sample_prior, evaluate=evaluate, conditional_chain=conditional_chain
    )


def pc_ss(
    query: ConflictQuery,
    config: SubsetConfig,
    seed: _rng.SeedLike,
    target_scale: TiltSpec = None,
) -> tuple[PcResult, CcdfTable]:
    """Subset-simulation conflict probability for one query.

    Level 0 is the Direct Monte Carlo machinery on N draws (same stream as
    `pc_dmc` for the same master seed); deeper levels run conditional chains
    against intermediate miss-distance thresholds.
    """
    system = conflict_system(query, target_scale=target_scale)
    result = run_subset_simulation(system, config, query.protected_radius, seed)
    d = result.diagnostics
    pc = PcResult(
        pc=result.estimate,
        conflict_count=d.conflict_count,
        levels_used=d.levels_completed,
        samples_used=d.samples_used,
        floor_reached=d.floor_reached,
    )
    return pc, result.table


@dataclass(frozen=True)
class StepRecord:
    """One emitted row of the scenario time series."""

    step: int
    time: float
    pc_ss: PcResult
    pc_dmc: PcResult
    miss_true: float
    observer_truth: AircraftState
    intruder_truth: AircraftState
    estimate: KalmanEstimate


def simulate_scenario(
    spec: ScenarioSpec,
    ss_config: SubsetConfig,
    seed: _rng.SeedLike,
    estimate_steps: Optional[Sequence[int]] = None,
    target_scale: TiltSpec = None,
) -> list[StepRecord]:
    """Run a full encounter: truth propagation, measurements, filtering, and a
    matched-budget SS/DMC conflict estimate per step.

    `estimate_steps` restricts which steps (1-based) produce estimates; the
    truth/filter evolution and all random streams are unaffected, so a
    subsampled run reproduces exactly the records of the full run.
    """
    root = _rng.derive(seed)
    observer_truth, intruder_truth = initial_states(spec)
    est = initial_estimate(
        intruder_truth,
        spec.noise,
        _rng.generator(_rng.child(root, 0)),
        pos_std=spec.init_pos_std,
        vel_std=spec.init_vel_std,
        acc_std=spec.init_acc_std,
        perfect_init=spec.perfect_init,
    )
    a = transition_matrix(spec.dt)
    obs = observer_truth.as_array()
    intr = intruder_truth.as_array()
    wanted = None if estimate_steps is None else set(int(s) for s in estimate_steps)
    counter = 0
    records: list[StepRecord] = []
    for k in range(1, spec.n_steps + 1):
        obs = a @ obs
        intr = a @ intr
        measurement = None
        if counter == spec.measurement_stride:
            truth_state = AircraftState.from_array(intr)
            measurement = simulate_measurement(
                truth_state, spec.noise, _rng.generator(_rng.child(root, k, 0))
            )
            counter = 0
        counter += 1
        est = kf_step(est, measurement, spec.dt, spec.noise)

        if wanted is not None and k not in wanted:
            continue
        observer_state = AircraftState.from_array(obs)
        intruder_state = AircraftState.from_array(intr)
        query = ConflictQuery(
            observer=observer_state,
            intruder_estimate=est,
            protected_radius=spec.protected_radius,
            horizon=spec.duration,
            sample_rate=spec.sample_rate,
        )
        ss_res, _ = pc_ss(query, ss_config, _rng.child(root, k, 1), target_scale=target_scale)
        dmc_res = pc_dmc(query, ss_res.samples_used, _rng.child(root, k, 2))
        obs_xy = _observer_positions(query)
        miss_true, _ = miss_distance_batch(intr[None, :], obs_xy, spec.dt)
        records.append(
            StepRecord(
                step=k,
                time=k * spec.dt,
                pc_ss=ss_res,
                pc_dmc=dmc_res,
                miss_true=float(miss_true[0]),
                observer_truth=observer_state,
                intruder_truth=intruder_state,
                estimate=est,
            )
        )
    return records
