"""Reference problem: probability that a standard 2D Gaussian draw lands in a disc.

The rare region is a small circle far from the origin, so plain Monte Carlo
with a small budget almost always reports zero while the subset engine walks
sample chains toward the disc.  A quadrature oracle provides the ground truth
for accuracy checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import rng as _rng
from ._tilt import TiltSpec, resolve_tilt
from .engine import RareEventSystem, SubsetConfig, SubsetResult, run_subset_simulation


@dataclass(frozen=True)
class Point2:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"coordinates must be finite: {self}")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=np.float64)


@dataclass(frozen=True)
class CircleRegion:
    center: Point2
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius}")


def distance_to_center(sample: Point2, region: CircleRegion) -> float:
    """Euclidean distance from the sample to the region center.

    Written as sqrt(dx*dx + dy*dy) so scalar and batch paths agree bit for bit.
    """
    dx = sample.x - region.center.x
    dy = sample.y - region.center.y
    return math.sqrt(dx * dx + dy * dy)


def _distances(xy: np.ndarray, region: CircleRegion) -> np.ndarray:
    d = xy - region.center.as_array()
    return np.sqrt(d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1])


def dmc_estimate(region: CircleRegion, n: int, seed: _rng.SeedLike) -> float:
    """Plain Monte Carlo estimate: fraction of n standard-normal draws inside the disc."""
    if n < 1:
        raise ValueError(f"sample count must be positive, got {n}")
    gen = _rng.generator(_rng.child(_rng.derive(seed), 0))
    xy = gen.standard_normal((n, 2))
    return float(np.count_nonzero(_distances(xy, region) <= region.radius)) / n


def _chain(
    seed_xy: np.ndarray,
    seed_dist: float,
    region: CircleRegion,
    threshold: float,
    length: int,
    gen: np.random.Generator,
    target_scale,
) -> tuple[np.ndarray, np.ndarray]:
    """One Metropolis-Hastings chain of `length` new samples under `threshold`.

    Random-walk proposal with unit covariance; the target density is a
    Gaussian about the region center with standard deviation sigma per axis
    (the disc radius unless overridden, see `_tilt`).  Candidates beyond the
    threshold are rejected outright.
    """
    sigma = resolve_tilt(target_scale, region.radius, threshold)
    sigma2 = sigma * sigma
    c = region.center.as_array()
    cur = np.array(seed_xy, dtype=np.float64)
    cur_d = float(seed_dist)
    out_xy = np.empty((length, 2))
    out_d = np.empty(length)
    for k in range(length):
        step = gen.standard_normal(2)
        cand = cur + step
        dx = cand[0] - c[0]
        dy = cand[1] - c[1]
        cand_d = math.sqrt(dx * dx + dy * dy)
        # Proposal transition ratio, written out even though the random walk
        # is symmetric and it cancels to zero.
        log_q = (-0.5 * float(np.dot(step, step))) - (-0.5 * float(np.dot(-step, -step)))
        log_target = (cur_d * cur_d - cand_d * cand_d) / (2.0 * sigma2)
        log_beta = log_q + log_target
        e = gen.random()
        if cand_d <= threshold and e < math.exp(min(0.0, log_beta)):
            cur = cand
            cur_d = cand_d
        out_xy[k] = cur
        out_d[k] = cur_d
    return out_xy, out_d


def mh_chains(
    seeds: Sequence[Point2],
    chain_length: int,
    region: CircleRegion,
    threshold: float,
    seed: _rng.SeedLike,
    target_scale: TiltSpec = None,
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Grow one conditional chain per seed; every retained distance <= threshold."""
    if chain_length < 1:
        raise ValueError(f"chain length must be positive, got {chain_length}")
    root = _rng.derive(seed)
    chains = []
    for j, s in enumerate(seeds):
        d0 = distance_to_center(s, region)
        if d0 > threshold:
            raise ValueError(
                f"seed {j} violates the threshold: distance {d0:.6g} > {threshold:.6g}"
            )
        gen = _rng.generator(_rng.child(root, 1, j))
        chains.append(
            _chain(s.as_array(), d0, region, threshold, chain_length, gen, target_scale)
        )
    return chains


def oracle_probability(region: CircleRegion, rel_tol: float = 1e-6) -> float:
    """Standard bivariate normal mass inside the disc, by polar quadrature.

    Simpson's rule in radius, periodic trapezoid in angle, grid doubled until
    successive refinements agree to `rel_tol` (far finer than needed).
    """
    cx, cy = region.center.x, region.center.y
    r = region.radius

    def integral(n_rho: int, n_theta: int) -> float:
        rho = np.linspace(0.0, r, n_rho + 1)
        theta = np.linspace(0.0, 2.0 * np.pi, n_theta, endpoint=False)
        x = cx + rho[:, None] * np.cos(theta)
        y = cy + rho[:, None] * np.sin(theta)
        f = np.exp(-0.5 * (x * x + y * y)).mean(axis=1) * rho
        w = np.ones(n_rho + 1)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        h = r / n_rho
        return float((h / 3.0) * np.dot(w, f))

    n_rho, n_theta = 64, 64
    prev = integral(n_rho, n_theta)
    for _ in range(12):
        n_rho *= 2
        n_theta *= 2
        cur = integral(n_rho, n_theta)
        if abs(cur - prev) <= rel_tol * max(abs(cur), 1e-300):
            return cur
        prev = cur
    return prev


def toy_system(region: CircleRegion, target_scale: TiltSpec = None) -> RareEventSystem:
    """Wire the disc problem into the generic engine."""

    def sample_prior(gen: np.random.Generator, n: int) -> np.ndarray:
        return gen.standard_normal((n, 2))

    def evaluate(xy: np.ndarray) -> np.ndarray:
        return _distances(xy, region)

    def conditional_chain(seed_xy, seed_dist, threshold, length, gen):
        return _chain(seed_xy, seed_dist, region, threshold, length, gen, target_scale)

    return RareEventSystem(
        sample_prior=sample_prior, evaluate=evaluate, conditional_chain=conditional_chain
    )


def ss_toy(
    region: CircleRegion,
    config: SubsetConfig,
    seed: _rng.SeedLike,
    target_scale: TiltSpec = None,
) -> SubsetResult:
    """Subset Simulation estimate of the disc probability.

    All `max_levels` levels run unconditionally (the reference problem's
    descent is not cut short when the disc fills with samples), and the
    probability is read off the final level.  With max_levels = 1 this
    reduces to `dmc_estimate` on the same draws.
    """
    system = toy_system(region, target_scale=target_scale)
    return run_subset_simulation(
        system, config, region.radius, seed, stop_on_rare_count=False
    )
