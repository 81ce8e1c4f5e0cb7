"""Engine unit tests: interval ladders, thresholds, seeds, CCDF assembly, read-off."""

import numpy as np
import pytest

from subsim.engine import (
    CcdfTable,
    IntervalVariant,
    RareEventSystem,
    SubsetConfig,
    assemble_ccdf,
    estimate_probability,
    intermediate_threshold,
    probability_intervals,
    run_subset_simulation,
    select_seeds,
)

CFG = SubsetConfig(n_samples=100, level_probability=0.1, max_levels=7)
CFG_STD = SubsetConfig(
    n_samples=100, level_probability=0.1, max_levels=7, interval_variant=IntervalVariant.STANDARD
)


class TestConfig:
    def test_chain_arithmetic(self):
        assert CFG.n_chains == 10
        assert CFG.chain_length == 10

    def test_other_valid_splits(self):
        cfg = SubsetConfig(n_samples=1000, level_probability=0.1)
        assert cfg.n_chains == 100 and cfg.chain_length == 10
        cfg = SubsetConfig(n_samples=100, level_probability=0.2)
        assert cfg.n_chains == 20 and cfg.chain_length == 5

    @pytest.mark.parametrize(
        "n,p0",
        [(100, 0.3), (0, 0.1), (100, 0.0), (100, 1.0), (50, 0.15), (99, 0.1)],
    )
    def test_invalid_configs_rejected(self, n, p0):
        with pytest.raises(ValueError):
            SubsetConfig(n_samples=n, level_probability=p0)


class TestProbabilityIntervals:
    def test_shifted_level0_endpoints(self):
        p = probability_intervals(0, CFG)
        assert p[0] == 1.0
        assert p[-1] == 0.01

    def test_shifted_level6_floor_is_exact(self):
        p = probability_intervals(6, CFG)
        assert p[-1] == 1e-8

    def test_standard_level0_last_is_zero(self):
        p = probability_intervals(0, CFG_STD)
        assert p[-1] == 0.0
        assert p[0] == 0.99

    @pytest.mark.parametrize("level", range(7))
    def test_shifted_bounds_and_monotonicity(self, level):
        p = probability_intervals(level, CFG)
        p0i = CFG.level_probability**level
        assert np.all(np.diff(p) < 0)
        assert np.isclose(p[0], p0i, rtol=1e-12)
        assert np.isclose(p[-1], p0i / CFG.n_samples, rtol=1e-12)

    def test_level_out_of_range(self):
        with pytest.raises(ValueError):
            probability_intervals(7, CFG)
        with pytest.raises(ValueError):
            probability_intervals(-1, CFG)


class TestIntermediateThreshold:
    def test_descending_sequence(self):
        # 100..1 descending: the 90th largest (1-based N - N_c) is 11
        responses = np.arange(100, 0, -1, dtype=float)
        assert intermediate_threshold(responses, CFG) == 11.0

    def test_constant_responses(self):
        responses = np.full(100, 3.5)
        assert intermediate_threshold(responses, CFG) == 3.5

    def test_rejects_unsorted(self):
        responses = np.arange(100, dtype=float)
        with pytest.raises(ValueError):
            intermediate_threshold(responses, CFG)

    def test_rejects_wrong_length(self):
        with pytest.raises(ValueError):
            intermediate_threshold(np.arange(50, 0, -1, dtype=float), CFG)

    def test_matches_brute_force_on_random_instances(self):
        rng = np.random.default_rng(41)
        for _ in range(100):
            resp = rng.normal(size=100)
            ordered = np.sort(resp)[::-1]
            # independent oracle: 1-based element N - N_c of the descending sort
            assert intermediate_threshold(ordered, CFG) == ordered[100 - 10 - 1]


class TestSelectSeeds:
    def test_positions_91_to_100(self):
        samples = np.arange(100).reshape(100, 1)
        seeds = select_seeds(samples, CFG)
        assert seeds.shape == (10, 1)
        assert list(seeds[:, 0]) == list(range(90, 100))

    def test_single_seed(self):
        cfg = SubsetConfig(n_samples=10, level_probability=0.1)
        samples = np.arange(10).reshape(10, 1)
        assert select_seeds(samples, cfg)[:, 0].tolist() == [9]

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            select_seeds(np.zeros((50, 2)), CFG)

    def test_matches_nearest_brute_force(self):
        # seeds must be exactly the N_c samples with the smallest responses
        rng = np.random.default_rng(99)
        for _ in range(100):
            xy = rng.normal(size=(100, 2))
            resp = np.hypot(xy[:, 0] - 3.0, xy[:, 1] + 3.0)
            order = np.argsort(-resp, kind="stable")
            seeds = select_seeds(xy[order], CFG)
            nearest = xy[np.argsort(resp, kind="stable")][:10]
            assert np.array_equal(np.sort(seeds, axis=0), np.sort(nearest, axis=0))


def _block(level, cfg, offset=0.0):
    intervals = probability_intervals(level, cfg)
    responses = np.sort(np.random.default_rng(level + 1).normal(size=cfg.n_samples))[::-1] + offset
    samples = np.arange(cfg.n_samples, dtype=float).reshape(-1, 1)
    return intervals, responses, samples


class TestAssembleCcdf:
    def test_two_levels_row_count(self):
        table = assemble_ccdf([_block(0, CFG, 10.0), _block(1, CFG)], CFG)
        assert len(table.rows) == 190
        assert table.levels_completed == 2

    def test_single_level_keeps_all(self):
        table = assemble_ccdf([_block(0, CFG)], CFG)
        assert len(table.rows) == 100

    @pytest.mark.parametrize("m", [1, 2, 3, 5, 7])
    def test_general_row_count(self, m):
        blocks = [_block(i, CFG, offset=10.0 * (m - i)) for i in range(m)]
        table = assemble_ccdf(blocks, CFG)
        assert len(table.rows) == 90 * (m - 1) + 100

    def test_probabilities_non_increasing(self):
        blocks = [_block(i, CFG, offset=10.0 * (3 - i)) for i in range(3)]
        table = assemble_ccdf(blocks, CFG)
        assert np.all(np.diff(table.probabilities) <= 0)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            assemble_ccdf([], CFG)


class TestEstimateProbability:
    def test_floor_at_level_6(self):
        table = CcdfTable(rows=[None] * 0, levels_completed=7)
        assert estimate_probability(table, 0, 6, CFG) == 1e-8

    def test_all_conflicting_at_level_0(self):
        table = CcdfTable(rows=[], levels_completed=1)
        assert estimate_probability(table, 100, 0, CFG) == 1.0

    def test_partial_count_at_level_4(self):
        table = CcdfTable(rows=[], levels_completed=5)
        # interval at 1-based position 53 of level 4: 48 / (100 * 10^4)
        assert estimate_probability(table, 48, 4, CFG) == 48.0 / (100 * 10**4)

    def test_count_above_n_rejected(self):
        table = CcdfTable(rows=[], levels_completed=1)
        with pytest.raises(ValueError):
            estimate_probability(table, 101, 0, CFG)

    def test_level_mismatch_rejected(self):
        table = CcdfTable(rows=[], levels_completed=2)
        with pytest.raises(ValueError):
            estimate_probability(table, 5, 0, CFG)


def _line_system(shift=0.0):
    """1D test system: response = |x - shift|, prior standard normal, chains
    as simple random walks accepted whenever they respect the threshold."""

    def sample_prior(gen, n):
        return gen.standard_normal((n, 1))

    def evaluate(x):
        return np.abs(x[:, 0] - shift)

    def conditional_chain(seed, seed_resp, threshold, length, gen):
        cur = float(seed[0])
        out = np.empty((length, 1))
        resp = np.empty(length)
        for k in range(length):
            cand = cur + gen.standard_normal()
            gen.random()
            if abs(cand - shift) <= threshold:
                cur = cand
            out[k, 0] = cur
            resp[k] = abs(cur - shift)
        return out, resp

    return RareEventSystem(sample_prior, evaluate, conditional_chain)


class TestRunSubsetSimulation:
    def test_non_rare_event_stops_at_level_0(self):
        # threshold at the prior median: about half the draws are below it
        system = _line_system()
        result = run_subset_simulation(system, CFG, 0.6745, seed=5)
        assert result.diagnostics.levels_completed == 1
        assert abs(result.estimate - 0.5) < 0.1

    def test_threshold_above_everything_gives_one(self):
        system = _line_system()
        result = run_subset_simulation(system, CFG, 1e9, seed=5)
        assert result.estimate == 1.0
        assert result.diagnostics.levels_completed == 1
        assert result.diagnostics.samples_used == 100

    def test_rare_event_descends_levels(self):
        system = _line_system(shift=4.0)
        result = run_subset_simulation(system, CFG, 0.5, seed=5)
        d = result.diagnostics
        assert d.levels_completed > 1
        assert d.samples_used == 100 * d.levels_completed
        assert len(result.table.rows) == 90 * (d.levels_completed - 1) + 100

    def test_stop_exactly_at_chain_count(self):
        # a kernel that plants exactly N_c responses at/below the failure
        # threshold on level 1 must stop there (boundary D == N_c)
        calls = {"level": 0}

        def sample_prior(gen, n):
            return np.linspace(10.0, 20.0, n).reshape(-1, 1)

        def evaluate(x):
            return x[:, 0]

        def conditional_chain(seed, seed_resp, threshold, length, gen):
            calls["level"] = max(calls["level"], 1)
            out = np.full((length, 1), seed[0] - 9.0)
            return out, out[:, 0]

        cfg = SubsetConfig(n_samples=100, level_probability=0.1, max_levels=5)
        system = RareEventSystem(sample_prior, evaluate, conditional_chain)
        result = run_subset_simulation(system, cfg, 2.0, seed=1)
        # level 1 responses: seeds 10 smallest (10.0..10.9) - 9 => 1.0..1.9, all <= 2
        assert result.diagnostics.conflict_count == 100
        assert result.diagnostics.levels_completed == 2

    def test_fixed_level_mode_runs_all_levels(self):
        system = _line_system()
        cfg = SubsetConfig(n_samples=100, level_probability=0.1, max_levels=4)
        result = run_subset_simulation(system, cfg, 1e9, seed=5, stop_on_rare_count=False)
        assert result.diagnostics.levels_completed == 4

    def test_deterministic_tables(self):
        system = _line_system(shift=3.0)
        r1 = run_subset_simulation(system, CFG, 0.5, seed=77)
        r2 = run_subset_simulation(system, CFG, 0.5, seed=77)
        assert r1.estimate == r2.estimate
        assert np.array_equal(r1.table.responses, r2.table.responses)
        assert np.array_equal(r1.table.probabilities, r2.table.probabilities)
        for a, b in zip(r1.table.rows, r2.table.rows):
            assert np.array_equal(a.sample, b.sample)

    def test_different_seeds_differ(self):
        system = _line_system(shift=3.0)
        r1 = run_subset_simulation(system, CFG, 0.5, seed=77)
        r2 = run_subset_simulation(system, CFG, 0.5, seed=78)
        assert not np.array_equal(r1.table.responses, r2.table.responses)

    def test_chain_threshold_violation_raises(self):
        def sample_prior(gen, n):
            return gen.standard_normal((n, 1))

        def evaluate(x):
            return np.abs(x[:, 0])

        def bad_chain(seed, seed_resp, threshold, length, gen):
            out = np.full((length, 1), threshold + 1.0)
            return out, out[:, 0] + threshold + 1.0

        system = RareEventSystem(sample_prior, evaluate, bad_chain)
        with pytest.raises(ValueError, match="violated"):
            run_subset_simulation(system, CFG, 1e-6, seed=3)

    def test_chain_length_violation_raises(self):
        def sample_prior(gen, n):
            return gen.standard_normal((n, 1))

        def evaluate(x):
            return np.abs(x[:, 0])

        def short_chain(seed, seed_resp, threshold, length, gen):
            out = np.full((length - 1, 1), seed[0])
            return out, np.abs(out[:, 0])

        system = RareEventSystem(sample_prior, evaluate, short_chain)
        with pytest.raises(ValueError, match="expected"):
            run_subset_simulation(system, CFG, 1e-6, seed=3)

    def test_level0_estimate_equals_direct_count(self):
        system = _line_system()
        result = run_subset_simulation(system, CFG, 0.6745, seed=12)
        d = result.diagnostics
        assert d.levels_completed == 1
        assert result.estimate == d.conflict_count / 100

    def test_stalled_threshold_logs_warning(self, caplog):
        def sample_prior(gen, n):
            return np.ones((n, 1))

        def evaluate(x):
            return x[:, 0]

        def frozen_chain(seed, seed_resp, threshold, length, gen):
            out = np.full((length, 1), seed[0])
            return out, out[:, 0]

        cfg = SubsetConfig(n_samples=100, level_probability=0.1, max_levels=4)
        system = RareEventSystem(sample_prior, evaluate, frozen_chain)
        with caplog.at_level("WARNING", logger="subsim.engine"):
            run_subset_simulation(system, cfg, 0.0, seed=1)
        assert any("did not decrease" in m for m in caplog.messages)
