import numpy as np
import pytest

from wedesign import studies
from wedesign.config import Scenario
from wedesign.montecarlo import (
    aggregate,
    benchmark_monte_carlo,
    run_monte_carlo,
    simulate_replications,
)


class TestDeterminism:
    def test_bit_identical_across_parallelism(self, monkeypatch):
        # shrink the block budget so the run genuinely splits across workers
        import wedesign.montecarlo as mc

        monkeypatch.setattr(mc, "_BLOCK_DOUBLES", 4000)
        config = studies.toxicity_trial_config(seed=61)
        scenario = studies.TOXICITY_SCENARIOS[1]
        results = [
            simulate_replications(config, scenario, 600, parallelism=p) for p in (1, 4, 16)
        ]
        for other in results[1:]:
            assert np.array_equal(results[0].counts, other.counts)
            assert np.array_equal(results[0].recommendation, other.recommendation)
            assert np.array_equal(results[0].terminated, other.terminated)

    def test_block_size_does_not_change_results(self, monkeypatch):
        import wedesign.montecarlo as mc

        config = studies.toxicity_trial_config(seed=61)
        scenario = studies.TOXICITY_SCENARIOS[1]
        whole = simulate_replications(config, scenario, 300)
        monkeypatch.setattr(mc, "_BLOCK_DOUBLES", 2000)
        split = simulate_replications(config, scenario, 300)
        assert np.array_equal(whole.counts, split.counts)
        assert np.array_equal(whole.recommendation, split.recommendation)

    def test_identical_runs_identical_characteristics(self):
        config = studies.trial2_config(rule="rule1", seed=62)
        a = run_monte_carlo(config, studies.TRIAL2_ALTERNATIVE, 500)
        b = run_monte_carlo(config, studies.TRIAL2_ALTERNATIVE, 500)
        assert a == b

    def test_seed_changes_results(self):
        scenario = studies.TRIAL2_ALTERNATIVE
        a = run_monte_carlo(studies.trial2_config(seed=1), scenario, 300)
        b = run_monte_carlo(studies.trial2_config(seed=2), scenario, 300)
        assert a != b


class TestAggregation:
    def test_conservation(self):
        config = studies.toxicity_trial_config(seed=63)
        reps = simulate_replications(config, studies.TOXICITY_SCENARIOS[5], 400)
        assert np.array_equal(reps.counts.sum(axis=(1, 2)), reps.treated)
        oc = aggregate(reps, config, studies.TOXICITY_SCENARIOS[5])
        assert oc.ens <= oc.mean_n
        assert oc.mean_n <= config.max_patients

    def test_fixed_randomization_null_statistics(self):
        config = studies.trial2_config(rule="fixed", seed=64)
        oc = run_monte_carlo(config, studies.TRIAL2_NULL, 4000)
        # ENS ~ N * 0.3, p* ~ 1/4
        assert oc.ens == pytest.approx(24.0, abs=0.3)
        assert oc.p_star == pytest.approx(0.25, abs=0.01)
        assert oc.termination_rate == 0.0

    def test_no_safe_arm_scenario_counts_termination_as_correct(self):
        config = studies.toxicity_trial_config(seed=65)
        oc = run_monte_carlo(config, studies.TOXICITY_SCENARIOS[5], 400)
        assert oc.pcs == pytest.approx(oc.termination_rate, abs=1e-12)

    def test_selection_proportions_sum_with_termination(self):
        config = studies.toxicity_trial_config(seed=66)
        oc = run_monte_carlo(config, studies.TOXICITY_SCENARIOS[4], 500)
        total = sum(oc.selection_proportions) + oc.termination_rate
        assert total == pytest.approx(1.0, abs=1e-9)

    def test_as_dict_has_spec_columns(self):
        config = studies.trial2_config(seed=67)
        oc = run_monte_carlo(config, studies.TRIAL2_NULL, 50)
        d = oc.as_dict()
        for key in ("pcs", "ens", "p_star", "tox", "term", "mean_n", "power",
                    "pcs_se", "ens_se", "p_star_se", "tox_se", "term_se", "mean_n_se"):
            assert key in d


class TestConsistencyDirection:
    def test_pcs_approaches_one_when_target_exact_and_others_far(self):
        config = studies.toxicity_trial_config(
            seed=68, safety=None, prior_modes=(0.25, 0.5), n_patients=400
        )
        scenario = Scenario("easy", ((0.25, 0.75), (0.9, 0.1)), 0)
        oc = run_monte_carlo(config, scenario, 300)
        assert oc.pcs > 0.95


class TestBenchmarkMonteCarlo:
    def test_parallel_invariance(self):
        scenario = studies.TOXICITY_SCENARIOS[0]
        a = benchmark_monte_carlo(scenario, (0.25, 0.75), 20, 500, seed=69, parallelism=1)
        b = benchmark_monte_carlo(scenario, (0.25, 0.75), 20, 500, seed=69, parallelism=4)
        assert np.array_equal(a, b)


class TestBoundAndDominanceProperties:
    def test_pcs_lower_bound_below_monte_carlo(self):
        """The union-bound selection probability never exceeds the simulated one.

        Binary three-arm scenario under equal randomization with ~300 patients
        per arm, so the Gaussian limit is well inside its regime.
        """
        from wedesign.criterion import criterion_gradient_binary, pcs_lower_bound
        from wedesign.studies import toxicity_trial_config, toxicity_scenario

        tox = (0.25, 0.35, 0.45)
        scenario = toxicity_scenario("three", tox, 0)
        config = toxicity_trial_config(
            seed=81, rule="fixed", safety=None, prior_modes=(0.25, 0.35, 0.45), n_patients=900
        )
        reps = simulate_replications(config, scenario, 4000)
        oc = aggregate(reps, config, scenario)
        mean_n = reps.counts.sum(axis=2).mean(axis=0)
        assert mean_n.min() >= 200
        gamma = 0.25
        deltas = [0.5 * (a - gamma) ** 2 / (a * (1 - a)) for a in tox]
        variances = [
            criterion_gradient_binary(a, gamma) ** 2 * a * (1 - a) / n
            for a, n in zip(tox, mean_n)
        ]
        bound = pcs_lower_bound(deltas, variances, 0)
        assert bound <= oc.pcs + 2 * oc.pcs_se

    def test_benchmark_dominates_adaptive_design(self):
        """Complete information selects at least as well on every targeted scenario."""
        from wedesign.montecarlo import benchmark_selection_proportions
        from wedesign.studies import TOXICITY_SCENARIOS, toxicity_trial_config

        config = toxicity_trial_config(seed=82)
        for scenario in TOXICITY_SCENARIOS:
            if scenario.target_index is None:
                continue
            oc = run_monte_carlo(config, scenario, 10_000)
            bench = benchmark_selection_proportions(
                scenario, config.gamma, config.max_patients, 10_000, seed=82
            )
            assert bench[scenario.target_index] >= oc.pcs - 2 * oc.pcs_se, scenario.name
