import numpy as np
import pytest
from scipy import stats as scipy_stats

from wedesign import studies
from wedesign.config import HypothesisTestConfig
from wedesign.engine import run_trial
from wedesign.montecarlo import simulate_replications
from wedesign.testing import (
    calibrate_cutoff,
    cutoff_from_stats,
    evaluate_hypotheses,
    fisher_exact_pvalue,
    kappa_sweep,
    min_scaled_pvalues,
    rejections,
)


class TestFisherExact:
    def test_no_evidence_table(self):
        assert fisher_exact_pvalue(0, 10, 0, 10) == 1.0

    def test_extreme_table_point_mass(self):
        # all successes in the first group: p = 1 / C(20, 10)
        assert fisher_exact_pvalue(10, 0, 0, 10) == pytest.approx(5.412544112234515e-06, rel=1e-12)

    def test_monotone_in_first_cell(self):
        pvals = [fisher_exact_pvalue(a, 10 - a, 5, 5) for a in range(11)]
        assert pvals == sorted(pvals, reverse=True)

    def test_matches_scipy_small_tables(self):
        rng = np.random.default_rng(17)
        for _ in range(60):
            a, b, c, d = (int(x) for x in rng.integers(0, 12, size=4))
            ours = fisher_exact_pvalue(a, b, c, d)
            _, ref = scipy_stats.fisher_exact([[a, b], [c, d]], alternative="greater")
            assert ours == pytest.approx(ref, rel=1e-9, abs=1e-12)

    def test_matches_hypergeom_survival_large_table(self):
        a, b, c, d = 130, 290, 95, 325
        ours = fisher_exact_pvalue(a, b, c, d)
        ref = scipy_stats.hypergeom.sf(a - 1, a + b + c + d, a + c, a + b)
        assert ours == pytest.approx(ref, rel=1e-10)

    def test_rejects_negative_entries(self):
        with pytest.raises(ValueError):
            fisher_exact_pvalue(-1, 2, 3, 4)


class TestCutoffCalibration:
    def test_zero_target_never_rejects(self):
        stats = np.array([0.1, 0.2, 0.3])
        assert cutoff_from_stats(stats, 0.0) == 0.0

    def test_empirical_rate_at_or_below_target(self):
        rng = np.random.default_rng(23)
        stats = rng.uniform(0, 1, size=5000)
        cutoff = cutoff_from_stats(stats, 0.05)
        rate = (stats <= cutoff).mean()
        assert rate <= 0.05
        assert rate > 0.04  # dense continuous stats land close to the target

    def test_handles_heavy_ties(self):
        stats = np.array([0.5] * 99 + [0.01])
        cutoff = cutoff_from_stats(stats, 0.05)
        assert (stats <= cutoff).mean() <= 0.05

    def test_calibrated_type_i_error_fixed_randomization(self):
        config = studies.trial2_config(rule="fixed", seed=31)
        cutoff = calibrate_cutoff(config, studies.TRIAL2_NULL, 4000)
        reps = simulate_replications(config, studies.TRIAL2_NULL, 4000)
        rate = (min_scaled_pvalues(reps, config) <= cutoff).mean()
        assert rate == pytest.approx(0.05, abs=0.01)


class TestEvaluateHypotheses:
    def test_identical_arms_not_rejected(self):
        config = studies.trial2_config(seed=41)
        record = run_trial(config, studies.TRIAL2_NULL, (41, 0))
        test = HypothesisTestConfig(control_index=0, cutoff=1e-9)
        assert evaluate_hypotheses(record, test) is False

    def test_requires_calibrated_cutoff(self):
        config = studies.trial2_config(seed=41)
        record = run_trial(config, studies.TRIAL2_NULL, (41, 0))
        with pytest.raises(ValueError):
            evaluate_hypotheses(record, HypothesisTestConfig(control_index=0))

    def test_consistent_with_batch_rejections(self):
        config = studies.trial2_config(rule="fixed", seed=43)
        cutoff = 0.08
        reps = simulate_replications(config, studies.TRIAL2_ALTERNATIVE, 100)
        batch = rejections(
            reps, config.with_updates(testing=HypothesisTestConfig(control_index=0, cutoff=cutoff))
        )
        test = HypothesisTestConfig(control_index=0, cutoff=cutoff)
        for rep in range(100):
            record = run_trial(config, studies.TRIAL2_ALTERNATIVE, (config.seed, rep))
            assert evaluate_hypotheses(record, test) == bool(batch[rep])


class TestKappaSweep:
    def test_single_point_equals_run_monte_carlo(self):
        from wedesign.montecarlo import run_monte_carlo

        config = studies.trial2_config(rule="rule2", kappa=0.6, seed=51)
        points = kappa_sweep(
            config, studies.TRIAL2_ALTERNATIVE, [0.6], 400, null_scenario=studies.TRIAL2_NULL
        )
        assert len(points) == 1
        direct = run_monte_carlo(
            config.with_updates(kappa=0.6), studies.TRIAL2_ALTERNATIVE, 400
        )
        assert points[0].ens == pytest.approx(direct.ens, rel=1e-12)

    def test_rejects_grid_outside_supported_range(self):
        config = studies.trial2_config(seed=51)
        with pytest.raises(ValueError):
            kappa_sweep(config, studies.TRIAL2_ALTERNATIVE, [0.4], 100)

    def test_power_trend_nondecreasing_in_kappa(self):
        # greater kappa spreads allocation, buying power at the cost of successes
        config = studies.trial1_config(rule="rule2", kappa=0.55, seed=53)
        points = kappa_sweep(
            config, studies.TRIAL1_ALTERNATIVE, [0.55, 0.65, 0.75], 4000,
            null_scenario=studies.TRIAL1_NULL,
        )
        powers = [p.power for p in points]
        se = 2 * (0.25 / 4000) ** 0.5
        for lo, hi in zip(powers, powers[1:]):
            assert hi >= lo - 2 * se
        ens = [p.ens for p in points]
        assert ens[-1] < ens[0]  # more exploration, fewer successes
