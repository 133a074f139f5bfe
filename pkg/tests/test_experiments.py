import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from glshrink.errors import TableError, ValidationError
from glshrink.experiments import (
    ExperimentConfig,
    ShrinkageTable,
    _KappaQuantileTable,
    abos_experiment,
    build_asymptotic_sequence,
    contraction_experiment,
    eb_risk_experiment,
    estimation_risk_experiment,
    minimax_risk,
    posterior_spread_experiment,
    risk_ceiling_form,
    simulate_nearly_black,
    spread_lower_form,
    tau_from_rule,
)
from glshrink.posterior import PosteriorQuery, posterior_mean, posterior_variance


class TestClosedForms:
    def test_minimax_value(self):
        assert minimax_risk(1000, 10) == pytest.approx(20.0 * math.log(100.0), rel=1e-14)
        assert minimax_risk(1000, 10) == pytest.approx(92.103, abs=1e-3)

    def test_minimax_doubling(self):
        q = 17
        assert minimax_risk(4000, q) - minimax_risk(2000, q) == pytest.approx(
            2.0 * q * math.log(2.0), rel=1e-12
        )

    def test_minimax_small_gap_positive(self):
        n = 50
        assert minimax_risk(n, n - 1) > 0.0

    def test_minimax_domain(self):
        with pytest.raises(ValidationError):
            minimax_risk(100, 100)
        with pytest.raises(ValidationError):
            minimax_risk(100, 0)

    def test_spread_lower_reference(self):
        # n = 1e4, q = 1e2, tau = q/n
        value = spread_lower_form(10_000, 100, 0.01)
        assert value == pytest.approx(9900 * 0.01 * math.sqrt(math.log(100.0)), rel=1e-14)
        assert value == pytest.approx(212.5, abs=0.5)

    def test_risk_ceiling_components(self):
        n, q, tau, a = 1000, 10, 0.01, 0.5
        log_term = 2 * a * math.log(1 / tau)
        expected = q * log_term + (n - q) * tau ** (2 * a) * math.sqrt(log_term)
        assert risk_ceiling_form(n, q, tau, a) == pytest.approx(expected, rel=1e-14)

    @given(n=st.integers(10, 10_000))
    @settings(max_examples=30, deadline=None)
    def test_tau_rules_in_range(self, n):
        q = max(1, int(n**0.4))
        if q >= n:
            return
        assert 0.0 < tau_from_rule("sqrtlog", n, q) < 1.0
        assert 0.0 < tau_from_rule("power:1.0", n, q) < 1.0

    def test_tau_rule_names(self):
        with pytest.raises(ValidationError):
            tau_from_rule("cube", 100, 5)


class TestScenario:
    def test_membership(self):
        sc = simulate_nearly_black(500, 12, seed=3)
        assert int(np.count_nonzero(sc.theta0)) == 12
        assert sc.theta0.size == 500

    def test_default_magnitude(self):
        sc = simulate_nearly_black(1000, 10, seed=3)
        assert sc.signal_magnitude == pytest.approx(math.sqrt(2 * math.log(100.0)))
        assert sc.signal_magnitude == pytest.approx(3.035, abs=1e-3)

    def test_zero_signals_rejected(self):
        with pytest.raises(ValidationError):
            simulate_nearly_black(100, 0)

    def test_deterministic_given_seed(self):
        a = simulate_nearly_black(300, 9, seed=11)
        b = simulate_nearly_black(300, 9, seed=11)
        np.testing.assert_array_equal(a.theta0, b.theta0)


@pytest.fixture(scope="module")
def table(horseshoe):
    return ShrinkageTable.build(horseshoe, 0.02, points=768, validate=True)


@pytest.fixture(scope="module")
def small_cfg(horseshoe):
    return ExperimentConfig(
        family=horseshoe, n_grid=(600, 1200), replications=3,
        posterior_draws=1000, root_seed=424242, table_points=512,
    )


class TestShrinkageTable:
    def test_matches_direct_quadrature(self, table, horseshoe):
        rng = np.random.default_rng(31)
        for x in rng.uniform(0.0, 39.0, 12):
            query = PosteriorQuery(x=float(x), tau=0.02, family=horseshoe)
            exact_mean = posterior_mean(query)
            assert float(table.posterior_mean(x)) == pytest.approx(exact_mean, abs=2e-5)
            exact_var = posterior_variance(query)
            assert float(table.variance(x)) == pytest.approx(exact_var, rel=2e-4, abs=2e-5)

    def test_fallback_beyond_range(self, table, horseshoe):
        x = 45.0
        query = PosteriorQuery(x=x, tau=0.02, family=horseshoe)
        assert float(table.posterior_mean(x)) == pytest.approx(posterior_mean(query), rel=1e-9)

    def test_odd_mean(self, table):
        xs = np.array([-3.0, 3.0])
        means = table.posterior_mean(xs)
        assert means[0] == pytest.approx(-means[1], rel=1e-12)

    def test_validation_failure_raises(self, horseshoe):
        with pytest.raises(TableError):
            ShrinkageTable.build(horseshoe, 0.02, points=12, validate=True)


class TestQuantileSampler:
    def test_draw_moments(self, horseshoe):
        tau = 0.05
        sampler = _KappaQuantileTable(horseshoe, tau)
        rng = np.random.default_rng(8)
        xs = np.array([0.5, 2.0, 4.0])
        kappas = sampler.draw(xs, rng.random((3, 200_000)))
        for i, x in enumerate(xs):
            query = PosteriorQuery(x=float(x), tau=tau, family=horseshoe)
            from glshrink.posterior import kappa_moment

            exact = kappa_moment(query, 1)
            se = kappas[i].std(ddof=1) / math.sqrt(kappas.shape[1])
            assert abs(kappas[i].mean() - exact) < 5.0 * se + 2e-4


class TestAsymptoticSequence:
    def test_residual_and_trends(self):
        models = build_asymptotic_sequence(1.0, 0.6, [10**k for k in range(2, 7)])
        ps = [m.p for m in models]
        us = [m.psi_sq for m in models]
        assert all(b < a for a, b in zip(ps, ps[1:]))
        assert all(b > a for a, b in zip(us, us[1:]))
        for m in models:
            assert abs(math.log(m.v) / m.u - 1.0) < 1e-10

    def test_large_c_reference(self):
        model = build_asymptotic_sequence(1.0, 0.6, [10**6])[0]
        assert model.p == pytest.approx(10 ** (-3.6))
        assert abs(math.log(model.v) / model.u - 1.0) < 1e-10

    def test_balanced_p_has_no_root(self):
        # p = 1/2 (beta -> 0 limit) cannot satisfy the scheme; emulate with
        # n chosen so that p is too large for the target c_const
        with pytest.raises(ValidationError):
            build_asymptotic_sequence(1.0, 0.1, [2])

    def test_grid_must_increase(self):
        with pytest.raises(ValidationError):
            build_asymptotic_sequence(1.0, 0.6, [100, 100])


class TestAbosExperiment:
    def test_ratio_trend_alpha_one(self, horseshoe):
        rows, summary = abos_experiment(
            horseshoe, 1.0, 0.6, [100, 10_000, 1_000_000], alpha=1.0
        )
        ratios = [r["ratio"] for r in rows]
        assert summary["monotone_decreasing"]
        assert all(r > 1.0 for r in ratios)
        assert rows[-1]["limit_target"] == pytest.approx(1.0)

    def test_alpha_below_one_diverges(self, horseshoe):
        _, summary = abos_experiment(
            horseshoe, 1.0, 0.6, [100, 10_000, 1_000_000], alpha=0.5
        )
        assert summary["monotone_increasing"]
        assert math.isinf(summary["limit_target"])

    def test_rows_carry_repro_fields(self, horseshoe):
        rows, _ = abos_experiment(horseshoe, 1.0, 0.6, [100, 1000], alpha=1.0)
        for row in rows:
            for key in ("n", "p", "tau", "family", "threshold_induced", "ratio"):
                assert key in row


class TestSweepExperiments:
    def test_estimation_rows(self, small_cfg):
        rows, summary = estimation_risk_experiment(small_cfg)
        assert len(rows) == 2
        for row in rows:
            assert row["mse"] > 0.0
            assert 0.0 < row["ratio"] < 5.0
            assert row["root_seed"] == 424242

    def test_estimation_minimal_sparsity(self, horseshoe):
        cfg = ExperimentConfig(
            family=horseshoe, n_grid=(500,), q_rule="fixed:1", replications=2,
            root_seed=3, table_points=512,
        )
        rows, _ = estimation_risk_experiment(cfg)
        assert math.isfinite(rows[0]["mse"]) and rows[0]["mse"] > 0.0

    def test_estimation_ceiling_not_far_below_mse(self, small_cfg):
        # the closed risk ceiling carries an unspecified constant; with
        # generous slack it should not undershoot the observed MSE
        rows, _ = estimation_risk_experiment(small_cfg)
        for row in rows:
            assert row["risk_ceiling"] >= 0.5 * row["mse"]

    def test_estimation_deterministic(self, small_cfg):
        rows1, _ = estimation_risk_experiment(small_cfg)
        rows2, _ = estimation_risk_experiment(small_cfg)
        assert rows1 == rows2

    def test_estimation_worker_invariance(self, horseshoe, small_cfg):
        parallel = ExperimentConfig(
            family=horseshoe, n_grid=small_cfg.n_grid, replications=3,
            posterior_draws=1000, root_seed=424242, table_points=512, workers=2,
        )
        assert estimation_risk_experiment(small_cfg)[0] == estimation_risk_experiment(parallel)[0]

    def test_spread_rows(self, small_cfg):
        rows, summary = posterior_spread_experiment(small_cfg)
        for row in rows:
            assert row["total_spread"] > 0.0
            assert row["lower_form"] > 0.0
            assert row["upper_form"] > row["lower_form"]
            # with the sqrt-log tau rule the spread stays on the scale of
            # the minimax level
            assert 0.1 < row["spread_over_minimax"] < 2.0

    def test_spread_requires_horseshoe_exponent(self):
        from glshrink.families import make_family

        heavy = make_family("tpbn", a_shape=0.7, b_shape=1.0)
        cfg = ExperimentConfig(family=heavy, n_grid=(500,), replications=2)
        with pytest.raises(ValidationError):
            posterior_spread_experiment(cfg)

    def test_contraction_small(self, horseshoe):
        cfg = ExperimentConfig(
            family=horseshoe, n_grid=(600,), replications=2,
            posterior_draws=1000, root_seed=99, table_points=512,
        )
        rows, _ = contraction_experiment(cfg)
        row = rows[0]
        assert 0.0 <= row["mass_outside_true"] <= 1.0
        assert 0.0 <= row["mass_outside_mean"] <= 1.0
        assert row["radius_sq"] == pytest.approx(
            math.log(600) * row["q"] * math.log(600 / row["q"])
        )

    def test_contraction_huge_radius_empty(self, horseshoe):
        cfg = ExperimentConfig(
            family=horseshoe, n_grid=(600,), replications=1,
            posterior_draws=1000, root_seed=99, m_n_rule="n", table_points=512,
        )
        rows, _ = contraction_experiment(cfg)
        assert rows[0]["mass_outside_true"] == 0.0
        assert rows[0]["mass_outside_mean"] == 0.0

    def test_contraction_needs_draws(self, horseshoe):
        cfg = ExperimentConfig(
            family=horseshoe, n_grid=(600,), replications=1, posterior_draws=100,
        )
        with pytest.raises(ValidationError):
            contraction_experiment(cfg)

    def test_estimation_requires_estimation_exponent(self):
        from glshrink.families import make_family

        light = make_family("tpbn", a_shape=0.3, b_shape=1.0)
        cfg = ExperimentConfig(family=light, n_grid=(500,), replications=2)
        with pytest.raises(ValidationError):
            estimation_risk_experiment(cfg)


class TestEmpiricalBayesRisk:
    def test_ratio_columns(self, horseshoe):
        rows, summary = eb_risk_experiment(
            horseshoe, 1.0, 0.6, [500, 5000], datasets=30, root_seed=5
        )
        assert len(rows) == 2
        for row in rows:
            assert row["ratio"] > 0.9
            assert row["distinct_tau_hat"] >= 1

    def test_deterministic(self, horseshoe):
        a = eb_risk_experiment(horseshoe, 1.0, 0.6, [500], datasets=10, root_seed=5)[0]
        b = eb_risk_experiment(horseshoe, 1.0, 0.6, [500], datasets=10, root_seed=5)[0]
        assert a == b
