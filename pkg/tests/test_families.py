import math

import numpy as np
import pytest

from glshrink.errors import UnknownFamilyError, ValidationError
from glshrink.families import (
    check_tail_regularity,
    custom_family,
    default_probe_grid,
    eval_L,
    make_family,
    registered_families,
)
from glshrink.quadrature import unit_interval_integrate


def prior_mass(family, rel_tol=1e-12):
    """int_0^inf K t^(-a-1) L(t) dt via the substitution t = (1-v)/v."""
    a = family.a

    def comps(v, omv, log_v, log_omv):
        return (a - 1.0) * log_v + (-a - 1.0) * log_omv + family.log_L(log_omv - log_v)

    return family.K * float(unit_interval_integrate(comps, rel_tol=rel_tol)[0])


class TestRegistry:
    def test_known_names(self):
        assert "horseshoe" in registered_families()
        assert "gdp" in registered_families()

    def test_unknown_name_raises(self):
        with pytest.raises(UnknownFamilyError):
            make_family("laplace-mixture")

    def test_bad_shape_raises(self):
        with pytest.raises(ValidationError):
            make_family("tpbn", a_shape=-0.5, b_shape=1.0)
        with pytest.raises(ValidationError):
            make_family("gdp", alpha=0.0)
        with pytest.raises(ValidationError):
            make_family("horseshoe", spurious=1.0)

    def test_horseshoe_triple(self, horseshoe):
        assert horseshoe.a == 0.5
        assert horseshoe.K == pytest.approx(1.0 / math.pi, rel=1e-15)
        assert eval_L(horseshoe, 1.0) == pytest.approx(0.5, rel=1e-15)

    def test_gdp_exponent_is_half_shape(self):
        assert make_family("gdp", alpha=1.0).a == pytest.approx(0.5)
        assert make_family("gdp", alpha=1.4).a == pytest.approx(0.7)

    def test_tpbn_exponent_is_first_shape(self):
        fam = make_family("tpbn", a_shape=0.8, b_shape=2.0)
        assert fam.a == pytest.approx(0.8)

    def test_horseshoe_equals_tpbn_half_half(self, horseshoe):
        twin = make_family("tpbn", a_shape=0.5, b_shape=0.5)
        assert twin.a == horseshoe.a
        assert twin.K == pytest.approx(horseshoe.K, rel=1e-12)
        t = np.geomspace(1e-8, 1e8, 50)
        np.testing.assert_allclose(twin.L(t), horseshoe.L(t), rtol=1e-12)

    def test_half_t_nu1_is_horseshoe(self, horseshoe):
        twin = make_family("half-t", nu=1.0)
        assert twin.K == pytest.approx(horseshoe.K, rel=1e-12)
        t = np.geomspace(1e-6, 1e6, 30)
        np.testing.assert_allclose(twin.L(t), horseshoe.L(t), rtol=1e-12)


class TestNormalization:
    def test_density_integrates_to_one(self, roster_family):
        assert prior_mass(roster_family) == pytest.approx(1.0, rel=1e-8)


class TestEvalL:
    def test_rejects_nonpositive(self, horseshoe):
        with pytest.raises(ValidationError):
            eval_L(horseshoe, 0.0)
        with pytest.raises(ValidationError):
            eval_L(horseshoe, -1.0)

    def test_horseshoe_small_t_below_t(self, horseshoe):
        t = np.geomspace(1e-8, 1e-1, 20)
        vals = eval_L(horseshoe, t)
        assert np.all(vals <= t)
        assert np.all(np.diff(vals) > 0)

    def test_tail_limit_one(self, horseshoe):
        vals = eval_L(horseshoe, 10.0 ** np.arange(1, 13))
        assert vals[-1] == pytest.approx(1.0, abs=1e-11)
        assert np.all(np.diff(vals) > 0)

    def test_value_at_onset_meets_floor(self, roster_family):
        assert eval_L(roster_family, roster_family.t0) >= roster_family.c0 * (1 - 1e-12)

    def test_log_form_consistent(self, roster_family):
        # compare where the plain form does not underflow; beyond that the
        # log form must keep heading down, which is exactly why it exists
        t = np.geomspace(1e-5, 1e10, 40)
        with np.errstate(divide="ignore"):
            log_direct = np.log(roster_family.L(t))
        log_form = np.asarray(roster_family.log_L(np.log(t)))
        ok = log_direct > -700.0
        np.testing.assert_allclose(log_form[ok], log_direct[ok], rtol=1e-9, atol=1e-12)
        assert np.all(log_form[~ok] <= -700.0)


class TestTailRegularity:
    def test_registered_families_pass(self, roster_family):
        report = check_tail_regularity(roster_family)
        assert report.passed, report.as_dict()
        assert report.tail_limit_estimate == pytest.approx(
            roster_family.tail_limit, rel=1e-3
        )

    def test_slow_variation_ratio(self, roster_family):
        report = check_tail_regularity(roster_family)
        assert report.slow_variation_dev < 1e-3

    def test_monotone_flag_checked(self, roster_family):
        assert check_tail_regularity(roster_family).nondecreasing_ok is True

    def test_unbounded_L_fails_boundedness(self):
        fam = custom_family("linear-growth", a=0.5, K=1.0, L=lambda t: np.asarray(t, float))
        report = check_tail_regularity(fam)
        assert not report.bounded_ok
        assert not report.passed

    def test_vanishing_tail_fails_floor(self):
        fam = custom_family(
            "exp-decay", a=0.5, K=1.0,
            L=lambda t: np.exp(-np.asarray(t, float)),
        )
        report = check_tail_regularity(fam)
        assert not report.tail_lower_ok
        assert not report.passed

    def test_grid_must_span_eight_decades(self, horseshoe):
        with pytest.raises(ValidationError):
            check_tail_regularity(horseshoe, grid=np.geomspace(1.0, 1e4, 50))

    def test_default_grid_shape(self):
        grid = default_probe_grid()
        assert grid.size == 400
        assert grid[0] == pytest.approx(1e-6)
        assert grid[-1] == pytest.approx(1e12)
