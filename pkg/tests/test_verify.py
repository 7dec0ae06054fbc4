"""Tests for the level-set identities and inequalities on 1/|x|."""
import numpy as np
import pytest

from src.coefficients import builtin_family
from src.errors import PreconditionError
from src.grid import build_grid, sample_function
from src.levels import LevelAnalysis, build_family
from src.models.reports import Verdict
from src.verify import (
    CoareaWeight,
    CutoffFunction,
    chebyshev_measure_check,
    coarea_check,
    cutoff_identity_check,
    drift_flux_check,
    energy_bound_check,
    flux_balance_check,
    flux_is_conserved,
    geometric_bound_check,
    gradient_flux_bound,
    key_lemma_check,
    mean_value_tau,
    nesting_check,
    null_set_shadow,
    sequence_grows,
    smoothstep,
    topology_check,
)

LN2 = np.log(2.0)


@pytest.fixture(scope="module")
def optimal():
    """The p = 2 drift family that 1/|x| solves."""
    return builtin_family("remark_optimal", {"p": 2.0})


@pytest.fixture(scope="module")
def harmonic_analysis(spec):
    """Level analysis of the harmonic profile ln(32/|x|) / ln 32."""
    return LevelAnalysis(sample_function(spec, lambda x, y: np.log(32.0 / np.hypot(x, y)) / np.log(32.0)))


class TestSequences:
    """Tests for the growth and conservation helpers."""

    def test_growing_sequence(self):
        """Values rising as t falls count as growth."""
        assert sequence_grows([0.1, 0.2, 0.4], [3.0, 2.0, 1.0])

    def test_flat_sequence(self):
        """A constant sequence is bounded."""
        assert not sequence_grows([0.1, 0.2, 0.4], [1.0, 1.0, 1.0])

    def test_single_level(self):
        """One level cannot show growth."""
        assert not sequence_grows([0.1], [1.0])

    def test_flux_conservation(self):
        """Fluxes within 2% count as conserved."""
        assert flux_is_conserved([1.0, 1.01, 0.995])
        assert not flux_is_conserved([1.0, 1.5])
        assert not flux_is_conserved([1.0])
        assert not flux_is_conserved([-1.0, -1.0])


class TestGradientFlux:
    """Tests for the constant C_*."""

    def test_constant_is_two_pi(self, exact_analysis):
        """The flux through |x| = 1/t is 2 pi t, so C_* = 2 pi."""
        levels = [float(t) for t in np.geomspace(0.1, 0.45, 10)]
        record = gradient_flux_bound(exact_analysis, levels)
        assert record.constant == pytest.approx(2.0 * np.pi, rel=2e-2)
        assert record.verdict == Verdict.PASS
        assert not record.details["truncation_dominated"]

    @pytest.mark.parametrize("scale", [2.0, 3.0, 0.25])
    def test_constant_is_scale_invariant(self, exact_field, scale):
        """Multiplying u by s scales both the flux and t by s, leaving C_* unchanged."""
        levels = [float(t) for t in np.geomspace(0.1, 0.45, 10)]
        base = gradient_flux_bound(LevelAnalysis(exact_field), levels)
        scaled = gradient_flux_bound(LevelAnalysis(exact_field.scaled(scale)), [scale * t for t in levels])
        assert scaled.constant == pytest.approx(base.constant, rel=1e-9)
        assert scaled.verdict == base.verdict

    def test_too_few_levels(self, exact_analysis):
        """Fewer than ten levels is inconclusive."""
        record = gradient_flux_bound(exact_analysis, [0.2, 0.3, 0.4])
        assert record.verdict == Verdict.INCONCLUSIVE
        assert "tilde-regular levels" in record.details["reason"]


class TestCoarea:
    """Tests for the coarea identity on E_0.4 = {2.5 < |x| < 5}."""

    def test_unit_weight(self, exact_analysis):
        """Both sides equal 2 pi ln 2."""
        record = coarea_check(exact_analysis, 0.4, CoareaWeight.ONE)
        assert record.lhs == pytest.approx(2.0 * np.pi * LN2, rel=3e-2)
        assert record.rhs == pytest.approx(2.0 * np.pi * LN2, rel=3e-2)
        assert record.constant < 5e-2

    def test_gradient_weight(self, exact_analysis):
        """With f = |grad u| both sides equal 0.12 pi."""
        record = coarea_check(exact_analysis, 0.4, "grad")
        assert record.inputs["f"] == "grad"
        assert record.lhs == pytest.approx(0.12 * np.pi, rel=3e-2)
        assert record.rhs == pytest.approx(0.12 * np.pi, rel=3e-2)

    def test_custom_weight(self, exact_analysis):
        """With f = |x| both sides equal 5 pi."""
        record = coarea_check(exact_analysis, 0.4, lambda x, y: np.hypot(x, y))
        assert record.inputs["f"] == "custom"
        assert record.lhs == pytest.approx(5.0 * np.pi, rel=3e-2)
        assert record.rhs == pytest.approx(5.0 * np.pi, rel=3e-2)

    def test_null_set_shadow(self, exact_analysis):
        """|E_t| matches the integral of 1/|grad u| over the level curves."""
        record = null_set_shadow(exact_analysis, 0.4)
        area = np.pi * (25.0 - 6.25)
        assert record.lhs == pytest.approx(area, rel=3e-2)
        assert record.rhs == pytest.approx(area, rel=3e-2)
        assert abs(record.constant) < 5e-2

    def test_not_tilde_regular(self, exact_analysis):
        """A level whose half has no curve is skipped."""
        assert coarea_check(exact_analysis, 2.0).verdict == Verdict.INCONCLUSIVE


class TestFluxConsequences:
    """Tests for the energy, measure and mean-value bounds."""

    def test_energy_bound(self, exact_analysis):
        """0.12 pi sits well below 2 pi t^2."""
        record = energy_bound_check(exact_analysis, 0.4, 2.0 * np.pi)
        assert record.lhs == pytest.approx(0.12 * np.pi, rel=3e-2)
        assert record.rhs == pytest.approx(2.0 * np.pi * 0.16)
        assert record.verdict == Verdict.PASS

    def test_energy_bound_fails_with_small_constant(self, exact_analysis):
        """A constant far below the true one breaks the bound."""
        assert energy_bound_check(exact_analysis, 0.4, 0.1).verdict == Verdict.FAIL

    def test_chebyshev(self, exact_analysis):
        """|E_t| <= 4 t^-2 * 2 pi ln 2."""
        record = chebyshev_measure_check(exact_analysis, 0.4, 2.0)
        assert record.lhs == pytest.approx(np.pi * (25.0 - 6.25), rel=3e-2)
        assert record.rhs == pytest.approx(25.0 * 2.0 * np.pi * LN2, rel=3e-2)
        assert record.verdict == Verdict.PASS

    def test_mean_value_tau(self, exact_analysis):
        """The shortest level curve in [t/2, t] is gamma(t)."""
        tau, record = mean_value_tau(exact_analysis, 0.4, 2.0 * np.pi, 2.0)
        assert tau == pytest.approx(0.4)
        assert record.details["length"] == pytest.approx(5.0 * np.pi, rel=1e-2)
        assert record.verdict == Verdict.PASS

    def test_geometric_bound(self, exact_analysis):
        """2 g(0.4) = 5 is below the length of gamma(0.2)."""
        record = geometric_bound_check(exact_analysis.require_gamma(0.4), exact_analysis.require_gamma(0.2))
        assert record.lhs == pytest.approx(5.0, rel=1e-2)
        assert record.rhs == pytest.approx(10.0 * np.pi, rel=1e-2)
        assert record.verdict == Verdict.PASS

    def test_geometric_bound_needs_nesting(self, exact_analysis):
        """The outer curve cannot sit inside the inner one."""
        with pytest.raises(PreconditionError):
            geometric_bound_check(exact_analysis.require_gamma(0.2), exact_analysis.require_gamma(0.4))


class TestKeyLemma:
    """Tests for the empirical key lemma constant."""

    def test_constant(self, exact_analysis):
        """u |x| / (2 pi ln 2)^(1/2) is the same on every level."""
        summary, per_level = key_lemma_check(exact_analysis, [0.2, 0.3, 0.4], 2.0)
        expected = 1.0 / np.sqrt(2.0 * np.pi * LN2)
        assert len(per_level) == 3
        for record in per_level:
            assert record.constant == pytest.approx(expected, rel=3e-2)
            assert record.verdict == Verdict.PASS
            assert 0.0 <= record.details["deviation"] <= record.tolerance
        assert summary.check == "key_lemma_constant"
        assert summary.verdict == Verdict.PASS
        assert summary.constant == pytest.approx(expected, rel=3e-2)

    def test_level_far_below_aggregate_fails(self, harmonic_analysis):
        """The log profile's constant nearly doubles from t = 0.6 to t = 0.3."""
        summary, per_level = key_lemma_check(harmonic_analysis, [0.3, 0.6], 2.0)
        low, high = per_level
        assert summary.verdict == Verdict.FAIL
        assert summary.constant == low.constant
        assert low.verdict == Verdict.PASS
        assert high.verdict == Verdict.FAIL
        assert high.details["deviation"] == pytest.approx(1.0 - high.constant / low.constant)
        assert low.constant / high.constant == pytest.approx(1.85, rel=0.1)

    def test_truncation_dominated_levels_inconclusive(self, harmonic_analysis):
        """A growth that the truncation explains is not a failure."""
        summary, per_level = key_lemma_check(harmonic_analysis, [0.3, 0.6], 2.0, truncation_dominated=True)
        assert summary.verdict == Verdict.INCONCLUSIVE
        assert [r.verdict for r in per_level] == [Verdict.PASS, Verdict.INCONCLUSIVE]

    @pytest.mark.parametrize("scale", [2.0, 3.0, 0.25])
    def test_constant_is_scale_invariant(self, exact_field, scale):
        """u and (integral of u^p)^(1/p) both scale by s, so C does not move."""
        levels = [0.2, 0.3, 0.4]
        base, _ = key_lemma_check(LevelAnalysis(exact_field), levels, 2.0)
        scaled, _ = key_lemma_check(LevelAnalysis(exact_field.scaled(scale)), [scale * t for t in levels], 2.0)
        assert scaled.constant == pytest.approx(base.constant, rel=1e-9)

    def test_single_level_inconclusive(self, exact_analysis):
        """One level cannot bound the constant."""
        summary, _ = key_lemma_check(exact_analysis, [0.4], 2.0)
        assert summary.verdict == Verdict.INCONCLUSIVE
        assert summary.constant is not None


class TestCutoff:
    """Tests for the cut-off function."""

    def test_smoothstep_endpoints(self):
        """S(0) = 0, S(1/2) = 1/2 and S(1) = 1."""
        np.testing.assert_allclose(smoothstep(np.array([0.0, 0.5, 1.0])), [0.0, 0.5, 1.0])

    def test_profile(self):
        """eta is 1 inside rho and 0 beyond 2 rho."""
        eta = CutoffFunction(4.0)
        np.testing.assert_allclose(eta(np.array([1.0, 3.9, 8.0, 20.0]), np.zeros(4)), [1.0, 1.0, 0.0, 0.0])

    def test_gradient_matches_differences(self):
        """The analytic gradient agrees with central differences."""
        eta = CutoffFunction(4.0)
        h = 1e-6
        x, y = 5.0, 2.0
        numeric = [
            (eta(x + h, y) - eta(x - h, y)) / (2 * h),
            (eta(x, y + h) - eta(x, y - h)) / (2 * h),
        ]
        np.testing.assert_allclose(eta.gradient(x, y), numeric, rtol=1e-5)

    def test_bounds(self, spec):
        """Sampled suprema stay below the analytic ones."""
        eta = CutoffFunction(np.sqrt(80.0))
        measured = eta.measured_bounds(build_grid(spec))
        analytic = eta.analytic_bounds()
        assert measured["first"] <= analytic["first"] + 1e-9
        assert measured["second"] <= analytic["second"] + 1e-9
        assert measured["first"] == pytest.approx(15.0 / 8.0, rel=2e-2)

    def test_invalid_rho(self):
        """rho must be positive."""
        with pytest.raises(ValueError):
            CutoffFunction(0.0)


class TestCutoffIdentity:
    """Tests for the integrated equation against eta_rho."""

    def test_terms_balance(self, exact_analysis, optimal):
        """On gamma(0.2) the flux term is -0.4 pi and the drift term +0.4 pi."""
        record = cutoff_identity_check(exact_analysis, optimal, 0.2)
        assert record.inputs["rho"] == pytest.approx(np.sqrt(80.0), rel=1e-2)
        assert record.details["term1"] == pytest.approx(-0.4 * np.pi, rel=2e-2)
        assert record.details["term4"] == pytest.approx(0.4 * np.pi, rel=2e-2)
        assert record.details["term2"] == 0.0
        assert record.details["normal_agreement"] == pytest.approx(1.0)
        assert record.verdict == Verdict.PASS

    def test_rho_inside_gamma(self, exact_analysis, optimal):
        """rho below g(t) is a precondition failure."""
        with pytest.raises(PreconditionError):
            cutoff_identity_check(exact_analysis, optimal, 0.2, rho=3.0)

    def test_rho_past_truncation(self, exact_analysis, optimal):
        """2 rho beyond R_out is a precondition failure."""
        with pytest.raises(PreconditionError):
            cutoff_identity_check(exact_analysis, optimal, 0.2, rho=20.0)


class TestFluxChecks:
    """Tests for the divergence-theorem checks."""

    def test_drift_flux(self, exact_analysis, optimal):
        """div b = 0 leaves the obstacle term 2 pi on both sides."""
        record = drift_flux_check(exact_analysis, optimal, 0.4)
        assert record.lhs == pytest.approx(2.0 * np.pi, rel=2e-2)
        assert record.rhs == pytest.approx(2.0 * np.pi, rel=1e-6)
        assert record.verdict == Verdict.PASS

    def test_flux_balance_skipped_with_drift(self, exact_analysis, optimal):
        """A drift makes the balance inapplicable."""
        assert flux_balance_check(exact_analysis, optimal, 0.2, 0.4).verdict == Verdict.INCONCLUSIVE

    def test_flux_balance_harmonic(self, harmonic_analysis):
        """A harmonic profile carries 2 pi / ln 32 through every level."""
        record = flux_balance_check(harmonic_analysis, builtin_family("laplace"), 0.3, 0.6)
        assert record.lhs == pytest.approx(2.0 * np.pi / np.log(32.0), rel=2e-2)
        assert record.verdict == Verdict.PASS

    def test_flux_balance_detects_imbalance(self, exact_analysis):
        """1/|x| is not harmonic, so its Laplace fluxes differ."""
        record = flux_balance_check(exact_analysis, builtin_family("laplace"), 0.2, 0.4)
        assert record.verdict == Verdict.FAIL


class TestTopologyChecks:
    """Tests for the family-wide topology diagnostics."""

    @pytest.fixture(scope="class")
    def family(self, exact_analysis):
        return build_family(exact_analysis, levels=[0.2, 0.3, 0.4])

    def test_unique_component(self, family):
        """Concentric circles have one component per level."""
        record = topology_check(family)
        assert record.check == "unique_component"
        assert record.verdict == Verdict.PASS

    def test_nesting(self, exact_analysis, family):
        """Nesting, monotone g and the isoperimetric bound all hold."""
        records = nesting_check(exact_analysis, family)
        assert [r.check for r in records] == ["nesting", "g_monotone", "isoperimetric"]
        assert all(r.verdict == Verdict.PASS for r in records)
