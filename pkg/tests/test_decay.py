"""Tests for the decay fit and the Lorentz norms."""
import numpy as np
import pytest

from src.decay import (
    decay_fit,
    decay_record,
    default_trend_radii,
    distribution_function,
    lorentz_norm,
    norm_trend,
    prefactor_rows,
    zero_report,
)
from src.errors import ConfigurationError, DecayFitError
from src.grid import DomainSpec, sample_function
from src.models.reports import Verdict


def power(spec, exponent):
    return sample_function(spec, lambda x, y: np.hypot(x, y) ** exponent)


class TestDecayFit:
    """Tests for the fitted decay exponent."""

    def test_inverse_radius(self, exact_field):
        """1/|x| decays at exactly the reference rate for p = 2."""
        report = decay_fit(exact_field, 2.0)
        assert report.fitted_exponent == pytest.approx(-1.0, abs=1e-6)
        assert report.theoretical_exponent == 1.0
        assert report.max_prefactor == pytest.approx(1.0)
        assert report.bounded
        assert not report.vanishing
        assert report.decays
        assert min(report.radii) >= 4.0 and max(report.radii) <= 24.0

    def test_slow_decay_is_unbounded(self, spec):
        """|x|^-1/2 outruns the |x|^-1 rate."""
        report = decay_fit(power(spec, -0.5), 2.0)
        assert report.fitted_exponent == pytest.approx(-0.5, abs=1e-6)
        assert not report.bounded
        assert decay_record(report).verdict == Verdict.FAIL

    def test_fast_decay_vanishes(self, spec):
        """|x|^-2 beats the rate, so the prefactor vanishes."""
        report = decay_fit(power(spec, -2.0), 2.0)
        assert report.bounded
        assert report.vanishing
        assert decay_record(report).verdict == Verdict.PASS

    def test_log_corrected_rate_vanishes(self):
        """|x|^-1 / ln|x| is o(|x|^-1): bounded with a vanishing prefactor."""
        domain = DomainSpec(2.0, 2.5, 32.0, 128, 256)
        field = sample_function(domain, lambda x, y: 1.0 / (np.hypot(x, y) * np.log(np.hypot(x, y))))
        report = decay_fit(field, 2.0)
        assert report.bounded
        assert report.vanishing
        assert decay_record(report).verdict == Verdict.PASS

    def test_flat_field_inconclusive(self, spec):
        """A constant shows no decay inside the window."""
        report = decay_fit(power(spec, 0.0), 2.0)
        assert not report.decays
        assert decay_record(report).verdict == Verdict.INCONCLUSIVE

    def test_other_p(self, exact_field):
        """For p = 1 the reference rate |x|^-2 is faster than 1/|x|."""
        report = decay_fit(exact_field, 1.0)
        assert report.theoretical_exponent == 2.0
        assert not report.bounded

    @pytest.mark.parametrize("window", [(0.5, 0.4), (0.0, 0.5), (0.5, 1.5)])
    def test_invalid_window(self, exact_field, window):
        """Windows must satisfy 0 < lo < hi <= 1."""
        with pytest.raises(DecayFitError):
            decay_fit(exact_field, 2.0, window=window)

    def test_window_too_narrow(self, exact_field):
        """A window holding a single radius cannot be fitted."""
        with pytest.raises(DecayFitError):
            decay_fit(exact_field, 2.0, window=(0.999, 1.0))

    def test_non_positive_values(self, spec):
        """Negative values in the window are refused."""
        with pytest.raises(DecayFitError):
            decay_fit(sample_function(spec, lambda x, y: -1.0 / np.hypot(x, y)), 2.0)

    def test_prefactor_rows(self, exact_field):
        """One (r, max u, prefactor) row per window radius."""
        report = decay_fit(exact_field, 2.0)
        rows = prefactor_rows(report)
        assert len(rows) == len(report.radii)
        assert all(len(row) == 3 for row in rows)
        assert rows[0][2] == pytest.approx(1.0)


class TestZeroReport:
    """Tests for identically zero fields."""

    def test_zero_report(self):
        """A zero field is bounded but shows no decay."""
        report = zero_report(2.0)
        assert report.bounded
        assert not report.decays
        assert report.max_prefactor == 0.0
        record = decay_record(report)
        assert record.check == "decay_bound"
        assert record.verdict == Verdict.INCONCLUSIVE


class TestLorentzNorms:
    """Tests for distribution functions and L^{p,q} norms of 1/|x|."""

    def test_distribution_function(self, exact_field):
        """{1/|x| > 0.2} is the annulus 1 < |x| < 5."""
        assert distribution_function(exact_field, 0.2) == pytest.approx(24.0 * np.pi, rel=2e-2)

    def test_distribution_function_restricted(self, exact_field):
        """Restricting to |x| <= R caps the measure."""
        full = distribution_function(exact_field, 0.01)
        capped = distribution_function(exact_field, 0.01, max_radius=8.0)
        assert capped < full
        assert capped == pytest.approx(63.0 * np.pi, rel=5e-2)

    def test_distribution_function_needs_positive_level(self, exact_field):
        """t must be positive."""
        with pytest.raises(ValueError):
            distribution_function(exact_field, 0.0)

    def test_weak_norm(self, exact_field):
        """||1/|x| ||_{L^{2,inf}} is sqrt(pi)."""
        norm = lorentz_norm(exact_field, 2.0, np.inf)
        assert norm.value == pytest.approx(np.sqrt(np.pi), rel=3e-2)
        assert len(norm.levels) == len(norm.tail_profile) == 64
        assert norm.to_dict()["q"] == "inf"

    def test_distribution_function_non_increasing(self, exact_field):
        """Raising t can only shrink {|u| > t}."""
        levels = np.geomspace(1e-2, 0.9, 40)
        measures = [distribution_function(exact_field, t) for t in levels]
        assert np.all(np.diff(measures) <= 1e-12 * measures[0])

    @pytest.mark.parametrize("q", [2.0, np.inf])
    @pytest.mark.parametrize("scale", [2.0, 0.5, 3.0])
    def test_norm_is_homogeneous(self, exact_field, q, scale):
        """||s u|| = s ||u|| for s > 0."""
        scaled = sample_function(exact_field.grid.spec, lambda x, y: scale / np.hypot(x, y))
        base = lorentz_norm(exact_field, 2.0, q).value
        assert lorentz_norm(scaled, 2.0, q).value == pytest.approx(scale * base, rel=1e-9)

    def test_zero_field(self, spec):
        """The zero field has zero norm."""
        zero = sample_function(spec, lambda x, y: np.zeros_like(x))
        assert lorentz_norm(zero, 2.0, 2.0).value == 0.0

    def test_invalid_exponents(self, exact_field):
        """p below 1 and q below 1 are rejected."""
        with pytest.raises(ConfigurationError) as exc:
            lorentz_norm(exact_field, 0.5, 2.0)
        assert exc.value.field == "analysis.p"
        with pytest.raises(ConfigurationError):
            lorentz_norm(exact_field, 2.0, 0.5)

    def test_trend_radii(self, exact_field):
        """Doubling radii from 8 up to R_out."""
        assert default_trend_radii(exact_field) == [8.0, 16.0, 32.0]

    def test_strong_norm_diverges(self, exact_field):
        """The L^{2,2} norm keeps growing with the truncation radius."""
        trend = norm_trend(exact_field, 2.0, 2.0, [8.0, 16.0, 32.0])
        assert trend["diverging"]
        assert trend["values"] == sorted(trend["values"])

    def test_weak_norm_stays_bounded(self, exact_field):
        """The L^{2,inf} norm settles near sqrt(pi)."""
        trend = norm_trend(exact_field, 2.0, np.inf, [8.0, 16.0, 32.0])
        assert not trend["diverging"]
