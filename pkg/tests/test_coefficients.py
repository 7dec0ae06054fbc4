"""Tests for coefficient families and the assumption checks."""
import dataclasses

import numpy as np
import pytest

from src.coefficients import (
    FAMILIES,
    builtin_family,
    check_c1,
    check_c2,
    check_c3,
    check_c4,
    check_derivatives,
    default_c4_radii,
    validate_assumptions,
)
from src.errors import ConfigurationError
from src.grid import DomainSpec
from src.models.reports import Verdict


@pytest.fixture
def domain():
    """Domain reaching well past the enclosing ball."""
    return DomainSpec(1.0, 2.0, 32.0, 33, 64)


class TestFamilies:
    """Tests for the built-in coefficient families."""

    def test_optimal_drift_points_inwards(self):
        """b(2, 0) should be (-2/p) x / |x|^2 = (-0.5, 0) for p = 2."""
        coeffs = builtin_family("remark_optimal", {"p": 2.0})
        b = coeffs.b(np.array([2.0]), np.array([0.0]))
        np.testing.assert_allclose(b[0], [-0.5, 0.0])

    def test_optimal_drift_scales_with_p(self):
        """Doubling p should halve the drift."""
        b2 = builtin_family("remark_optimal", {"p": 2.0}).b(np.array([1.0]), np.array([1.0]))
        b4 = builtin_family("remark_optimal", {"p": 4.0}).b(np.array([1.0]), np.array([1.0]))
        np.testing.assert_allclose(b4, 0.5 * b2)

    def test_rotational_is_tangential(self):
        """The swirling drift should be orthogonal to x."""
        coeffs = builtin_family("rotational", {"kappa": 2.0})
        x, y = np.array([1.0, -3.0]), np.array([2.0, 0.5])
        b = coeffs.b(x, y)
        np.testing.assert_allclose(b[:, 0] * x + b[:, 1] * y, 0.0, atol=1e-14)

    def test_matrix_is_symmetric(self):
        """Anisotropic matrices should come back symmetric."""
        coeffs = builtin_family("anisotropic", {"a11": 2.0, "a22": 3.0, "a12": 0.5})
        a = coeffs.matrix(np.array([1.0]), np.array([4.0]))
        assert a[0, 0, 1] == a[0, 1, 0] == 0.5

    def test_not_positive_definite(self):
        """An indefinite matrix should be rejected."""
        with pytest.raises(ConfigurationError):
            builtin_family("anisotropic", {"a11": 1.0, "a22": 1.0, "a12": 2.0})

    def test_unknown_family(self):
        """An unknown name should list the known families."""
        with pytest.raises(ConfigurationError) as exc:
            builtin_family("heat")
        assert exc.value.field == "coefficients.family"
        assert "laplace" in str(exc.value)

    def test_unknown_parameter(self):
        """Parameters a family does not take should be rejected."""
        with pytest.raises(ConfigurationError) as exc:
            builtin_family("laplace", {"p": 2.0})
        assert exc.value.field == "coefficients.params"

    def test_p_below_one(self):
        """p < 1 should be rejected."""
        with pytest.raises(ConfigurationError):
            builtin_family("remark_optimal", {"p": 0.5})

    def test_negative_strength(self):
        """The absorbing reaction needs a non-negative strength."""
        with pytest.raises(ConfigurationError):
            builtin_family("reaction", {"strength": -1.0})

    @pytest.mark.parametrize("name", sorted(FAMILIES))
    def test_analytic_derivatives(self, name, domain):
        """grad a and div b should agree with central differences."""
        grad_err, div_err = check_derivatives(builtin_family(name), domain)
        assert grad_err < 1e-5
        assert div_err < 1e-5

    def test_to_dict(self):
        """to_dict should carry the name and parameters."""
        data = builtin_family("rotational", {"kappa": 1.5}).to_dict()
        assert data["name"] == "rotational"
        assert data["params"] == {"kappa": 1.5}


class TestAssumptions:
    """Tests for the C1-C4 checks."""

    def test_c1_identity(self, domain):
        """The identity matrix should have minimum eigenvalue 1."""
        value, verdict = check_c1(builtin_family("laplace"), domain)
        assert value == pytest.approx(1.0)
        assert verdict == Verdict.PASS

    def test_c1_too_few_samples(self, domain):
        """Fewer than 100 samples should be refused."""
        with pytest.raises(ConfigurationError):
            check_c1(builtin_family("laplace"), domain, n_samples=50)

    def test_c2_optimal_drift(self, domain):
        """|x| |b| = 2/p is constant for the optimal drift."""
        constants, verdict, _ = check_c2(builtin_family("remark_optimal", {"p": 2.0}), domain)
        assert constants[1] == pytest.approx(1.0)
        assert verdict == Verdict.PASS

    def test_c2_constant_drift_fails(self, domain):
        """A constant drift is not O(1/|x|)."""
        _, verdict, profiles = check_c2(builtin_family("constant_drift"), domain)
        assert verdict == Verdict.FAIL
        assert profiles["slopes"][1] == pytest.approx(1.0, abs=1e-6)

    def test_c3_negative_reaction_fails(self, domain):
        """c = -1 breaks c >= 0."""
        value, verdict = check_c3(builtin_family("negative_reaction"), domain)
        assert value == pytest.approx(-1.0)
        assert verdict == Verdict.FAIL

    def test_c4_divergence_free(self, domain):
        """No negative part at all should pass."""
        partial, verdict = check_c4(builtin_family("rotational"), domain)
        assert partial[-1] == 0.0
        assert verdict == Verdict.PASS

    def test_c4_decaying_reaction(self):
        """c = |x|^-3 is integrable; on a wide domain the last increment is below 1e-2 of the first."""
        wide = DomainSpec(1.0, 2.0, 256.0, 33, 64)
        partial, verdict = check_c4(builtin_family("reaction"), wide)
        assert verdict == Verdict.PASS
        assert partial[-1] == pytest.approx(2.0 * np.pi * (1.0 - 1.0 / 256.0), rel=1e-3)

    def test_c4_reaction_tail_too_short(self, domain):
        """At R_out = 32 the |x|^-3 tail still adds 1/24 of the first increment."""
        partial, verdict = check_c4(builtin_family("reaction"), domain)
        increments = np.diff([0.0] + partial)
        assert increments[-1] / increments[0] == pytest.approx(1.0 / 24.0, rel=1e-2)
        assert verdict == Verdict.FAIL
        assert check_c4(builtin_family("reaction"), domain, increment_tol=0.05)[1] == Verdict.PASS

    def test_c4_slowly_divergent_fails(self):
        """c = 1/(|x|^2 ln|x|) integrates to 2 pi ln ln r, so the partial sums never settle."""
        spec = DomainSpec(2.0, 2.5, 1024.0, 33, 64)
        coeffs = dataclasses.replace(
            builtin_family("laplace"),
            name="log_divergent",
            c=lambda x, y: 1.0 / ((x * x + y * y) * np.log(np.hypot(x, y))),
        )
        partial, verdict = check_c4(coeffs, spec)
        assert partial[0] == pytest.approx(2.0 * np.pi * np.log(np.log(4.0) / np.log(2.0)), rel=1e-3)
        assert partial[-1] == pytest.approx(2.0 * np.pi * np.log(np.log(1024.0) / np.log(2.0)), rel=1e-3)
        assert verdict == Verdict.FAIL
        # the ratio of last to first increment is about 0.15
        assert check_c4(coeffs, spec, increment_tol=0.25)[1] == Verdict.PASS

    def test_c4_sink_fails(self, domain):
        """div b = -2 everywhere is not integrable."""
        _, verdict = check_c4(builtin_family("sink_drift"), domain)
        assert verdict == Verdict.FAIL

    def test_c4_radii_validated(self, domain):
        """Radii outside (R, R_out] should be refused."""
        with pytest.raises(ConfigurationError) as exc:
            check_c4(builtin_family("laplace"), domain, radii_sequence=[1.5, 8.0])
        assert exc.value.field == "verification.c4_radii"

    def test_default_c4_radii(self, domain):
        """Default radii halve from R_out while staying above R."""
        assert default_c4_radii(domain) == [4.0, 8.0, 16.0, 32.0]

    def test_sink_drift_fails_c2_and_c4(self, domain):
        """The sink family should fail both decay and integrability."""
        report = validate_assumptions(builtin_family("sink_drift"), domain)
        assert report.failed_checks == ["C2", "C4"]
        assert not report.all_passed

    def test_optimal_drift_passes_all(self, domain):
        """The optimal drift family satisfies every assumption."""
        report = validate_assumptions(builtin_family("remark_optimal", {"p": 2.0}), domain)
        assert report.all_passed
        assert [r.check for r in report.to_records()] == [
            "assumption_c1", "assumption_c2", "assumption_c3", "assumption_c4",
        ]
