"""Tests for contour tracing, level topology and the band E_t."""
import numpy as np
import pytest

from src.errors import PreconditionError
from src.grid import sample_function
from src.levels import (
    LevelAnalysis,
    LevelCurve,
    build_family,
    contains_origin,
    family_levels,
    g_of_t,
    pocket_mask,
    points_in_polygon,
    polyline_length,
    region_Et,
    regular_flags,
    self_intersections,
    signed_area,
    trace_contours,
)
from src.models.reports import Verdict


def circle(radius: float, n: int = 64) -> np.ndarray:
    theta = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    return np.column_stack([radius * np.cos(theta), radius * np.sin(theta)])


@pytest.fixture(scope="module")
def bumped_analysis(spec):
    """1/|x| plus a narrow bump centred at (3.5, 0)."""
    def f(x, y):
        return 1.0 / np.hypot(x, y) + 0.1 * np.exp(-((x - 3.5) ** 2 + y ** 2) / 0.1)
    return LevelAnalysis(sample_function(spec, f, label="bumped"))


class TestTraceContours:
    """Tests for marching squares in index space."""

    def test_periodic_ring(self):
        """A radial ramp crossed between rows gives one closed ring."""
        values = np.repeat(np.arange(5.0)[:, None], 8, axis=1)
        chains = trace_contours(values, 1.5)
        assert len(chains) == 1
        assert chains[0].closed
        assert not chains[0].touches_boundary
        assert len(chains[0].points) == 8
        np.testing.assert_allclose(chains[0].points[:, 0], 1.5)

    def test_open_chain_without_wrap(self):
        """Without the periodic axis the same ramp gives an open chain."""
        values = np.repeat(np.arange(5.0)[:, None], 8, axis=1)
        chains = trace_contours(values, 1.5, periodic=False)
        assert len(chains) == 1
        assert not chains[0].closed
        assert chains[0].touches_boundary

    def test_isolated_peak(self):
        """A single raised node is circled by a four-vertex loop."""
        values = np.zeros((7, 8))
        values[3, 3] = 1.0
        chains = trace_contours(values, 0.5, periodic=False)
        assert len(chains) == 1
        assert chains[0].closed
        assert len(chains[0].points) == 4

    def test_level_out_of_range(self):
        """A level above every value has no contour."""
        assert trace_contours(np.zeros((4, 6)), 1.0) == []


class TestPolygons:
    """Tests for planar polyline measures."""

    square = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])

    def test_signed_area_orientation(self):
        """Counter-clockwise squares have positive area."""
        assert signed_area(self.square) == pytest.approx(1.0)
        assert signed_area(self.square[::-1]) == pytest.approx(-1.0)

    def test_length(self):
        """No closing segment is added to the length."""
        assert polyline_length(self.square) == pytest.approx(3.0)
        assert polyline_length(np.vstack([self.square, self.square[:1]])) == pytest.approx(4.0)

    def test_points_in_polygon(self):
        """The crossing test separates inside from outside points."""
        inside = points_in_polygon(np.array([[0.5, 0.5], [2.0, 2.0]]), self.square)
        assert inside.tolist() == [True, False]

    def test_contains_origin(self):
        """A circle about the origin contains it, a shifted square does not."""
        assert contains_origin(circle(2.0))
        assert not contains_origin(self.square + 1.0)

    def test_self_intersections(self):
        """A bow tie crosses itself once, a square never."""
        bow_tie = np.array([[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]])
        assert self_intersections(bow_tie) == 1
        assert self_intersections(self.square) == 0

    def test_curve_from_polygon(self):
        """Only circles staying outside B_R enclose the ball."""
        assert LevelCurve.from_polygon(0.1, circle(3.0), enclosing_radius=2.0).encloses_ball
        assert not LevelCurve.from_polygon(0.1, circle(1.5), enclosing_radius=2.0).encloses_ball


class TestLevelAnalysis:
    """Tests on the level sets of 1/|x|."""

    def test_t_star(self, exact_analysis):
        """t_star is the value on the circle |x| = 2."""
        assert exact_analysis.t_star() == pytest.approx(0.5, rel=2e-3)

    def test_gamma_is_a_circle(self, exact_analysis):
        """gamma(0.4) is the circle of radius 2.5."""
        gamma = exact_analysis.require_gamma(0.4)
        assert gamma.closed
        assert gamma.is_simple()
        assert gamma.length == pytest.approx(2.0 * np.pi * 2.5, rel=1e-2)
        assert g_of_t(gamma) == pytest.approx(2.5, rel=1e-2)

    def test_single_enclosing_component(self, exact_analysis):
        """The level set has one component and no pockets."""
        cls = exact_analysis.classification(0.4)
        assert cls.verdict == Verdict.PASS
        assert cls.pockets == []
        assert cls.exterior == []

    def test_tilde_regular(self, exact_analysis):
        """Both 0.4 and 0.2 stay far from critical points."""
        assert exact_analysis.is_tilde_regular(0.4)

    def test_regular_flags_with_infinite_floor(self, exact_analysis):
        """An infinite floor flags nothing as regular."""
        flags = regular_flags(exact_analysis, [0.4], grad_floor=np.inf)
        assert flags[0.4] == {"regular": False, "tilde_regular": False}

    def test_missing_gamma(self, exact_analysis):
        """Above the maximum there is no curve to designate."""
        with pytest.raises(PreconditionError):
            exact_analysis.require_gamma(2.0)

    @pytest.mark.parametrize("shift", [0, 3, 64])
    def test_curve_across_angle_zero_stays_whole(self, spec, shift):
        """An off-centre circle crossing theta = 0 is one closed curve under any angular roll."""
        field = sample_function(spec, lambda x, y: 1.0 / np.hypot(x - 0.5, y))
        rolled = LevelAnalysis(field.with_values(np.roll(field.values, shift, axis=1)))
        curves = rolled.curves(0.25)
        assert len(curves) == 1
        gamma = rolled.require_gamma(0.25)
        assert gamma.closed
        assert gamma.is_simple()
        assert gamma.length == pytest.approx(2.0 * np.pi * 4.0, rel=1e-2)
        reference = LevelAnalysis(field).require_gamma(0.25)
        assert gamma.length == pytest.approx(reference.length, rel=1e-9)
        assert abs(gamma.signed_area) == pytest.approx(abs(reference.signed_area), rel=1e-9)

    def test_exterior_component_flagged(self, bumped_analysis):
        """A bump outside gamma(t) breaks the single-component property."""
        cls = bumped_analysis.classification(0.36)
        assert cls.gamma_index is not None
        assert len(cls.exterior) == 1
        assert cls.verdict == Verdict.FAIL


class TestLevelFamily:
    """Tests for sampled level families."""

    def test_default_levels_window(self, exact_analysis):
        """Default levels sit between the outer floor and 0.95 t_star."""
        levels = family_levels(exact_analysis, 6)
        assert len(levels) == 6
        assert levels[0] == pytest.approx(exact_analysis.outer_level_floor())
        assert levels[-1] == pytest.approx(0.95 * exact_analysis.t_star())

    def test_build_family(self, exact_analysis):
        """Explicit levels are all tilde-regular with a unique gamma."""
        family = build_family(exact_analysis, levels=[0.4, 0.2], jobs=2)
        assert family.levels == [0.2, 0.4]
        assert family.tilde_regular_levels() == [0.2, 0.4]
        summary = family.summary()
        assert [row["topology"] for row in summary] == ["PASS", "PASS"]
        assert summary[1]["g"] == pytest.approx(2.5, rel=1e-2)

    def test_levels_outside_range(self, exact_analysis):
        """Levels at or above t_star are refused."""
        with pytest.raises(PreconditionError):
            build_family(exact_analysis, levels=[0.3, 0.6])


class TestRegionEt:
    """Tests for the band between gamma(t) and gamma(t/2)."""

    def test_measure_of_annulus(self, exact_analysis):
        """E_0.4 is the annulus 2.5 < |x| < 5."""
        region = region_Et(exact_analysis, 0.4)
        assert region.measure == pytest.approx(np.pi * (25.0 - 6.25), rel=2e-2)
        assert not region.omega_mask.any()
        values = exact_analysis.u.values[region.mask]
        assert values.min() > 0.2 and values.max() < 0.4

    def test_integral_of_one_is_measure(self, exact_analysis):
        """Integrating 1 over the region returns its measure."""
        region = region_Et(exact_analysis, 0.4)
        ones = np.ones(exact_analysis.grid.shape)
        assert region.integral(ones, exact_analysis.grid) == pytest.approx(region.measure)

    def test_pocket_detected_near_bump(self, bumped_analysis):
        """The raised island is cut out of the band."""
        grid = bumped_analysis.grid
        pockets = pocket_mask(bumped_analysis.u, 0.2, 0.4)
        assert pockets.any()
        distance = np.hypot(grid.x[pockets] - 3.5, grid.y[pockets])
        assert distance.max() < 1.0

    def test_region_removes_pockets(self, bumped_analysis):
        """Pocket nodes never enter the E_t mask."""
        region = region_Et(bumped_analysis, 0.4)
        assert region.omega_mask.any()
        assert not (region.mask & region.omega_mask).any()
