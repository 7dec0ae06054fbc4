"""Level curves of a solved field and their planar topology.

For a regular level t below t_star the level set consists of simple
closed curves, exactly one of which (gamma(t)) winds around the ball
B_R; every other component sits inside gamma(t) as a pocket.
"""
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from src.errors import PreconditionError
from src.grid.domain import ScalarField, VectorField, gradient
from src.grid.interpolation import GridInterpolator
from src.levels.contours import IndexChain, trace_contours
from src.levels.polygons import (
    contains_origin,
    points_in_polygon,
    polyline_length,
    self_intersections,
    signed_area,
)
from src.log import get_logger
from src.models.reports import Verdict

logger = get_logger(__name__)

DEFAULT_GRAD_FLOOR_FRACTION = 1e-3


@dataclass(frozen=True, eq=False)
class LevelCurve:
    """One component of u^{-1}(t) as a polyline.

    Attributes:
        level: The value t
        vertices: (K, 2) Cartesian vertices; closed curves repeat the first
            vertex at the end
        closed: Whether the component is a closed curve
        min_grad: Minimum of |grad u| interpolated at vertices and segment midpoints
        encloses_ball: Closed, winds around the origin and stays outside B_R
        signed_area: Shoelace area (sign gives orientation)
        touches_boundary: Reaches the obstacle or the truncation circle
    """
    level: float
    vertices: np.ndarray
    closed: bool
    min_grad: float
    encloses_ball: bool
    signed_area: float
    touches_boundary: bool = False

    @classmethod
    def from_polygon(
        cls,
        level: float,
        vertices: np.ndarray,
        enclosing_radius: float = 0.0,
        min_grad: float = np.inf,
    ) -> "LevelCurve":
        """Closed curve from polygon vertices (closed or not)."""
        v = np.asarray(vertices, dtype=float)
        if not np.array_equal(v[0], v[-1]):
            v = np.vstack([v, v[:1]])
        return cls(
            level=float(level),
            vertices=v,
            closed=True,
            min_grad=float(min_grad),
            encloses_ball=_encloses(v, True, False, enclosing_radius),
            signed_area=signed_area(v),
        )

    @property
    def length(self) -> float:
        """Polyline length, the discrete H^1 measure."""
        return polyline_length(self.vertices)

    @property
    def enclosed_area(self) -> float:
        return abs(self.signed_area)

    @property
    def max_radius(self) -> float:
        return float(np.hypot(self.vertices[:, 0], self.vertices[:, 1]).max())

    @property
    def representative(self) -> np.ndarray:
        return self.vertices[0]

    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.vertices[:-1] + self.vertices[1:])

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Even-odd test of points against the closed polyline."""
        return points_in_polygon(points, self.vertices)

    def is_simple(self) -> bool:
        return self_intersections(self.vertices) == 0

    def to_dict(self) -> Dict[str, float]:
        return {
            "level": self.level,
            "closed": self.closed,
            "length": self.length,
            "max_radius": self.max_radius,
            "min_grad": self.min_grad,
            "encloses_ball": self.encloses_ball,
            "signed_area": self.signed_area,
            "touches_boundary": self.touches_boundary,
            "vertex_count": len(self.vertices),
        }


@dataclass
class Classification:
    """Topology of the components of one level set.

    Attributes:
        gamma_index: Index of the unique curve enclosing B_R, if unique
        enclosing: Indices of all curves enclosing B_R
        pockets: Closed curves inside gamma
        exterior: Curves (other than gamma) lying in the exterior of gamma
        truncated: Curves touching the obstacle or truncation circle
        verdict: PASS iff exactly one enclosing curve and no exterior curves
    """
    gamma_index: Optional[int]
    enclosing: List[int] = field(default_factory=list)
    pockets: List[int] = field(default_factory=list)
    exterior: List[int] = field(default_factory=list)
    truncated: List[int] = field(default_factory=list)
    verdict: Verdict = Verdict.FAIL


def _chain_to_cartesian(u: ScalarField, chain: IndexChain) -> np.ndarray:
    grid = u.grid
    fi, fj = chain.points[:, 0], chain.points[:, 1]
    i0 = np.clip(np.floor(fi).astype(int), 0, grid.spec.n_radial - 2)
    frac = fi - i0
    r = grid.radii[i0] + frac * (grid.radii[i0 + 1] - grid.radii[i0])
    theta = fj * grid.dtheta
    xy = np.column_stack([r * np.cos(theta), r * np.sin(theta)])
    if chain.closed:
        xy = np.vstack([xy, xy[:1]])
    return xy


def _encloses(vertices: np.ndarray, closed: bool, touches: bool, radius: float) -> bool:
    if not closed or touches:
        return False
    if np.hypot(vertices[:, 0], vertices[:, 1]).min() < radius:
        return False
    return contains_origin(vertices)


def extract_level_set(
    u: ScalarField,
    t: float,
    grad_magnitude: Optional[GridInterpolator] = None,
    enclosing_radius: Optional[float] = None,
) -> List[LevelCurve]:
    """Trace u^{-1}(t) on the polar grid.

    Args:
        u: Field
        t: Level
        grad_magnitude: Interpolator of |grad u|; computed when omitted
        enclosing_radius: R for the enclosure flag; defaults to the domain's

    Returns:
        Level curves, empty when t is outside the range of u

    Raises:
        ExtractionError: Topology guard in the chaining step
    """
    if not (u.min() < t < u.max()):
        return []
    radius = u.domain.enclosing_radius if enclosing_radius is None else enclosing_radius
    if grad_magnitude is None:
        grad_magnitude = GridInterpolator.from_field(gradient(u).magnitude())

    curves = []
    for chain in trace_contours(u.values, t, periodic=True):
        vertices = _chain_to_cartesian(u, chain)
        samples = vertices if len(vertices) < 2 else np.vstack([vertices, 0.5 * (vertices[:-1] + vertices[1:])])
        curves.append(LevelCurve(
            level=float(t),
            vertices=vertices,
            closed=chain.closed,
            min_grad=float(grad_magnitude.at_points(samples).min()),
            encloses_ball=_encloses(vertices, chain.closed, chain.touches_boundary, radius),
            signed_area=signed_area(vertices) if chain.closed else 0.0,
            touches_boundary=chain.touches_boundary,
        ))
    return curves


def classify(curves: Sequence[LevelCurve], R: float) -> Classification:
    """Designate gamma(t) and test the single-enclosing-component property.

    Curves touching the truncation circle are set aside and never count as
    violations.
    """
    enclosing = [
        k for k, c in enumerate(curves)
        if _encloses(c.vertices, c.closed, c.touches_boundary, R)
    ]
    truncated = [k for k, c in enumerate(curves) if c.touches_boundary]
    if len(enclosing) != 1:
        if curves:
            logger.info(
                "level %g: %d curves enclose B_R", curves[0].level, len(enclosing)
            )
        return Classification(
            gamma_index=None, enclosing=enclosing, truncated=truncated, verdict=Verdict.FAIL
        )

    g = enclosing[0]
    gamma = curves[g]
    pockets, exterior = [], []
    for k, c in enumerate(curves):
        if k == g or c.touches_boundary:
            continue
        if gamma.contains(c.representative[None, :])[0]:
            pockets.append(k)
        else:
            exterior.append(k)
    return Classification(
        gamma_index=g,
        enclosing=enclosing,
        pockets=pockets,
        exterior=exterior,
        truncated=truncated,
        verdict=Verdict.of(not exterior),
    )


def is_regular(curves: Sequence[LevelCurve], grad_floor: float) -> bool:
    """Every component keeps |grad u| above the floor."""
    return bool(curves) and all(c.min_grad > grad_floor for c in curves)


def t_star(u: ScalarField, R: float, n_samples: Optional[int] = None) -> float:
    """Minimum of u interpolated on the circle |x| = R.

    Raises:
        PreconditionError: If the minimum is not positive
    """
    n = n_samples or 4 * u.domain.n_angular
    value = float(GridInterpolator.from_field(u).on_circle(R, n).min())
    if value <= 0:
        raise PreconditionError(f"u is not positive on |x| = {R:g} (min {value:.3e})")
    return value


def g_of_t(gamma: LevelCurve) -> float:
    """Largest distance from the origin on gamma(t)."""
    return gamma.max_radius


class LevelAnalysis:
    """Level-set machinery for one solved field.

    Holds the gradient, interpolators and the floor that defines regular
    levels; extracted curves and classifications are cached per level.
    """

    def __init__(
        self,
        u: ScalarField,
        R: Optional[float] = None,
        grad_floor: Optional[float] = None,
    ):
        """Initialize the analysis.

        Args:
            u: Solved field
            R: Enclosing radius; defaults to the domain's
            grad_floor: |grad u| threshold for regular levels; defaults to
                1e-3 times max |grad u|
        """
        self.u = u
        self.R = u.domain.enclosing_radius if R is None else R
        self.grad: VectorField = gradient(u)
        self.grad_norm: ScalarField = self.grad.magnitude()
        self.interp = GridInterpolator.from_field(u)
        self.grad_interp = GridInterpolator.from_field(self.grad_norm)
        self.grad_floor = (
            DEFAULT_GRAD_FLOOR_FRACTION * self.grad_norm.max() if grad_floor is None else grad_floor
        )
        self._curves: Dict[float, List[LevelCurve]] = {}
        self._classes: Dict[float, Classification] = {}
        self._lock = threading.Lock()

    @property
    def grid(self):
        return self.u.grid

    def curves(self, t: float) -> List[LevelCurve]:
        t = float(t)
        with self._lock:
            cached = self._curves.get(t)
        if cached is not None:
            return cached
        curves = extract_level_set(self.u, t, self.grad_interp, self.R)
        with self._lock:
            self._curves[t] = curves
        return curves

    def classification(self, t: float) -> Classification:
        t = float(t)
        with self._lock:
            cached = self._classes.get(t)
        if cached is not None:
            return cached
        result = classify(self.curves(t), self.R)
        with self._lock:
            self._classes[t] = result
        return result

    def gamma(self, t: float) -> Optional[LevelCurve]:
        index = self.classification(t).gamma_index
        return None if index is None else self.curves(t)[index]

    def require_gamma(self, t: float) -> LevelCurve:
        gamma = self.gamma(t)
        if gamma is None:
            raise PreconditionError(f"no unique curve enclosing B_R at level {t:g}")
        return gamma

    def is_regular(self, t: float) -> bool:
        return is_regular(self.curves(t), self.grad_floor)

    def is_tilde_regular(self, t: float) -> bool:
        return self.is_regular(t) and self.is_regular(0.5 * t)

    def t_star(self) -> float:
        return t_star(self.u, self.R)

    def outer_level_floor(self, fraction: float = 0.75) -> float:
        """Smallest level whose half stays above u on the ring near fraction * R_out."""
        index = self.grid.radius_index(fraction * self.u.domain.truncation_radius)
        return 2.0 * float(self.u.values[index].max())


def regular_flags(
    analysis: LevelAnalysis, levels: Sequence[float], grad_floor: Optional[float] = None
) -> Dict[float, Dict[str, bool]]:
    """Regular and tilde-regular flags per level.

    Args:
        analysis: Level analysis of the field
        levels: Levels t to flag
        grad_floor: Overrides the analysis floor (np.inf flags nothing)
    """
    floor = analysis.grad_floor if grad_floor is None else grad_floor
    flags = {}
    for t in levels:
        regular = is_regular(analysis.curves(t), floor)
        half = is_regular(analysis.curves(0.5 * t), floor)
        flags[float(t)] = {"regular": regular, "tilde_regular": regular and half}
    return flags


@dataclass
class LevelEntry:
    """Summary of one sampled level.

    Attributes:
        level: t
        curves: Components of u^{-1}(t)
        gamma_index: Index of gamma(t) in curves
        regular: t passes the gradient floor on every component
        tilde_regular: t and t/2 are both regular
        classification: Topology of the level set
    """
    level: float
    curves: List[LevelCurve]
    gamma_index: Optional[int]
    regular: bool
    tilde_regular: bool
    classification: Classification

    @property
    def gamma(self) -> Optional[LevelCurve]:
        return None if self.gamma_index is None else self.curves[self.gamma_index]

    def summary(self) -> Dict[str, object]:
        gamma = self.gamma
        return {
            "t": self.level,
            "regular": self.regular,
            "tilde_regular": self.tilde_regular,
            "gamma_length": None if gamma is None else gamma.length,
            "g": None if gamma is None else g_of_t(gamma),
            "pockets": len(self.classification.pockets),
            "components": len(self.curves),
            "topology": self.classification.verdict.value,
        }


@dataclass
class LevelSetFamily:
    """Sampled levels in (0, t_star) with their curves and flags.

    Attributes:
        t_star: Minimum of u on |x| = R
        levels: Sorted sampled levels
        entries: Per-level data keyed by level
        grad_floor: Floor used for the regular flags
    """
    t_star: float
    levels: List[float]
    entries: Dict[float, LevelEntry]
    grad_floor: float

    def tilde_regular_levels(self) -> List[float]:
        return [t for t in self.levels if self.entries[t].tilde_regular]

    def regular_levels(self) -> List[float]:
        return [t for t in self.levels if self.entries[t].regular]

    def summary(self) -> List[Dict[str, object]]:
        return [self.entries[t].summary() for t in self.levels]


def family_levels(analysis: LevelAnalysis, n_levels: int, top_fraction: float = 0.95) -> List[float]:
    """Geometric levels between the outer floor and top_fraction * t_star."""
    top = top_fraction * analysis.t_star()
    bottom = analysis.outer_level_floor()
    if bottom >= top:
        logger.warning(
            "level window is empty (floor %.3g >= %.3g); widen the truncation radius", bottom, top
        )
        bottom = 0.5 * top
    return sorted(float(t) for t in np.geomspace(bottom, top, n_levels))


def build_family(
    analysis: LevelAnalysis,
    levels: Optional[Sequence[float]] = None,
    n_levels: int = 16,
    jobs: int = 4,
) -> LevelSetFamily:
    """Extract and classify a family of levels (and their halves) in parallel.

    Args:
        analysis: Level analysis of the field
        levels: Explicit levels; default family_levels(analysis, n_levels)
        n_levels: Number of geometric levels when levels is omitted
        jobs: Worker threads

    Returns:
        LevelSetFamily
    """
    t_top = analysis.t_star()
    levels = sorted(float(t) for t in (levels if levels is not None else family_levels(analysis, n_levels)))
    bad = [t for t in levels if not 0 < t < t_top]
    if bad:
        raise PreconditionError(f"levels {bad} are outside (0, t_star={t_top:g})")

    wanted = sorted(set(levels) | {0.5 * t for t in levels})
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as executor:
        for _ in executor.map(analysis.classification, wanted):
            pass

    entries = {}
    for t in levels:
        cls = analysis.classification(t)
        regular = analysis.is_regular(t)
        entries[t] = LevelEntry(
            level=t,
            curves=analysis.curves(t),
            gamma_index=cls.gamma_index,
            regular=regular,
            tilde_regular=regular and analysis.is_regular(0.5 * t),
            classification=cls,
        )
    family = LevelSetFamily(t_star=t_top, levels=levels, entries=entries, grad_floor=analysis.grad_floor)
    logger.info(
        "level family: %d levels, %d tilde-regular", len(levels), len(family.tilde_regular_levels())
    )
    return family


__all__ = [
    "LevelCurve",
    "Classification",
    "LevelAnalysis",
    "LevelEntry",
    "LevelSetFamily",
    "extract_level_set",
    "classify",
    "is_regular",
    "regular_flags",
    "t_star",
    "g_of_t",
    "family_levels",
    "build_family",
]
