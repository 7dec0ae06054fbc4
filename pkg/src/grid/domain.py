"""Truncated exterior-domain grids, nodal fields, derivatives and quadrature."""
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import lru_cache
from typing import Any, Callable, Dict, Optional, Union

import numpy as np

from src.errors import ConfigurationError, NonFiniteSampleError
from src.log import get_logger

logger = get_logger(__name__)

ArrayLike = Union[np.ndarray, float]
PositionFunction = Callable[[np.ndarray, np.ndarray], ArrayLike]

# Below this the stencils still work but nothing is resolved.
RECOMMENDED_MIN_NODES = 8


class RadialSpacing(Enum):
    """How radii are distributed between the obstacle and the outer boundary."""
    LOG = "log"
    UNIFORM = "uniform"


def _frozen(array: np.ndarray) -> np.ndarray:
    """Return a read-only float copy of an array."""
    out = np.array(array, dtype=float, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class DomainSpec:
    """Geometry and resolution of a truncated exterior domain.

    The obstacle is the disk |x| < obstacle_radius. The ball B_R of radius
    enclosing_radius contains it, and the computation stops at the artificial
    outer circle |x| = truncation_radius.

    Attributes:
        obstacle_radius: Radius r0 of the excluded disk
        enclosing_radius: Radius R of the ball containing the obstacle
        truncation_radius: Outer artificial boundary R_out
        n_radial: Number of radial node layers (including both boundaries)
        n_angular: Number of angular nodes (periodic, even)
        radial_spacing: LOG (geometric progression) or UNIFORM
    """
    obstacle_radius: float
    enclosing_radius: float
    truncation_radius: float
    n_radial: int
    n_angular: int
    radial_spacing: RadialSpacing = RadialSpacing.LOG

    def __post_init__(self):
        if not isinstance(self.radial_spacing, RadialSpacing):
            try:
                spacing = RadialSpacing(str(self.radial_spacing).lower())
            except ValueError:
                raise ConfigurationError(
                    f"unknown radial spacing '{self.radial_spacing}' (expected log or uniform)",
                    field="domain.radial_spacing",
                )
            object.__setattr__(self, "radial_spacing", spacing)
        self.validate()

    def validate(self) -> None:
        """Raise ConfigurationError naming the first violated invariant."""
        if not self.obstacle_radius > 0:
            raise ConfigurationError(
                "must be positive", field="domain.obstacle_radius"
            )
        if not self.obstacle_radius < self.enclosing_radius:
            raise ConfigurationError(
                f"must exceed obstacle_radius ({self.enclosing_radius} <= {self.obstacle_radius})",
                field="domain.enclosing_radius",
            )
        if not self.enclosing_radius < self.truncation_radius:
            raise ConfigurationError(
                f"must exceed enclosing_radius ({self.truncation_radius} <= {self.enclosing_radius})",
                field="domain.truncation_radius",
            )
        if int(self.n_radial) != self.n_radial or self.n_radial < 3:
            raise ConfigurationError(
                f"need an integer >= 3, got {self.n_radial}", field="domain.n_radial"
            )
        if int(self.n_angular) != self.n_angular or self.n_angular < 4:
            raise ConfigurationError(
                f"need an integer >= 4, got {self.n_angular}", field="domain.n_angular"
            )
        if self.n_angular % 2:
            raise ConfigurationError(
                f"must be even, got {self.n_angular}", field="domain.n_angular"
            )
        if min(self.n_radial, self.n_angular) < RECOMMENDED_MIN_NODES:
            logger.warning(
                "grid %dx%d is below %d nodes per direction; results are unresolved",
                self.n_radial, self.n_angular, RECOMMENDED_MIN_NODES,
            )

    @property
    def node_count(self) -> int:
        """Total number of nodes."""
        return self.n_radial * self.n_angular

    def refined(self, factor: float) -> "DomainSpec":
        """Same geometry with both node counts multiplied by factor.

        Radial counts keep the end nodes (n -> (n - 1) * factor + 1) so that
        factor 2 nests the coarse radii inside the fine ones.
        """
        n_r = int(round((self.n_radial - 1) * factor)) + 1
        n_t = int(round(self.n_angular * factor / 2)) * 2
        return replace(self, n_radial=n_r, n_angular=n_t)

    def to_dict(self) -> Dict[str, Any]:
        """Convert spec to a plain dictionary."""
        return {
            "obstacle_radius": self.obstacle_radius,
            "enclosing_radius": self.enclosing_radius,
            "truncation_radius": self.truncation_radius,
            "n_radial": self.n_radial,
            "n_angular": self.n_angular,
            "radial_spacing": self.radial_spacing.value,
        }


@dataclass(frozen=True, eq=False)
class Grid:
    """Node coordinate table of a polar grid.

    Every 2D array has shape (n_radial, n_angular), radial index first.

    Attributes:
        spec: The domain the grid was built from
        radii: Radial node positions, increasing, r[0] = r0, r[-1] = R_out
        angles: Angular node positions 2*pi*j/n_angular
        r, theta: Polar coordinates per node
        x, y: Cartesian coordinates per node
        dual_edges: Radial dual-cell edges r_{i-1/2}, length n_radial + 1
        cell_areas: Trapezoid quadrature weights r_i * dr_i * dtheta
        control_volumes: Exact areas of the polar dual cells
    """
    spec: DomainSpec
    radii: np.ndarray
    angles: np.ndarray
    r: np.ndarray
    theta: np.ndarray
    x: np.ndarray
    y: np.ndarray
    dual_edges: np.ndarray
    cell_areas: np.ndarray
    control_volumes: np.ndarray

    @property
    def shape(self):
        return (self.spec.n_radial, self.spec.n_angular)

    @property
    def dtheta(self) -> float:
        return 2.0 * np.pi / self.spec.n_angular

    @property
    def radial_steps(self) -> np.ndarray:
        """Spacing between consecutive radii."""
        return np.diff(self.radii)

    def boundary_mask(self) -> np.ndarray:
        """Nodes on the inner or outer circle."""
        mask = np.zeros(self.shape, dtype=bool)
        mask[0, :] = True
        mask[-1, :] = True
        return mask

    def radius_index(self, radius: float) -> int:
        """Index of the node layer closest to radius."""
        return int(np.argmin(np.abs(self.radii - radius)))

    def annulus_mask(self, r_min: float, r_max: float) -> np.ndarray:
        """Nodes with r_min <= r <= r_max."""
        return (self.r >= r_min) & (self.r <= r_max)


@lru_cache(maxsize=32)
def build_grid(spec: DomainSpec) -> Grid:
    """Construct the node coordinate table of a domain.

    Args:
        spec: Validated domain specification

    Returns:
        Grid with polar and Cartesian coordinates and quadrature weights
    """
    r0, r_out = spec.obstacle_radius, spec.truncation_radius
    if spec.radial_spacing == RadialSpacing.LOG:
        radii = np.geomspace(r0, r_out, spec.n_radial)
    else:
        radii = np.linspace(r0, r_out, spec.n_radial)
    radii[0], radii[-1] = r0, r_out
    angles = 2.0 * np.pi * np.arange(spec.n_angular) / spec.n_angular
    dtheta = 2.0 * np.pi / spec.n_angular

    edges = np.empty(spec.n_radial + 1)
    edges[0], edges[-1] = r0, r_out
    edges[1:-1] = 0.5 * (radii[:-1] + radii[1:])
    dual_width = np.diff(edges)
    control = 0.5 * (edges[1:] ** 2 - edges[:-1] ** 2) * dtheta

    rr, tt = np.meshgrid(radii, angles, indexing="ij")
    ones = np.ones((1, spec.n_angular))
    return Grid(
        spec=spec,
        radii=_frozen(radii),
        angles=_frozen(angles),
        r=_frozen(rr),
        theta=_frozen(tt),
        x=_frozen(rr * np.cos(tt)),
        y=_frozen(rr * np.sin(tt)),
        dual_edges=_frozen(edges),
        cell_areas=_frozen((radii * dual_width * dtheta)[:, None] * ones),
        control_volumes=_frozen(control[:, None] * ones),
    )


def _as_grid(domain: Union[DomainSpec, Grid]) -> Grid:
    return domain if isinstance(domain, Grid) else build_grid(domain)


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Nodal values of a scalar on a grid.

    Attributes:
        grid: Grid the values live on
        values: Array of shape (n_radial, n_angular), all finite
        metadata: Free-form labels (family, source, ...)
    """
    grid: Grid
    values: np.ndarray
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.size == self.grid.spec.node_count and values.shape != self.grid.shape:
            values = values.reshape(self.grid.shape)
        if values.shape != self.grid.shape:
            raise ValueError(
                f"field shape {values.shape} does not match grid {self.grid.shape}"
            )
        bad = np.argwhere(~np.isfinite(values))
        if len(bad):
            i, j = bad[0]
            raise NonFiniteSampleError(
                float(self.grid.radii[i]), float(self.grid.angles[j]), float(values[i, j])
            )
        object.__setattr__(self, "values", _frozen(values))

    @property
    def domain(self) -> DomainSpec:
        return self.grid.spec

    @property
    def flat(self) -> np.ndarray:
        """Values as a vector of length n_radial * n_angular (radial-major)."""
        return self.values.reshape(-1)

    def with_values(self, values: np.ndarray, **metadata: Any) -> "ScalarField":
        """New field on the same grid, metadata merged."""
        return ScalarField(self.grid, values, {**self.metadata, **metadata})

    def scaled(self, factor: float) -> "ScalarField":
        return self.with_values(self.values * factor)

    def max(self) -> float:
        return float(self.values.max())

    def min(self) -> float:
        return float(self.values.min())


@dataclass(frozen=True, eq=False)
class VectorField:
    """Cartesian vector per node.

    Attributes:
        grid: Grid the components live on
        x: First Cartesian component, shape (n_radial, n_angular)
        y: Second Cartesian component
    """
    grid: Grid
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        for name in ("x", "y"):
            comp = np.asarray(getattr(self, name), dtype=float)
            if comp.shape != self.grid.shape:
                raise ValueError(f"component {name} has shape {comp.shape}")
            if not np.all(np.isfinite(comp)):
                raise ValueError(f"component {name} has non-finite entries")
            object.__setattr__(self, name, _frozen(comp))

    def magnitude(self) -> ScalarField:
        """Pointwise Euclidean norm."""
        return ScalarField(self.grid, np.hypot(self.x, self.y), {"source": "|grad|"})

    def radial(self) -> np.ndarray:
        """Component along e_r."""
        return self.x * np.cos(self.grid.theta) + self.y * np.sin(self.grid.theta)


def sample_function(
    domain: Union[DomainSpec, Grid],
    f: PositionFunction,
    **metadata: Any,
) -> ScalarField:
    """Evaluate a vectorized function of position at every node.

    Args:
        domain: Spec or prebuilt grid
        f: Callable f(x1, x2) accepting coordinate arrays
        **metadata: Labels stored on the field

    Returns:
        ScalarField with values f(node)

    Raises:
        NonFiniteSampleError: If f is not finite at some node
    """
    grid = _as_grid(domain)
    values = np.broadcast_to(np.asarray(f(grid.x, grid.y), dtype=float), grid.shape)
    return ScalarField(grid, values, dict(metadata))


def polar_derivatives(grid: Grid, values: np.ndarray):
    """Second-order (du/dr, du/dtheta) on the grid.

    Radial derivatives use non-uniform central differences and one-sided
    second-order stencils at both boundaries; the angular direction wraps.
    """
    du_dr = np.gradient(values, grid.radii, axis=0, edge_order=2)
    du_dt = (np.roll(values, -1, axis=1) - np.roll(values, 1, axis=1)) / (2.0 * grid.dtheta)
    return du_dr, du_dt


def gradient(u: ScalarField) -> VectorField:
    """Cartesian gradient of a nodal field.

    Args:
        u: Field on a grid with at least 3 radial layers

    Returns:
        VectorField with (du/dx1, du/dx2)
    """
    grid = u.grid
    du_dr, du_dt = polar_derivatives(grid, u.values)
    cos_t, sin_t = np.cos(grid.theta), np.sin(grid.theta)
    return VectorField(
        grid,
        cos_t * du_dr - sin_t * du_dt / grid.r,
        sin_t * du_dr + cos_t * du_dt / grid.r,
    )


def integrate(f: ScalarField, region_mask: Optional[np.ndarray] = None) -> float:
    """Polar trapezoid quadrature of a field over a set of nodes.

    Args:
        f: Integrand
        region_mask: Boolean mask, or per-node coverage fractions in [0, 1];
            None integrates over the whole grid

    Returns:
        Sum of f * r_i * dr_i * dtheta over the (weighted) nodes
    """
    weights = f.grid.cell_areas
    if region_mask is not None:
        mask = np.asarray(region_mask)
        if mask.size != f.grid.spec.node_count:
            raise ValueError(
                f"mask has {mask.size} entries for {f.grid.spec.node_count} nodes"
            )
        weights = weights * mask.reshape(f.grid.shape).astype(float)
    return float(np.sum(f.values * weights))


def _covered_fraction(a: np.ndarray, b: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Fraction of s in [0, 1] with lo < a + (b - a) s < hi."""
    diff = b - a
    flat = np.abs(diff) < 1e-300
    with np.errstate(divide="ignore", invalid="ignore"):
        s_lo = (lo - a) / diff
        s_hi = (hi - a) / diff
    s_min = np.clip(np.minimum(s_lo, s_hi), 0.0, 1.0)
    s_max = np.clip(np.maximum(s_lo, s_hi), 0.0, 1.0)
    sloped = np.where(np.isnan(s_max - s_min), 0.0, s_max - s_min)
    inside = ((a > lo) & (a < hi)).astype(float)
    return np.where(flat, inside, sloped)


def band_coverage(u: ScalarField, lo: float, hi: float = np.inf) -> np.ndarray:
    """Covered fraction of each dual cell by the band lo < u < hi.

    Along the radius, u is taken linear between the node and the dual-cell
    edges (edge values averaged from the neighbouring nodes); the fraction
    is that of the dual width where u lies in the band.

    Args:
        u: Field
        lo: Lower band value (exclusive)
        hi: Upper band value (exclusive), default +inf

    Returns:
        Array in [0, 1] of shape (n_radial, n_angular)
    """
    grid = u.grid
    v = u.values
    edges = grid.dual_edges
    radii = grid.radii
    left_len = (radii - edges[:-1])[:, None]
    right_len = (edges[1:] - radii)[:, None]

    v_left = np.empty_like(v)
    v_left[0] = v[0]
    v_left[1:] = 0.5 * (v[1:] + v[:-1])
    v_right = np.empty_like(v)
    v_right[-1] = v[-1]
    v_right[:-1] = 0.5 * (v[:-1] + v[1:])

    covered = (
        left_len * _covered_fraction(v_left, v, lo, hi)
        + right_len * _covered_fraction(v, v_right, lo, hi)
    )
    total = left_len + right_len
    return np.clip(covered / total, 0.0, 1.0)
