"""The band E_t between gamma(t) and gamma(t/2) with pockets removed."""
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from src.grid.domain import Grid, ScalarField, band_coverage, integrate
from src.levels.topology import LevelAnalysis
from src.log import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class RegionEt:
    """Nodes and quadrature weights of E_t.

    Attributes:
        t: Level
        mask: Nodes in E_t; every one satisfies t/2 < u < t
        omega_mask: Nodes in pockets enclosed by non-gamma level components
        weights: Per-node coverage fractions used for integrals over E_t
        measure: |E_t|
    """
    t: float
    mask: np.ndarray
    omega_mask: np.ndarray
    weights: np.ndarray
    measure: float

    @property
    def node_count(self) -> int:
        return int(np.count_nonzero(self.mask))

    @property
    def is_empty(self) -> bool:
        return not self.mask.any()

    def integral(self, values: Union[ScalarField, np.ndarray], grid: Optional[Grid] = None) -> float:
        """Integrate a field (or nodal array on the same grid) over E_t."""
        if not isinstance(values, ScalarField):
            values = ScalarField(grid, values)
        return integrate(values, self.weights)


def grid_graph(mask: np.ndarray, periodic: bool = True) -> sparse.csr_matrix:
    """4-neighbour adjacency of the masked nodes, wrapping the angular axis."""
    n, m = mask.shape
    index = np.arange(n * m).reshape(n, m)
    rows, cols = [], []

    radial = mask[:-1] & mask[1:]
    rows.append(index[:-1][radial])
    cols.append(index[1:][radial])

    shifted = np.roll(mask, -1, axis=1)
    angular = mask & shifted
    if not periodic:
        angular[:, -1] = False
    rows.append(index[angular])
    cols.append(np.roll(index, -1, axis=1)[angular])

    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    data = np.ones(len(rows), dtype=np.int8)
    return sparse.coo_matrix((data, (rows, cols)), shape=(n * m, n * m)).tocsr()


def detached_components(mask: np.ndarray, anchor: np.ndarray) -> np.ndarray:
    """Masked nodes whose connected component contains no anchor node."""
    if not mask.any():
        return np.zeros_like(mask)
    _, labels = connected_components(grid_graph(mask), directed=False)
    labels = labels.reshape(mask.shape)
    anchored = np.unique(labels[mask & anchor])
    return mask & ~np.isin(labels, anchored)


def pocket_mask(u: ScalarField, lo: float, hi: float, n_samples: int = 9) -> np.ndarray:
    """Nodes enclosed by level components that are not gamma(s), s in (lo, hi).

    A sub-level cluster {u < s} cut off from the truncation circle sits
    inside a closed non-gamma component of u^{-1}(s); so does a
    super-level cluster {u > s} cut off from the obstacle.
    """
    v = u.values
    outer = np.zeros(v.shape, dtype=bool)
    outer[-1] = True
    inner = np.zeros(v.shape, dtype=bool)
    inner[0] = True

    pockets = np.zeros(v.shape, dtype=bool)
    # Interior samples only; s = lo and s = hi belong to the bounding curves
    for s in np.linspace(lo, hi, n_samples + 2)[1:-1]:
        pockets |= detached_components(v < s, outer)
        pockets |= detached_components(v > s, inner)
    return pockets


def _radial_dilation(mask: np.ndarray) -> np.ndarray:
    grown = mask.copy()
    grown[1:] |= mask[:-1]
    grown[:-1] |= mask[1:]
    return grown


def region_Et(analysis: LevelAnalysis, t: float, n_samples: int = 9) -> RegionEt:
    """Build E_t for a level t whose gamma(t) and gamma(t/2) exist.

    The node mask keeps nodes strictly between the two curves with
    t/2 < u < t, |grad u| above the regular floor and outside any pocket.
    The measure integrates the sub-cell band coverage over the mask grown
    by one node along the radius, so nodes whose dual cell is cut by
    gamma(t) or gamma(t/2) still contribute their covered part.

    Args:
        analysis: Level analysis of the field
        t: Level in (0, t_star)
        n_samples: Levels s in (t/2, t) scanned for pockets

    Returns:
        RegionEt

    Raises:
        PreconditionError: If gamma(t) or gamma(t/2) is missing
    """
    u = analysis.u
    grid = u.grid
    half = 0.5 * t
    gamma_t = analysis.require_gamma(t)
    gamma_half = analysis.require_gamma(half)

    nodes = np.column_stack([grid.x.ravel(), grid.y.ravel()])
    outside_t = ~gamma_t.contains(nodes).reshape(grid.shape)
    inside_half = gamma_half.contains(nodes).reshape(grid.shape)
    between = outside_t & inside_half

    v = u.values
    in_band = (v > half) & (v < t) & (analysis.grad_norm.values > analysis.grad_floor)
    omega = pocket_mask(u, half, t, n_samples) & between
    mask = between & in_band & ~omega

    weights = band_coverage(u, half, t) * (_radial_dilation(mask) & ~omega)
    weights.setflags(write=False)
    mask.setflags(write=False)
    omega.setflags(write=False)
    measure = integrate(u.with_values(np.ones(grid.shape)), weights)
    if omega.any():
        logger.info("E_t at t=%g: %d pocket nodes removed", t, int(omega.sum()))
    return RegionEt(t=float(t), mask=mask, omega_mask=omega, weights=weights, measure=measure)


def omega_t_weights(analysis: LevelAnalysis, t: float) -> np.ndarray:
    """Quadrature weights of Omega_t, the exterior of gamma(t) up to R_out.

    Raises:
        PreconditionError: If gamma(t) is missing
    """
    grid = analysis.grid
    gamma = analysis.require_gamma(t)
    nodes = np.column_stack([grid.x.ravel(), grid.y.ravel()])
    outside = ~gamma.contains(nodes).reshape(grid.shape)
    return band_coverage(analysis.u, -np.inf, t) * _radial_dilation(outside)


def interior_weights(analysis: LevelAnalysis, t: float) -> np.ndarray:
    """Quadrature weights of Int gamma(t) minus the obstacle.

    Raises:
        PreconditionError: If gamma(t) is missing
    """
    grid = analysis.grid
    gamma = analysis.require_gamma(t)
    nodes = np.column_stack([grid.x.ravel(), grid.y.ravel()])
    inside = gamma.contains(nodes).reshape(grid.shape)
    return band_coverage(analysis.u, t) * _radial_dilation(inside)
