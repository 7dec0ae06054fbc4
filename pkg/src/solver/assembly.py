"""Finite-volume assembly of L u = -d_i(a_ij d_j u) + b . grad u + c u on polar grids.

Each node owns the polar dual cell bounded by the radial mid-points and the
angular mid-angles. Diffusion is written as a sum of face fluxes so that the
fluxes through any ring of radial faces telescope exactly; drift and
reaction are integrated with the node value times the cell volume.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np
from scipy import sparse

from src.coefficients.families import CoefficientSet
from src.errors import AssemblyError, ConfigurationError
from src.grid.domain import DomainSpec, Grid, ScalarField, build_grid
from src.log import get_logger
from src.models.reports import AssumptionReport

logger = get_logger(__name__)


class OuterCondition(Enum):
    """Condition imposed on the artificial outer circle."""
    DIRICHLET_ZERO = "dirichlet_zero"
    DIRICHLET_MATCHED = "dirichlet_matched"
    DIRICHLET_VALUES = "dirichlet_values"


@dataclass(frozen=True, eq=False)
class BoundaryData:
    """Dirichlet data on the obstacle and on the truncation circle.

    Attributes:
        inner_values: Non-negative value per angular node on |x| = r0
        outer_condition: How the outer circle is closed
        decay_exponent: alpha for DIRICHLET_MATCHED, the outer value being
            mean(inner) * (R_out / r0)^(-alpha)
        outer_values: Explicit outer values for DIRICHLET_VALUES
    """
    inner_values: np.ndarray
    outer_condition: OuterCondition = OuterCondition.DIRICHLET_ZERO
    decay_exponent: Optional[float] = None
    outer_values: Optional[np.ndarray] = None

    def __post_init__(self):
        inner = np.atleast_1d(np.asarray(self.inner_values, dtype=float))
        if not np.all(np.isfinite(inner)) or np.any(inner < 0):
            raise ConfigurationError(
                "inner boundary values must be finite and non-negative",
                field="boundary.inner",
            )
        object.__setattr__(self, "inner_values", inner)
        if not isinstance(self.outer_condition, OuterCondition):
            object.__setattr__(self, "outer_condition", OuterCondition(self.outer_condition))
        if self.outer_condition == OuterCondition.DIRICHLET_MATCHED and self.decay_exponent is None:
            raise ConfigurationError(
                "dirichlet_matched needs a decay exponent", field="boundary.decay_exponent"
            )
        if self.outer_condition == OuterCondition.DIRICHLET_VALUES and self.outer_values is None:
            raise ConfigurationError(
                "dirichlet_values needs outer values", field="boundary.outer"
            )

    @classmethod
    def constant(
        cls,
        value: float,
        outer: OuterCondition = OuterCondition.DIRICHLET_ZERO,
        decay_exponent: Optional[float] = None,
        outer_value: Optional[float] = None,
    ) -> "BoundaryData":
        """Same value on every inner node."""
        return cls(
            inner_values=np.array([float(value)]),
            outer_condition=outer,
            decay_exponent=decay_exponent,
            outer_values=None if outer_value is None else np.array([float(outer_value)]),
        )

    def inner_on(self, grid: Grid) -> np.ndarray:
        """Inner values broadcast to the grid's angular nodes."""
        if self.inner_values.size == 1:
            return np.full(grid.spec.n_angular, self.inner_values[0])
        if self.inner_values.size != grid.spec.n_angular:
            raise ConfigurationError(
                f"{self.inner_values.size} inner values for {grid.spec.n_angular} angular nodes",
                field="boundary.inner",
            )
        return self.inner_values

    def outer_on(self, grid: Grid) -> np.ndarray:
        """Outer values per angular node."""
        n = grid.spec.n_angular
        if self.outer_condition == OuterCondition.DIRICHLET_ZERO:
            return np.zeros(n)
        if self.outer_condition == OuterCondition.DIRICHLET_MATCHED:
            ratio = grid.spec.truncation_radius / grid.spec.obstacle_radius
            return np.full(n, self.inner_on(grid).mean() * ratio ** (-self.decay_exponent))
        values = np.atleast_1d(np.asarray(self.outer_values, dtype=float))
        return np.full(n, values[0]) if values.size == 1 else values

    def nodal(self, grid: Grid) -> np.ndarray:
        """Full nodal array holding the boundary values (zero inside)."""
        values = np.zeros(grid.shape)
        values[0] = self.inner_on(grid)
        values[-1] = self.outer_on(grid)
        return values

    @property
    def is_zero(self) -> bool:
        return bool(
            np.all(self.inner_values == 0)
            and (
                self.outer_condition != OuterCondition.DIRICHLET_VALUES
                or np.all(np.asarray(self.outer_values) == 0)
            )
        )


@dataclass(frozen=True, eq=False)
class Stencil:
    """Discrete operator on all nodes before boundary elimination.

    Attributes:
        grid: Grid the operator acts on
        matrix: N x N CSR matrix; row k holds the integral of L u over the
            dual cell of node k (boundary rows are empty)
        radial_flux: Matrix mapping nodal values to the outward diffusive
            flux through each radial face (i + 1/2, j)
        volumes: Dual-cell areas per node (flattened)
    """
    grid: Grid
    matrix: sparse.csr_matrix
    radial_flux: sparse.csr_matrix
    volumes: np.ndarray


@dataclass(frozen=True, eq=False)
class DiscreteOperator:
    """Interior system A u_int = rhs after Dirichlet elimination.

    Attributes:
        matrix: Interior CSR matrix
        rhs: Boundary contribution moved to the right-hand side
        grid: Grid of the problem, None for bare algebraic systems
        stencil: Full-node stencil the system was cut from
        interior: Flat indices of the interior nodes
        boundary_values: Nodal array carrying the Dirichlet data
        family: Name of the coefficient family
    """
    matrix: sparse.csr_matrix
    rhs: np.ndarray
    grid: Optional[Grid] = None
    stencil: Optional[Stencil] = None
    interior: Optional[np.ndarray] = None
    boundary_values: Optional[np.ndarray] = None
    family: str = ""

    @classmethod
    def from_matrix(cls, matrix, rhs) -> "DiscreteOperator":
        """Wrap a bare matrix and right-hand side."""
        return cls(
            matrix=sparse.csr_matrix(np.atleast_2d(matrix) if np.isscalar(matrix) else matrix),
            rhs=np.atleast_1d(np.asarray(rhs, dtype=float)),
        )

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @property
    def row_offsets(self) -> np.ndarray:
        return self.matrix.indptr

    @property
    def column_indices(self) -> np.ndarray:
        return self.matrix.indices

    @property
    def values(self) -> np.ndarray:
        return self.matrix.data

    def max_row_nonzeros(self) -> int:
        return int(np.diff(self.matrix.indptr).max(initial=0))

    def symmetry_defect(self) -> float:
        """max |A - A^T| relative to max |A|."""
        diff = abs(self.matrix - self.matrix.T)
        scale = abs(self.matrix).max()
        return float(diff.max() / scale) if scale else 0.0

    def expand(self, interior_values: np.ndarray) -> np.ndarray:
        """Nodal array combining interior values with the boundary data."""
        values = np.array(self.boundary_values, dtype=float, copy=True).reshape(-1)
        values[self.interior] = interior_values
        return values.reshape(self.grid.shape)


def _polar_components(a: np.ndarray, phi: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(a_rr, a_rtheta, a_thetatheta) of Cartesian matrices in the frame at angle phi."""
    er = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
    et = np.stack([-np.sin(phi), np.cos(phi)], axis=-1)
    a_rr = np.einsum("...i,...ij,...j->...", er, a, er)
    a_rt = np.einsum("...i,...ij,...j->...", er, a, et)
    a_tt = np.einsum("...i,...ij,...j->...", et, a, et)
    return a_rr, a_rt, a_tt


class _Triplets:
    """Accumulates COO entries; duplicates are summed on conversion."""

    def __init__(self):
        self.rows, self.cols, self.vals = [], [], []

    def add(self, rows, cols, vals):
        rows, cols, vals = np.broadcast_arrays(rows, cols, vals)
        self.rows.append(rows.ravel())
        self.cols.append(cols.ravel())
        self.vals.append(vals.ravel())

    def to_csr(self, shape) -> sparse.csr_matrix:
        if not self.rows:
            return sparse.csr_matrix(shape)
        coo = sparse.coo_matrix(
            (np.concatenate(self.vals), (np.concatenate(self.rows), np.concatenate(self.cols))),
            shape=shape,
        )
        return coo.tocsr()


def _check_metrics(grid: Grid, name: str, values: np.ndarray, offset: int = 0) -> None:
    bad = np.argwhere(~np.isfinite(values) | (values <= 0))
    if len(bad):
        i, j = bad[0]
        raise AssemblyError(f"degenerate {name} ({values[i, j]!r})", cell=(int(i) + offset, int(j)))


def _blend(peclet: np.ndarray) -> np.ndarray:
    """Upwind weight: 0 below cell Peclet 2, rising to 1."""
    with np.errstate(divide="ignore"):
        return np.clip(1.0 - 2.0 / peclet, 0.0, 1.0)


def assemble_stencil(coeffs: CoefficientSet, grid: Grid) -> Stencil:
    """Build the full-node operator of a coefficient set on a grid."""
    n, m = grid.shape
    N = n * m
    dtheta = grid.dtheta
    radii, edges, theta = grid.radii, grid.dual_edges, grid.angles

    def idx(i, j):
        return i * m + np.mod(j, m)

    a_nodes = coeffs.matrix(grid.x, grid.y)
    if not np.all(np.isfinite(a_nodes)):
        i, j = np.argwhere(~np.all(np.isfinite(a_nodes), axis=(-1, -2)))[0]
        raise AssemblyError("non-finite diffusion coefficient", cell=(int(i), int(j)))
    volumes = grid.control_volumes
    _check_metrics(grid, "cell volume", volumes)

    # Radial faces (i + 1/2, j), i = 0..n-2
    I, J = np.meshgrid(np.arange(n - 1), np.arange(m), indexing="ij")
    a_face = 0.5 * (a_nodes[:-1] + a_nodes[1:])
    a_rr, a_rt, _ = _polar_components(a_face, theta[None, :])
    _check_metrics(grid, "radial face conductivity", a_rr)
    r_f = edges[1:-1][:, None]
    h = np.diff(radii)[:, None]
    c_rr = -a_rr * r_f * dtheta / h
    c_x = -a_rt / 4.0

    face = I * m + J
    flux = _Triplets()
    flux.add(face, idx(I + 1, J), c_rr)
    flux.add(face, idx(I, J), -c_rr)
    for di in (0, 1):
        flux.add(face, idx(I + di, J + 1), c_x)
        flux.add(face, idx(I + di, J - 1), -c_x)
    radial_flux = flux.to_csr(((n - 1) * m, N))

    # Angular faces (i, j + 1/2), interior rows i = 1..n-2
    Ia, Ja = np.meshgrid(np.arange(1, n - 1), np.arange(m), indexing="ij")
    a_face_t = 0.5 * (a_nodes[1:-1] + np.roll(a_nodes[1:-1], -1, axis=1))
    _, a_tr, a_tt = _polar_components(a_face_t, (theta + 0.5 * dtheta)[None, :])
    _check_metrics(grid, "angular face conductivity", a_tt, offset=1)
    width = (edges[2:-1] - edges[1:-2])[:, None]
    r_i = radii[1:-1][:, None]
    span = (radii[2:] - radii[:-2])[:, None]
    c_tt = -a_tt * width / (r_i * dtheta)
    c_y = -a_tr * width * 0.5 / span

    aface = (Ia - 1) * m + Ja
    ang = _Triplets()
    ang.add(aface, idx(Ia, Ja + 1), c_tt)
    ang.add(aface, idx(Ia, Ja), -c_tt)
    for dj in (0, 1):
        ang.add(aface, idx(Ia + 1, Ja + dj), c_y)
        ang.add(aface, idx(Ia - 1, Ja + dj), -c_y)
    angular_flux = ang.to_csr(((n - 2) * m, N))

    # Face-to-cell incidence for interior cells
    cells = idx(Ia, Ja)
    div_r = _Triplets()
    div_r.add(cells, Ia * m + Ja, 1.0)
    div_r.add(cells, (Ia - 1) * m + Ja, -1.0)
    div_t = _Triplets()
    div_t.add(cells, aface, 1.0)
    div_t.add(cells, (Ia - 1) * m + np.mod(Ja - 1, m), -1.0)
    diffusion = div_r.to_csr((N, (n - 1) * m)) @ radial_flux + div_t.to_csr((N, (n - 2) * m)) @ angular_flux

    # Drift and reaction at interior nodes
    lower = _Triplets()
    vol = volumes[1:-1]
    b_nodes = np.asarray(coeffs.b(grid.x, grid.y), dtype=float)
    c_nodes = np.asarray(coeffs.c(grid.x, grid.y), dtype=float)
    if not (np.all(np.isfinite(b_nodes)) and np.all(np.isfinite(c_nodes))):
        raise AssemblyError("non-finite drift or reaction coefficient")
    if np.any(b_nodes != 0):
        cos_t, sin_t = np.cos(grid.theta[1:-1]), np.sin(grid.theta[1:-1])
        bx, by = b_nodes[1:-1, :, 0], b_nodes[1:-1, :, 1]
        b_r = bx * cos_t + by * sin_t
        b_t = -bx * sin_t + by * cos_t
        node_rr, _, node_tt = _polar_components(a_nodes[1:-1], grid.theta[1:-1])

        h_m = (radii[1:-1] - radii[:-2])[:, None]
        h_p = (radii[2:] - radii[1:-1])[:, None]
        central = (
            -h_p / (h_m * (h_m + h_p)),
            (h_p - h_m) / (h_m * h_p),
            h_m / (h_p * (h_m + h_p)),
        )
        forward = b_r > 0
        upwind = (
            np.where(forward, -1.0 / h_m, 0.0),
            np.where(forward, 1.0 / h_m, -1.0 / h_p),
            np.where(forward, 0.0, 1.0 / h_p),
        )
        beta = _blend(np.abs(b_r) * 0.5 * (h_m + h_p) / node_rr)
        for di, wc, wu in zip((-1, 0, 1), central, upwind):
            weight = vol * b_r * ((1.0 - beta) * wc + beta * wu)
            lower.add(cells, idx(Ia + di, Ja), weight)

        scale = vol * b_t / r_i
        beta_t = _blend(np.abs(b_t) * r_i * dtheta / node_tt)
        ahead = b_t > 0
        w_prev = (1.0 - beta_t) * (-0.5 / dtheta) + beta_t * np.where(ahead, -1.0 / dtheta, 0.0)
        w_self = beta_t * np.where(ahead, 1.0 / dtheta, -1.0 / dtheta)
        w_next = (1.0 - beta_t) * (0.5 / dtheta) + beta_t * np.where(ahead, 0.0, 1.0 / dtheta)
        lower.add(cells, idx(Ia, Ja - 1), scale * w_prev)
        lower.add(cells, idx(Ia, Ja), scale * w_self)
        lower.add(cells, idx(Ia, Ja + 1), scale * w_next)

    lower.add(cells, cells, vol * c_nodes[1:-1])
    matrix = (diffusion + lower.to_csr((N, N))).tocsr()
    matrix.eliminate_zeros()
    return Stencil(grid=grid, matrix=matrix, radial_flux=radial_flux, volumes=volumes.reshape(-1))


def assemble(
    coeffs: CoefficientSet,
    spec: DomainSpec,
    bdata: BoundaryData,
    assumptions: Optional[AssumptionReport] = None,
) -> DiscreteOperator:
    """Assemble the interior system for L u = 0 with Dirichlet data.

    Args:
        coeffs: Coefficient set
        spec: Domain
        bdata: Boundary data
        assumptions: Assumption report; failed checks are logged

    Returns:
        DiscreteOperator with the eliminated boundary contribution

    Raises:
        AssemblyError: Degenerate metrics or non-finite coefficients
    """
    if assumptions is not None:
        for name in assumptions.failed_checks:
            logger.warning("assembling %s although assumption %s failed", coeffs.name, name)
    grid = build_grid(spec)
    stencil = assemble_stencil(coeffs, grid)
    n, m = grid.shape
    interior = np.arange(m, (n - 1) * m)
    boundary = np.concatenate([np.arange(m), np.arange((n - 1) * m, n * m)])
    nodal = bdata.nodal(grid)

    rows = stencil.matrix[interior]
    matrix = rows[:, interior].tocsr()
    rhs = -(rows[:, boundary] @ nodal.reshape(-1)[boundary])
    logger.debug(
        "assembled %s: %d unknowns, %d nonzeros", coeffs.name, matrix.shape[0], matrix.nnz
    )
    return DiscreteOperator(
        matrix=matrix,
        rhs=np.asarray(rhs, dtype=float),
        grid=grid,
        stencil=stencil,
        interior=interior,
        boundary_values=nodal,
        family=coeffs.name,
    )


def residual(coeffs: CoefficientSet, spec: DomainSpec, u: ScalarField) -> Tuple[ScalarField, float]:
    """Pointwise discrete L u at interior nodes (zero on the boundary).

    Returns:
        (residual field, max norm over interior nodes)
    """
    grid = build_grid(spec)
    if u.grid.shape != grid.shape:
        raise ValueError(f"field grid {u.grid.shape} does not match spec {grid.shape}")
    stencil = assemble_stencil(coeffs, grid)
    lu = (stencil.matrix @ u.flat) / stencil.volumes
    lu = lu.reshape(grid.shape)
    lu[0] = 0.0
    lu[-1] = 0.0
    return ScalarField(grid, lu, {"source": "residual", "family": coeffs.name}), float(np.abs(lu).max())


def radial_face_flux(stencil: Stencil, u: ScalarField, index: int) -> float:
    """Total outward diffusive flux through the ring of faces at r_{index + 1/2}."""
    m = stencil.grid.spec.n_angular
    fluxes = stencil.radial_flux @ u.flat
    return float(fluxes[index * m:(index + 1) * m].sum())
