"""Jacobi-preconditioned Krylov solves with an escalation ladder."""
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import bicgstab, gmres
from tenacity import retry, retry_if_exception_type, stop_after_attempt

from src.errors import ConvergenceError
from src.grid.domain import ScalarField
from src.log import get_logger
from src.models.reports import ConvergenceLog
from src.solver.assembly import DiscreteOperator

logger = get_logger(__name__)

# (method, restart); tried in order until one converges
SOLVER_LADDER: Tuple[Tuple[str, Optional[int]], ...] = (
    ("bicgstab", None),
    ("gmres", 50),
    ("gmres", 200),
)


@dataclass
class SolveResult:
    """Outcome of a linear solve.

    Attributes:
        interior: Solution at the unknowns
        field: Nodal field with boundary data, when the operator has a grid
        log: Convergence history
    """
    interior: np.ndarray
    field: Optional[ScalarField]
    log: ConvergenceLog


def _jacobi(matrix: sparse.csr_matrix) -> sparse.dia_matrix:
    diag = matrix.diagonal()
    safe = np.where(np.abs(diag) > 0, diag, 1.0)
    return sparse.diags(1.0 / safe)


class KrylovSolver:
    """Solve A x = b to a relative residual, escalating the method on failure.

    BiCGSTAB is tried first; restarted GMRES with growing restart length
    takes over when it stalls. Every attempt appends the true relative
    residual per iteration to a shared history.
    """

    def __init__(self, tol: float = 1e-10, max_iter: int = 5000):
        """Initialize the solver.

        Args:
            tol: Relative residual target ||b - A x|| / ||b||
            max_iter: Iteration cap per attempt
        """
        if not tol > 0:
            raise ValueError(f"tol must be positive, got {tol}")
        self.tol = tol
        self.max_iter = max_iter
        self.history: List[float] = []
        self.attempts: List[str] = []
        self._rung = 0

    def _relative_residual(self, matrix, rhs, x, rhs_norm) -> float:
        return float(np.linalg.norm(rhs - matrix @ x) / rhs_norm)

    @retry(
        stop=stop_after_attempt(len(SOLVER_LADDER)),
        retry=retry_if_exception_type(ConvergenceError),
        reraise=True,
    )
    def _attempt(self, matrix, rhs, x0, preconditioner) -> Tuple[np.ndarray, int]:
        method, restart = SOLVER_LADDER[min(self._rung, len(SOLVER_LADDER) - 1)]
        self._rung += 1
        label = method if restart is None else f"{method}({restart})"
        self.attempts.append(label)
        rhs_norm = float(np.linalg.norm(rhs))
        iterations = 0

        def record(xk):
            nonlocal iterations
            iterations += 1
            self.history.append(self._relative_residual(matrix, rhs, xk, rhs_norm))

        x, final, info = x0, np.inf, 0
        # The recursive residual can undershoot the true one; restart from
        # the last iterate while the method still reports success.
        for _ in range(3):
            if method == "bicgstab":
                x, info = bicgstab(
                    matrix, rhs, x0=x, rtol=self.tol, atol=0.0,
                    maxiter=self.max_iter, M=preconditioner, callback=record,
                )
            else:
                x, info = gmres(
                    matrix, rhs, x0=x, rtol=self.tol, atol=0.0, restart=restart,
                    maxiter=max(1, self.max_iter // restart), M=preconditioner,
                    callback=record, callback_type="x",
                )
            if not np.all(np.isfinite(x)):
                final = np.inf
                break
            final = self._relative_residual(matrix, rhs, x, rhs_norm)
            if final <= self.tol or info != 0:
                break

        if final <= self.tol:
            logger.debug("%s converged in %d iterations (residual %.3e)", label, iterations, final)
            return x, iterations
        logger.warning("%s stopped at residual %.3e (info=%d)", label, final, info)
        raise ConvergenceError(
            f"{label} did not reach relative residual {self.tol:g} (got {final:.3e})",
            history=list(self.history),
        )

    def solve(self, matrix: sparse.csr_matrix, rhs: np.ndarray) -> Tuple[np.ndarray, ConvergenceLog]:
        """Solve the system.

        Returns:
            (solution, convergence log)

        Raises:
            ConvergenceError: No method on the ladder met the tolerance
        """
        rhs = np.asarray(rhs, dtype=float)
        self.history, self.attempts, self._rung = [], [], 0
        if not np.any(rhs):
            return np.zeros_like(rhs), ConvergenceLog(
                method="trivial", iterations=0, residuals=[0.0], attempts=[], converged=True
            )
        preconditioner = _jacobi(matrix)
        x0 = preconditioner @ rhs
        x, iterations = self._attempt(matrix, rhs, x0, preconditioner)
        return x, ConvergenceLog(
            method=self.attempts[-1],
            iterations=iterations,
            residuals=list(self.history),
            attempts=list(self.attempts),
            converged=True,
        )


def solve(op: DiscreteOperator, tol: float = 1e-10, max_iter: int = 5000) -> SolveResult:
    """Solve a discrete operator for its interior unknowns.

    Args:
        op: Assembled operator (or a bare system from DiscreteOperator.from_matrix)
        tol: Relative residual target, > 0
        max_iter: Iteration cap per method

    Returns:
        SolveResult with the nodal field (when op has a grid) and the log

    Raises:
        ConvergenceError: Carrying the residual history of every attempt
    """
    x, log = KrylovSolver(tol=tol, max_iter=max_iter).solve(op.matrix, op.rhs)
    field = None
    if op.grid is not None:
        field = ScalarField(op.grid, op.expand(x), {"source": "solve", "family": op.family})
    return SolveResult(interior=x, field=field, log=log)
