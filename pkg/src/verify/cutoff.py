"""Radial cut-off functions eta_rho with analytic derivatives.

eta_rho(x) = 1 - S(|x|/rho - 1), where S is the quintic smoothstep
S(z) = 10 z^3 - 15 z^4 + 6 z^5 clamped to [0, 1]. The profile is C^2,
equal to 1 on |x| <= rho and 0 on |x| >= 2 rho.
"""
from dataclasses import dataclass
from typing import Dict

import numpy as np

from src.grid.domain import Grid

# sup |S'| and sup |S''| on [0, 1]
SUP_FIRST = 15.0 / 8.0
SUP_SECOND = 10.0 / np.sqrt(3.0)


def smoothstep(z: np.ndarray) -> np.ndarray:
    z = np.clip(z, 0.0, 1.0)
    return z ** 3 * (10.0 - 15.0 * z + 6.0 * z * z)


def smoothstep_d1(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    inside = (z > 0.0) & (z < 1.0)
    return np.where(inside, 30.0 * z * z * (1.0 - z) ** 2, 0.0)


def smoothstep_d2(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    inside = (z > 0.0) & (z < 1.0)
    return np.where(inside, 60.0 * z * (1.0 - z) * (1.0 - 2.0 * z), 0.0)


@dataclass(frozen=True)
class CutoffFunction:
    """eta_rho with its gradient and Hessian.

    Attributes:
        rho: Scale; eta = 1 on |x| <= rho and 0 on |x| >= 2 rho
    """
    rho: float

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")

    def _profile(self, x, y):
        r = np.hypot(x, y)
        z = r / self.rho - 1.0
        return r, z

    def __call__(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        _, z = self._profile(x, y)
        return 1.0 - smoothstep(z)

    def gradient(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """grad eta, shape S + (2,)."""
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        r, z = self._profile(x, y)
        dr = -smoothstep_d1(z) / self.rho
        safe = np.where(r > 0, r, 1.0)
        return np.stack([dr * x / safe, dr * y / safe], axis=-1)

    def hessian(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Second derivatives, shape S + (2, 2).

        For a radial profile phi(r): phi'' e_r e_r^T + (phi'/r)(I - e_r e_r^T).
        """
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        r, z = self._profile(x, y)
        d1 = -smoothstep_d1(z) / self.rho
        d2 = -smoothstep_d2(z) / self.rho ** 2
        safe = np.where(r > 0, r, 1.0)
        ex, ey = x / safe, y / safe
        tangential = d1 / safe
        out = np.empty(x.shape + (2, 2))
        out[..., 0, 0] = d2 * ex * ex + tangential * (1.0 - ex * ex)
        out[..., 1, 1] = d2 * ey * ey + tangential * (1.0 - ey * ey)
        out[..., 0, 1] = out[..., 1, 0] = (d2 - tangential) * ex * ey
        return out

    def laplacian(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        h = self.hessian(x, y)
        return h[..., 0, 0] + h[..., 1, 1]

    def support_mask(self, grid: Grid) -> np.ndarray:
        """Nodes where eta or its derivatives are nonzero (|x| < 2 rho)."""
        return grid.r < 2.0 * self.rho

    def analytic_bounds(self) -> Dict[str, float]:
        """sup rho |grad eta| and sup rho^2 |grad^2 eta| (spectral norm)."""
        return {"first": SUP_FIRST, "second": SUP_SECOND}

    def measured_bounds(self, grid: Grid) -> Dict[str, float]:
        """The same suprema sampled at the grid nodes."""
        grad = self.gradient(grid.x, grid.y)
        hess = self.hessian(grid.x, grid.y)
        spectral = np.abs(np.linalg.eigvalsh(hess)).max(axis=-1)
        return {
            "first": float(self.rho * np.hypot(grad[..., 0], grad[..., 1]).max()),
            "second": float(self.rho ** 2 * spectral.max()),
        }
