"""Bilinear interpolation of nodal fields at arbitrary planar points."""
from typing import Union

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from src.grid.domain import Grid, ScalarField


class GridInterpolator:
    """Interpolate a nodal array bilinearly in (r, theta).

    The angular axis is closed by repeating the theta = 0 column at 2*pi,
    so queries anywhere on the circle are interpolated, never extrapolated.
    Radii outside [r0, R_out] are clamped to the boundary.
    """

    def __init__(self, grid: Grid, values: np.ndarray):
        """Initialize the interpolator.

        Args:
            grid: Grid the values live on
            values: Array of shape (n_radial, n_angular)
        """
        self.grid = grid
        values = np.asarray(values, dtype=float)
        angles = np.append(grid.angles, 2.0 * np.pi)
        wrapped = np.concatenate([values, values[:, :1]], axis=1)
        self._interp = RegularGridInterpolator(
            (grid.radii, angles), wrapped, method="linear"
        )

    @classmethod
    def from_field(cls, field: ScalarField) -> "GridInterpolator":
        return cls(field.grid, field.values)

    def polar(self, r: np.ndarray, theta: np.ndarray) -> np.ndarray:
        """Values at polar coordinates (any broadcastable shapes)."""
        r, theta = np.broadcast_arrays(np.asarray(r, float), np.asarray(theta, float))
        r = np.clip(r, self.grid.radii[0], self.grid.radii[-1])
        theta = np.mod(theta, 2.0 * np.pi)
        points = np.stack([r.ravel(), theta.ravel()], axis=-1)
        return self._interp(points).reshape(r.shape)

    def __call__(
        self, x: Union[np.ndarray, float], y: Union[np.ndarray, float]
    ) -> np.ndarray:
        """Values at Cartesian points."""
        x, y = np.asarray(x, float), np.asarray(y, float)
        return self.polar(np.hypot(x, y), np.arctan2(y, x))

    def at_points(self, points: np.ndarray) -> np.ndarray:
        """Values at an (N, 2) array of Cartesian points."""
        points = np.asarray(points, float)
        return self(points[:, 0], points[:, 1])

    def on_circle(self, radius: float, n_samples: int) -> np.ndarray:
        """Values at n_samples equally spaced points on |x| = radius."""
        theta = 2.0 * np.pi * np.arange(n_samples) / n_samples
        return self.polar(np.full(n_samples, float(radius)), theta)
