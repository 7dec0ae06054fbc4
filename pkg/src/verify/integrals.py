"""Integrals along level curves."""
from typing import Callable, Tuple, Union

import numpy as np

from src.grid.domain import ScalarField, VectorField
from src.grid.interpolation import GridInterpolator
from src.levels.topology import LevelCurve

CurveIntegrand = Union[float, ScalarField, GridInterpolator, Callable[[np.ndarray, np.ndarray], np.ndarray]]


def segment_geometry(curve: LevelCurve) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Midpoints, lengths and unit tangents of the polyline segments."""
    v = curve.vertices
    delta = np.diff(v, axis=0)
    lengths = np.hypot(delta[:, 0], delta[:, 1])
    safe = np.where(lengths > 0, lengths, 1.0)
    return 0.5 * (v[:-1] + v[1:]), lengths, delta / safe[:, None]


def evaluate_on(f: CurveIntegrand, points: np.ndarray) -> np.ndarray:
    """Evaluate an integrand at (N, 2) points."""
    if isinstance(f, ScalarField):
        f = GridInterpolator.from_field(f)
    if isinstance(f, GridInterpolator):
        return f.at_points(points)
    if callable(f):
        return np.broadcast_to(np.asarray(f(points[:, 0], points[:, 1]), dtype=float), len(points))
    return np.full(len(points), float(f))


def line_integral(curve: LevelCurve, f: CurveIntegrand) -> float:
    """Integral of f over the polyline with f sampled at segment midpoints.

    Args:
        curve: Level curve (closed for a full H^1 integral)
        f: Constant, field, interpolator or vectorized f(x1, x2)

    Returns:
        Sum over segments of f(midpoint) * segment length
    """
    mids, lengths, _ = segment_geometry(curve)
    if not len(lengths):
        return 0.0
    return float(np.sum(evaluate_on(f, mids) * lengths))


class GradientSampler:
    """Interpolated gradient of u and the unit normal grad u / |grad u|."""

    def __init__(self, grad: VectorField):
        self.gx = GridInterpolator(grad.grid, grad.x)
        self.gy = GridInterpolator(grad.grid, grad.y)

    def at(self, points: np.ndarray) -> np.ndarray:
        """Gradient at (N, 2) points, shape (N, 2)."""
        return np.column_stack([self.gx.at_points(points), self.gy.at_points(points)])

    def normals(self, points: np.ndarray) -> np.ndarray:
        g = self.at(points)
        norm = np.hypot(g[:, 0], g[:, 1])
        return g / np.where(norm > 0, norm, 1.0)[:, None]


def normal_agreement(curve: LevelCurve, normals: np.ndarray) -> float:
    """Fraction of segments where the normal points into Int gamma.

    grad u / |grad u| is the outward normal of Ext gamma(t), so on a
    correctly oriented level curve it points towards the obstacle.
    """
    _, lengths, tangents = segment_geometry(curve)
    # Outward normal of the enclosed region for a counter-clockwise polygon
    outward = np.column_stack([tangents[:, 1], -tangents[:, 0]])
    if curve.signed_area < 0:
        outward = -outward
    inward = np.einsum("ij,ij->i", normals, -outward) > 0
    return float(np.sum(lengths[inward]) / max(np.sum(lengths), 1e-300))
