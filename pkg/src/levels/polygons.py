"""Planar polyline measures and point-in-polygon tests."""
import numpy as np

# Bound on points x vertices per vectorized block
_BLOCK = 4_000_000


def _closed(vertices: np.ndarray) -> np.ndarray:
    v = np.asarray(vertices, dtype=float)
    if len(v) and not np.array_equal(v[0], v[-1]):
        v = np.vstack([v, v[:1]])
    return v


def polyline_length(vertices: np.ndarray) -> float:
    """Sum of segment lengths (no closing segment is added)."""
    v = np.asarray(vertices, dtype=float)
    if len(v) < 2:
        return 0.0
    return float(np.sum(np.hypot(*np.diff(v, axis=0).T)))


def signed_area(vertices: np.ndarray) -> float:
    """Shoelace area; positive for counter-clockwise polygons."""
    v = _closed(vertices)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.sum(x[:-1] * y[1:] - x[1:] * y[:-1]))


def points_in_polygon(points: np.ndarray, polygon: np.ndarray) -> np.ndarray:
    """Crossing-number (even-odd) inclusion test for many points.

    A horizontal ray is cast to the right of each point; an edge counts
    when it straddles the ray's height with the intersection right of the
    point.

    Args:
        points: (N, 2) query points
        polygon: (M, 2) vertices, closed or not

    Returns:
        Boolean array of length N
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    poly = _closed(polygon)
    x0, y0 = poly[:-1, 0], poly[:-1, 1]
    x1, y1 = poly[1:, 0], poly[1:, 1]
    dy = np.where(y1 == y0, 1.0, y1 - y0)

    inside = np.zeros(len(pts), dtype=bool)
    step = max(1, _BLOCK // max(1, len(x0)))
    for start in range(0, len(pts), step):
        px = pts[start:start + step, 0:1]
        py = pts[start:start + step, 1:2]
        straddle = (y0 <= py) != (y1 <= py)
        x_cross = x0 + (py - y0) / dy * (x1 - x0)
        crossings = np.count_nonzero(straddle & (px < x_cross), axis=1)
        inside[start:start + step] = crossings % 2 == 1
    return inside


def contains_origin(polygon: np.ndarray) -> bool:
    return bool(points_in_polygon(np.zeros((1, 2)), polygon)[0])


def self_intersections(vertices: np.ndarray, tol: float = 1e-12) -> int:
    """Count crossings between non-adjacent segments of a closed polyline."""
    v = _closed(vertices)
    a, b = v[:-1], v[1:]
    k = len(a)
    if k < 4:
        return 0

    def orient(p, q, r):
        return (q[..., 0] - p[..., 0]) * (r[..., 1] - p[..., 1]) - (q[..., 1] - p[..., 1]) * (r[..., 0] - p[..., 0])

    count = 0
    step = max(1, _BLOCK // k)
    idx = np.arange(k)
    for start in range(0, k, step):
        rows = idx[start:start + step]
        pa, pb = a[rows][:, None, :], b[rows][:, None, :]
        qa, qb = a[None, :, :], b[None, :, :]
        d1 = orient(pa, pb, qa)
        d2 = orient(pa, pb, qb)
        d3 = orient(qa, qb, pa)
        d4 = orient(qa, qb, pb)
        proper = (d1 * d2 < -tol) & (d3 * d4 < -tol)
        gap = np.abs(rows[:, None] - idx[None, :])
        adjacent = (gap <= 1) | (gap == k - 1)
        count += int(np.count_nonzero(proper & ~adjacent & (rows[:, None] < idx[None, :])))
    return count
