"""Marching squares on structured grids with an optional periodic column axis.

Contours are traced in fractional index space (fi, fj): a vertex on the
edge between nodes (i, j) and (i + 1, j) sits at (i + s, j), one on the
edge between (i, j) and (i, j + 1) at (i, j + s). Callers map these to
physical coordinates.
"""
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from src.errors import ExtractionError

EdgeId = Tuple[str, int, int]

# Cell corners: c0=(i, j), c1=(i+1, j), c2=(i+1, j+1), c3=(i, j+1).
# Cell edges: e0=c0-c1, e1=c1-c2, e2=c3-c2, e3=c0-c3.
_CORNER_EDGES = {0: (0, 3), 1: (0, 1), 2: (1, 2), 3: (2, 3)}


@dataclass
class IndexChain:
    """A traced contour component in index space.

    Attributes:
        points: (K, 2) fractional (fi, fj) vertices; closed chains do not
            repeat their first vertex
        closed: Whether the chain is a cycle
        touches_boundary: Whether an end lies on a non-periodic grid border
    """
    points: np.ndarray
    closed: bool
    touches_boundary: bool


def _cell_edges(i: int, j: int, m: int) -> Tuple[EdgeId, EdgeId, EdgeId, EdgeId]:
    jn = (j + 1) % m
    return (("r", i, j), ("a", i + 1, j), ("r", i, jn), ("a", i, j))


def trace_contours(values: np.ndarray, level: float, periodic: bool = True) -> List[IndexChain]:
    """Extract the level set {values = level} as chained polylines.

    Nodes with value > level count as above. Saddle cells are resolved by
    comparing the cell average with the level.

    Args:
        values: (n, m) nodal values; axis 1 wraps around when periodic
        level: Contour value
        periodic: Treat column m - 1 as adjacent to column 0

    Returns:
        List of IndexChain components

    Raises:
        ExtractionError: A chain ends on an interior edge
    """
    v = np.asarray(values, dtype=float)
    n, m = v.shape
    above = v > level
    cols = m if periodic else m - 1

    c0 = above[:-1, :cols]
    c1 = above[1:, :cols]
    c2 = np.roll(above, -1, axis=1)[1:, :cols]
    c3 = np.roll(above, -1, axis=1)[:-1, :cols]
    case = c0.astype(int) | (c1.astype(int) << 1) | (c2.astype(int) << 2) | (c3.astype(int) << 3)
    active = np.argwhere((case != 0) & (case != 15))

    def crossing(edge: EdgeId) -> Tuple[float, float]:
        kind, i, j = edge
        if kind == "r":
            a, b = v[i, j], v[i + 1, j]
            return i + (level - a) / (b - a), float(j)
        jn = (j + 1) % m
        a, b = v[i, j], v[i, jn]
        return float(i), j + (level - a) / (b - a)

    neighbours: Dict[EdgeId, List[EdgeId]] = defaultdict(list)
    for i, j in active:
        i, j = int(i), int(j)
        edges = _cell_edges(i, j, m)
        corners = (c0[i, j], c1[i, j], c2[i, j], c3[i, j])
        crossed = [k for k, (p, q) in enumerate(((0, 1), (1, 2), (3, 2), (0, 3))) if corners[p] != corners[q]]
        if len(crossed) == 2:
            pairs = [tuple(crossed)]
        else:
            centre_above = v[i, j] + v[i + 1, j] + v[i + 1, (j + 1) % m] + v[i, (j + 1) % m] > 4 * level
            # Separate the corners that disagree with the centre
            isolated = [k for k in range(4) if corners[k] != centre_above]
            pairs = [_CORNER_EDGES[k] for k in isolated]
        for e1, e2 in pairs:
            neighbours[edges[e1]].append(edges[e2])
            neighbours[edges[e2]].append(edges[e1])

    def on_border(edge: EdgeId) -> bool:
        kind, i, j = edge
        if kind == "a":
            return i == 0 or i == n - 1
        return not periodic and (j == 0 or j == m - 1)

    chains: List[IndexChain] = []
    visited = set()

    def walk(start: EdgeId) -> List[EdgeId]:
        path = [start]
        visited.add(start)
        prev, current = None, start
        while True:
            nxt = [e for e in neighbours[current] if e != prev and e not in visited]
            if not nxt:
                return path
            prev, current = current, nxt[0]
            visited.add(current)
            path.append(current)

    ends = [e for e, nb in neighbours.items() if len(nb) == 1]
    for edge in ends:
        if not on_border(edge):
            raise ExtractionError(f"open contour chain ends on interior edge {edge} at level {level:g}")
    for start in sorted(ends):
        if start in visited:
            continue
        path = walk(start)
        chains.append(IndexChain(np.array([crossing(e) for e in path]), False, True))
    for start in sorted(neighbours):
        if start in visited:
            continue
        path = walk(start)
        points = np.array([crossing(e) for e in path])
        touches = any(on_border(e) for e in path)
        chains.append(IndexChain(points, True, touches))
    return chains

