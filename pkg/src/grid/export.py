"""CSV export of fields and tabular series for plotting."""
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from src.config import CSV_FLOAT_FORMAT
from src.grid.domain import ScalarField

FIELD_COLUMNS = ("r", "theta", "x1", "x2", "value")


def field_table(field: ScalarField) -> np.ndarray:
    """Rows (r, theta, x1, x2, value), radial-major node order."""
    grid = field.grid
    return np.column_stack([
        grid.r.ravel(),
        grid.theta.ravel(),
        grid.x.ravel(),
        grid.y.ravel(),
        field.flat,
    ])


def write_table(
    path: Path,
    columns: Sequence[str],
    rows: Iterable[Sequence[float]],
) -> Path:
    """Write a numeric table as CSV with 17 significant digits.

    Args:
        path: Destination file (parent directories are created)
        columns: Header names
        rows: Numeric rows, or a 2D array

    Returns:
        The written path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = np.asarray(list(rows) if not isinstance(rows, np.ndarray) else rows, dtype=float)
    if data.size == 0:
        data = data.reshape(0, len(columns))
    np.savetxt(
        path,
        data,
        fmt=CSV_FLOAT_FORMAT,
        delimiter=",",
        header=",".join(columns),
        comments="",
    )
    return path


def write_field_csv(field: ScalarField, path: Path) -> Path:
    """Write a field as CSV with columns r, theta, x1, x2, value."""
    return write_table(path, FIELD_COLUMNS, field_table(field))


def read_field_csv(path: Path, grid) -> ScalarField:
    """Load a field written by write_field_csv back onto its grid."""
    data = np.loadtxt(Path(path), delimiter=",", skiprows=1, ndmin=2)
    if data.shape[0] != grid.spec.node_count:
        raise ValueError(
            f"{path} holds {data.shape[0]} nodes, grid has {grid.spec.node_count}"
        )
    return ScalarField(grid, data[:, 4].reshape(grid.shape), {"source": str(path)})
