"""
CSV emission. Files are UTF-8 with LF line endings and 17 significant
digits so that a fixed configuration always produces identical bytes.
"""

import csv
import logging
from collections.abc import Callable, Iterable
from pathlib import Path

from hilfer_impulse.solver import PiecewiseTrajectory

logger = logging.getLogger(__name__)

TRAJECTORY_HEADER = ["t", "x", "weighted_x", "segment_kind", "segment_index"]
CLOSED_FORM_HEADER = ["t", "x"]


def format_number(value: float) -> str:
    return format(float(value), ".17g")


def trajectory_rows(trajectory: PiecewiseTrajectory) -> Iterable[list[str]]:
    """
    One row per stored grid point, in time order. Windows and point
    impulses repeat x in the weighted column.
    """
    for segment in trajectory:
        values = segment.values
        for t, x, weighted in zip(segment.grid, values, segment.weighted_values):
            yield [
                format_number(t),
                format_number(x),
                format_number(weighted),
                segment.kind,
                str(segment.index),
            ]


def closed_form_rows(
    trajectory: PiecewiseTrajectory, function: Callable[[float], float]
) -> Iterable[list[str]]:
    """
    The closed form sampled on the trajectory's own grid, skipping active
    lower points where the exact solution is singular or undefined.
    """
    for segment in trajectory:
        for t in segment.grid:
            if segment.kind == "active" and t == segment.lower:
                continue
            yield [format_number(t), format_number(function(float(t)))]


def write_rows(path: str | Path, header: list[str], rows: Iterable[list[str]]) -> int:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)
            count += 1
    logger.info(f"Wrote {count} rows to {path}")
    return count


def write_trajectory(path: str | Path, trajectory: PiecewiseTrajectory) -> int:
    return write_rows(path, TRAJECTORY_HEADER, trajectory_rows(trajectory))


def write_closed_form(
    path: str | Path, trajectory: PiecewiseTrajectory, function: Callable[[float], float]
) -> int:
    return write_rows(path, CLOSED_FORM_HEADER, closed_form_rows(trajectory, function))

