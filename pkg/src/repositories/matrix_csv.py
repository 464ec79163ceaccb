"""module for matrix CSV files: row-major, one "re,im" cell per entry"""

import csv
from pathlib import Path

import numpy as np

from ..core.exceptions import ConfigValidationError


def format_number(value: float) -> str:
    return f"{value:.12g}"


def _format_cell(z: complex) -> str:
    return f"{format_number(z.real)},{format_number(z.imag)}"


def _parse_cell(cell: str) -> complex:
    re_part, _, im_part = cell.strip().partition(",")
    return complex(float(re_part), float(im_part or 0.0))


def write_matrix_csv(path: str | Path, matrix: np.ndarray) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        for row in np.asarray(matrix, dtype=np.complex128):
            writer.writerow([_format_cell(z) for z in row])
    return path


def read_matrix_csv(path: str | Path) -> np.ndarray:
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as handle:
            rows = [[_parse_cell(cell) for cell in row] for row in csv.reader(handle) if row]
    except OSError as exc:
        raise ConfigValidationError(f"cannot read matrix file {path}: {exc}") from exc
    except ValueError as exc:
        raise ConfigValidationError(f"malformed matrix cell in {path}: {exc}") from exc

    if not rows or any(len(row) != len(rows) for row in rows):
        raise ConfigValidationError(f"matrix file {path} is not a square matrix")
    return np.array(rows, dtype=np.complex128)
