"""CSV, legacy-VTK and run-manifest writers.

CSV numbers carry 17 significant digits so outputs are byte-stable across
runs; VTK files are ASCII structured-points datasets with the scalar fields
attached at cell centers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .grid import Grid, ScalarField

__all__ = ["RunManifest", "write_manifest", "write_csv", "write_vtk_structured_points"]


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17e")
    return str(value)


def write_csv(path: str | Path, header: list[str], rows) -> Path:
    path = Path(path)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


@dataclass
class RunManifest:
    """Reproducibility record, written before any heavy computation starts."""

    command: str
    case_name: str
    version: str
    config_text: str
    outputs: list[str] = field(default_factory=list)


CONFIG_DELIM = "--- config ---"


def write_manifest(path: str | Path, manifest: RunManifest) -> Path:
    path = Path(path)
    lines = [
        f"command: {manifest.command}",
        f"case: {manifest.case_name}",
        f"version: {manifest.version}",
        "outputs:",
    ]
    lines += [f"  - {name}" for name in manifest.outputs]
    lines.append(CONFIG_DELIM)
    lines.append(manifest.config_text.rstrip("\n"))
    path.write_text("\n".join(lines) + "\n")
    return path


def read_manifest_config(path: str | Path) -> str:
    """Recover the echoed configuration text from a manifest file."""
    text = Path(path).read_text()
    _, _, config = text.partition(CONFIG_DELIM + "\n")
    return config


def write_vtk_structured_points(
    path: str | Path,
    grid: Grid,
    fields: dict[str, ScalarField],
    title: str = "levelset-kit output",
) -> Path:
    """ASCII legacy VTK structured-points file with cell-centered scalars.

    Point coordinates are the cell centers; values stream x-fastest as the
    format requires.
    """
    path = Path(path)
    dims = list(grid.shape) + [1] * (3 - grid.dim)
    spacing = list(grid.dx) + [1.0] * (3 - grid.dim)
    origin = [grid.lo[a] + 0.5 * grid.dx[a] for a in range(grid.dim)] + [0.0] * (3 - grid.dim)
    n_points = int(np.prod(dims))

    parts = [
        "# vtk DataFile Version 3.0",
        title,
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        "DIMENSIONS {} {} {}".format(*dims),
        "ORIGIN {} {} {}".format(*(format(v, ".17e") for v in origin)),
        "SPACING {} {} {}".format(*(format(v, ".17e") for v in spacing)),
        f"POINT_DATA {n_points}",
    ]
    for name, f in fields.items():
        if f.grid != grid:
            raise ValueError(f"field {name!r} lives on a different grid")
        parts.append(f"SCALARS {name} double 1")
        parts.append("LOOKUP_TABLE default")
        # VTK streams x fastest; our arrays index x first, so transpose.
        flat = f.interior.T.ravel()
        parts.extend(format(v, ".17e") for v in flat)
    path.write_text("\n".join(parts) + "\n")
    return path
