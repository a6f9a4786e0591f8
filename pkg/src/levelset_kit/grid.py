"""Uniform Cartesian grids with ghost layers and cell-centered fields.

Cells are indexed per axis with x first; arrays are stored padded, i.e. with
``ghost`` extra layers on every side.  Cell ``i`` of axis ``a`` has its center
at ``lo[a] + (i + 1/2) * dx[a]``.  Two ghost layers are the default because
the widest stencils used downstream (slope-limited reconstruction and the
tangential part of the face-gradient stencil) reach two cells deep.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Grid",
    "ScalarField",
    "VectorField",
    "build_grid",
    "fill_neumann_ghosts",
    "fill_periodic_ghosts",
    "integrate_field",
]


@dataclass(frozen=True)
class Grid:
    """Geometry of a uniform, axis-aligned box mesh (1D, 2D or 3D)."""

    dim: int
    shape: tuple[int, ...]
    lo: tuple[float, ...]
    hi: tuple[float, ...]
    ghost: int = 2

    def __post_init__(self) -> None:
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2 or 3, got {self.dim}")
        if len(self.shape) != self.dim or len(self.lo) != self.dim or len(self.hi) != self.dim:
            raise ValueError("shape/lo/hi must all have one entry per axis")
        if any(n < 8 for n in self.shape):
            raise ValueError(f"need at least 8 cells per axis, got {self.shape}")
        if self.ghost < 2:
            raise ValueError(f"ghost width must be >= 2, got {self.ghost}")
        if any(h <= l for l, h in zip(self.lo, self.hi)):
            raise ValueError(f"extent must be positive on every axis: lo={self.lo} hi={self.hi}")

    @property
    def dx(self) -> tuple[float, ...]:
        return tuple((h - l) / n for l, h, n in zip(self.lo, self.hi, self.shape))

    @property
    def cell_volume(self) -> float:
        return math.prod(self.dx)

    @property
    def padded_shape(self) -> tuple[int, ...]:
        return tuple(n + 2 * self.ghost for n in self.shape)

    @property
    def interior(self) -> tuple[slice, ...]:
        g = self.ghost
        return (slice(g, -g),) * self.dim

    def axis_centers(self, axis: int, ghosts: bool = False) -> np.ndarray:
        """Cell-center coordinates along one axis (optionally including ghosts)."""
        n = self.shape[axis]
        d = self.dx[axis]
        g = self.ghost if ghosts else 0
        i = np.arange(-g, n + g, dtype=np.float64)
        return self.lo[axis] + (i + 0.5) * d

    def cell_centers(self, ghosts: bool = False) -> tuple[np.ndarray, ...]:
        """Broadcastable coordinate arrays, one per axis (sparse meshgrid)."""
        axes = [self.axis_centers(a, ghosts=ghosts) for a in range(self.dim)]
        return tuple(np.meshgrid(*axes, indexing="ij", sparse=True))


def build_grid(
    dim: int,
    cells_per_axis: int | tuple[int, ...],
    extent: tuple[float, float] | tuple[tuple[float, float], ...] = (0.0, 1.0),
    ghost_width: int = 2,
) -> Grid:
    """Construct a grid from a cell count and per-axis extent.

    ``extent`` is either a single (lo, hi) pair applied to every axis or one
    pair per axis.
    """
    if isinstance(cells_per_axis, int):
        shape = (cells_per_axis,) * dim
    else:
        shape = tuple(int(n) for n in cells_per_axis)
    ext = np.asarray(extent, dtype=np.float64)
    if ext.shape == (2,):
        pairs = [tuple(ext)] * dim
    elif ext.shape == (dim, 2):
        pairs = [tuple(p) for p in ext]
    else:
        raise ValueError(f"extent must be (lo, hi) or one pair per axis, got shape {ext.shape}")
    lo = tuple(p[0] for p in pairs)
    hi = tuple(p[1] for p in pairs)
    return Grid(dim=dim, shape=shape, lo=lo, hi=hi, ghost=ghost_width)


@dataclass
class ScalarField:
    """Cell-centered scalar values over a grid, stored with ghost layers."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.values.shape != self.grid.padded_shape:
            raise ValueError(
                f"field shape {self.values.shape} does not match padded grid shape "
                f"{self.grid.padded_shape}"
            )

    @classmethod
    def zeros(cls, grid: Grid) -> "ScalarField":
        return cls(grid, np.zeros(grid.padded_shape, dtype=np.float64))

    @classmethod
    def full(cls, grid: Grid, value: float) -> "ScalarField":
        return cls(grid, np.full(grid.padded_shape, float(value), dtype=np.float64))

    @classmethod
    def from_interior(cls, grid: Grid, interior: np.ndarray) -> "ScalarField":
        if interior.shape != grid.shape:
            raise ValueError(f"interior shape {interior.shape} != grid shape {grid.shape}")
        out = cls.zeros(grid)
        out.values[grid.interior] = interior
        return out

    @property
    def interior(self) -> np.ndarray:
        """View of the interior cells (no ghosts)."""
        return self.values[self.grid.interior]

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())


@dataclass
class VectorField:
    """One scalar component per grid axis."""

    grid: Grid
    components: tuple[ScalarField, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if len(self.components) != self.grid.dim:
            raise ValueError(
                f"expected {self.grid.dim} components, got {len(self.components)}"
            )

    @classmethod
    def from_arrays(cls, grid: Grid, arrays: list[np.ndarray]) -> "VectorField":
        return cls(grid, tuple(ScalarField(grid, a) for a in arrays))

    def arrays(self) -> list[np.ndarray]:
        return [c.values for c in self.components]


def _fill_neumann(values: np.ndarray, ghost: int) -> None:
    """Mirror the nearest interior slice into the ghost layers, axis by axis.

    Sequential per-axis filling also populates edge and corner ghost regions,
    which the tangential face-gradient stencil touches at boundary faces.
    """
    g = ghost
    for axis in range(values.ndim):
        idx_lo = [slice(None)] * values.ndim
        idx_src_lo = [slice(None)] * values.ndim
        idx_hi = [slice(None)] * values.ndim
        idx_src_hi = [slice(None)] * values.ndim
        for k in range(g):
            idx_lo[axis] = k
            idx_src_lo[axis] = g
            values[tuple(idx_lo)] = values[tuple(idx_src_lo)]
            idx_hi[axis] = -1 - k
            idx_src_hi[axis] = -1 - g
            values[tuple(idx_hi)] = values[tuple(idx_src_hi)]


def _fill_periodic(values: np.ndarray, ghost: int) -> None:
    g = ghost
    for axis in range(values.ndim):
        lo = [slice(None)] * values.ndim
        lo_src = [slice(None)] * values.ndim
        hi = [slice(None)] * values.ndim
        hi_src = [slice(None)] * values.ndim
        lo[axis] = slice(0, g)
        lo_src[axis] = slice(-2 * g, -g)
        hi[axis] = slice(-g, None)
        hi_src[axis] = slice(g, 2 * g)
        values[tuple(lo)] = values[tuple(lo_src)]
        values[tuple(hi)] = values[tuple(hi_src)]


def fill_neumann_ghosts(field: ScalarField) -> ScalarField:
    """Zero-gradient boundary fill: each ghost cell mirrors its nearest interior cell.

    Mutates the field's ghost layers in place and returns the field; interior
    values are untouched.  Idempotent.
    """
    _fill_neumann(field.values, field.grid.ghost)
    return field


def fill_periodic_ghosts(field: ScalarField) -> ScalarField:
    """Periodic boundary fill (wrap-around), used by translation tests."""
    _fill_periodic(field.values, field.grid.ghost)
    return field


def integrate_field(field: ScalarField) -> float:
    """Midpoint-rule integral over the interior: sum(value) * cell volume.

    Uses exact (compensated) summation so the result is independent of cell
    iteration order.
    """
    return math.fsum(field.interior.ravel().tolist()) * field.grid.cell_volume
