"""Discrete derivatives on the grid and mapping-consistent derivative formulas.

Cell-centered first derivatives use second-order central differences; second
derivatives are gradients of gradients with the same stencil.  Face gradients
use the two-point normal difference plus four-point tangential averages, so a
face value sees exactly the cells that the finite-volume fluxes see.

``mapped_gradient`` / ``mapped_hessian`` evaluate the derivatives of alpha
through a mapping function psi:

    grad(alpha)  = F(alpha) grad(psi)
    hess(alpha)  = F(alpha) [hess(psi) + grad(psi) grad(psi)^T dF/dalpha / F]

which, for the signed-distance mapping, localizes all derivative information
in the interface band and is what makes the curvature second-order accurate.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .grid import Grid, ScalarField, VectorField
from .mappings import (
    InterfaceParams,
    MappingKind,
    Psi0,
    Psi0Prime,
    Psi1,
    RawAlpha,
    delta_of_alpha,
    gradient_factor,
    mapped_values,
    zeta_of_alpha,
)

__all__ = [
    "DerivativeBundle",
    "center_gradient",
    "face_gradients",
    "unit_normals",
    "mapped_gradient",
    "mapped_hessian",
    "curvature_field",
]

NORMAL_GUARD = 1e-14
CURVATURE_GRAD_GUARD = 1e-8
BAND = (0.05, 0.95)


def _sl(ndim: int, axis: int, s) -> tuple:
    idx: list = [slice(None)] * ndim
    idx[axis] = s
    return tuple(idx)


def _central_diff(padded: np.ndarray, axis: int, dx: float) -> np.ndarray:
    """Central difference along one axis; valid everywhere except the outermost layer.

    The outermost layer is edge-replicated so downstream code never sees
    uninitialized data (it must not be used in results).
    """
    nd = padded.ndim
    out = np.empty_like(padded)
    out[_sl(nd, axis, slice(1, -1))] = (
        padded[_sl(nd, axis, slice(2, None))] - padded[_sl(nd, axis, slice(0, -2))]
    ) / (2.0 * dx)
    out[_sl(nd, axis, 0)] = out[_sl(nd, axis, 1)]
    out[_sl(nd, axis, -1)] = out[_sl(nd, axis, -2)]
    return out


def _central_gradients(padded: np.ndarray, grid: Grid) -> list[np.ndarray]:
    return [_central_diff(padded, a, grid.dx[a]) for a in range(grid.dim)]


def center_gradient(field: ScalarField) -> VectorField:
    """Cell-centered gradient by second-order central differences.

    Ghosts must be filled; components are valid on the interior plus one ghost
    ring, which is enough to take a second gradient on the interior.
    """
    comps = _central_gradients(field.values, field.grid)
    return VectorField.from_arrays(field.grid, comps)


def _face_window(grid: Grid, axis: int, layer: slice, shift_axis: int | None = None, shift: int = 0) -> tuple:
    """Padded index tuple selecting one cell layer adjacent to the axis faces.

    Non-axis directions are restricted to interior cells, optionally shifted
    by one for the tangential stencils (ghost >= 2 keeps the stops negative).
    """
    idx = [slice(grid.ghost, -grid.ghost)] * grid.dim
    idx[axis] = layer
    if shift_axis is not None:
        idx[shift_axis] = slice(grid.ghost + shift, -grid.ghost + shift)
    return tuple(idx)


def _face_layers(grid: Grid, axis: int) -> tuple[slice, slice]:
    """Padded slices of the cell layers left/right of every axis face."""
    g = grid.ghost
    n = grid.shape[axis]
    return slice(g - 1, g + n), slice(g, g + n + 1)


def _face_average(cell_pad: np.ndarray, grid: Grid, axis: int) -> np.ndarray:
    """Linear interpolation of a cell-centered array to the axis faces."""
    left, right = _face_layers(grid, axis)
    return 0.5 * (cell_pad[_face_window(grid, axis, left)] + cell_pad[_face_window(grid, axis, right)])


def _face_gradient_arrays(padded: np.ndarray, grid: Grid, axis: int) -> np.ndarray:
    nd = grid.dim
    left, right = _face_layers(grid, axis)
    face_shape = tuple(grid.shape[a] + 1 if a == axis else grid.shape[a] for a in range(nd))
    out = np.empty((nd,) + face_shape, dtype=np.float64)
    out[axis] = (
        padded[_face_window(grid, axis, right)] - padded[_face_window(grid, axis, left)]
    ) / grid.dx[axis]
    for b in range(nd):
        if b == axis:
            continue
        up = padded[_face_window(grid, axis, left, b, +1)] + padded[_face_window(grid, axis, right, b, +1)]
        dn = padded[_face_window(grid, axis, left, b, -1)] + padded[_face_window(grid, axis, right, b, -1)]
        out[b] = (up - dn) / (4.0 * grid.dx[b])
    return out


def face_gradients(field: ScalarField, axis: int) -> np.ndarray:
    """Full gradient vector at every face of interior cells along ``axis``.

    Returns an array of shape (dim,) + face_shape where face_shape equals the
    interior shape with ``axis`` extended by one.  The component along
    ``axis`` is the compact two-point difference across the face; tangential
    components are four-point averages of the adjacent cell columns.
    """
    return _face_gradient_arrays(field.values, field.grid, axis)


def unit_normals(psi: ScalarField, guard: float = NORMAL_GUARD) -> VectorField:
    """Cell-centered unit normals grad(psi) / (|grad(psi)| + guard).

    Degenerate cells (flat psi) yield a zero vector instead of NaN.
    """
    grads = _central_gradients(psi.values, psi.grid)
    mag = np.sqrt(sum(gc * gc for gc in grads))
    denom = mag + guard
    return VectorField.from_arrays(psi.grid, [gc / denom for gc in grads])


def _psi_first_and_second(
    psi_pad: np.ndarray, grid: Grid
) -> tuple[list[np.ndarray], list[list[np.ndarray]]]:
    """First derivatives of psi and the symmetric second-derivative table.

    Each unordered pair (i, j) is computed once and shared, so symmetry is
    exact by construction.
    """
    first = _central_gradients(psi_pad, grid)
    second: list[list[np.ndarray]] = [[None] * grid.dim for _ in range(grid.dim)]  # type: ignore[list-item]
    for i in range(grid.dim):
        for j in range(i, grid.dim):
            dij = _central_diff(first[i], j, grid.dx[j])
            second[i][j] = dij
            second[j][i] = dij
    return first, second


@dataclass
class DerivativeBundle:
    """Gradient and symmetric Hessian of alpha, one entry per axis pair."""

    grad: VectorField
    hessian: np.ndarray  # shape (dim, dim) + padded_shape, hessian[i, j] is d2/dxi dxj


def mapped_gradient(alpha: ScalarField, kind: MappingKind, params: InterfaceParams) -> VectorField:
    """Gradient of alpha evaluated through the mapping function of ``kind``.

    grad(alpha) = F(alpha) * grad(psi) with psi the mapped field; for RawAlpha
    this reduces to the plain central-difference gradient.
    """
    grid = alpha.grid
    psi_pad = mapped_values(alpha.values, kind, params)
    F = gradient_factor(alpha.values, kind, params)
    comps = [F * gp for gp in _central_gradients(psi_pad, grid)]
    return VectorField.from_arrays(grid, comps)


def _alpha_hessian_arrays(
    alpha: ScalarField, kind: MappingKind, params: InterfaceParams
) -> tuple[list[np.ndarray], np.ndarray]:
    grid = alpha.grid
    a = alpha.values
    psi_pad = mapped_values(a, kind, params)
    psi_i, psi_ij = _psi_first_and_second(psi_pad, grid)
    nd = grid.dim
    hess = np.empty((nd, nd) + grid.padded_shape, dtype=np.float64)

    if isinstance(kind, RawAlpha):
        grad = list(psi_i)
        for i in range(nd):
            for j in range(i, nd):
                hess[i, j] = psi_ij[i][j]
                hess[j, i] = hess[i, j]
        return grad, hess

    if isinstance(kind, (Psi0, Psi0Prime)):
        delta = delta_of_alpha(a)
        w = delta / params.eps_h
        off = (1.0 - 2.0 * a) / params.eps_h
        grad = [w * psi_i[i] for i in range(nd)]
        for i in range(nd):
            for j in range(i, nd):
                hess[i, j] = w * (psi_ij[i][j] + psi_i[i] * psi_i[j] * off)
                hess[j, i] = hess[i, j]
        return grad, hess

    if isinstance(kind, Psi1):
        gam = kind.gamma
        a = np.clip(a, 0.0, 1.0)
        delta = delta_of_alpha(a)
        zeta = zeta_of_alpha(a, gam)
        d1g = delta ** (1.0 - gam)
        with np.errstate(divide="ignore", invalid="ignore"):
            d12g = np.where(delta > 0.0, delta ** (1.0 - 2.0 * gam), 0.0)
        lead = d1g * zeta * zeta / gam
        cross = (2.0 * zeta**3 / gam) * d1g * ((1.0 - a) ** (1.0 - gam) - a ** (1.0 - gam)) + (
            zeta**4 * (1.0 - gam) / gam**2
        ) * (1.0 - 2.0 * a) * d12g
        grad = [lead * psi_i[i] for i in range(nd)]
        for i in range(nd):
            for j in range(i, nd):
                hess[i, j] = lead * psi_ij[i][j] + cross * psi_i[i] * psi_i[j]
                hess[j, i] = hess[i, j]
        return grad, hess

    raise TypeError(f"unknown mapping kind {kind!r}")


def mapped_hessian(alpha: ScalarField, kind: MappingKind, params: InterfaceParams) -> DerivativeBundle:
    """First and second derivatives of alpha through the mapping of ``kind``."""
    grad, hess = _alpha_hessian_arrays(alpha, kind, params)
    return DerivativeBundle(
        grad=VectorField.from_arrays(alpha.grid, grad),
        hessian=hess,
    )


def _pair_sum_curvature(
    first: list[np.ndarray], second, nd: int
) -> tuple[np.ndarray, np.ndarray]:
    """Numerator of the curvature formula and the squared gradient magnitude.

    ``second[i][j]`` must give the (i, j) second derivative; both the list
    table and the stacked ndarray layout index that way.
    """
    num = np.zeros_like(first[0])
    for i in range(nd):
        for j in range(i + 1, nd):
            num += (
                first[i] * first[i] * second[j][j]
                + first[j] * first[j] * second[i][i]
                - 2.0 * first[i] * first[j] * second[i][j]
            )
    mag2 = sum(f * f for f in first)
    return num, mag2


def curvature_field(
    alpha: ScalarField,
    kind: MappingKind,
    params: InterfaceParams,
    band: tuple[float, float] = BAND,
    full_field: bool = False,
    grad_guard: float = CURVATURE_GRAD_GUARD,
) -> ScalarField:
    """Interface curvature of the alpha iso-surfaces, from mapped derivatives.

    For the signed-distance mappings the formula is evaluated on psi:
    kappa = sum over axis pairs of
    psi_i^2 [psi_jj + psi_j^2 (1-2 alpha)/eps_h] + ... - 2 psi_i psi_j [...]
    divided by |grad psi|^3.  The (1-2 alpha) contributions vanish on the
    interface and keep the expression consistent with the alpha derivatives
    away from it.  For Psi1 and RawAlpha the same pair sum runs on the alpha
    derivatives directly, over |grad alpha|^3.

    The result is restricted to cells with band[0] <= alpha <= band[1] (zero
    elsewhere) unless ``full_field``; cells whose gradient magnitude falls
    below ``grad_guard`` are set to zero and, when inside the band, reported
    with a warning.
    """
    grid = alpha.grid
    a = alpha.values
    nd = grid.dim

    if isinstance(kind, (Psi0, Psi0Prime)):
        psi_pad = mapped_values(a, kind, params)
        psi_i, psi_ij = _psi_first_and_second(psi_pad, grid)
        off = (1.0 - 2.0 * a) / params.eps_h
        bij = [
            [psi_ij[i][j] + psi_i[i] * psi_i[j] * off for j in range(nd)] for i in range(nd)
        ]
        num, mag2 = _pair_sum_curvature(psi_i, bij, nd)
    else:
        first, hess = _alpha_hessian_arrays(alpha, kind, params)
        num, mag2 = _pair_sum_curvature(first, hess, nd)

    mag = np.sqrt(mag2)
    ok = mag > grad_guard
    with np.errstate(divide="ignore", invalid="ignore"):
        kappa = np.where(ok, num / (mag2 * mag), 0.0)

    in_band = (a >= band[0]) & (a <= band[1])
    degenerate = int(np.count_nonzero(in_band[grid.interior] & ~ok[grid.interior]))
    if degenerate:
        warnings.warn(
            f"curvature undefined in {degenerate} band cells (gradient below {grad_guard:g})",
            RuntimeWarning,
            stacklevel=2,
        )
    if not full_field:
        kappa = np.where(in_band, kappa, 0.0)
    return ScalarField(grid, kappa)
