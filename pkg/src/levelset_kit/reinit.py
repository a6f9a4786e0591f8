"""Pseudo-time re-initialization of the interface profile.

The conservative right-hand side integrates the compression-diffusion flux

    C (eps_h F(alpha) |grad psi| - delta(alpha)) n_Gamma

over the faces of each control volume.  For the signed-distance mapping the
face coefficient reduces to delta_f (|grad psi0|_f - 1), so the stationary
states are exactly the prescribed profile (|grad psi0| = 1 in the band) and
any sharp 0/1 field (delta = 0 everywhere).

Face values of delta and of the chain-rule factor are linear interpolations
of the adjacent cell values; |grad psi| at a face uses the full face-gradient
vector; the interface normal is computed at cell centers and interpolated to
faces.  Pseudo-time integration is the three-stage TVD Runge-Kutta scheme in
incremental form, which leaves any field with a vanishing right-hand side
bit-for-bit unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .diagnostics import l1_change
from .differential import (
    NORMAL_GUARD,
    _central_gradients,
    _face_average,
    _face_gradient_arrays,
    _sl,
    curvature_field,
)
from .grid import Grid, ScalarField, _fill_neumann
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
)

__all__ = [
    "ReinitConfig",
    "ConvergenceTrace",
    "NumericalDivergenceError",
    "default_dtau",
    "face_interface_normals",
    "reinit_rhs",
    "reinit_rhs_nonconservative",
    "rk3_step",
    "reinitialize",
]

DIVERGENCE_FACTOR = 1e3
DIVERGENCE_FLOOR = 1e-16

# Numerical reading of the compact support of delta(alpha)/eps_h: faces whose
# interpolated weight falls below this carry no flux.  Without the floor,
# round-off noise in the saturated tail (where the log map amplifies alpha
# perturbations into large spurious |grad psi0| values) feeds back through
# the compression flux and grows exponentially on fine grids.
SUPPORT_FLOOR = 1e-12


class NumericalDivergenceError(RuntimeError):
    """Raised when the pseudo-time iteration blows up or produces non-finite values."""


def default_dtau(params: InterfaceParams, kind: MappingKind) -> float:
    """Default pseudo-time step D / C^2 = eps_h, halved for gamma below 1e-6."""
    dtau = params.D / (params.C * params.C)
    if isinstance(kind, (Psi1, Psi0Prime)) and kind.gamma < 1e-6:
        dtau *= 0.5
    return dtau


@dataclass
class ReinitConfig:
    """Numerical parameters of the re-initialization solver."""

    kind: MappingKind
    params: InterfaceParams
    dtau: float
    n_tau: int
    stop_l1: float | None = None
    form: Literal["conservative", "nonconservative"] = "conservative"
    freeze_normals: bool = False
    support_floor: float = SUPPORT_FLOOR

    def __post_init__(self) -> None:
        if not self.dtau > 0.0:
            raise ValueError(f"dtau must be positive, got {self.dtau}")
        if self.n_tau < 1:
            raise ValueError(f"n_tau must be >= 1, got {self.n_tau}")
        if self.form not in ("conservative", "nonconservative"):
            raise ValueError(f"unknown form {self.form!r}")


@dataclass
class ConvergenceTrace:
    """Per-step change norms recorded while iterating."""

    l1_per_step: list[float] = field(default_factory=list)

    @property
    def steps_run(self) -> int:
        return len(self.l1_per_step)


def _cell_normals(psi_pad: np.ndarray, grid: Grid) -> list[np.ndarray]:
    grads = _central_gradients(psi_pad, grid)
    mag = np.sqrt(sum(g * g for g in grads))
    denom = mag + NORMAL_GUARD
    return [g / denom for g in grads]


def face_interface_normals(
    alpha: ScalarField, kind: MappingKind, params: InterfaceParams
) -> list[np.ndarray]:
    """Face-interpolated interface-normal components, one array per axis.

    Entry ``a`` holds the a-component of the unit normal at the a-faces; this
    is the quantity the conservative flux projects on, and the object that
    gets frozen when the solver runs with constant normals.
    """
    grid = alpha.grid
    work = alpha.values.copy()
    _fill_neumann(work, grid.ghost)
    psi_pad = mapped_values(work, kind, params)
    ncomp = _cell_normals(psi_pad, grid)
    return [_face_average(ncomp[a], grid, a) for a in range(grid.dim)]


def _rhs_conservative(
    a_pad: np.ndarray,
    grid: Grid,
    kind: MappingKind,
    params: InterfaceParams,
    face_normals: list[np.ndarray] | None,
    support_floor: float = SUPPORT_FLOOR,
) -> np.ndarray:
    """Flux divergence of the re-initialization equation on the interior cells."""
    psi_pad = mapped_values(a_pad, kind, params)
    factor = gradient_factor(a_pad, kind, params)
    delta = delta_of_alpha(a_pad)
    if face_normals is None:
        ncomp = _cell_normals(psi_pad, grid)
    # The support floor only applies to the mapped kinds, whose flux carries a
    # delta factor; the unmapped diffusion flux is not interface-localized.
    localized = not isinstance(kind, RawAlpha)

    nd = grid.dim
    rhs = np.zeros(grid.shape, dtype=np.float64)
    for axis in range(nd):
        gvec = _face_gradient_arrays(psi_pad, grid, axis)
        mag_f = np.sqrt(sum(g * g for g in gvec))
        factor_f = _face_average(factor, grid, axis)
        delta_f = _face_average(delta, grid, axis)
        coef = params.C * (params.eps_h * factor_f * mag_f - delta_f)
        if localized:
            coef = np.where(delta_f > support_floor, coef, 0.0)
        if face_normals is None:
            n_f = _face_average(ncomp[axis], grid, axis)
        else:
            n_f = face_normals[axis]
        flux = coef * n_f
        hi = flux[_sl(nd, axis, slice(1, None))]
        lo = flux[_sl(nd, axis, slice(0, -1))]
        rhs += (hi - lo) / grid.dx[axis]
    return rhs


def reinit_rhs(
    alpha: ScalarField,
    cfg: ReinitConfig,
    face_normals: list[np.ndarray] | None = None,
) -> ScalarField:
    """Conservative right-hand side; ghost cells of the result are zero."""
    work = alpha.values.copy()
    _fill_neumann(work, alpha.grid.ghost)
    rhs = _rhs_conservative(
        work, alpha.grid, cfg.kind, cfg.params, face_normals, cfg.support_floor
    )
    return ScalarField.from_interior(alpha.grid, rhs)


def reinit_rhs_nonconservative(alpha: ScalarField, cfg: ReinitConfig) -> ScalarField:
    """Cell-centered expansion of the re-initialization right-hand side.

    Three terms: transport of the interface weight, transport of the
    distance-function defect, and the curvature contribution.  Only defined
    for the signed-distance mappings, where |grad psi| - 1 measures the
    defect; the curvature term carries the sign that makes the expansion
    agree with the conservative flux divergence.
    """
    if not isinstance(cfg.kind, (Psi0, Psi0Prime)):
        raise ValueError("non-conservative form is defined for the signed-distance mappings")
    grid = alpha.grid
    work = alpha.values.copy()
    _fill_neumann(work, grid.ghost)

    psi_pad = mapped_values(work, cfg.kind, cfg.params)
    delta = delta_of_alpha(work)
    grads = _central_gradients(psi_pad, grid)
    mag = np.sqrt(sum(g * g for g in grads))
    ncomp = [g / (mag + NORMAL_GUARD) for g in grads]
    defect = mag - 1.0

    grad_delta = _central_gradients(delta, grid)
    grad_defect = _central_gradients(defect, grid)
    kappa = curvature_field(
        ScalarField(grid, work), cfg.kind, cfg.params, full_field=True
    ).values

    term1 = sum(ncomp[a] * grad_delta[a] for a in range(grid.dim)) * defect
    term2 = sum(ncomp[a] * grad_defect[a] for a in range(grid.dim)) * delta
    term3 = kappa * defect * delta
    total = cfg.params.C * (term1 + term2 + term3)
    return ScalarField.from_interior(grid, total[grid.interior])


def _rhs_dispatch(
    a_pad: np.ndarray,
    grid: Grid,
    cfg: ReinitConfig,
    face_normals: list[np.ndarray] | None,
) -> np.ndarray:
    if cfg.form == "conservative":
        return _rhs_conservative(
            a_pad, grid, cfg.kind, cfg.params, face_normals, cfg.support_floor
        )
    f = ScalarField(grid, a_pad.copy())
    return reinit_rhs_nonconservative(f, cfg).interior


def _rk3_raw(
    a_pad: np.ndarray,
    grid: Grid,
    cfg: ReinitConfig,
    face_normals: list[np.ndarray] | None,
) -> np.ndarray:
    """One TVD-RK3 step in incremental form: u + (k0 + k1 + 4 k2) / 6."""
    interior = grid.interior
    g = grid.ghost
    dt = cfg.dtau

    _fill_neumann(a_pad, g)
    k0 = dt * _rhs_dispatch(a_pad, grid, cfg, face_normals)

    u1 = a_pad.copy()
    u1[interior] += k0
    _fill_neumann(u1, g)
    k1 = dt * _rhs_dispatch(u1, grid, cfg, face_normals)

    u2 = a_pad.copy()
    u2[interior] += 0.25 * (k0 + k1)
    _fill_neumann(u2, g)
    k2 = dt * _rhs_dispatch(u2, grid, cfg, face_normals)

    out = a_pad.copy()
    out[interior] += (k0 + k1 + 4.0 * k2) / 6.0
    _fill_neumann(out, g)
    return out


def rk3_step(
    alpha: ScalarField,
    cfg: ReinitConfig,
    face_normals: list[np.ndarray] | None = None,
) -> ScalarField:
    """Advance one pseudo-time step; raises if the result is not finite."""
    out = _rk3_raw(alpha.values.copy(), alpha.grid, cfg, face_normals)
    if not np.isfinite(out[alpha.grid.interior]).all():
        raise NumericalDivergenceError("non-finite values after pseudo-time step")
    return ScalarField(alpha.grid, out)


def reinitialize(alpha: ScalarField, cfg: ReinitConfig) -> tuple[ScalarField, ConvergenceTrace]:
    """Run up to ``n_tau`` pseudo-time steps, recording the change norm per step.

    Stops early when the norm drops below ``stop_l1`` (if set).  Raises
    ``NumericalDivergenceError`` if the norm grows a thousandfold above its
    first value or the field stops being finite.
    """
    grid = alpha.grid
    trace = ConvergenceTrace()
    face_normals = None
    if cfg.freeze_normals:
        face_normals = face_interface_normals(alpha, cfg.kind, cfg.params)

    current = alpha.copy()
    first_l1: float | None = None
    for _ in range(cfg.n_tau):
        new = rk3_step(current, cfg, face_normals)
        l1 = l1_change(new, current)
        trace.l1_per_step.append(l1)
        if first_l1 is None:
            first_l1 = l1
        elif l1 > DIVERGENCE_FACTOR * max(first_l1, DIVERGENCE_FLOOR):
            raise NumericalDivergenceError(
                f"change norm grew from {first_l1:.3e} to {l1:.3e} "
                f"after {trace.steps_run} steps"
            )
        current = new
        if cfg.stop_l1 is not None and l1 < cfg.stop_l1:
            break
    return current, trace
