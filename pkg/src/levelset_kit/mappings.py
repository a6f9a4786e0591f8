"""Pointwise transforms between the phase fraction and its mapping functions.

The interface is carried by a regularized Heaviside profile ``alpha`` in
[0, 1].  Three smooth monotone companions of ``alpha`` are used to evaluate
its gradient robustly:

* the signed distance reconstruction ``psi0(alpha) = eps_h * ln(alpha/(1-alpha))``,
* the root-ratio smoothing ``psi1(alpha, gamma)``,
* the linear rescaling ``psi0_prime(psi1) = (2 eps_h / gamma) (2 psi1 - 1)``,
  which approximates ``psi0`` when ``N_c * gamma << 1``.

Every function here is a pure scalar map and accepts numpy arrays directly.
``UNDERFLOW_EPS`` keeps ``psi1`` (and the logarithm in ``psi0_from_alpha``)
continuous at alpha = 0 and alpha = 1, where plain powers underflow and
introduce jumps; it may be set to 0 to reproduce the broken behaviour.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "UNDERFLOW_EPS",
    "InterfaceParams",
    "RawAlpha",
    "Psi0",
    "Psi1",
    "Psi0Prime",
    "MappingKind",
    "alpha_from_psi0",
    "psi0_from_alpha",
    "psi1_of_alpha",
    "psi0prime_of_psi1",
    "delta_of_alpha",
    "zeta_of_alpha",
    "mapped_values",
    "gradient_factor",
    "half_width",
]

# Guard against arithmetic underflow at the ends of the [0, 1] range.
UNDERFLOW_EPS = 5e-16


@dataclass(frozen=True)
class InterfaceParams:
    """Interface profile parameters: half-width eps_h, compression speed C.

    The diffusivity ``D = eps_h * C`` is tied to the half-width by
    construction, so the stationary profile has thickness eps_h.
    """

    eps_h: float
    C: float = 1.0

    def __post_init__(self) -> None:
        if not self.eps_h > 0.0:
            raise ValueError(f"eps_h must be positive, got {self.eps_h}")
        if not self.C > 0.0:
            raise ValueError(f"C must be positive, got {self.C}")

    @property
    def D(self) -> float:
        return self.eps_h * self.C


def half_width(dx: float, dim: int, rule: str = "sqrt_dim_quarter") -> float:
    """Default interface half-width for a given cell size.

    ``sqrt_dim_quarter`` gives sqrt(K) * dx / 4 for a K-dimensional problem;
    ``half_dx`` gives the classical dx / 2.
    """
    if rule == "sqrt_dim_quarter":
        return float(np.sqrt(dim)) * dx / 4.0
    if rule == "half_dx":
        return dx / 2.0
    raise ValueError(f"unknown half-width rule {rule!r}")


@dataclass(frozen=True)
class RawAlpha:
    """Use alpha itself, without smoothing."""


@dataclass(frozen=True)
class Psi0:
    """Signed distance reconstruction psi0(alpha)."""


@dataclass(frozen=True)
class Psi1:
    """Root-ratio smoothing psi1(alpha, gamma)."""

    gamma: float
    eps: float = UNDERFLOW_EPS

    def __post_init__(self) -> None:
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.eps < 0.0:
            raise ValueError(f"eps must be non-negative, got {self.eps}")


@dataclass(frozen=True)
class Psi0Prime:
    """Signed distance approximation reconstructed from psi1 (needs gamma << dx)."""

    gamma: float
    eps: float = UNDERFLOW_EPS

    def __post_init__(self) -> None:
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.eps < 0.0:
            raise ValueError(f"eps must be non-negative, got {self.eps}")


MappingKind = Union[RawAlpha, Psi0, Psi1, Psi0Prime]


def alpha_from_psi0(psi0, params: InterfaceParams):
    """Stationary profile: alpha = (1 + tanh(psi0 / (2 eps_h))) / 2."""
    return 0.5 * (1.0 + np.tanh(np.asarray(psi0, dtype=np.float64) / (2.0 * params.eps_h)))


# Phase fractions may leave [0, 1] by small amounts: rounding-scale during
# limited transport, up to ~1e-8 from the unlimited re-initialization fluxes
# on fine grids.  Beyond this the field is treated as corrupted.
BOUNDS_TOL = 1e-6


def _checked_fraction(alpha) -> np.ndarray:
    a = np.asarray(alpha, dtype=np.float64)
    lo = float(np.min(a))
    hi = float(np.max(a))
    if lo < -BOUNDS_TOL or hi > 1.0 + BOUNDS_TOL:
        raise ValueError(
            f"phase fraction outside [0, 1] beyond tolerance: min={lo:.3e} max={hi:.3e}"
        )
    return np.clip(a, 0.0, 1.0)


def psi0_from_alpha(alpha, params: InterfaceParams, eps: float = UNDERFLOW_EPS):
    """Signed distance from the profile: eps_h * ln((alpha+eps) / (1-alpha+eps)).

    The guard ``eps`` makes the map total on [0, 1]; it clamps the output to
    about +-eps_h * ln((1+eps)/eps) ~ 35 eps_h where alpha saturates.  Inputs
    outside [0, 1] beyond a rounding tolerance raise a data-integrity error.
    """
    a = _checked_fraction(alpha)
    return params.eps_h * np.log((a + eps) / (1.0 - a + eps))


def psi1_of_alpha(alpha, gamma: float, eps: float = UNDERFLOW_EPS):
    """Root-ratio map (alpha+eps)^gamma / ((alpha+eps)^gamma + (1-alpha+eps)^gamma)."""
    a = np.clip(np.asarray(alpha, dtype=np.float64), 0.0, 1.0)
    num = (a + eps) ** gamma
    den = num + (1.0 - a + eps) ** gamma
    return num / den


def psi0prime_of_psi1(psi1, params: InterfaceParams, gamma: float):
    """Linear reconstruction of the signed distance: (2 eps_h / gamma)(2 psi1 - 1)."""
    return (2.0 * params.eps_h / gamma) * (2.0 * np.asarray(psi1, dtype=np.float64) - 1.0)


def delta_of_alpha(alpha):
    """Compact interface weight alpha (1 - alpha); peaks at 0.25, zero at 0 and 1.

    Divided by eps_h it approximates a Dirac delta localized at the interface.
    """
    a = np.asarray(alpha, dtype=np.float64)
    return a * (1.0 - a)


def zeta_of_alpha(alpha, gamma: float):
    """Auxiliary weight alpha^gamma + (1 - alpha)^gamma; ~2 inside the interface band."""
    a = np.asarray(alpha, dtype=np.float64)
    return a**gamma + (1.0 - a) ** gamma


def mapped_values(alpha, kind: MappingKind, params: InterfaceParams):
    """Evaluate the mapping function of ``kind`` on an alpha array."""
    if isinstance(kind, RawAlpha):
        return np.asarray(alpha, dtype=np.float64)
    if isinstance(kind, Psi0):
        return psi0_from_alpha(alpha, params)
    if isinstance(kind, Psi1):
        return psi1_of_alpha(alpha, kind.gamma, kind.eps)
    if isinstance(kind, Psi0Prime):
        return psi0prime_of_psi1(psi1_of_alpha(alpha, kind.gamma, kind.eps), params, kind.gamma)
    raise TypeError(f"unknown mapping kind {kind!r}")


def gradient_factor(alpha, kind: MappingKind, params: InterfaceParams):
    """Chain-rule factor F with grad(alpha) = F(alpha) * grad(psi).

    For the signed-distance mappings F = delta(alpha) / eps_h; for psi1 it is
    zeta^2 delta^(1-gamma) / gamma; for raw alpha it is 1.
    """
    a = np.asarray(alpha, dtype=np.float64)
    if isinstance(kind, RawAlpha):
        return np.ones_like(a)
    if isinstance(kind, (Psi0, Psi0Prime)):
        return delta_of_alpha(a) / params.eps_h
    if isinstance(kind, Psi1):
        a = np.clip(a, 0.0, 1.0)
        zeta = zeta_of_alpha(a, kind.gamma)
        return zeta * zeta * delta_of_alpha(a) ** (1.0 - kind.gamma) / kind.gamma
    raise TypeError(f"unknown mapping kind {kind!r}")
