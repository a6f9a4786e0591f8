"""Benchmark case registry: initial conditions, per-case defaults, config parsing.

A case file is TOML with ``[case]``, ``[grid]``, ``[reinit]`` and optional
``[advect]``, ``[sweep]`` and ``[output]`` tables.  ``load_case`` parses and
validates it into a ``CaseSpec``; ``setup_case`` instantiates the grid, the
initial phase fraction and the solver configurations.

Initial interfaces:

* ``heaviside``: planar interface at ``x_gamma`` (1D),
* ``circle``: signed distance to a circle of ``radius`` at ``center`` (2D),
* ``wavy``: a sine-modulated plane, psi = 1/2 - y + A sin(4 pi x) sin(4 pi z)
  on the box <-1/2, 1/2> x <0, 1> x <-1/2, 1/2> (3D).

The profile may start widened (``widen_factor`` > 1) to exercise the
re-initialization toward the target width.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - version shim
    import tomli as tomllib

from .advection import AdvectConfig, Rotation, VelocityModel, Vortex
from .differential import _pair_sum_curvature
from .grid import Grid, ScalarField, build_grid
from .mappings import (
    UNDERFLOW_EPS,
    InterfaceParams,
    MappingKind,
    Psi0,
    Psi0Prime,
    Psi1,
    RawAlpha,
    alpha_from_psi0,
)
from .reinit import ReinitConfig

__all__ = [
    "CaseSpec",
    "CaseSetup",
    "ConfigError",
    "load_case",
    "setup_case",
    "init_case",
    "bundled_config",
    "wavy_exact_curvature",
    "WAVY_EXTENT",
    "WAVY_AMPLITUDE",
]

WAVY_EXTENT = ((-0.5, 0.5), (0.0, 1.0), (-0.5, 0.5))
WAVY_AMPLITUDE = 0.03125

_CASE_DIMS = {"heaviside": 1, "circle": 2, "wavy": 3}

_KNOWN_KEYS = {
    "case": {"name", "kind", "x_gamma", "center", "radius", "amplitude", "widen_factor"},
    "grid": {"nc", "ghost"},
    "reinit": {
        "mapping",
        "gamma",
        "eps",
        "eps_h_fraction",
        "dtau_fraction",
        "n_tau",
        "freeze_normals",
        "stop_l1",
        "form",
    },
    "advect": {
        "velocity",
        "v0",
        "length",
        "rotation_center",
        "reverse_at",
        "t_end",
        "dt",
        "limiter",
        "n_tau_per_step",
        "time_scheme",
    },
    "sweep": {"ncs", "large_ncs", "metric", "band_level", "representation"},
    "output": {"vtk"},
}


class ConfigError(ValueError):
    """A case file failed to parse or validate."""


@dataclass
class CaseSpec:
    """Validated contents of a case file."""

    name: str
    kind: str
    nc: int
    ghost: int = 2
    x_gamma: float = 0.5
    center: tuple[float, float] = (0.5, 0.5)
    radius: float = 0.2
    amplitude: float = WAVY_AMPLITUDE
    widen_factor: float = 1.0
    mapping: str = "psi0"
    gamma: float = 1e-5
    eps: float = UNDERFLOW_EPS
    eps_h_fraction: float | str = "half"
    dtau_fraction: float = 1.0
    n_tau: int = 256
    freeze_normals: bool = False
    stop_l1: float | None = None
    form: str = "conservative"
    velocity: str | None = None
    v0: float = 1.0
    length: float = 1.0
    rotation_center: tuple[float, float] = (0.5, 0.5)
    reverse_at: float | None = None
    t_end: float | None = None
    dt: float | None = None
    limiter: str = "vanleer"
    n_tau_per_step: int = 1
    time_scheme: str = "implicit"
    sweep_ncs: list[int] = field(default_factory=list)
    sweep_large_ncs: list[int] = field(default_factory=list)
    sweep_metric: str = "circle_curvature"
    sweep_band_level: float = 0.5
    sweep_representation: str = "psi0"
    vtk: bool = False
    source_text: str = ""

    @property
    def dim(self) -> int:
        return _CASE_DIMS[self.kind]


@dataclass
class CaseSetup:
    """Instantiated case: grid, initial field, and solver configurations."""

    spec: CaseSpec
    grid: Grid
    params: InterfaceParams
    alpha0: ScalarField
    reinit: ReinitConfig
    velocity: VelocityModel | None = None
    advect: AdvectConfig | None = None


def _check_keys(data: dict) -> None:
    for table, entries in data.items():
        if table not in _KNOWN_KEYS:
            raise ConfigError(f"unknown config table [{table}]")
        if not isinstance(entries, dict):
            raise ConfigError(f"[{table}] must be a table")
        for key in entries:
            if key not in _KNOWN_KEYS[table]:
                raise ConfigError(f"unknown key {key!r} in [{table}]")


def parse_case(text: str) -> CaseSpec:
    """Parse and validate case-file text."""
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config is not valid TOML: {exc}") from exc
    _check_keys(data)
    case = data.get("case", {})
    if "kind" not in case:
        raise ConfigError("missing required key 'kind' in [case]")
    kind = case["kind"]
    if kind not in _CASE_DIMS:
        raise ConfigError(f"unknown case kind {kind!r} (expected heaviside, circle or wavy)")
    grid_tbl = data.get("grid", {})
    if "nc" not in grid_tbl:
        raise ConfigError("missing required key 'nc' in [grid]")

    reinit = data.get("reinit", {})
    adv = data.get("advect", {})
    sweep = data.get("sweep", {})
    out = data.get("output", {})

    spec = CaseSpec(
        name=str(case.get("name", kind)),
        kind=kind,
        nc=int(grid_tbl["nc"]),
        ghost=int(grid_tbl.get("ghost", 2)),
        x_gamma=float(case.get("x_gamma", 0.5)),
        center=tuple(case.get("center", (0.5, 0.5))),
        radius=float(case.get("radius", 0.2)),
        amplitude=float(case.get("amplitude", WAVY_AMPLITUDE)),
        widen_factor=float(case.get("widen_factor", 1.0)),
        mapping=str(reinit.get("mapping", "psi0")),
        gamma=float(reinit.get("gamma", 1e-5)),
        eps=float(reinit.get("eps", UNDERFLOW_EPS)),
        eps_h_fraction=reinit.get("eps_h_fraction", "half"),
        dtau_fraction=float(reinit.get("dtau_fraction", 1.0)),
        n_tau=int(reinit.get("n_tau", 256)),
        freeze_normals=bool(reinit.get("freeze_normals", False)),
        stop_l1=float(reinit["stop_l1"]) if "stop_l1" in reinit else None,
        form=str(reinit.get("form", "conservative")),
        velocity=str(adv["velocity"]) if "velocity" in adv else None,
        v0=float(adv.get("v0", 1.0)),
        length=float(adv.get("length", 1.0)),
        rotation_center=tuple(adv.get("rotation_center", (0.5, 0.5))),
        reverse_at=float(adv["reverse_at"]) if "reverse_at" in adv else None,
        t_end=float(adv["t_end"]) if "t_end" in adv else None,
        dt=float(adv["dt"]) if "dt" in adv else None,
        limiter=str(adv.get("limiter", "vanleer")),
        n_tau_per_step=int(adv.get("n_tau_per_step", 1)),
        time_scheme=str(adv.get("time_scheme", "implicit")),
        sweep_ncs=[int(n) for n in sweep.get("ncs", [])],
        sweep_large_ncs=[int(n) for n in sweep.get("large_ncs", [])],
        sweep_metric=str(sweep.get("metric", "circle_curvature")),
        sweep_band_level=float(sweep.get("band_level", 0.5)),
        sweep_representation=str(sweep.get("representation", "psi0")),
        vtk=bool(out.get("vtk", False)),
        source_text=text,
    )
    if spec.mapping not in ("raw", "psi1", "psi0", "psi0prime"):
        raise ConfigError(f"unknown mapping {spec.mapping!r}")
    if spec.velocity is not None and spec.velocity not in ("rotation", "vortex"):
        raise ConfigError(f"unknown velocity model {spec.velocity!r}")
    if spec.velocity is not None and spec.dim != 2:
        raise ConfigError("advection cases must be two-dimensional")
    if spec.sweep_metric not in ("circle_curvature", "wavy_curvature", "position"):
        raise ConfigError(f"unknown sweep metric {spec.sweep_metric!r}")
    return spec


def load_case(path: str | Path) -> CaseSpec:
    return parse_case(Path(path).read_text())


def bundled_config(name: str) -> Path:
    """Path of a configuration file shipped with the package."""
    base = resources.files("levelset_kit") / "configs" / f"{name}.toml"
    return Path(str(base))


def _mapping_kind(spec: CaseSpec) -> MappingKind:
    if spec.mapping == "raw":
        return RawAlpha()
    if spec.mapping == "psi0":
        return Psi0()
    if spec.mapping == "psi1":
        return Psi1(gamma=spec.gamma, eps=spec.eps)
    return Psi0Prime(gamma=spec.gamma, eps=spec.eps)


def _eps_h(spec: CaseSpec, dx: float) -> float:
    frac = spec.eps_h_fraction
    if isinstance(frac, str):
        if frac == "half":
            frac = 0.5
        elif frac == "sqrt_dim_quarter":
            frac = math.sqrt(spec.dim) / 4.0
        else:
            raise ConfigError(
                f"eps_h_fraction must be a number, 'half' or 'sqrt_dim_quarter', got {frac!r}"
            )
    return float(frac) * dx


def _grid_for(spec: CaseSpec, nc: int | None = None) -> Grid:
    n = spec.nc if nc is None else nc
    if spec.kind == "wavy":
        return build_grid(3, n, WAVY_EXTENT, ghost_width=spec.ghost)
    return build_grid(spec.dim, n, (0.0, 1.0), ghost_width=spec.ghost)


def signed_distance_init(spec: CaseSpec, grid: Grid) -> np.ndarray:
    """Analytic signed-distance-like function of the case on the padded grid."""
    coords = grid.cell_centers(ghosts=True)
    if spec.kind == "heaviside":
        return coords[0] - spec.x_gamma + np.zeros(grid.padded_shape)
    if spec.kind == "circle":
        x, y = coords
        return np.sqrt((x - spec.center[0]) ** 2 + (y - spec.center[1]) ** 2) - spec.radius
    x, y, z = coords
    return (
        0.5
        - y
        + spec.amplitude * np.sin(4.0 * np.pi * x) * np.sin(4.0 * np.pi * z)
        + np.zeros(grid.padded_shape)
    )


def init_case(spec: CaseSpec, grid: Grid, params: InterfaceParams) -> ScalarField:
    """Initial phase fraction: the stationary profile of the case's distance
    function, with the optionally widened starting width."""
    psi = signed_distance_init(spec, grid)
    start = InterfaceParams(eps_h=spec.widen_factor * params.eps_h, C=params.C)
    return ScalarField(grid, alpha_from_psi0(psi, start))


def _velocity_model(spec: CaseSpec) -> VelocityModel | None:
    if spec.velocity is None:
        return None
    if spec.velocity == "rotation":
        return Rotation(v0=spec.v0, length=spec.length, center=spec.rotation_center)
    return Vortex(v0=spec.v0, length=spec.length, reverse_at=spec.reverse_at)


def _auto_dt(spec: CaseSpec, grid: Grid) -> float:
    """Per-case default step: rotation 2 pi / (360 i) on the 2^(4+i) grid,
    vortex dx / 8 (Courant number about 0.2).

    The rotation rule is capped so the per-axis Courant number stays at or
    below 1/2 (the advective stability/contraction budget), which the plain
    rule exceeds on the finest grids.
    """
    if spec.velocity == "rotation":
        level = math.log2(grid.shape[0]) - 4.0
        if abs(level - round(level)) > 1e-9 or level < 1:
            raise ConfigError(
                "rotation cases need an explicit dt on grids that are not 2^(4+i)"
            )
        t_end = spec.t_end if spec.t_end is not None else 2.0 * math.pi
        dt = 2.0 * math.pi / (360.0 * round(level))
        umax = spec.v0 / spec.length * 0.5  # largest per-axis speed in the unit box
        dt_cap = 0.5 * grid.dx[0] / umax
        if dt > dt_cap:
            n_steps = math.ceil(t_end / dt_cap)
            dt = t_end / n_steps
        return dt
    return grid.dx[0] / 8.0


def setup_case(spec: CaseSpec, nc: int | None = None) -> CaseSetup:
    """Instantiate the grid, initial field and solver configs of a case.

    ``nc`` overrides the configured resolution (used by refinement sweeps;
    automatic time-step rules rescale with the grid).
    """
    grid = _grid_for(spec, nc)
    params = InterfaceParams(eps_h=_eps_h(spec, grid.dx[0]))
    alpha0 = init_case(spec, grid, params)
    reinit = ReinitConfig(
        kind=_mapping_kind(spec),
        params=params,
        dtau=spec.dtau_fraction * params.eps_h,
        n_tau=spec.n_tau,
        stop_l1=spec.stop_l1,
        form=spec.form,  # type: ignore[arg-type]
        freeze_normals=spec.freeze_normals,
    )
    model = _velocity_model(spec)
    advect = None
    if model is not None:
        dt = spec.dt if spec.dt is not None else _auto_dt(spec, grid)
        t_end = spec.t_end
        if t_end is None:
            t_end = 2.0 * math.pi if spec.velocity == "rotation" else 2.0
        n_steps = max(1, round(t_end / dt))
        advect = AdvectConfig(
            dt=dt,
            n_steps=n_steps,
            limiter=spec.limiter,
            n_tau_per_step=spec.n_tau_per_step,
            reinit=ReinitConfig(
                kind=_mapping_kind(spec),
                params=params,
                dtau=spec.dtau_fraction * params.eps_h,
                n_tau=1,
                form=spec.form,  # type: ignore[arg-type]
            ),
            time_scheme=spec.time_scheme,
        )
    return CaseSetup(
        spec=spec,
        grid=grid,
        params=params,
        alpha0=alpha0,
        reinit=reinit,
        velocity=model,
        advect=advect,
    )


def wavy_exact_curvature(grid: Grid, amplitude: float = WAVY_AMPLITUDE) -> ScalarField:
    """Analytic iso-surface curvature of the wavy initial interface."""
    x, y, z = grid.cell_centers(ghosts=True)
    four_pi = 4.0 * np.pi
    zero = np.zeros(grid.padded_shape)
    sx, cx = np.sin(four_pi * x), np.cos(four_pi * x)
    sz, cz = np.sin(four_pi * z), np.cos(four_pi * z)
    p1 = amplitude * four_pi * cx * sz + zero
    p2 = -1.0 + zero
    p3 = amplitude * four_pi * sx * cz + zero
    p11 = -amplitude * four_pi**2 * sx * sz + zero
    p33 = p11.copy()
    p13 = amplitude * four_pi**2 * cx * cz + zero
    first = [p1, p2, p3]
    second = [[p11, zero, p13], [zero, zero, zero], [p13, zero, p33]]
    num, mag2 = _pair_sum_curvature(first, second, 3)
    return ScalarField(grid, num / (mag2 * np.sqrt(mag2)))
