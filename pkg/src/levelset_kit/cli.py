"""Command-line driver: re-initialization runs, coupled transport runs,
grid-refinement sweeps and one-shot derivative dumps.

Usage:

    levelset-kit reinit   <case.toml> [--out DIR] [--vtk]
    levelset-kit advect   <case.toml> [--out DIR] [--vtk]
    levelset-kit converge <case.toml> [--out DIR] [--large]
    levelset-kit derivs   <case.toml> [--out DIR] [--vtk]

Exit status: 0 on success, 1 on configuration errors, 2 on numerical failure.
Each run writes a manifest (echoing the resolved configuration) before any
heavy computation, then CSV series/tables and, on request, VTK fields.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .advection import CFLViolationError, CircleAreaTracker, CoupledRunError, run_coupled
from .cases import (
    CaseSetup,
    CaseSpec,
    ConfigError,
    load_case,
    setup_case,
    wavy_exact_curvature,
)
from .diagnostics import (
    band_curvature_norms,
    circle_curvature_error,
    extract_isocontour,
    observed_order,
    position_error,
)
from .differential import curvature_field, unit_normals
from .grid import ScalarField, fill_neumann_ghosts
from .mappings import psi0_from_alpha
from .output import RunManifest, write_csv, write_manifest, write_vtk_structured_points
from .reinit import NumericalDivergenceError, reinitialize

__all__ = ["main", "run_command"]


def _arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="levelset-kit",
        description="Conservative level-set benchmark driver",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("reinit", "fixed-step re-initialization with a convergence trace"),
        ("advect", "coupled advect-then-reinitialize run with area series"),
        ("converge", "grid-refinement sweep with fitted observed orders"),
        ("derivs", "one-shot derivative and curvature field dump"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", help="case file (TOML)")
        p.add_argument("--out", default=".", help="output directory (default: current)")
        p.add_argument("--vtk", action="store_true", help="also write VTK fields")
        p.add_argument("--large", action="store_true", help="include the large sweep grids")
    return parser


def _manifest(args, spec: CaseSpec, outputs: list[str]) -> RunManifest:
    return RunManifest(
        command=args.command,
        case_name=spec.name,
        version=__version__,
        config_text=spec.source_text,
        outputs=outputs,
    )


def _write_fields(setup: CaseSetup, alpha: ScalarField, out: Path, stem: str) -> Path:
    fill_neumann_ghosts(alpha)
    psi0 = ScalarField(alpha.grid, psi0_from_alpha(alpha.values, setup.params))
    kappa = curvature_field(alpha, setup.reinit.kind, setup.params)
    return write_vtk_structured_points(
        out / f"{stem}.vtk",
        alpha.grid,
        {"alpha": alpha, "psi0": psi0, "kappa": kappa},
        title=setup.spec.name,
    )


def _cmd_reinit(args, spec: CaseSpec, out: Path) -> int:
    outputs = [f"{spec.name}_trace.csv"] + ([f"{spec.name}_fields.vtk"] if args.vtk else [])
    write_manifest(out / f"{spec.name}_manifest.txt", _manifest(args, spec, outputs))
    setup = setup_case(spec)
    final, trace = reinitialize(setup.alpha0, setup.reinit)
    rows = [
        (step + 1, (step + 1) * setup.reinit.dtau, l1)
        for step, l1 in enumerate(trace.l1_per_step)
    ]
    write_csv(out / f"{spec.name}_trace.csv", ["step", "tau", "L1"], rows)
    if args.vtk:
        _write_fields(setup, final, out, f"{spec.name}_fields")
    print(f"{spec.name}: {trace.steps_run} steps, final L1 = {trace.l1_per_step[-1]:.3e}")
    return 0


def _cmd_advect(args, spec: CaseSpec, out: Path) -> int:
    outputs = [f"{spec.name}_series.csv", f"{spec.name}_summary.csv"]
    if args.vtk:
        outputs.append(f"{spec.name}_fields.vtk")
    write_manifest(out / f"{spec.name}_manifest.txt", _manifest(args, spec, outputs))
    setup = setup_case(spec)
    if setup.advect is None or setup.velocity is None:
        raise ConfigError("advect command needs an [advect] table in the case file")
    tracker = None
    if spec.kind == "circle":
        tracker = CircleAreaTracker(params=setup.params, radius=spec.radius)
    final, report = run_coupled(setup.alpha0, setup.velocity, setup.advect, tracker)

    names = sorted(report.series)
    n_rows = len(report.series["mass"])
    rows = []
    for i in range(n_rows):
        rows.append(
            [i, i * setup.advect.dt] + [report.series[name][i] for name in names]
        )
    write_csv(out / f"{spec.name}_series.csv", ["step", "t"] + names, rows)

    summary = []
    if spec.kind == "circle":
        contour_a = extract_isocontour(final, 0.5)
        err_a = position_error(contour_a, spec.center, spec.radius)
        fill_neumann_ghosts(final)
        psi0 = ScalarField(final.grid, psi0_from_alpha(final.values, setup.params))
        err_p = position_error(extract_isocontour(psi0, 0.0), spec.center, spec.radius)
        summary.append(("position_error_alpha", err_a))
        summary.append(("position_error_psi0", err_p))
        print(f"{spec.name}: position error (alpha) = {err_a:.4e}, (psi0) = {err_p:.4e}")
    summary.append(("mass_initial", report.series["mass"][0]))
    summary.append(("mass_final", report.series["mass"][-1]))
    write_csv(out / f"{spec.name}_summary.csv", ["quantity", "value"], summary)
    if args.vtk:
        _write_fields(setup, final, out, f"{spec.name}_fields")
    return 0


def _sweep_rows(spec: CaseSpec, ncs: list[int]):
    """One sweep row per grid and norm: (grid label, nc, eps_h, mapping, norm, value)."""
    rows = []
    for nc in ncs:
        setup = setup_case(spec, nc=nc)
        level = math.log2(nc) - 4.0
        label = f"m{level:g}" if abs(level - round(level)) < 1e-9 else f"nc{nc}"
        if spec.sweep_metric == "circle_curvature":
            final, _ = reinitialize(setup.alpha0, setup.reinit)
            kappa = curvature_field(final, setup.reinit.kind, setup.params)
            value = circle_curvature_error(
                kappa,
                final,
                setup.params,
                spec.sweep_band_level,
                spec.center,
                representation=spec.sweep_representation,
            )
            rows.append([label, nc, setup.params.eps_h, spec.mapping, "L1_kappa_iso", value])
        elif spec.sweep_metric == "wavy_curvature":
            if spec.freeze_normals:
                # Frozen-derivative protocol: derivatives are taken before the
                # first iteration, so the norms are those of the initial field.
                field = setup.alpha0
            else:
                field, _ = reinitialize(setup.alpha0, setup.reinit)
            kappa = curvature_field(field, setup.reinit.kind, setup.params)
            exact = wavy_exact_curvature(setup.grid, spec.amplitude)
            l1, l2, linf = band_curvature_norms(kappa, exact, field)
            for norm, value in (("L1_kappa", l1), ("L2_kappa", l2), ("Linf_kappa", linf)):
                rows.append([label, nc, setup.params.eps_h, spec.mapping, norm, value])
        else:  # position
            if setup.advect is None or setup.velocity is None:
                raise ConfigError("position sweeps need an [advect] table")
            final, _ = run_coupled(setup.alpha0, setup.velocity, setup.advect)
            value = position_error(extract_isocontour(final, 0.5), spec.center, spec.radius)
            rows.append([label, nc, setup.params.eps_h, spec.mapping, "L1_position", value])
    return rows


def _cmd_converge(args, spec: CaseSpec, out: Path) -> int:
    if not spec.sweep_ncs:
        raise ConfigError("converge command needs a [sweep] table with 'ncs'")
    ncs = list(spec.sweep_ncs)
    if args.large:
        ncs += list(spec.sweep_large_ncs)
    outputs = [f"{spec.name}_convergence.csv"]
    write_manifest(out / f"{spec.name}_manifest.txt", _manifest(args, spec, outputs))

    rows = _sweep_rows(spec, ncs)
    # Observed order between successive grids, per norm name.
    table = []
    previous: dict[str, tuple[int, float]] = {}
    for label, nc, eps_h, mapping, norm, value in rows:
        order = float("nan")
        if norm in previous:
            nc_prev, val_prev = previous[norm]
            order = observed_order(val_prev, value, refinement=nc / nc_prev)
        previous[norm] = (nc, value)
        table.append([label, nc, eps_h, mapping, norm, value, order])
        order_txt = f"{order:5.2f}" if not math.isnan(order) else "  ---"
        print(f"{label:>6} nc={nc:4d} {norm:12s} value={value:.6e} order={order_txt}")
    write_csv(
        out / f"{spec.name}_convergence.csv",
        ["grid", "nc", "eps_h", "mapping", "norm", "value", "observed_order"],
        table,
    )
    return 0


def _cmd_derivs(args, spec: CaseSpec, out: Path) -> int:
    outputs = [f"{spec.name}_derivs.csv"] + ([f"{spec.name}_fields.vtk"] if args.vtk else [])
    write_manifest(out / f"{spec.name}_manifest.txt", _manifest(args, spec, outputs))
    setup = setup_case(spec)
    alpha, _ = reinitialize(setup.alpha0, setup.reinit)
    fill_neumann_ghosts(alpha)
    psi0 = ScalarField(alpha.grid, psi0_from_alpha(alpha.values, setup.params))
    normals = unit_normals(psi0)
    grad_mag = np.sqrt(
        sum(c.values**2 for c in normals.components)
    )  # unit normals: ~1 where defined
    kappa = curvature_field(alpha, setup.reinit.kind, setup.params)
    a = alpha.interior
    band = (a >= 0.05) & (a <= 0.95)
    k_band = kappa.interior[band]
    stats = [
        ("band_cells", int(band.sum())),
        ("kappa_min", float(k_band.min()) if k_band.size else float("nan")),
        ("kappa_max", float(k_band.max()) if k_band.size else float("nan")),
        ("kappa_mean", float(k_band.mean()) if k_band.size else float("nan")),
        ("normal_mag_min", float(grad_mag[alpha.grid.interior][band].min())),
    ]
    write_csv(out / f"{spec.name}_derivs.csv", ["quantity", "value"], stats)
    if args.vtk:
        _write_fields(setup, alpha, out, f"{spec.name}_fields")
    for name, value in stats:
        print(f"{name} = {value}")
    return 0


def run_command(argv) -> int:
    """Parse arguments and dispatch; returns the process exit status."""
    parser = _arg_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        spec = load_case(args.config)
    except FileNotFoundError:
        print(f"error: config file not found: {args.config}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error: cannot create output directory {out}: {exc}", file=sys.stderr)
        return 1
    handler = {
        "reinit": _cmd_reinit,
        "advect": _cmd_advect,
        "converge": _cmd_converge,
        "derivs": _cmd_derivs,
    }[args.command]
    try:
        return handler(args, spec, out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (NumericalDivergenceError, CFLViolationError, CoupledRunError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O failure: {exc}", file=sys.stderr)
        return 2


def main(argv=None) -> int:
    return run_command(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
