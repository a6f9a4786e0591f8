import math

import numpy as np
import pytest

from levelset_kit import (
    AdvectConfig,
    CFLViolationError,
    InterfaceParams,
    Psi0,
    ReinitConfig,
    Rotation,
    Sampled,
    ScalarField,
    Vortex,
    VectorField,
    advect_step,
    alpha_from_psi0,
    build_grid,
    face_normal_velocities,
    fill_periodic_ghosts,
    muscl_face_states,
    run_coupled,
    velocity_sample,
)


def _circle_field(nc, center, radius=0.15, eps_h=None):
    g = build_grid(2, nc, (0.0, 1.0))
    params = InterfaceParams(eps_h=eps_h if eps_h else math.sqrt(2) * g.dx[0] / 4)
    x, y = g.cell_centers(ghosts=True)
    psi = np.sqrt((x - center[0]) ** 2 + (y - center[1]) ** 2) - radius
    return g, params, ScalarField(g, alpha_from_psi0(psi, params))


def test_velocity_samples():
    rot = Rotation(center=(0.5, 0.5))
    assert np.allclose(velocity_sample(rot, (0.5, 0.5)), 0.0)
    assert np.allclose(velocity_sample(rot, (0.5, 0.7)), (0.2, 0.0))

    vor = Vortex()
    assert np.allclose(velocity_sample(vor, (0.5, 0.75)), (1.0, 0.0), atol=1e-14)
    reversing = Vortex(reverse_at=1.0)
    before = velocity_sample(reversing, (0.3, 0.6), t=0.5)
    after = velocity_sample(reversing, (0.3, 0.6), t=1.0)
    assert np.allclose(after, -before)


def test_sampled_vortex_divergence_is_tiny():
    errs = []
    for nc in (32, 64):
        g = build_grid(2, nc, (0.0, 1.0))
        x, y = g.cell_centers(ghosts=True)
        shape = g.padded_shape
        u = -np.sin(np.pi * x) ** 2 * np.sin(2 * np.pi * y) + np.zeros(shape)
        v = np.sin(np.pi * y) ** 2 * np.sin(2 * np.pi * x) + np.zeros(shape)
        dudx = (u[2:, :] - u[:-2, :]) / (2 * g.dx[0])
        dvdy = (v[:, 2:] - v[:, :-2]) / (2 * g.dx[1])
        div = dudx[:, 1:-1] + dvdy[1:-1, :]
        errs.append(np.max(np.abs(div[1:-1, 1:-1])))
    # The centered differences of these trigonometric products cancel
    # analytically, so the discrete divergence is already at rounding level.
    assert max(errs) < 1e-12


def test_face_velocities_discretely_divergence_free():
    for model in (Rotation(), Vortex()):
        g = build_grid(2, 48, (0.0, 1.0))
        u, v = face_normal_velocities(model, g)
        div = (u[1:, :] - u[:-1, :]) / g.dx[0] + (v[:, 1:] - v[:, :-1]) / g.dx[1]
        assert np.max(np.abs(div)) < 1e-12


def test_muscl_linear_field_is_exact():
    g = build_grid(1, 32, (0.0, 1.0))
    x = g.cell_centers(ghosts=True)[0]
    f = ScalarField(g, 2.0 * x + np.zeros(g.padded_shape))
    left, right = muscl_face_states(f, 0)
    faces = g.lo[0] + np.arange(33) * g.dx[0]
    # Interior faces see the exact linear face value from both sides.
    assert np.allclose(left[1:-1], 2.0 * faces[1:-1], atol=1e-13)
    assert np.allclose(right[1:-1], 2.0 * faces[1:-1], atol=1e-13)


def test_muscl_step_data_stays_bounded():
    g = build_grid(1, 32, (0.0, 1.0))
    f = ScalarField.zeros(g)
    f.interior[16:] = 1.0
    from levelset_kit import fill_neumann_ghosts

    fill_neumann_ghosts(f)
    for limiter in ("minmod", "vanleer"):
        left, right = muscl_face_states(f, 0, limiter)
        assert left.min() >= 0.0 and left.max() <= 1.0
        assert right.min() >= 0.0 and right.max() <= 1.0


def test_muscl_reconstruction_second_order():
    errs = []
    for nc in (64, 128, 256):
        g = build_grid(1, nc, (0.0, 1.0))
        x = g.cell_centers(ghosts=True)[0]
        f = ScalarField(g, np.sin(2 * np.pi * x))
        left, _ = muscl_face_states(f, 0, "vanleer")
        faces = np.arange(nc + 1) * g.dx[0]
        errs.append(np.mean(np.abs(left - np.sin(2 * np.pi * faces))[1:-1]))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 1.7)


def test_advect_zero_velocity_is_identity():
    g, params, alpha = _circle_field(32, (0.5, 0.5))
    zero = Sampled(VectorField.from_arrays(g, [np.zeros(g.padded_shape)] * 2))
    cfg = AdvectConfig(dt=1e-2, n_steps=1)
    out = advect_step(alpha, zero, cfg)
    assert np.array_equal(out.interior, alpha.interior)


def test_translation_one_period_conserves_mass():
    g = build_grid(1, 64, (0.0, 1.0))
    params = InterfaceParams(eps_h=g.dx[0])
    x = g.cell_centers(ghosts=True)[0]
    alpha = ScalarField(g, alpha_from_psi0(np.minimum(x - 0.3, 0.7 - x), params))
    fill_periodic_ghosts(alpha)
    speed = 1.0
    vel = Sampled(VectorField.from_arrays(g, [np.full(g.padded_shape, speed)]))
    dt = 0.5 * g.dx[0] / speed
    n_steps = round(1.0 / (speed * dt))
    cfg = AdvectConfig(dt=dt, n_steps=n_steps, bc="periodic")
    mass0 = float(np.sum(alpha.interior)) * g.cell_volume
    cur = alpha
    for _ in range(n_steps):
        cur = advect_step(cur, vel, cfg)
    mass1 = float(np.sum(cur.interior)) * g.cell_volume
    assert abs(mass1 - mass0) / mass0 < 1e-12
    # One full period returns the profile up to first-order scheme diffusion.
    assert np.max(np.abs(cur.interior - alpha.interior)) < 0.35
    assert cur.interior.max() > 0.8  # the bump survives


def test_cfl_violation_rejected():
    g, params, alpha = _circle_field(32, (0.5, 0.5))
    cfg = AdvectConfig(dt=1.0, n_steps=1)
    with pytest.raises(CFLViolationError, match="CFL"):
        advect_step(alpha, Rotation(), cfg)


def test_boundedness_and_mass_through_coupled_steps():
    g, params, alpha = _circle_field(32, (0.65, 0.5))
    rcfg = ReinitConfig(kind=Psi0(), params=params, dtau=params.eps_h, n_tau=1)
    cfg = AdvectConfig(
        dt=2 * math.pi / 360,
        n_steps=60,
        limiter="vanleer",
        n_tau_per_step=1,
        reinit=rcfg,
        time_scheme="implicit",
    )
    cur = alpha
    mass0 = float(np.sum(cur.interior))
    for step in range(cfg.n_steps):
        cur = advect_step(cur, Rotation(), cfg, step * cfg.dt)
        from levelset_kit import rk3_step

        cur = rk3_step(cur, rcfg)
        assert cur.interior.min() >= -1e-12
        assert cur.interior.max() <= 1.0 + 1e-12
        mass = float(np.sum(cur.interior))
        assert abs(mass - mass0) / mass0 < 1e-10
        mass0 = mass


def test_run_coupled_without_reinit_is_pure_advection():
    g, params, alpha = _circle_field(32, (0.65, 0.5))
    cfg = AdvectConfig(dt=2 * math.pi / 360, n_steps=10, limiter="minmod", time_scheme="euler")
    out, report = run_coupled(alpha, Rotation(), cfg)
    cur = alpha
    for step in range(10):
        cur = advect_step(cur, Rotation(), cfg, step * cfg.dt)
    assert np.array_equal(out.interior, cur.interior)
    assert len(report.series["mass"]) == 11


def test_reinit_improves_advected_interface():
    # One coarse revolution: adding a re-initialization step after each
    # transport step must not degrade, and here improves, the final shape.
    from levelset_kit import extract_isocontour, position_error

    g, params, alpha = _circle_field(32, (0.65, 0.5))
    model = Rotation()
    dt = 2 * math.pi / 360
    errs = {}
    for ntau in (0, 1):
        rcfg = ReinitConfig(kind=Psi0(), params=params, dtau=params.eps_h, n_tau=1)
        cfg = AdvectConfig(
            dt=dt,
            n_steps=360,
            limiter="vanleer",
            n_tau_per_step=ntau,
            reinit=rcfg,
            time_scheme="implicit",
        )
        out, _ = run_coupled(alpha, model, cfg)
        errs[ntau] = position_error(extract_isocontour(out, 0.5), (0.65, 0.5), 0.15)
    assert errs[1] < errs[0]


def test_reversal_time_midstep_robustness():
    model = Vortex(reverse_at=1.0)
    g = build_grid(2, 32, (0.0, 1.0))
    dt = g.dx[0] / 8
    fwd = face_normal_velocities(model, g, t=1.0 - 0.5 * dt - 1e-12)
    rev = face_normal_velocities(model, g, t=1.0 + 1e-12)
    assert np.allclose(fwd[0], -rev[0])
