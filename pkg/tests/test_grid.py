import math

import numpy as np
import pytest

from levelset_kit import (
    InterfaceParams,
    ScalarField,
    alpha_from_psi0,
    build_grid,
    fill_neumann_ghosts,
    integrate_field,
)


def test_build_grid_1d_spacing():
    g = build_grid(1, 128, (0.0, 1.0))
    assert g.dx == (1.0 / 128,)
    assert g.dx[0] == pytest.approx(7.8125e-3)


def test_build_grid_2d_cell_centers():
    g = build_grid(2, 32, (0.0, 1.0))
    assert g.shape == (32, 32)
    x = g.axis_centers(0)
    y = g.axis_centers(1)
    assert x[0] == pytest.approx(g.dx[0] / 2)
    assert y[0] == pytest.approx(g.dx[1] / 2)
    assert x[-1] == pytest.approx(1.0 - g.dx[0] / 2)


def test_build_grid_3d_refinement_family():
    for level in (1, 2):
        nc = 2 ** (4 + level)
        g = build_grid(3, nc, (0.0, 1.0))
        assert g.shape == (nc, nc, nc)
        assert g.dx[0] == pytest.approx(1.0 / nc)


def test_build_grid_rejects_bad_input():
    with pytest.raises(ValueError):
        build_grid(1, 4, (0.0, 1.0))
    with pytest.raises(ValueError):
        build_grid(2, 32, (1.0, 0.0))
    with pytest.raises(ValueError):
        build_grid(2, 32, (0.0, 1.0), ghost_width=1)
    with pytest.raises(ValueError):
        build_grid(4, 32, (0.0, 1.0))


def test_neumann_fill_mirrors_nearest_interior():
    g = build_grid(1, 16, (0.0, 1.0))
    f = ScalarField.zeros(g)
    f.interior[:] = np.arange(16, dtype=float)
    fill_neumann_ghosts(f)
    assert np.all(f.values[:2] == 0.0)
    assert np.all(f.values[-2:] == 15.0)


def test_neumann_fill_constant_is_fixed_point():
    g = build_grid(2, 16, (0.0, 1.0))
    f = ScalarField.full(g, 3.5)
    fill_neumann_ghosts(f)
    assert np.all(f.values == 3.5)


def test_neumann_fill_zeroes_boundary_face_difference():
    # One-sided difference across any boundary face vanishes for the mirror fill.
    g = build_grid(2, 16, (0.0, 1.0))
    rng = np.random.default_rng(7)
    f = ScalarField.zeros(g)
    f.interior[:] = rng.random(g.shape)
    fill_neumann_ghosts(f)
    v = f.values
    ggw = g.ghost
    assert np.all(v[ggw, ggw:-ggw] - v[ggw - 1, ggw:-ggw] == 0.0)
    assert np.all(v[-ggw - 1, ggw:-ggw] - v[-ggw, ggw:-ggw] == 0.0)
    assert np.all(v[ggw:-ggw, ggw] - v[ggw:-ggw, ggw - 1] == 0.0)


def test_neumann_fill_idempotent():
    g = build_grid(2, 16, (0.0, 1.0))
    rng = np.random.default_rng(3)
    f = ScalarField.zeros(g)
    f.interior[:] = rng.random(g.shape)
    fill_neumann_ghosts(f)
    once = f.values.copy()
    fill_neumann_ghosts(f)
    assert np.array_equal(once, f.values)


def test_integrate_constant_is_exact():
    for dim in (1, 2, 3):
        g = build_grid(dim, 16, (0.0, 1.0))
        assert integrate_field(ScalarField.full(g, 1.0)) == pytest.approx(1.0, abs=1e-15)
        assert integrate_field(ScalarField.zeros(g)) == 0.0


def test_integrate_circle_profile_matches_area():
    # Droplet-phase profile (alpha = 1 inside) integrates to pi R^2 up to the
    # profile-width correction.
    g = build_grid(2, 256, (0.0, 1.0))
    params = InterfaceParams(eps_h=g.dx[0] / 2)
    x, y = g.cell_centers(ghosts=True)
    psi = 0.15 - np.sqrt((x - 0.5) ** 2 + (y - 0.5) ** 2)
    f = ScalarField(g, alpha_from_psi0(psi, params))
    area = integrate_field(f)
    assert area == pytest.approx(math.pi * 0.15**2, abs=1e-4)


def test_integrate_is_linear():
    g = build_grid(2, 32, (0.0, 1.0))
    rng = np.random.default_rng(11)
    f = ScalarField.zeros(g)
    h = ScalarField.zeros(g)
    f.interior[:] = rng.random(g.shape)
    h.interior[:] = rng.random(g.shape)
    combo = ScalarField(g, 2.5 * f.values - 1.25 * h.values)
    lhs = integrate_field(combo)
    rhs = 2.5 * integrate_field(f) - 1.25 * integrate_field(h)
    assert lhs == pytest.approx(rhs, rel=1e-14)


def test_integrate_second_order_under_refinement():
    errors = []
    for nc in (64, 128):
        g = build_grid(1, nc, (0.0, 1.0))
        f = ScalarField.zeros(g)
        f.interior[:] = np.exp(g.axis_centers(0))
        errors.append(abs(integrate_field(f) - (math.e - 1.0)))
    assert errors[0] / errors[1] == pytest.approx(4.0, rel=0.15)
