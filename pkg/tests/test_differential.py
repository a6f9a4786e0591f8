import numpy as np
import pytest

from levelset_kit import (
    InterfaceParams,
    Psi0,
    Psi0Prime,
    Psi1,
    RawAlpha,
    ScalarField,
    alpha_from_psi0,
    build_grid,
    center_gradient,
    curvature_field,
    delta_of_alpha,
    face_gradients,
    fill_neumann_ghosts,
    mapped_gradient,
    mapped_hessian,
    psi0_from_alpha,
    unit_normals,
)
from levelset_kit.differential import _central_gradients
from levelset_kit.mappings import gradient_factor, mapped_values


def _profile_1d(nc=128, x_gamma=0.5):
    g = build_grid(1, nc, (0.0, 1.0))
    params = InterfaceParams(eps_h=g.dx[0] / 2)
    x = g.cell_centers(ghosts=True)[0]
    alpha = ScalarField(g, alpha_from_psi0(x - x_gamma, params))
    return g, params, alpha


def _circle_2d(nc, eps_h_frac=0.5, radius=0.2, center=(0.5, 0.5)):
    g = build_grid(2, nc, (0.0, 1.0))
    params = InterfaceParams(eps_h=eps_h_frac * g.dx[0])
    x, y = g.cell_centers(ghosts=True)
    psi = np.sqrt((x - center[0]) ** 2 + (y - center[1]) ** 2) - radius
    return g, params, ScalarField(g, alpha_from_psi0(psi, params))


def test_center_gradient_constant_and_linear():
    g = build_grid(2, 16, (0.0, 1.0))
    const = fill_neumann_ghosts(ScalarField.full(g, 2.0))
    for comp in center_gradient(const).components:
        assert np.all(comp.interior == 0.0)

    x, _ = g.cell_centers(ghosts=True)
    ramp = ScalarField(g, x + np.zeros(g.padded_shape))
    gx, gy = center_gradient(ramp).components
    assert np.allclose(gx.interior, 1.0, atol=1e-13)
    assert np.allclose(gy.interior, 0.0, atol=1e-13)


def test_center_gradient_second_order():
    errs = []
    for nc in (128, 256):
        g = build_grid(1, nc, (0.0, 1.0))
        x = g.cell_centers(ghosts=True)[0]
        f = fill_neumann_ghosts(ScalarField(g, np.sin(2 * np.pi * x)))
        got = center_gradient(f).components[0].interior
        exact = 2 * np.pi * np.cos(2 * np.pi * g.axis_centers(0))
        # Skip the boundary cells, whose mirrored stencil is first order.
        errs.append(np.max(np.abs(got - exact)[2:-2]))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.1)


def test_face_gradients_exact_on_ramps():
    g = build_grid(2, 16, (0.0, 1.0))
    x, y = g.cell_centers(ghosts=True)
    f = ScalarField(g, 3.0 * x + np.zeros(g.padded_shape))
    fill_neumann_ghosts(f)
    gv = face_gradients(f, 0)
    assert np.allclose(gv[0][1:-1, :], 3.0, atol=1e-12)  # normal slope, interior faces
    h = ScalarField(g, 2.0 * y + np.zeros(g.padded_shape))
    fill_neumann_ghosts(h)
    gv = face_gradients(h, 0)
    assert np.allclose(gv[1][:, 1:-1], 2.0, atol=1e-12)  # tangential slope


def test_face_gradients_second_order_on_radial_field():
    errs = []
    for nc in (32, 64, 128):
        g, params, alpha = _circle_2d(nc)
        psi = fill_neumann_ghosts(
            ScalarField(g, psi0_from_alpha(fill_neumann_ghosts(alpha).values, params))
        )
        gv = face_gradients(psi, 0)
        xf = g.lo[0] + np.arange(nc + 1) * g.dx[0]
        yc = g.axis_centers(1)
        rx = xf[:, None] - 0.5
        ry = yc[None, :] - 0.5
        r = np.hypot(rx, ry)
        mask = (r > 0.08) & (np.abs(np.hypot(rx, ry) - 0.2) < 8 * params.eps_h)
        err = np.abs(gv[0] - rx / r) + np.abs(gv[1] - ry / r)
        errs.append(np.mean(err[mask]))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 1.7)


def test_mapped_gradient_matches_analytic_profile():
    g, params, alpha = _profile_1d()
    grad = mapped_gradient(alpha, Psi0(), params).components[0].interior
    a = alpha.interior
    exact = delta_of_alpha(a) / params.eps_h  # analytic d alpha / dx of the profile
    rel = np.abs(exact - grad) / (np.abs(exact) + 5e-16)
    i_mid = np.argmin(np.abs(g.axis_centers(0) - 0.5))
    assert rel[i_mid] < 1e-3
    assert rel[i_mid + 1] < 1e-3


def test_mapped_gradient_saturated_field_is_zero():
    g = build_grid(2, 16, (0.0, 1.0))
    params = InterfaceParams(eps_h=g.dx[0] / 2)
    ones = ScalarField.full(g, 1.0)
    for comp in mapped_gradient(ones, Psi0(), params).components:
        assert np.all(comp.interior == 0.0)


def test_mapped_gradient_psi0_vs_psi0prime():
    g, params, alpha = _profile_1d()
    g0 = mapped_gradient(alpha, Psi0(), params).components[0].interior
    g1 = mapped_gradient(alpha, Psi0Prime(gamma=1e-5), params).components[0].interior
    assert np.max(np.abs(g0 - g1)) < 1e-6 * np.max(np.abs(g0))


def test_mapped_gradient_psi1_linearity():
    # The psi1-mapped gradient is exactly the chain-rule factor times the
    # central-difference gradient of the mapped field.
    g, params, alpha = _profile_1d()
    kind = Psi1(gamma=0.1)
    got = mapped_gradient(alpha, kind, params).components[0].values
    psi1 = ScalarField(g, mapped_values(alpha.values, kind, params))
    expected = gradient_factor(alpha.values, kind, params) * center_gradient(psi1).components[0].values
    assert np.array_equal(got, expected)


def test_mapped_hessian_matches_analytic_profile():
    g, params, alpha = _profile_1d()
    bundle = mapped_hessian(alpha, Psi0(), params)
    a = alpha.interior
    exact = delta_of_alpha(a) * (1.0 - 2.0 * a) / params.eps_h**2
    got = bundle.hessian[0, 0][g.interior]
    band = (a > 0.05) & (a < 0.95)
    rel = np.abs(exact - got) / (np.abs(exact) + 5e-16)
    # Off the profile symmetry point the second derivative is reconstructed
    # to the same accuracy scale as the first derivative.
    good = band & (np.abs(exact) > 1.0)
    assert np.max(rel[good]) < 2e-2


def test_mapped_hessian_flat_distance_term_vanishes():
    # For an exact planar distance function the psi second derivative is zero
    # and only the off-interface term survives.
    g, params, alpha = _profile_1d()
    bundle = mapped_hessian(alpha, Psi0(), params)
    a = alpha.values
    work = alpha.values.copy()
    psi = psi0_from_alpha(work, params)
    grad = _central_gradients(psi, g)[0]
    survivor = delta_of_alpha(a) / params.eps_h * grad * grad * (1.0 - 2.0 * a) / params.eps_h
    band = (alpha.interior > 0.01) & (alpha.interior < 0.99)
    diff = np.abs(bundle.hessian[0, 0][g.interior] - survivor[g.interior])
    assert np.max(diff[band]) < 1e-8 * np.max(np.abs(survivor[g.interior][band]))


def test_mapped_hessian_symmetry_bitwise():
    g, params, alpha = _circle_2d(32)
    bundle = mapped_hessian(alpha, Psi0(), params)
    assert np.array_equal(bundle.hessian[0, 1], bundle.hessian[1, 0])
    bundle = mapped_hessian(alpha, Psi1(gamma=0.1), params)
    assert np.array_equal(bundle.hessian[0, 1], bundle.hessian[1, 0])


def test_unit_normals_ramp_circle_constant():
    g = build_grid(1, 16, (0.0, 1.0))
    x = g.cell_centers(ghosts=True)[0]
    ramp = ScalarField(g, x + np.zeros(g.padded_shape))
    n = unit_normals(ramp).components[0].interior
    assert np.all(n >= 1.0 - 1e-10)
    assert np.all(n <= 1.0)

    g2, params, alpha = _circle_2d(64)
    psi = ScalarField(g2, psi0_from_alpha(fill_neumann_ghosts(alpha).values, params))
    nx, ny = (c.interior for c in unit_normals(psi).components)
    x, y = g2.cell_centers()
    r = np.hypot(x - 0.5, y - 0.5)
    radial = (nx * (x - 0.5) + ny * (y - 0.5)) / np.where(r > 0, r, 1.0)
    # Normals are radially outward wherever the distance field is alive
    # (off-center and before the saturation clamp flattens it).
    alive = (r > 0.05) & (np.abs(r - 0.2) < 15 * params.eps_h)
    assert np.min(radial[alive]) > 0.999

    const = ScalarField.full(g2, 0.3)
    for comp in unit_normals(const).components:
        assert np.all(comp.interior == 0.0)


def test_normal_alignment_between_representations():
    # Normals from the mapped alpha gradient and from the distance gradient
    # agree wherever the interface weight is alive (positive scalar factor).
    g, params, alpha = _circle_2d(64)
    fill_neumann_ghosts(alpha)
    psi = ScalarField(g, psi0_from_alpha(alpha.values, params))
    n_psi = unit_normals(psi)
    ga = mapped_gradient(alpha, Psi0(), params)
    mag = np.sqrt(sum(c.values**2 for c in ga.components))
    live = delta_of_alpha(alpha.values) > 0.01
    for a in range(2):
        na = ga.components[a].values / (mag + 1e-14)
        diff = np.abs(na - n_psi.components[a].values)
        assert np.max(diff[g.interior][live[g.interior]]) < 1e-10


def test_curvature_circle_value_and_band_mask():
    g, params, alpha = _circle_2d(128)
    kap = curvature_field(alpha, Psi0(), params)
    a = alpha.interior
    band = (a >= 0.05) & (a <= 0.95)
    x, y = g.cell_centers()
    r = np.hypot(np.broadcast_to(x, a.shape) - 0.5, np.broadcast_to(y, a.shape) - 0.5)
    expected = 1.0 / r[band]
    assert np.max(np.abs(kap.interior[band] - expected) / expected) < 2e-2
    assert np.all(kap.interior[~band] == 0.0)
    # 1/R = 5 at the interface cells themselves (to within the cell-center
    # offset from the contour, which shrinks under refinement)
    near = band & (np.abs(r - 0.2) < 0.5 * g.dx[0])
    assert np.allclose(kap.interior[near], 5.0, rtol=5e-2)
    g2, params2, alpha2 = _circle_2d(256)
    kap2 = curvature_field(alpha2, Psi0(), params2)
    a2 = alpha2.interior
    x2, y2 = g2.cell_centers()
    r2 = np.hypot(np.broadcast_to(x2, a2.shape) - 0.5, np.broadcast_to(y2, a2.shape) - 0.5)
    near2 = (a2 >= 0.05) & (a2 <= 0.95) & (np.abs(r2 - 0.2) < 0.5 * g2.dx[0])
    worst = np.max(np.abs(kap.interior[near] - 5.0))
    worst2 = np.max(np.abs(kap2.interior[near2] - 5.0))
    assert worst2 < 0.7 * worst


def test_curvature_flat_interface_is_zero():
    g, params, alpha = _profile_1d()
    kap = curvature_field(alpha, Psi0(), params)
    assert np.all(kap.interior == 0.0)


def test_curvature_full_field_and_guard_warning():
    g, params, alpha = _circle_2d(32)
    kap = curvature_field(alpha, Psi0(), params, full_field=True)
    assert np.isfinite(kap.values).all()
    flat = ScalarField.full(g, 0.5)
    with pytest.warns(RuntimeWarning, match="curvature undefined"):
        curvature_field(flat, RawAlpha(), params)


def test_curvature_kinds_agree_at_interface():
    g, params, alpha = _circle_2d(64)
    k0 = curvature_field(alpha, Psi0(), params)
    k1 = curvature_field(alpha, Psi1(gamma=1e-5), params)
    a = alpha.interior
    mid = (a >= 0.4) & (a <= 0.6)
    assert np.max(np.abs(k0.interior[mid] - k1.interior[mid])) < 5e-3 * np.max(
        np.abs(k0.interior[mid])
    )


def test_distance_gradient_is_unit_after_reinit_band():
    # |grad psi0| = 1 holds discretely in the band for the analytic profile.
    g, params, alpha = _circle_2d(64)
    fill_neumann_ghosts(alpha)
    psi = psi0_from_alpha(alpha.values, params)
    grads = _central_gradients(psi, g)
    mag = np.sqrt(sum(c * c for c in grads))[g.interior]
    a = alpha.interior
    band = (a >= 0.05) & (a <= 0.95)
    assert np.max(np.abs(mag[band] - 1.0)) < 1e-2
