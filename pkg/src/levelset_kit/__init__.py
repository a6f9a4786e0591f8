"""Conservative level-set interface capturing on uniform structured grids.

The package carries the interface as a bounded phase fraction together with
its reconstructed signed distance function, re-initializes the profile with
a localized conservative flux, differentiates it through mapping-consistent
formulas (including curvature), and transports it with slope-limited fluxes.
Benchmark cases and their measurement procedures live in ``cases`` and
``diagnostics``; the command-line driver in ``cli``.
"""

from .advection import (
    AdvectConfig,
    CFLViolationError,
    CircleAreaTracker,
    CoupledRunError,
    Rotation,
    Sampled,
    Vortex,
    advect_step,
    face_normal_velocities,
    muscl_face_states,
    run_coupled,
    velocity_sample,
)
from .diagnostics import (
    DiagnosticsReport,
    IsoContour,
    area_error,
    area_error_series,
    band_curvature_norms,
    circle_curvature_error,
    extract_isocontour,
    fitted_order,
    interface_center,
    l1_change,
    observed_order,
    position_error,
    region_mass,
    relative_error_field,
)
from .differential import (
    DerivativeBundle,
    center_gradient,
    curvature_field,
    face_gradients,
    mapped_gradient,
    mapped_hessian,
    unit_normals,
)
from .grid import (
    Grid,
    ScalarField,
    VectorField,
    build_grid,
    fill_neumann_ghosts,
    fill_periodic_ghosts,
    integrate_field,
)
from .mappings import (
    InterfaceParams,
    MappingKind,
    Psi0,
    Psi0Prime,
    Psi1,
    RawAlpha,
    alpha_from_psi0,
    delta_of_alpha,
    half_width,
    psi0_from_alpha,
    psi0prime_of_psi1,
    psi1_of_alpha,
    zeta_of_alpha,
)
from .reinit import (
    ConvergenceTrace,
    NumericalDivergenceError,
    ReinitConfig,
    default_dtau,
    reinit_rhs,
    reinit_rhs_nonconservative,
    reinitialize,
    rk3_step,
)

__version__ = "0.1.0"
