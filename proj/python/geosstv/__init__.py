"""GeoSSTV hyperspectral denoising and destriping.

Cubes are float64 numpy arrays of shape (n3, n1, n2): bands first, then rows
and columns.
"""

from ._core import (
    DivergenceError,
    IoError,
    NoiseSpec,
    RadiusSet,
    StepSizes,
    __version__,
    apply_operator,
    case_spec,
    compute_radii,
    deadline_coverage,
    default_step_sizes,
    denoise,
    estimate_opnorm,
    geosstv_value,
    mpsnr,
    mssim,
    prox_l12,
    project_box,
    project_l1ball,
    project_l2ball,
    read_cube,
    rho_for_case,
    set_thread_count,
    simulate,
    write_cube,
)

__all__ = [
    "DivergenceError",
    "IoError",
    "NoiseSpec",
    "RadiusSet",
    "StepSizes",
    "__version__",
    "apply_operator",
    "case_spec",
    "compute_radii",
    "deadline_coverage",
    "default_step_sizes",
    "denoise",
    "estimate_opnorm",
    "geosstv_value",
    "mpsnr",
    "mssim",
    "prox_l12",
    "project_box",
    "project_l1ball",
    "project_l2ball",
    "read_cube",
    "rho_for_case",
    "set_thread_count",
    "simulate",
    "write_cube",
]
