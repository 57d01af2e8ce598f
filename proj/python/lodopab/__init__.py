"""Low-dose parallel-beam CT simulation and reconstruction toolkit."""

from lodopab._core import (
    GROUND_TRUTH_SIZE,
    MU_MAX,
    SIMULATION_SIZE,
    EllipsePhantom,
    ImageGrid,
    PhysicsConstants,
    ScanGeometry,
    analytic_sinogram,
    back_project,
    beam_point,
    default_geometry,
    fbp_reconstruct,
    forward_project,
    hu_to_mu,
    make_geometry,
    psnr,
    rasterize,
    shepp_logan,
    simulate,
    ssim,
    uniform_disk,
)

__all__ = [
    "GROUND_TRUTH_SIZE",
    "MU_MAX",
    "SIMULATION_SIZE",
    "EllipsePhantom",
    "ImageGrid",
    "PhysicsConstants",
    "ScanGeometry",
    "analytic_sinogram",
    "back_project",
    "beam_point",
    "default_geometry",
    "fbp_reconstruct",
    "forward_project",
    "hu_to_mu",
    "make_geometry",
    "psnr",
    "rasterize",
    "shepp_logan",
    "simulate",
    "ssim",
    "uniform_disk",
]
