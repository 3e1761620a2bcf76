"""Inquiry toolkit for low-contrast gel images.

Estimates a smooth pseudo-background in closed form, flags residue
anomalies as an indicator map, compares band regions by PSNR, and ships
a seeded synthetic benchmark plus a batch CLI.
"""

from gelinspect.solver import (
    Kernel,
    SolverConfig,
    build_gaussian_kernel,
    build_highpass_kernel,
    circular_convolve,
    compute_residue,
    hp_filter_1d,
    objective,
    solve_pseudo_background,
    transpose_kernel,
)
from gelinspect.pipeline import (
    InquiryParams,
    InquiryReport,
    InquiryResult,
    normalize_residue,
    run_inquiry,
    stain_and_blend,
    threshold_binarize,
)
from gelinspect.bandcompare import (
    PsnrMatch,
    RegionSpec,
    extract_region,
    template_match_psnr,
)
from gelinspect.bench import (
    ForgeryOp,
    RegionStats,
    SceneSpec,
    apply_forgery,
    benchmark_report,
    default_scene,
    generate_unmodified,
    region_stats,
    render_scene,
)

__version__ = "0.1.0"

__all__ = [
    "Kernel",
    "SolverConfig",
    "build_gaussian_kernel",
    "build_highpass_kernel",
    "circular_convolve",
    "compute_residue",
    "hp_filter_1d",
    "objective",
    "solve_pseudo_background",
    "transpose_kernel",
    "InquiryParams",
    "InquiryReport",
    "InquiryResult",
    "normalize_residue",
    "run_inquiry",
    "stain_and_blend",
    "threshold_binarize",
    "PsnrMatch",
    "RegionSpec",
    "extract_region",
    "template_match_psnr",
    "ForgeryOp",
    "RegionStats",
    "SceneSpec",
    "apply_forgery",
    "benchmark_report",
    "default_scene",
    "generate_unmodified",
    "region_stats",
    "render_scene",
    "__version__",
]
