"""Inquiry pipeline: background solve, residue normalization, indicator map,
stained overlay, and the per-image report.

The recommended threshold range for ``gamma`` is 0.0001 to 0.5; the low
default flags nearly any nonzero residue, higher values isolate only the
strongest anomalies.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from gelinspect.solver import (
    SolverConfig,
    build_gaussian_kernel,
    build_highpass_kernel,
    compute_residue,
    solve_pseudo_background,
)

REPORT_SCHEMA_VERSION = 1

DEFAULT_GAMMA = 0.0001
DEFAULT_BLEND_ALPHA = 0.5
DEFAULT_STAIN_RGB = (1.0, 1.0, 0.0)


@dataclass(frozen=True)
class InquiryParams:
    """Everything a single inquiry depends on.

    lam is the smoothing weight of the background solve, gamma the
    indicator threshold on the normalized residue (open interval (0, 1)),
    blend_alpha the overlay opacity, stain_rgb the overlay color, and
    kernel_size / kernel_sigma define the Gaussian the high-pass stencil
    is complemented from.
    """

    lam: float = 0.00005
    gamma: float = DEFAULT_GAMMA
    blend_alpha: float = DEFAULT_BLEND_ALPHA
    stain_rgb: tuple = DEFAULT_STAIN_RGB
    kernel_size: int = 3
    kernel_sigma: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.lam) and self.lam >= 0.0):
            raise ValueError("lam must be finite and >= 0")
        if not (0.0 < self.gamma < 1.0):
            raise ValueError("gamma must lie in the open interval (0, 1)")
        if not (0.0 <= self.blend_alpha <= 1.0):
            raise ValueError("blend_alpha must lie in [0, 1]")
        stain = tuple(float(c) for c in self.stain_rgb)
        if len(stain) != 3 or any(not (0.0 <= c <= 1.0) for c in stain):
            raise ValueError("stain_rgb must be three channel values in [0, 1]")
        object.__setattr__(self, "stain_rgb", stain)
        if self.kernel_size < 1 or self.kernel_size % 2 == 0:
            raise ValueError("kernel_size must be odd and positive")
        if not (np.isfinite(self.kernel_sigma) and self.kernel_sigma > 0.0):
            raise ValueError("kernel_sigma must be positive and finite")

    def solver_config(self) -> SolverConfig:
        lowpass = build_gaussian_kernel(self.kernel_size, self.kernel_sigma)
        return SolverConfig(lam=self.lam, kernel=build_highpass_kernel(lowpass))

    def to_ordered_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "gamma": self.gamma,
            "blend_alpha": self.blend_alpha,
            "stain_rgb": list(self.stain_rgb),
            "kernel_size": self.kernel_size,
            "kernel_sigma": self.kernel_sigma,
        }


@dataclass(frozen=True)
class InquiryReport:
    """Summary statistics of one inquiry, serializable with a fixed key order."""

    params: InquiryParams
    residue_min: float
    residue_max: float
    residue_mean: float
    white_fraction: float
    input_digest: str
    artifact_paths: tuple = ()

    def to_ordered_dict(self) -> dict:
        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "params": self.params.to_ordered_dict(),
            "residue_min": self.residue_min,
            "residue_max": self.residue_max,
            "residue_mean": self.residue_mean,
            "white_fraction": self.white_fraction,
            "input_digest": self.input_digest,
            "artifact_paths": list(self.artifact_paths),
        }


@dataclass(frozen=True)
class InquiryResult:
    background: np.ndarray
    residue: np.ndarray
    indicator: np.ndarray
    overlay: np.ndarray
    report: InquiryReport


def validate_gray_image(image, kernel_size: int = 1) -> np.ndarray:
    """Check pipeline input: 2D, finite, in [0, 1], at least kernel-sized."""
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError("image must be a 2D grayscale matrix")
    if arr.shape[0] < kernel_size or arr.shape[1] < kernel_size:
        raise ValueError("image is smaller than the solver kernel")
    if not np.all(np.isfinite(arr)):
        raise ValueError("image must contain only finite values")
    if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
        raise ValueError("image values must lie in [0, 1]")
    return arr


def gray_image_digest(image) -> str:
    """Content digest over a canonical pixel encoding.

    Hashes the dimensions plus the row-major float64 little-endian pixel
    bytes, so the digest survives lossless container re-encodings of the
    same pixel data.
    """
    arr = np.ascontiguousarray(np.asarray(image, dtype=np.float64))
    if arr.ndim != 2:
        raise ValueError("digest input must be a 2D matrix")
    digest = hashlib.sha256()
    digest.update(f"gray:{arr.shape[0]}x{arr.shape[1]}:".encode("ascii"))
    digest.update(arr.astype("<f8", copy=False).tobytes())
    return "sha256:" + digest.hexdigest()


def normalize_residue(residue) -> np.ndarray:
    """Min-max normalize a residue map onto [0, 1].

    A constant map (max equals min) has no contrast to stretch and maps
    to all zeros; this is what makes a perfectly flat region read as
    residue-free downstream rather than dividing by zero.
    """
    arr = np.asarray(residue, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError("residue must be a 2D matrix")
    if not np.all(np.isfinite(arr)):
        raise ValueError("residue must contain only finite values")
    low = float(arr.min())
    high = float(arr.max())
    if high == low:
        return np.zeros_like(arr)
    return (arr - low) / (high - low)


def threshold_binarize(normalized, gamma: float) -> np.ndarray:
    """Indicator bits: 1 where the normalized residue is >= gamma.

    Ties map to white; gamma must lie strictly inside (0, 1) so both
    classes remain reachable.
    """
    arr = np.asarray(normalized, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError("normalized residue must be a 2D matrix")
    if not (0.0 < gamma < 1.0):
        raise ValueError("gamma must lie in the open interval (0, 1)")
    return (arr >= gamma).astype(np.uint8)


def stain_and_blend(image, indicator, params: InquiryParams | None = None) -> np.ndarray:
    """Overlay: replicate the gray image to RGB and alpha-blend the stain
    color over flagged pixels. Unflagged pixels keep the source value."""
    if params is None:
        params = InquiryParams()
    arr = validate_gray_image(image)
    bits = np.asarray(indicator)
    if bits.shape != arr.shape:
        raise ValueError("indicator dimensions differ from the image")
    if bits.dtype != np.uint8 or (bits.size and bits.max() > 1):
        raise ValueError("indicator must be uint8 bits in {0, 1}")
    overlay = np.repeat(arr[:, :, np.newaxis], 3, axis=2)
    mask = bits.astype(bool)
    alpha = params.blend_alpha
    stain = np.asarray(params.stain_rgb, dtype=np.float64)
    overlay[mask] = (1.0 - alpha) * overlay[mask] + alpha * stain
    return overlay


def run_inquiry(image, params: InquiryParams | None = None) -> InquiryResult:
    """Run the full pipeline on one grayscale image in [0, 1].

    Steps: solve the pseudo-background, take the absolute residue,
    min-max normalize it, binarize at gamma, and stain the flagged pixels
    over the source image. Report statistics are of the raw residue;
    white_fraction is the share of flagged pixels.
    """
    if params is None:
        params = InquiryParams()
    arr = validate_gray_image(image, kernel_size=params.kernel_size)
    background = solve_pseudo_background(arr, params.solver_config())
    residue = compute_residue(arr, background)
    normalized = normalize_residue(residue)
    indicator = threshold_binarize(normalized, params.gamma)
    overlay = stain_and_blend(arr, indicator, params)
    report = InquiryReport(
        params=params,
        residue_min=float(residue.min()),
        residue_max=float(residue.max()),
        residue_mean=float(residue.mean()),
        white_fraction=float(indicator.mean()),
        input_digest=gray_image_digest(arr),
    )
    return InquiryResult(background=background, residue=residue,
                         indicator=indicator, overlay=overlay, report=report)
