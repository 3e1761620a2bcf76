"""Band-to-band comparison by exhaustive template matching and PSNR."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


@dataclass(frozen=True)
class RegionSpec:
    """Axis-aligned rectangle: top-left corner plus positive extent."""

    top: int
    left: int
    height: int
    width: int

    def __post_init__(self):
        if self.top < 0 or self.left < 0:
            raise ValueError("region corner must be non-negative")
        if self.height < 1 or self.width < 1:
            raise ValueError("region extent must be positive")

    def check_within(self, shape) -> None:
        if self.top + self.height > shape[0] or self.left + self.width > shape[1]:
            raise ValueError(
                f"region {self.as_tuple()} exceeds image bounds {shape[0]}x{shape[1]}")

    def as_tuple(self) -> tuple:
        return (self.top, self.left, self.height, self.width)


def extract_region(image, region: RegionSpec) -> np.ndarray:
    """Copy out a rectangular crop; the result owns its memory."""
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError("image must be a 2D matrix")
    region.check_within(arr.shape)
    return arr[region.top:region.top + region.height,
               region.left:region.left + region.width].copy()


@dataclass(frozen=True)
class PsnrMatch:
    """Best alignment of a template inside a search window.

    offset is (dy, dx) of the template's top-left corner inside the
    search window; psnr_db is math.inf when the match is exact (MSE 0).
    """

    offset: tuple
    mse: float
    psnr_db: float

    @property
    def exact_match(self) -> bool:
        return self.mse == 0.0

    def to_ordered_dict(self) -> dict:
        # JSON has no infinity token, so an exact match serializes psnr_db
        # as null with exact_match set alongside.
        return {
            "offset": [int(self.offset[0]), int(self.offset[1])],
            "mse": self.mse,
            "psnr_db": None if self.exact_match else self.psnr_db,
            "exact_match": self.exact_match,
        }


def psnr_from_mse(mse: float) -> float:
    """PSNR in dB for unit peak; MSE 0 maps to the infinity sentinel."""
    if mse < 0.0:
        raise ValueError("mse must be non-negative")
    if mse == 0.0:
        return math.inf
    return -10.0 * math.log10(mse)


def _check_unit_range(arr: np.ndarray, name: str) -> None:
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must contain only finite values")
    if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
        raise ValueError(f"{name} values must lie in [0, 1]")


def template_match_psnr(template, search) -> PsnrMatch:
    """Exhaustively slide a template over a search window, minimizing MSE.

    Every integer offset that keeps the template fully inside the window
    is scored; ties resolve to the smallest (dy, dx) in row-major order.
    PSNR uses peak 1. Runtime is O(offsets x template area) with the
    inner products vectorized one template-row band at a time.
    """
    tpl = np.asarray(template, dtype=np.float64)
    win = np.asarray(search, dtype=np.float64)
    if tpl.ndim != 2 or win.ndim != 2:
        raise ValueError("template and search window must be 2D matrices")
    th, tw = tpl.shape
    sh, sw = win.shape
    if th < 1 or tw < 1:
        raise ValueError("template must be non-empty")
    if th > sh or tw > sw:
        raise ValueError("template exceeds the search window")
    _check_unit_range(tpl, "template")
    _check_unit_range(win, "search window")

    area = float(th * tw)
    best_sse = math.inf
    best_offset = (0, 0)
    for dy in range(sh - th + 1):
        windows = sliding_window_view(win[dy:dy + th, :], (th, tw))[0]
        diff = windows - tpl
        sse_row = np.einsum("xij,xij->x", diff, diff)
        dx = int(np.argmin(sse_row))  # first minimum, so smallest dx wins ties
        sse = float(sse_row[dx])
        if sse < best_sse:
            best_sse = sse
            best_offset = (dy, dx)
    mse = best_sse / area
    return PsnrMatch(offset=best_offset, mse=mse, psnr_db=psnr_from_mse(mse))
