"""Closed-form pseudo-background estimation for low-contrast grayscale images.

The background model minimizes

    ||I - J||_F^2 + lam * ||h * J||_F^2

over candidate backgrounds J, where ``*`` is circular (wrap-around)
convolution and ``h`` is a zero-sum high-pass kernel. The minimizer has a
closed form in the frequency domain: divide the image spectrum by
``1 + lam * F{h^t} o F{h}`` (elementwise) and invert. All transforms use
the unnormalized forward / 1/(MN) inverse convention and exact matrix
sizes, never padding, so circular boundary handling is implicit and the
reconstruction identity ``I = J + lam * h^t * (h * J)`` holds to near
machine precision.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

KERNEL_LOWPASS = "lowpass"
KERNEL_HIGHPASS = "highpass"

# Largest imaginary magnitude tolerated when a spectrum is expected to
# invert to a real matrix; anything above this is a caller error.
_IMAG_TOLERANCE = 1e-10

DEFAULT_LAMBDA = 0.00005
DEFAULT_KERNEL_SIZE = 3
DEFAULT_KERNEL_SIGMA = 1.0


@dataclass(frozen=True, eq=False)
class Kernel:
    """Square odd-sized convolution stencil with a declared role.

    ``lowpass`` kernels must sum to 1 and ``highpass`` kernels to 0,
    both within 1e-12; the sum rule is what separates smoothing from
    residue-extracting stencils downstream.
    """

    coefficients: np.ndarray
    kind: str

    def __post_init__(self):
        arr = np.asarray(self.coefficients, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("kernel coefficients must form a square matrix")
        if arr.shape[0] % 2 == 0 or arr.shape[0] < 1:
            raise ValueError("kernel size must be odd and positive")
        if not np.all(np.isfinite(arr)):
            raise ValueError("kernel coefficients must be finite")
        total = float(arr.sum())
        if self.kind == KERNEL_LOWPASS:
            if abs(total - 1.0) > 1e-12:
                raise ValueError(f"lowpass kernel must sum to 1, got {total!r}")
        elif self.kind == KERNEL_HIGHPASS:
            if abs(total) > 1e-12:
                raise ValueError(f"highpass kernel must sum to 0, got {total!r}")
        else:
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "coefficients", arr)

    @property
    def size(self) -> int:
        return self.coefficients.shape[0]


def build_gaussian_kernel(size: int = DEFAULT_KERNEL_SIZE,
                          sigma: float = DEFAULT_KERNEL_SIGMA) -> Kernel:
    """Sampled Gaussian lowpass kernel, normalized to unit sum.

    Matches the classic image-processing recipe: evaluate
    ``exp(-(x^2 + y^2) / (2 sigma^2))`` on the integer grid centered at
    the middle tap, then divide by the total. For (size=3, sigma=1.0)
    the taps are 0.204180 center, 0.123841 edge, 0.075114 corner.
    """
    if size < 1 or size % 2 == 0:
        raise ValueError("kernel size must be odd and positive")
    if not (sigma > 0.0 and np.isfinite(sigma)):
        raise ValueError("sigma must be positive and finite")
    radius = size // 2
    yy, xx = np.mgrid[-radius:radius + 1, -radius:radius + 1]
    coeff = np.exp(-(xx * xx + yy * yy) / (2.0 * sigma * sigma))
    coeff /= coeff.sum()
    return Kernel(coeff, KERNEL_LOWPASS)


def build_highpass_kernel(lowpass: Kernel) -> Kernel:
    """Complementary high-pass stencil: center delta minus the lowpass taps."""
    if lowpass.kind != KERNEL_LOWPASS:
        raise ValueError("expected a lowpass kernel")
    coeff = -lowpass.coefficients.copy()
    radius = lowpass.size // 2
    coeff[radius, radius] += 1.0
    return Kernel(coeff, KERNEL_HIGHPASS)


def transpose_kernel(kernel: Kernel) -> Kernel:
    """Reflect the stencil across its main diagonal; the kind is preserved."""
    return Kernel(kernel.coefficients.T.copy(), kernel.kind)


def default_highpass_kernel() -> Kernel:
    return build_highpass_kernel(build_gaussian_kernel())


@dataclass(frozen=True)
class SolverConfig:
    """Smoothing weight plus the high-pass stencil that defines the penalty."""

    lam: float = DEFAULT_LAMBDA
    kernel: Kernel = field(default_factory=default_highpass_kernel)

    def __post_init__(self):
        if not (np.isfinite(self.lam) and self.lam >= 0.0):
            raise ValueError("lam must be finite and >= 0")
        if self.kernel.kind != KERNEL_HIGHPASS:
            raise ValueError("solver kernel must be highpass")


def _as_real_matrix(image, name: str = "image") -> np.ndarray:
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a 2D matrix")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must contain only finite values")
    return arr


def _embed_stencil(stencil: np.ndarray, height: int, width: int) -> np.ndarray:
    """Place a small stencil on an all-zero height x width canvas.

    The center tap goes to (0, 0) and negative offsets wrap around the far
    edges, which is exactly the layout the convolution theorem needs for
    circular convolution on the same grid.
    """
    kh, kw = stencil.shape
    if height < kh or width < kw:
        raise ValueError("embedding canvas is smaller than the stencil")
    ry, rx = kh // 2, kw // 2
    out = np.zeros((height, width), dtype=np.float64)
    for oy in range(-ry, ry + 1):
        for ox in range(-rx, rx + 1):
            out[oy % height, ox % width] = stencil[oy + ry, ox + rx]
    return out


def embed_kernel(kernel: Kernel, height: int, width: int) -> np.ndarray:
    """Embed a kernel for frequency-domain use; see ``_embed_stencil``."""
    return _embed_stencil(kernel.coefficients, height, width)


def circular_convolve(image, kernel: Kernel) -> np.ndarray:
    """True circular convolution of an image with a small kernel.

    out[p] = sum over offsets o of k[o] * image[p - o], indices wrapped
    modulo the image dimensions on both axes. Computed as a sum of rolled
    copies, which is exact and fast for the small stencils used here.
    """
    arr = _as_real_matrix(image)
    k = kernel.coefficients
    if arr.shape[0] < kernel.size or arr.shape[1] < kernel.size:
        raise ValueError("image is smaller than the kernel")
    radius = kernel.size // 2
    out = np.zeros_like(arr)
    for oy in range(-radius, radius + 1):
        for ox in range(-radius, radius + 1):
            c = k[oy + radius, ox + radius]
            if c != 0.0:
                out += c * np.roll(arr, (oy, ox), axis=(0, 1))
    return out


def dft2_forward(matrix) -> np.ndarray:
    """Unnormalized 2D DFT of a real matrix."""
    arr = _as_real_matrix(matrix, "matrix")
    return np.fft.fft2(arr)


def dft2_inverse(spectrum) -> np.ndarray:
    """Inverse 2D DFT (1/(MN) scaling) of a conjugate-symmetric spectrum.

    The result of a symmetric spectrum is real up to rounding; the tiny
    imaginary residue is dropped. A residue above 1e-10 means the
    spectrum was not conjugate-symmetric and raises instead of silently
    returning garbage.
    """
    arr = np.asarray(spectrum, dtype=np.complex128)
    if arr.ndim != 2:
        raise ValueError("spectrum must be a 2D matrix")
    if not np.all(np.isfinite(arr)):
        raise ValueError("spectrum must contain only finite values")
    out = np.fft.ifft2(arr)
    return _drop_imaginary(out)


def _drop_imaginary(values: np.ndarray) -> np.ndarray:
    residue = float(np.max(np.abs(values.imag))) if values.size else 0.0
    if residue >= _IMAG_TOLERANCE:
        raise ValueError(
            f"imaginary residue {residue:.3e} exceeds {_IMAG_TOLERANCE:.0e}; "
            "spectrum is not conjugate-symmetric")
    return np.ascontiguousarray(values.real)


def _solve_stencil(values: np.ndarray, stencil: np.ndarray,
                   stencil_t: np.ndarray, lam: float) -> np.ndarray:
    """Shared closed-form solve for any odd-sized (possibly non-square) stencil.

    The caller supplies the transposed stencil explicitly because the
    transpose must live on the same grid as the stencil itself; for a
    column stencil on a T x 1 series that is the stencil unchanged, not
    its matrix transpose.
    """
    if lam == 0.0:
        # The denominator is identically one, so the transform pair is a
        # round trip; skip it and return the input exactly.
        return values.copy()
    height, width = values.shape
    spectrum_h = np.fft.fft2(_embed_stencil(stencil, height, width))
    spectrum_ht = np.fft.fft2(_embed_stencil(stencil_t, height, width))
    denominator = 1.0 + lam * (spectrum_ht * spectrum_h)
    background = np.fft.ifft2(np.fft.fft2(values) / denominator)
    result = _drop_imaginary(background)
    if not np.all(np.isfinite(result)):
        raise ValueError("solver produced nonfinite values; denominator is degenerate")
    return result


def solve_pseudo_background(image, config: SolverConfig | None = None) -> np.ndarray:
    """Minimize ||I - J||^2 + lam ||h * J||^2 over backgrounds J, in closed form.

    Parameters
    ----------
    image : 2D array
        Input matrix. Values may lie outside [0, 1]; the solver is linear
        and range-agnostic. Dimensions must be at least the kernel size.
    config : SolverConfig, optional
        Smoothing weight and high-pass stencil; defaults to lam=0.00005
        with the 3x3 sigma=1.0 Gaussian-complement kernel.

    Returns
    -------
    2D float64 array, the pseudo-background J. Satisfies
    I = J + lam * h^t * (h * J) under circular convolution up to rounding,
    and J = I exactly when lam = 0.
    """
    if config is None:
        config = SolverConfig()
    arr = _as_real_matrix(image)
    if arr.shape[0] < config.kernel.size or arr.shape[1] < config.kernel.size:
        raise ValueError("image is smaller than the solver kernel")
    taps = np.asarray(config.kernel.coefficients)
    return _solve_stencil(arr, taps, taps.T.copy(), config.lam)


def compute_residue(image, background) -> np.ndarray:
    """Elementwise absolute difference |I - J|."""
    arr = _as_real_matrix(image)
    bg = _as_real_matrix(background, "background")
    if arr.shape != bg.shape:
        raise ValueError("image and background dimensions differ")
    return np.abs(arr - bg)


def objective(image, candidate, config: SolverConfig | None = None) -> float:
    """Evaluate ||I - J||_F^2 + lam * ||h * J||_F^2 for a candidate J."""
    if config is None:
        config = SolverConfig()
    arr = _as_real_matrix(image)
    cand = _as_real_matrix(candidate, "candidate")
    if arr.shape != cand.shape:
        raise ValueError("image and candidate dimensions differ")
    diff = arr - cand
    smoothness = circular_convolve(cand, config.kernel)
    return float(np.sum(diff * diff) + config.lam * np.sum(smoothness * smoothness))


def hp_filter_1d(series, lam: float) -> np.ndarray:
    """Trend of a 1D series under a circular second-difference penalty.

    Solves min_t ||y - t||^2 + lam * ||d2 * t||^2 where d2 is the
    circular [1, -2, 1] stencil, via the same closed form as the 2D
    solver applied to the series as a T x 1 matrix. The cyclical
    component is ``series - trend``.
    """
    y = np.asarray(series, dtype=np.float64)
    if y.ndim != 1:
        raise ValueError("series must be one-dimensional")
    if y.shape[0] < 3:
        raise ValueError("series must have at least 3 samples")
    if not np.all(np.isfinite(y)):
        raise ValueError("series must contain only finite values")
    if not (np.isfinite(lam) and lam >= 0.0):
        raise ValueError("lam must be finite and >= 0")
    stencil = np.array([[1.0], [-2.0], [1.0]])
    # The second difference is symmetric under reversal, so its transpose
    # on the series axis is itself.
    trend = _solve_stencil(y.reshape(-1, 1), stencil, stencil, lam)
    return trend.ravel()
