"""Seeded synthetic benchmark: scene rendering, forgery simulation,
compression sweeps, and region white-density statistics.

The default scene is a 256 x 512 canvas holding seven rectangle bands
plus a triangle inside an outlined bounding box, all at low contrast
around a mid-gray backdrop. Geometry and intensities are frozen (and
serialized with a version field) because the regression targets below
depend on them:

* flat-region means sit mid-bin for the JPEG DC quantizer at every
  quality in the sweep, so block plateaus cannot split and fake
  white-density structure in one region but not another;
* band contrast is low enough that edge residues stay under the noise
  residue maximum, which keeps high-gamma thresholds meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from gelinspect.bandcompare import RegionSpec
from gelinspect.imageio import decode_jpeg, encode_jpeg
from gelinspect.pipeline import InquiryParams, run_inquiry

SCENE_VERSION = 1

DEFAULT_SEED = 2026

# Noise levels for the simulations: uniform sensor noise for the
# unmodified scene, and the two-sigma scheme for copy-paste forgeries
# (quiet pasted foreground inside a noisier backdrop). The unmodified
# sigma is set high enough that its texture survives quantization at
# the lowest swept quality in (nearly) every block; weaker noise makes
# region white fractions block-granular shot noise there, and the
# homogeneity comparison turns unstable.
UNMODIFIED_SIGMA = 0.03
PASTE_FOREGROUND_SIGMA = 0.01
PASTE_BACKGROUND_SIGMA = 0.1

# Bench measurement constants. The density contrast threshold is the
# quantified form of "the pasted region reads clearly different"; the
# bench gamma sits mid-range where amplitude differences separate
# cleanly (the pipeline's low default flags nearly everything nonzero
# on both sides of a paste and is useless as a region discriminator).
BENCH_GAMMA = 0.05
DENSITY_CONTRAST_MIN = 2.0
HOMOGENEITY_REL_TOL = 0.25
SWEEP_QUALITIES = (10, 7, 5, 3, 1)
ERASURE_GAMMAS = (0.0001, 0.01, 0.1, 0.5)

QUALITY_MIN = 0
QUALITY_MAX = 12

_BACKGROUND = 128.0 / 255.0
_BAND = 112.0 / 255.0
_TRIANGLE = 116.0 / 255.0


@dataclass(frozen=True)
class SceneSpec:
    """Canvas size, backdrop intensity, and an ordered shape list.

    Shapes are plain dicts (JSON-ready). Later shapes paint over
    earlier ones.
    """

    height: int
    width: int
    background_intensity: float
    shapes: tuple
    version: int = SCENE_VERSION

    def __post_init__(self):
        if self.height < 1 or self.width < 1:
            raise ValueError("canvas dimensions must be positive")
        if not (0.0 <= self.background_intensity <= 1.0):
            raise ValueError("background intensity must lie in [0, 1]")
        object.__setattr__(self, "shapes", tuple(dict(s) for s in self.shapes))
        for shape in self.shapes:
            kind = shape.get("kind")
            if kind not in ("rectangle_band", "triangle", "bounding_box"):
                raise ValueError(f"unknown shape kind {kind!r}")
            if not (0.0 <= float(shape.get("intensity", -1.0)) <= 1.0):
                raise ValueError("shape intensity must lie in [0, 1]")

    def to_json_dict(self) -> dict:
        return {
            "version": self.version,
            "height": self.height,
            "width": self.width,
            "background_intensity": self.background_intensity,
            "shapes": [dict(s) for s in self.shapes],
        }

    @staticmethod
    def from_json_dict(doc: dict) -> "SceneSpec":
        return SceneSpec(
            height=int(doc["height"]),
            width=int(doc["width"]),
            background_intensity=float(doc["background_intensity"]),
            shapes=tuple(doc["shapes"]),
            version=int(doc.get("version", SCENE_VERSION)),
        )


def default_scene() -> SceneSpec:
    shapes = []
    # Seven bands in one row, 44 x 46 each, 18 px gaps.
    for i in range(7):
        shapes.append({
            "kind": "rectangle_band",
            "top": 150, "left": 30 + 64 * i, "height": 44, "width": 46,
            "intensity": _BAND,
        })
    shapes.append({
        "kind": "bounding_box",
        "top": 28, "left": 40, "height": 91, "width": 151, "thickness": 3,
        "intensity": _BAND,
    })
    shapes.append({
        "kind": "triangle",
        "vertices": [[34, 115], [112, 48], [112, 182]],
        "intensity": _TRIANGLE,
    })
    return SceneSpec(height=256, width=512, background_intensity=_BACKGROUND,
                     shapes=tuple(shapes))


def _paint_rectangle(canvas, top, left, height, width, intensity):
    canvas[top:top + height, left:left + width] = intensity


def _paint_bounding_box(canvas, top, left, height, width, thickness, intensity):
    t = thickness
    canvas[top:top + t, left:left + width] = intensity
    canvas[top + height - t:top + height, left:left + width] = intensity
    canvas[top:top + height, left:left + t] = intensity
    canvas[top:top + height, left + width - t:left + width] = intensity


def _paint_triangle(canvas, vertices, intensity):
    (y0, x0), (y1, x1), (y2, x2) = [(float(v[0]), float(v[1])) for v in vertices]
    yy, xx = np.mgrid[0:canvas.shape[0], 0:canvas.shape[1]]
    # Half-plane sign tests against each directed edge; boundary counts in.
    d0 = (xx - x0) * (y1 - y0) - (yy - y0) * (x1 - x0)
    d1 = (xx - x1) * (y2 - y1) - (yy - y1) * (x2 - x1)
    d2 = (xx - x2) * (y0 - y2) - (yy - y2) * (x0 - x2)
    inside = ((d0 >= 0) & (d1 >= 0) & (d2 >= 0)) | ((d0 <= 0) & (d1 <= 0) & (d2 <= 0))
    canvas[inside] = intensity


def render_scene(scene: SceneSpec) -> np.ndarray:
    """Rasterize a scene to a noiseless [0, 1] float image."""
    canvas = np.full((scene.height, scene.width), scene.background_intensity)
    for shape in scene.shapes:
        if shape["kind"] == "rectangle_band":
            _paint_rectangle(canvas, shape["top"], shape["left"],
                             shape["height"], shape["width"], shape["intensity"])
        elif shape["kind"] == "bounding_box":
            _paint_bounding_box(canvas, shape["top"], shape["left"],
                                shape["height"], shape["width"],
                                shape["thickness"], shape["intensity"])
        else:
            _paint_triangle(canvas, shape["vertices"], shape["intensity"])
    return canvas


def generate_unmodified(scene: SceneSpec | None = None,
                        sigma: float = UNMODIFIED_SIGMA,
                        seed: int = DEFAULT_SEED) -> np.ndarray:
    """Render a scene and add seeded Gaussian noise, clamped to [0, 1].

    The clamp cannot bias the statistics of mid-gray regions because the
    scene intensities sit several sigma away from both limits.
    """
    if scene is None:
        scene = default_scene()
    if not (np.isfinite(sigma) and sigma >= 0.0):
        raise ValueError("sigma must be finite and >= 0")
    canvas = render_scene(scene)
    if sigma > 0.0:
        rng = np.random.default_rng(seed)
        canvas = canvas + sigma * rng.standard_normal(canvas.shape)
    return np.clip(canvas, 0.0, 1.0)


FORGERY_COPY_PASTE = "copy_paste"
FORGERY_ERASE = "erase"


@dataclass(frozen=True)
class ForgeryOp:
    """One local manipulation applied to a scene image."""

    kind: str
    target: RegionSpec
    source: RegionSpec | None = None
    fill_intensity: float = 0.0
    noise_sigma_fore: float = 0.0
    noise_sigma_back: float = 0.0

    def __post_init__(self):
        if self.kind not in (FORGERY_COPY_PASTE, FORGERY_ERASE):
            raise ValueError(f"unknown forgery kind {self.kind!r}")
        if self.kind == FORGERY_COPY_PASTE:
            if self.source is None:
                raise ValueError("copy_paste needs a source region")
            if (self.source.height, self.source.width) != (self.target.height, self.target.width):
                raise ValueError("source and target extents must match")
        if not (0.0 <= self.fill_intensity <= 1.0):
            raise ValueError("fill intensity must lie in [0, 1]")
        for sigma in (self.noise_sigma_fore, self.noise_sigma_back):
            if not (np.isfinite(sigma) and sigma >= 0.0):
                raise ValueError("noise sigma must be finite and >= 0")

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "target": list(self.target.as_tuple()),
            "source": list(self.source.as_tuple()) if self.source else None,
            "fill_intensity": self.fill_intensity,
            "noise_sigma_fore": self.noise_sigma_fore,
            "noise_sigma_back": self.noise_sigma_back,
        }

    @staticmethod
    def from_json_dict(doc: dict) -> "ForgeryOp":
        source = doc.get("source")
        return ForgeryOp(
            kind=doc["kind"],
            target=RegionSpec(*doc["target"]),
            source=RegionSpec(*source) if source else None,
            fill_intensity=float(doc.get("fill_intensity", 0.0)),
            noise_sigma_fore=float(doc.get("noise_sigma_fore", 0.0)),
            noise_sigma_back=float(doc.get("noise_sigma_back", 0.0)),
        )


def _region_slices(region: RegionSpec):
    return (slice(region.top, region.top + region.height),
            slice(region.left, region.left + region.width))


def apply_forgery(image, op: ForgeryOp, seed: int = DEFAULT_SEED) -> np.ndarray:
    """Apply one forgery op with seeded noise; the input is left untouched.

    copy_paste replaces the target pixels with the source pixels, then
    adds noise drawn from one standard-normal field scaled per pixel:
    noise_sigma_fore inside the target, noise_sigma_back elsewhere.
    Using a single field per seed makes pasting a region onto itself
    with equal sigmas an exact identity apart from that shared noise.

    erase sets the target to the fill intensity and re-applies
    noise_sigma_back inside it (zero sigma leaves the fill exactly
    constant, which is what a flat-fill forger produces).
    """
    arr = np.asarray(image, dtype=np.float64).copy()
    if arr.ndim != 2:
        raise ValueError("image must be a 2D matrix")
    op.target.check_within(arr.shape)
    if op.kind == FORGERY_COPY_PASTE:
        op.source.check_within(arr.shape)
        arr[_region_slices(op.target)] = arr[_region_slices(op.source)]
        field = np.random.default_rng(seed).standard_normal(arr.shape)
        sigma_map = np.full(arr.shape, op.noise_sigma_back)
        sigma_map[_region_slices(op.target)] = op.noise_sigma_fore
        arr = arr + field * sigma_map
    else:
        arr[_region_slices(op.target)] = op.fill_intensity
        if op.noise_sigma_back > 0.0:
            field = np.random.default_rng(seed).standard_normal(arr.shape)
            ts = _region_slices(op.target)
            arr[ts] = arr[ts] + op.noise_sigma_back * field[ts]
    return np.clip(arr, 0.0, 1.0)


def copy_paste_op() -> ForgeryOp:
    """Default forgery: the area around band 4 pasted into the empty
    upper-right quarter, quiet foreground inside a noisy backdrop."""
    return ForgeryOp(
        kind=FORGERY_COPY_PASTE,
        source=RegionSpec(140, 212, 64, 66),
        target=RegionSpec(48, 300, 64, 66),
        noise_sigma_fore=PASTE_FOREGROUND_SIGMA,
        noise_sigma_back=PASTE_BACKGROUND_SIGMA,
    )


def erase_op() -> ForgeryOp:
    """Default erasure: flat-fill over bands 4 and 5 at the backdrop shade."""
    return ForgeryOp(
        kind=FORGERY_ERASE,
        target=RegionSpec(140, 212, 64, 130),
        fill_intensity=_BACKGROUND,
        noise_sigma_fore=0.0,
        noise_sigma_back=0.0,
    )


def build_copy_paste_image(seed: int = DEFAULT_SEED) -> np.ndarray:
    """Noiseless render plus the default paste op (the op adds all noise)."""
    return apply_forgery(render_scene(default_scene()), copy_paste_op(), seed=seed)


def build_erasure_image(seed: int = DEFAULT_SEED) -> np.ndarray:
    """Noisy unmodified scene with bands 4 and 5 flat-filled away."""
    noisy = generate_unmodified(seed=seed)
    return apply_forgery(noisy, erase_op(), seed=seed)


def measurement_regions(scene_kind: str) -> dict:
    """Named stat regions per scene, interiors kept clear of shape edges
    and of the paste seam."""
    if scene_kind == "unmodified":
        return {
            "band_interior": RegionSpec(156, 100, 32, 34),
            "triangle_interior": RegionSpec(84, 95, 24, 40),
            "background_patch": RegionSpec(60, 220, 32, 34),
            "background": RegionSpec(206, 60, 40, 380),
        }
    if scene_kind == "copy_paste":
        return {
            "pasted": RegionSpec(56, 308, 48, 50),
            "background": RegionSpec(206, 60, 40, 380),
        }
    if scene_kind == "erasure":
        return {f"band_{i + 1}": RegionSpec(150, 30 + 64 * i, 44, 46) for i in range(7)}
    raise ValueError(f"unknown scene kind {scene_kind!r}")


ERASED_BANDS = ("band_4", "band_5")


@dataclass(frozen=True)
class RegionStats:
    region: RegionSpec
    white_fraction: float
    empty_zone: bool


def region_stats(indicator, regions) -> list:
    """White-bit share per region; empty_zone only when exactly zero bits."""
    bits = np.asarray(indicator)
    if bits.ndim != 2 or bits.dtype != np.uint8:
        raise ValueError("indicator must be a 2D uint8 bit matrix")
    stats = []
    for region in regions:
        region.check_within(bits.shape)
        crop = bits[_region_slices(region)]
        fraction = float(crop.mean())
        stats.append(RegionStats(region=region, white_fraction=fraction,
                                 empty_zone=fraction == 0.0))
    return stats


# ---------------------------------------------------------------------------
# Compression sweep
# ---------------------------------------------------------------------------

def map_quality(quality: int) -> int:
    """Map the editor-style 0..12 quality dial onto codec quality 55..100.

    The dial models the encoder the reference forgeries were saved with:
    even its lowest setting keeps noise texture visible, so the codec's
    bottom half (where every block of a sigma 0.1 field collapses to a
    flat plateau) is deliberately out of reach.
    """
    q = int(quality)
    if q < QUALITY_MIN or q > QUALITY_MAX:
        raise ValueError(f"quality must lie in [{QUALITY_MIN}, {QUALITY_MAX}]")
    return 55 + round(45 * q / 12)


def jpeg_roundtrip(image, quality: int):
    """Encode at one dial quality and decode back; returns (image, bytes)."""
    payload = encode_jpeg(image, map_quality(quality))
    return decode_jpeg(payload), len(payload)


def compression_sweep(image, qualities) -> list:
    """Lossy round trips at each dial quality, in the given order."""
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError("image must be a 2D matrix")
    if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
        raise ValueError("image values must lie in [0, 1]")
    out = []
    for quality in qualities:
        decoded, _ = jpeg_roundtrip(arr, quality)
        out.append((int(quality), decoded))
    return out


# ---------------------------------------------------------------------------
# Density statistics
# ---------------------------------------------------------------------------

def white_density_contrast(a: float, b: float) -> float:
    """Ratio of the denser to the sparser white fraction.

    Infinity when exactly one side is empty; NaN when both are (no
    signal to compare, which callers must treat as a failure).
    """
    hi, lo = max(a, b), min(a, b)
    if hi == 0.0:
        return float("nan")
    if lo == 0.0:
        return float("inf")
    return hi / lo


def relative_difference(a: float, b: float) -> float:
    """|a - b| relative to the larger value; zero when both are zero."""
    hi = max(abs(a), abs(b))
    if hi == 0.0:
        return 0.0
    return abs(a - b) / hi


def _inquiry_bits(image, lam: float, gamma: float) -> np.ndarray:
    params = InquiryParams(lam=lam, gamma=gamma)
    return run_inquiry(image, params).indicator


def quality_sweep_rows(scene_name: str, image, regions: dict, qualities,
                       lam: float = 0.00005, gamma: float = BENCH_GAMMA) -> list:
    """Pipeline white fractions per region, uncompressed (quality null)
    and after each dial quality."""
    rows = []
    variants = [(None, np.asarray(image, dtype=np.float64))]
    variants += compression_sweep(image, qualities)
    names = sorted(regions)
    for quality, variant in variants:
        bits = _inquiry_bits(variant, lam, gamma)
        stats = region_stats(bits, [regions[n] for n in names])
        for name, stat in zip(names, stats):
            rows.append({
                "scene": scene_name,
                "quality": quality,
                "gamma": gamma,
                "region": name,
                "white_fraction": stat.white_fraction,
                "empty_zone": stat.empty_zone,
            })
    return rows


def gamma_sweep_rows(scene_name: str, image, regions: dict, gammas,
                     lam: float = 0.00005) -> list:
    """Pipeline white fractions per region across thresholds, uncompressed."""
    rows = []
    names = sorted(regions)
    for gamma in gammas:
        bits = _inquiry_bits(image, lam, gamma)
        stats = region_stats(bits, [regions[n] for n in names])
        for name, stat in zip(names, stats):
            rows.append({
                "scene": scene_name,
                "quality": None,
                "gamma": gamma,
                "region": name,
                "white_fraction": stat.white_fraction,
                "empty_zone": stat.empty_zone,
            })
    return rows


def benchmark_report(seed: int = DEFAULT_SEED, qualities=SWEEP_QUALITIES,
                     gammas=ERASURE_GAMMAS, lam: float = 0.00005,
                     gamma: float = BENCH_GAMMA) -> dict:
    """Full sweep table over the three seeded scenes."""
    rows = []
    rows += quality_sweep_rows(
        "unmodified", generate_unmodified(seed=seed),
        measurement_regions("unmodified"), qualities, lam=lam, gamma=gamma)
    rows += quality_sweep_rows(
        "copy_paste", build_copy_paste_image(seed=seed),
        measurement_regions("copy_paste"), qualities, lam=lam, gamma=gamma)
    rows += gamma_sweep_rows(
        "erasure", build_erasure_image(seed=seed),
        measurement_regions("erasure"), gammas, lam=lam)
    return {
        "schema_version": 1,
        "seed": seed,
        "lambda": lam,
        "bench_gamma": gamma,
        "qualities": [int(q) for q in qualities],
        "erasure_gammas": [float(g) for g in gammas],
        "rows": rows,
    }
