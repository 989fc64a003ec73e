"""Pixel-exact executors for the five editing effects, plus command dispatch.

Formulas (round = half away from zero, applied after float arithmetic,
then clamp to [0, 255]):

  adjust_color:      out = round((1 - a) * in + a * target)
  adjust_brightness: out = clamp(round(in * (1 + v / 100)))
  adjust_contrast:   out = clamp(round((in - 128) * (1 + v / 100) + 128))

Rotation is counter-clockwise about the image center onto the rounded
axis-aligned bounding box of the rotated rectangle, nearest-neighbor sampled,
so right angles are exact pixel permutations. Cutout keeps the largest
4-connected component of pixels far (Otsu on the distance histogram) from the
median border color.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import kernels
from .commands import (
    AdjustBrightness,
    AdjustColor,
    AdjustContrast,
    Command,
    ImageCutout,
    Rotate,
    Search,
)
from .errors import CutoutFailedError, NoCurrentImageError
from .raster import RasterImage

# Conventional RGB triples for the nine color names.
COLOR_TABLE: dict[str, tuple[int, int, int]] = {
    "red": (255, 0, 0),
    "orange": (255, 165, 0),
    "green": (0, 128, 0),
    "blue": (0, 0, 255),
    "sky_blue": (135, 206, 235),
    "purple": (128, 0, 128),
    "brown": (165, 42, 42),
    "yellow": (255, 255, 0),
    "pink": (255, 192, 203),
}

CUTOUT_MIN_COVER = 0.05
CUTOUT_MAX_COVER = 0.95


def _round_half_away(x: float) -> int:
    if x >= 0:
        return int(math.floor(x + 0.5))
    return -int(math.floor(-x + 0.5))


def _clamp8(v: int) -> int:
    if v < 0:
        return 0
    if v > 255:
        return 255
    return v


def _lut(fn) -> bytes:
    return bytes(_clamp8(fn(v)) for v in range(256))


def adjust_color(img: RasterImage, color: str, intensity: float) -> RasterImage:
    """Blend every pixel toward the named color by `intensity`."""
    tr, tg, tb = COLOR_TABLE[color]
    a = intensity
    luts = [
        _lut(lambda v, t=t: _round_half_away((1.0 - a) * v + a * t))
        for t in (tr, tg, tb)
    ]
    buf = bytearray(img.pixels)
    for c in range(3):
        buf[c::3] = bytes(buf[c::3]).translate(luts[c])
    return RasterImage(img.width, img.height, bytes(buf))


def adjust_brightness(img: RasterImage, value: int) -> RasterImage:
    gain = 1.0 + value / 100.0
    lut = _lut(lambda v: _round_half_away(v * gain))
    return RasterImage(img.width, img.height, img.pixels.translate(lut))


def adjust_contrast(img: RasterImage, value: int) -> RasterImage:
    slope = 1.0 + value / 100.0
    lut = _lut(lambda v: _round_half_away((v - 128) * slope + 128.0))
    return RasterImage(img.width, img.height, img.pixels.translate(lut))


def rotated_canvas(w: int, h: int, degrees: int) -> tuple[int, int]:
    theta = math.radians(degrees)
    c, s = abs(math.cos(theta)), abs(math.sin(theta))
    out_w = max(1, _round_half_away(w * c + h * s))
    out_h = max(1, _round_half_away(w * s + h * c))
    return out_w, out_h


def rotate(img: RasterImage, degrees: int) -> RasterImage:
    """Counter-clockwise rotation; canvas expands to the rotated bounding box."""
    theta = math.radians(degrees)
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    out_w, out_h = rotated_canvas(img.width, img.height, degrees)
    out = kernels.rotate_pixels(img.pixels, img.width, img.height, cos_t, sin_t, out_w, out_h)
    return RasterImage(out_w, out_h, out)


def _border_median_color(img: RasterImage) -> tuple[int, int, int]:
    """Per-channel lower median over the 1-pixel border frame."""
    w, h, px = img.width, img.height, img.pixels
    idxs = set()
    for x in range(w):
        idxs.add(x)
        idxs.add((h - 1) * w + x)
    for y in range(h):
        idxs.add(y * w)
        idxs.add(y * w + w - 1)
    channels: list[list[int]] = [[], [], []]
    for i in sorted(idxs):
        j = i * 3
        channels[0].append(px[j])
        channels[1].append(px[j + 1])
        channels[2].append(px[j + 2])
    meds = []
    for ch in channels:
        ch.sort()
        meds.append(ch[len(ch) // 2])
    return meds[0], meds[1], meds[2]


def _otsu_threshold(hist: list[int]) -> int:
    """Otsu's method over the score histogram; ties go to the smallest index.

    Foreground is defined as bins strictly above the returned threshold."""
    total = sum(hist)
    sum_all = sum(i * c for i, c in enumerate(hist))
    w0 = 0
    sum0 = 0
    best_t = 0
    best_var = -1.0
    for t in range(len(hist) - 1):
        w0 += hist[t]
        if w0 == 0:
            continue
        w1 = total - w0
        if w1 == 0:
            break
        sum0 += t * hist[t]
        mu0 = sum0 / w0
        mu1 = (sum_all - sum0) / w1
        var = w0 * w1 * (mu0 - mu1) ** 2
        if var > best_var:
            best_var = var
            best_t = t
    return best_t


def image_cutout(img: RasterImage) -> RasterImage:
    """Black out everything except the main subject.

    Fails (CutoutFailedError) when the kept component covers less than 5% or
    more than 95% of the image.
    """
    n = img.width * img.height
    if n < 4:
        raise CutoutFailedError("image too small for border estimation")
    br, bg, bb = _border_median_color(img)
    scores, hist = kernels.cutout_scores(img.pixels, n, br, bg, bb)
    threshold = _otsu_threshold(hist)
    mask, kept = kernels.largest_component_mask(scores, img.width, img.height, threshold)
    cover = kept / n
    if cover < CUTOUT_MIN_COVER or cover > CUTOUT_MAX_COVER:
        raise CutoutFailedError(f"kept component covers {cover:.1%} of the image")
    return RasterImage(img.width, img.height, kernels.apply_mask(img.pixels, mask))


@dataclass(frozen=True)
class ExecutionResult:
    image: RasterImage
    metadata: dict = field(default_factory=dict)


def execute(cmd: Command, state: RasterImage | None, search_backend=None) -> ExecutionResult:
    """Apply one command. Search needs a backend; edits need a current image.

    `search_backend` is any object with `top_image(query) -> (entry_id, RasterImage)`.
    """
    if isinstance(cmd, Search):
        if search_backend is None:
            raise NoCurrentImageError("no search backend configured")
        entry_id, image = search_backend.top_image(list(cmd.query))
        return ExecutionResult(image, {"source": "corpus", "corpus_id": entry_id})
    if state is None:
        raise NoCurrentImageError("edit command requires a current image")
    if isinstance(cmd, AdjustColor):
        return ExecutionResult(adjust_color(state, cmd.color, cmd.intensity), {"source": "edit"})
    if isinstance(cmd, AdjustBrightness):
        return ExecutionResult(adjust_brightness(state, cmd.value), {"source": "edit"})
    if isinstance(cmd, AdjustContrast):
        return ExecutionResult(adjust_contrast(state, cmd.value), {"source": "edit"})
    if isinstance(cmd, Rotate):
        return ExecutionResult(rotate(state, cmd.degrees), {"source": "edit"})
    if isinstance(cmd, ImageCutout):
        return ExecutionResult(image_cutout(state), {"source": "edit"})
    raise TypeError(f"not a Command: {cmd!r}")
