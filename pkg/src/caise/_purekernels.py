"""Pure-Python raster kernels.

Fallback twin of the compiled `_fastkernels` extension. Both implementations
must produce byte-identical output for identical input; keep the arithmetic
expressions in the same order when touching either one (C contraction is
disabled at build time for the same reason).
"""

from __future__ import annotations

import math
from array import array

IMPL = "pure"


def rotate_pixels(pixels: bytes, w: int, h: int, cos_t: float, sin_t: float,
                  out_w: int, out_h: int) -> bytes:
    """Inverse-map nearest-neighbor rotation; uncovered pixels stay black."""
    csx = (w - 1) / 2.0
    csy = (h - 1) / 2.0
    cdx = (out_w - 1) / 2.0
    cdy = (out_h - 1) / 2.0
    out = bytearray(out_w * out_h * 3)
    floor = math.floor
    for py in range(out_h):
        ddy = py - cdy
        row = py * out_w
        for px in range(out_w):
            ddx = px - cdx
            sx = cos_t * ddx - sin_t * ddy + csx
            sy = sin_t * ddx + cos_t * ddy + csy
            nx = int(floor(sx + 0.5))
            ny = int(floor(sy + 0.5))
            if 0 <= nx < w and 0 <= ny < h:
                si = (ny * w + nx) * 3
                di = (row + px) * 3
                out[di] = pixels[si]
                out[di + 1] = pixels[si + 1]
                out[di + 2] = pixels[si + 2]
    return bytes(out)


def cutout_scores(pixels: bytes, n_pixels: int, br: int, bg: int, bb: int):
    """Per-pixel integer distance to the border color, plus its histogram.

    Score = floor(euclidean RGB distance), range 0..441.
    """
    scores = array("H", bytes(2 * n_pixels))
    hist = [0] * 442
    isqrt = math.isqrt
    for i in range(n_pixels):
        j = i * 3
        dr = pixels[j] - br
        dg = pixels[j + 1] - bg
        db = pixels[j + 2] - bb
        s = isqrt(dr * dr + dg * dg + db * db)
        scores[i] = s
        hist[s] += 1
    return scores, hist


def largest_component_mask(scores, w: int, h: int, threshold: int):
    """Largest 4-connected component of {score > threshold}, row-major scan.

    Returns (mask bytearray of 0/1 keeping only that component, its size)."""
    n = w * h
    mask = bytearray(n)
    visited = bytearray(n)
    best_count = 0
    best_seed = -1
    stack: list[int] = []
    for start in range(n):
        if visited[start] or scores[start] <= threshold:
            continue
        count = 0
        visited[start] = 1
        stack.append(start)
        while stack:
            i = stack.pop()
            count += 1
            x = i % w
            y = i // w
            if x > 0:
                j = i - 1
                if not visited[j] and scores[j] > threshold:
                    visited[j] = 1
                    stack.append(j)
            if x + 1 < w:
                j = i + 1
                if not visited[j] and scores[j] > threshold:
                    visited[j] = 1
                    stack.append(j)
            if y > 0:
                j = i - w
                if not visited[j] and scores[j] > threshold:
                    visited[j] = 1
                    stack.append(j)
            if y + 1 < h:
                j = i + w
                if not visited[j] and scores[j] > threshold:
                    visited[j] = 1
                    stack.append(j)
        if count > best_count:
            best_count = count
            best_seed = start
    if best_seed < 0:
        return mask, 0
    # second pass marks only the winning component
    stack.append(best_seed)
    mask[best_seed] = 1
    while stack:
        i = stack.pop()
        x = i % w
        y = i // w
        if x > 0:
            j = i - 1
            if not mask[j] and scores[j] > threshold:
                mask[j] = 1
                stack.append(j)
        if x + 1 < w:
            j = i + 1
            if not mask[j] and scores[j] > threshold:
                mask[j] = 1
                stack.append(j)
        if y > 0:
            j = i - w
            if not mask[j] and scores[j] > threshold:
                mask[j] = 1
                stack.append(j)
        if y + 1 < h:
            j = i + w
            if not mask[j] and scores[j] > threshold:
                mask[j] = 1
                stack.append(j)
    return mask, best_count


def apply_mask(pixels: bytes, mask) -> bytes:
    out = bytearray(len(pixels))
    for i, keep in enumerate(mask):
        if keep:
            j = i * 3
            out[j] = pixels[j]
            out[j + 1] = pixels[j + 1]
            out[j + 2] = pixels[j + 2]
    return bytes(out)
