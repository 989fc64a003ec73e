# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled raster kernels.

Twin of `_purekernels`; the two must produce byte-identical output for
identical input.  Floating-point expressions keep the same evaluation
order as the pure version and the build disables FP contraction, so the
rotation arithmetic rounds identically.  The integer square root uses a
correction loop to guarantee the exact floor regardless of the libm
sqrt's final-bit rounding.
"""

from array import array

from libc.math cimport floor, sqrt
from libc.stdlib cimport free, malloc

IMPL = "fast"


def rotate_pixels(bytes pixels, int w, int h, double cos_t, double sin_t,
                  int out_w, int out_h):
    """Inverse-map nearest-neighbor rotation; uncovered pixels stay black."""
    cdef double csx = (w - 1) / 2.0
    cdef double csy = (h - 1) / 2.0
    cdef double cdx = (out_w - 1) / 2.0
    cdef double cdy = (out_h - 1) / 2.0
    cdef bytearray out_obj = bytearray(out_w * out_h * 3)
    cdef unsigned char[::1] out = out_obj
    cdef const unsigned char[::1] src = pixels
    cdef int px, py, nx, ny
    cdef Py_ssize_t si, di, row
    cdef double ddx, ddy, sx, sy
    for py in range(out_h):
        ddy = py - cdy
        row = py * out_w
        for px in range(out_w):
            ddx = px - cdx
            sx = cos_t * ddx - sin_t * ddy + csx
            sy = sin_t * ddx + cos_t * ddy + csy
            nx = <int>floor(sx + 0.5)
            ny = <int>floor(sy + 0.5)
            if 0 <= nx < w and 0 <= ny < h:
                si = (ny * w + nx) * 3
                di = (row + px) * 3
                out[di] = src[si]
                out[di + 1] = src[si + 1]
                out[di + 2] = src[si + 2]
    return bytes(out_obj)


def cutout_scores(bytes pixels, int n_pixels, int br, int bg, int bb):
    """Per-pixel integer distance to the border color, plus its histogram.

    Score = floor(euclidean RGB distance), range 0..441.
    """
    scores_obj = array("H", bytes(2 * n_pixels))
    cdef unsigned short[::1] scores = scores_obj
    cdef long long hist_c[442]
    cdef int k
    for k in range(442):
        hist_c[k] = 0
    cdef const unsigned char[::1] src = pixels
    cdef Py_ssize_t i, j
    cdef int dr, dg, db, v, s
    for i in range(n_pixels):
        j = i * 3
        dr = src[j] - br
        dg = src[j + 1] - bg
        db = src[j + 2] - bb
        v = dr * dr + dg * dg + db * db
        s = <int>sqrt(<double>v)
        while s * s > v:
            s -= 1
        while (s + 1) * (s + 1) <= v:
            s += 1
        scores[i] = <unsigned short>s
        hist_c[s] += 1
    hist = [0] * 442
    for k in range(442):
        hist[k] = hist_c[k]
    return scores_obj, hist


def largest_component_mask(scores_obj, int w, int h, int threshold):
    """Largest 4-connected component of {score > threshold}, row-major scan.

    Returns (mask bytearray of 0/1 keeping only that component, its size)."""
    cdef int n = w * h
    cdef bytearray mask_obj = bytearray(n)
    cdef unsigned char[::1] mask = mask_obj
    cdef const unsigned short[::1] scores = scores_obj
    cdef unsigned char *visited = <unsigned char *>malloc(n)
    cdef int *stack = <int *>malloc(n * sizeof(int))
    if visited == NULL or stack == NULL:
        free(visited)
        free(stack)
        raise MemoryError()
    cdef int i, j, x, y, start, count, top
    cdef int best_count = 0
    cdef int best_seed = -1
    try:
        for i in range(n):
            visited[i] = 0
        top = 0
        for start in range(n):
            if visited[start] or scores[start] <= threshold:
                continue
            count = 0
            visited[start] = 1
            stack[top] = start
            top += 1
            while top:
                top -= 1
                i = stack[top]
                count += 1
                x = i % w
                y = i // w
                if x > 0:
                    j = i - 1
                    if not visited[j] and scores[j] > threshold:
                        visited[j] = 1
                        stack[top] = j
                        top += 1
                if x + 1 < w:
                    j = i + 1
                    if not visited[j] and scores[j] > threshold:
                        visited[j] = 1
                        stack[top] = j
                        top += 1
                if y > 0:
                    j = i - w
                    if not visited[j] and scores[j] > threshold:
                        visited[j] = 1
                        stack[top] = j
                        top += 1
                if y + 1 < h:
                    j = i + w
                    if not visited[j] and scores[j] > threshold:
                        visited[j] = 1
                        stack[top] = j
                        top += 1
            if count > best_count:
                best_count = count
                best_seed = start
        if best_seed < 0:
            return mask_obj, 0
        # second pass marks only the winning component
        top = 0
        stack[top] = best_seed
        top += 1
        mask[best_seed] = 1
        while top:
            top -= 1
            i = stack[top]
            x = i % w
            y = i // w
            if x > 0:
                j = i - 1
                if not mask[j] and scores[j] > threshold:
                    mask[j] = 1
                    stack[top] = j
                    top += 1
            if x + 1 < w:
                j = i + 1
                if not mask[j] and scores[j] > threshold:
                    mask[j] = 1
                    stack[top] = j
                    top += 1
            if y > 0:
                j = i - w
                if not mask[j] and scores[j] > threshold:
                    mask[j] = 1
                    stack[top] = j
                    top += 1
            if y + 1 < h:
                j = i + w
                if not mask[j] and scores[j] > threshold:
                    mask[j] = 1
                    stack[top] = j
                    top += 1
        return mask_obj, best_count
    finally:
        free(visited)
        free(stack)


def apply_mask(bytes pixels, mask_obj):
    cdef const unsigned char[::1] mask = mask_obj
    cdef const unsigned char[::1] src = pixels
    cdef Py_ssize_t n = len(mask_obj)
    cdef bytearray out_obj = bytearray(len(pixels))
    cdef unsigned char[::1] out = out_obj
    cdef Py_ssize_t i, j
    for i in range(n):
        if mask[i]:
            j = i * 3
            out[j] = src[j]
            out[j + 1] = src[j + 1]
            out[j + 2] = src[j + 2]
    return bytes(out_obj)
