"""RasterImage: immutable width x height RGB8 pixel grid with PNG I/O."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path

from PIL import Image


@dataclass(frozen=True)
class RasterImage:
    width: int
    height: int
    pixels: bytes  # row-major RGB, 3 bytes per pixel

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(f"bad dimensions {self.width}x{self.height}")
        if len(self.pixels) != self.width * self.height * 3:
            raise ValueError(
                f"pixel buffer length {len(self.pixels)} != {self.width * self.height * 3}"
            )

    def pixel(self, x: int, y: int) -> tuple[int, int, int]:
        i = (y * self.width + x) * 3
        return self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]

    def iter_pixels(self):
        buf = self.pixels
        for i in range(0, len(buf), 3):
            yield buf[i], buf[i + 1], buf[i + 2]

    def rows(self) -> list[list[tuple[int, int, int]]]:
        return [
            [self.pixel(x, y) for x in range(self.width)] for y in range(self.height)
        ]

    def content_hash(self) -> str:
        h = hashlib.sha256()
        h.update(f"{self.width}x{self.height}:".encode())
        h.update(self.pixels)
        return h.hexdigest()[:16]


def solid(width: int, height: int, rgb: tuple[int, int, int]) -> RasterImage:
    return RasterImage(width, height, bytes(rgb) * (width * height))


def from_rows(rows: list[list[tuple[int, int, int]]]) -> RasterImage:
    height = len(rows)
    width = len(rows[0])
    buf = bytearray()
    for row in rows:
        if len(row) != width:
            raise ValueError("ragged rows")
        for px in row:
            buf.extend(px)
    return RasterImage(width, height, bytes(buf))


def fill_rect(img: RasterImage, x0: int, y0: int, x1: int, y1: int,
              rgb: tuple[int, int, int]) -> RasterImage:
    """New image with the half-open rectangle [x0,x1) x [y0,y1) painted rgb."""
    buf = bytearray(img.pixels)
    for y in range(y0, y1):
        base = (y * img.width + x0) * 3
        buf[base:base + 3 * (x1 - x0)] = bytes(rgb) * (x1 - x0)
    return RasterImage(img.width, img.height, bytes(buf))


def load_png(path: str | Path) -> RasterImage:
    with Image.open(path) as im:
        rgb = im.convert("RGB")
        return RasterImage(rgb.width, rgb.height, rgb.tobytes())


def save_png(img: RasterImage, path: str | Path) -> None:
    im = Image.frombytes("RGB", (img.width, img.height), img.pixels)
    im.save(path, format="PNG")


def png_bytes(img: RasterImage) -> bytes:
    import io

    im = Image.frombytes("RGB", (img.width, img.height), img.pixels)
    out = io.BytesIO()
    im.save(out, format="PNG")
    return out.getvalue()
