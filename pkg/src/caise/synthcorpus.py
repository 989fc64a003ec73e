"""Synthetic image corpus generator.

Produces a small, fully deterministic corpus of colored-shape photos for
exercising search, editing, and the command predictor end to end: each
shaped entry is one solid shape (square, circle, or triangle) on a plain
light backdrop, captioned and tagged with its color and object noun, and
carries exactly one object detection (bounding box, concept tokens, and a
fixed pseudo-random feature vector derived from the concept).  A small
number of entirely uniform "backdrop" entries are included on purpose:
they have no detections and make background removal fail, which downstream
consumers use to exercise failure handling.
"""

from __future__ import annotations

import hashlib
import json
import random
from pathlib import Path

import numpy as np

from .commands import color_surface_tokens
from .image_ops import COLOR_TABLE
from .raster import from_rows, save_png, solid

#: object nouns paired with colors to form unique (color, noun) entries.
NOUNS = (
    "scooter", "lamp", "kettle", "guitar", "mug", "backpack", "umbrella",
    "clock", "chair", "table", "bottle", "vase", "balloon", "kite",
    "wagon", "drum", "pillow", "ladder", "bucket", "mailbox", "helmet",
    "bench",
)

_SHAPES = ("square", "circle", "triangle")


def _shape_for(noun: str) -> str:
    digest = hashlib.sha256(noun.encode("utf-8")).digest()
    return _SHAPES[digest[0] % len(_SHAPES)]


def _feature_for(concept: tuple[str, ...], bbox: tuple[float, float, float, float],
                 dim: int) -> list[float]:
    """Deterministic feature vector keyed by concept and box geometry."""
    key = "|".join(concept) + "|" + ",".join(f"{v:.4f}" for v in bbox)
    seed = int.from_bytes(hashlib.sha256(key.encode("utf-8")).digest()[:8], "big")
    vec = np.random.default_rng(seed).standard_normal(dim)
    return [round(float(v), 4) for v in vec]


def _draw_shape(width: int, height: int, bg: tuple[int, int, int],
                fg: tuple[int, int, int], shape: str,
                box: tuple[int, int, int, int]) -> RasterImage:
    """Rasterize one solid shape inside the inclusive pixel box."""
    x0, y0, x1, y1 = box
    rows = [[bg] * width for _ in range(height)]
    if shape == "square":
        for y in range(y0, y1 + 1):
            for x in range(x0, x1 + 1):
                rows[y][x] = fg
    elif shape == "circle":
        cx = (x0 + x1) / 2.0
        cy = (y0 + y1) / 2.0
        r = min(x1 - x0, y1 - y0) / 2.0
        for y in range(y0, y1 + 1):
            for x in range(x0, x1 + 1):
                if (x - cx) ** 2 + (y - cy) ** 2 <= r * r:
                    rows[y][x] = fg
    elif shape == "triangle":
        # Upright isoceles triangle: apex on the top row, full base at the bottom.
        span = max(y1 - y0, 1)
        cx = (x0 + x1) / 2.0
        half_base = (x1 - x0) / 2.0
        for y in range(y0, y1 + 1):
            half = half_base * (y - y0) / span
            lo = int(round(cx - half))
            hi = int(round(cx + half))
            for x in range(max(lo, x0), min(hi, x1) + 1):
                rows[y][x] = fg
    else:  # pragma: no cover - shapes are fixed above
        raise ValueError(f"unknown shape {shape!r}")
    return from_rows(rows)


def gen_corpus(out_dir: str | Path, n_entries: int = 60, seed: int = 0,
               feature_dim: int = 16) -> Path:
    """Generate a corpus under ``out_dir`` and return the manifest path.

    Layout: ``out_dir/images/<id>.png`` plus ``out_dir/manifest.jsonl`` in
    the line-oriented manifest format the ingest step consumes.  Roughly one
    entry in twelve (at least two) is a uniform backdrop with no detections.
    Deterministic for a given ``(n_entries, seed, feature_dim)``.
    """
    colors = sorted(COLOR_TABLE)
    n_fail = max(2, n_entries // 12)
    n_shaped = n_entries - n_fail
    combos = [(c, n) for c in colors for n in NOUNS]
    if n_shaped > len(combos) or n_fail > len(colors) or n_entries < 3:
        raise ValueError(
            f"cannot build {n_entries} entries: at most {len(combos)} unique "
            f"shaped entries and {len(colors)} backdrop entries are available"
        )
    rng = random.Random(seed)
    rng.shuffle(combos)

    out = Path(out_dir)
    img_dir = out / "images"
    img_dir.mkdir(parents=True, exist_ok=True)

    lines: list[str] = []
    serial = 0

    def next_id() -> str:
        nonlocal serial
        eid = f"ent-{serial:04d}"
        serial += 1
        return eid

    for color, noun in combos[:n_shaped]:
        eid = next_id()
        width = rng.choice((40, 44, 48, 52, 56))
        height = rng.choice((32, 36, 40, 44, 48))
        tone = rng.choice((222, 226, 230, 234))
        mx = max(3, round(width * rng.uniform(0.15, 0.25)))
        my = max(3, round(height * rng.uniform(0.15, 0.25)))
        box = (mx, my, width - 1 - mx, height - 1 - my)
        shape = _shape_for(noun)
        img = _draw_shape(width, height, (tone, tone, tone),
                          COLOR_TABLE[color], shape, box)
        rel = f"images/{eid}.png"
        save_png(img, out / rel)

        surface = color_surface_tokens(color)
        concept = tuple(surface + [noun])
        bbox = (
            box[0] / width,
            box[1] / height,
            (box[2] + 1) / width,
            (box[3] + 1) / height,
        )
        det = {
            "id": f"{eid}-d0",
            "image_id": eid,
            "bbox": [round(v, 4) for v in bbox],
            "concept": list(concept),
            "feature": _feature_for(concept, bbox, feature_dim),
        }
        row = {
            "id": eid,
            "path": rel,
            "caption": f"a {' '.join(surface)} {noun} on a plain background",
            "tags": [" ".join(surface), noun, shape],
            "detections": [det],
        }
        lines.append(json.dumps(row, separators=(", ", ": ")))

    for color in rng.sample(colors, n_fail):
        eid = next_id()
        width = rng.choice((40, 44, 48))
        height = rng.choice((32, 36, 40))
        img = solid(width, height, COLOR_TABLE[color])
        rel = f"images/{eid}.png"
        save_png(img, out / rel)
        surface = color_surface_tokens(color)
        row = {
            "id": eid,
            "path": rel,
            "caption": f"a plain {' '.join(surface)} backdrop",
            "tags": [" ".join(surface), "backdrop"],
            "detections": [],
        }
        lines.append(json.dumps(row, separators=(", ", ": ")))

    manifest = out / "manifest.jsonl"
    manifest.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return manifest


__all__ = ["NOUNS", "color_surface_tokens", "gen_corpus"]
