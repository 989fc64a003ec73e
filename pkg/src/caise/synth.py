"""Synthetic dialogue generator.

Builds multi-turn editing dialogues against a real corpus index: every
generated command is actually executed, so the recorded image history is
exactly what a live session would produce.  Each dialogue opens with a
search and continues with edit turns of distinct types; two kinds of
follow-up reference earlier turns and therefore require context to resolve:

* *implicature follow-ups* ("can we try increasing further by 20 more")
  repeat the previous command type with a cumulative value that never
  appears verbatim in any utterance, and
* *object-reference requests* ("paint it the same color as the mug",
  "now find me the same object but in red") resolve against the detected
  object of an earlier search result rather than against words in the
  request.

Background removal is attempted for real during generation; when it fails
(uniform backdrop entries) the turn is rebuilt with a different edit type,
so emitted dialogues always replay cleanly.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .commands import (
    AdjustBrightness,
    AdjustColor,
    AdjustContrast,
    Command,
    ImageCutout,
    Rotate,
    Search,
    color_surface_tokens,
)
from .dialogue import Dialogue, ImageRecord, ObjectDetection, Utterance, tokenize
from .errors import CutoutFailedError
from .image_ops import COLOR_TABLE, execute
from .raster import RasterImage
from .search import CorpusIndex
from .templates import TemplateBank, fill

_EDIT_TYPES = ("color", "brightness", "contrast", "rotation", "cutout")

#: probability knobs for dialogue shape (greeting pair, object-reference
#: phrasings, implicature follow-up, failure-entry search, closing search).
_P_GREETING = 0.5
_P_COLOR_OBJREF = 0.5
_P_CUTOUT_OBJREF = 0.35
_P_IMPL = 0.35
_P_FAIL_SEARCH = 0.12
_P_OBJREF_SEARCH = 0.25


def _concept_noun(det: ObjectDetection) -> str:
    return det.concept[-1]


def _concept_color(det: ObjectDetection) -> str | None:
    """Canonical color name from a detection concept, if it names one."""
    name = "_".join(det.concept[:-1])
    return name if name in COLOR_TABLE else None


def rotate_bbox(bbox: tuple[float, float, float, float], degrees: int,
                old_size: tuple[int, int], new_size: tuple[int, int],
                ) -> tuple[float, float, float, float]:
    """Axis-aligned box of a rotated box, in the rotated image's coordinates.

    Matches the image rotation convention: counter-clockwise about the pixel
    center of the source, re-centered on the enlarged canvas.
    """
    ow, oh = old_size
    nw, nh = new_size
    theta = math.radians(degrees % 360)
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    cx_old, cy_old = (ow - 1) / 2.0, (oh - 1) / 2.0
    cx_new, cy_new = (nw - 1) / 2.0, (nh - 1) / 2.0
    corners = [
        (bbox[0] * ow, bbox[1] * oh),
        (bbox[2] * ow, bbox[1] * oh),
        (bbox[0] * ow, bbox[3] * oh),
        (bbox[2] * ow, bbox[3] * oh),
    ]
    xs: list[float] = []
    ys: list[float] = []
    for x, y in corners:
        dx, dy = x - cx_old, y - cy_old
        # y grows downward, so a counter-clockwise turn mixes axes this way.
        xs.append(cos_t * dx + sin_t * dy + cx_new)
        ys.append(-sin_t * dx + cos_t * dy + cy_new)
    x1 = min(max(min(xs) / nw, 0.0), 1.0)
    y1 = min(max(min(ys) / nh, 0.0), 1.0)
    x2 = min(max(max(xs) / nw, 0.0), 1.0)
    y2 = min(max(max(ys) / nh, 0.0), 1.0)
    return (round(x1, 4), round(y1, 4), round(x2, 4), round(y2, 4))


def carry_detections(dets: tuple[ObjectDetection, ...], cmd: Command,
                     old_size: tuple[int, int], new_size: tuple[int, int],
                     ) -> tuple[ObjectDetection, ...]:
    """Re-issue detections for an edited image.

    Boxes follow the geometry (only rotation moves them); concepts and
    features are kept, since the depicted object is still the same one.
    """
    out = []
    for det in dets:
        bbox = det.bbox
        if isinstance(cmd, Rotate):
            bbox = rotate_bbox(bbox, cmd.degrees, old_size, new_size)
        out.append(
            ObjectDetection(
                id=det.id,
                image_id=det.image_id,
                bbox=bbox,
                concept=det.concept,
                feature=det.feature,
            )
        )
    return tuple(out)


def reid_detections(dets: tuple[ObjectDetection, ...], image_ord: int,
          ) -> tuple[ObjectDetection, ...]:
    """Key detections to their position in the dialogue's image history.

    The same corpus entry can be retrieved twice in one dialogue and edits
    carry detections forward, so the raw detection id alone would repeat;
    the ordinal suffix keeps every recorded detection id unique.
    """
    out = []
    for det in dets:
        base = det.id.split("@", 1)[0]
        out.append(
            ObjectDetection(
                id=f"{base}@{image_ord}",
                image_id=det.image_id,
                bbox=det.bbox,
                concept=det.concept,
                feature=det.feature,
            )
        )
    return tuple(out)


@dataclass
class _Builder:
    """Accumulates one dialogue while executing its commands for real."""

    rng: random.Random
    corpus: CorpusIndex
    bank: TemplateBank
    utterances: list[Utterance]
    commands: list[Command]
    images: list[ImageRecord]
    alignment: list[int]
    current: RasterImage | None = None
    detections: tuple[ObjectDetection, ...] = ()
    edited: bool = False

    def say(self, speaker: str, text: str) -> int:
        idx = len(self.utterances)
        self.utterances.append(Utterance(speaker, tuple(tokenize(text))))
        return idx

    def pick(self, group: str, **slots: str) -> str:
        return fill(self.rng.choice(self.bank.user_group(group)), **slots)

    def confirm(self) -> None:
        self.say("assistant", self.rng.choice(self.bank.assistant_group("confirm")))

    def commit(self, request_text: str, cmd: Command) -> None:
        """Record a turn: user request, execution, image record, confirmation."""
        align = self.say("user", request_text)
        result = execute(cmd, self.current, search_backend=self.corpus)
        old_size = (self.current.width, self.current.height) if self.current else None
        self.current = result.image
        ord_ = len(self.images)
        if result.metadata.get("source") == "corpus":
            entry_id = result.metadata["corpus_id"]
            self.detections = reid_detections(self.corpus.detections_for(entry_id), ord_)
            ref = f"corpus:{entry_id}"
            reply_tpl = self.rng.choice(self.bank.assistant_group("search_result"))
            reply = fill(reply_tpl, query=" ".join(cmd.query))
        else:
            assert old_size is not None
            new_size = (self.current.width, self.current.height)
            self.detections = reid_detections(
                carry_detections(self.detections, cmd, old_size, new_size), ord_
            )
            self.edited = True
            ref = f"edit:{self.current.content_hash()}"
            reply = self.rng.choice(self.bank.assistant_group("confirm"))
        self.commands.append(cmd)
        self.images.append(ImageRecord(ref=ref, detections=self.detections))
        self.alignment.append(align)
        self.say("assistant", reply)


def _search_query(builder: _Builder) -> list[str]:
    """Sample a corpus entry and return its identifying query tokens."""
    rng = builder.rng
    shaped = [e for e in builder.corpus.entries.values() if e.detection_ids]
    plain = [e for e in builder.corpus.entries.values() if not e.detection_ids]
    if not shaped:
        pool = plain
    elif plain and rng.random() < _P_FAIL_SEARCH:
        pool = plain
    else:
        pool = shaped
    entry = rng.choice(sorted(pool, key=lambda e: e.id))
    # Identifying tokens: color words plus the object noun (or "backdrop").
    words = entry.caption
    skip = {"a", "an", "the", "on", "in", "plain", "background"}
    return [w for w in words if w not in skip]


def _build_color_turn(b: _Builder) -> tuple[str, Command]:
    rng = b.rng
    intensity = float(rng.choice(b.bank.value_grid("intensity")))
    ref_det = next(
        (d for d in b.detections if _concept_color(d) is not None), None
    )
    if ref_det is not None and not b.edited and rng.random() < _P_COLOR_OBJREF:
        text = b.pick("color_objref", object=_concept_noun(ref_det))
        return text, AdjustColor(_concept_color(ref_det), intensity)
    color = rng.choice(sorted(COLOR_TABLE))
    surface = " ".join(color_surface_tokens(color))
    return b.pick("color_direct", color=surface), AdjustColor(color, intensity)


def _build_turn(b: _Builder, kind: str) -> tuple[str, Command]:
    rng = b.rng
    if kind == "color":
        return _build_color_turn(b)
    if kind == "brightness":
        value = rng.choice(b.bank.value_grid("brightness_first"))
        if rng.random() < 0.5:
            return b.pick("brightness_up", value=str(value)), AdjustBrightness(value)
        return b.pick("brightness_down", value=str(value)), AdjustBrightness(-value)
    if kind == "contrast":
        value = rng.choice(b.bank.value_grid("contrast_first"))
        return b.pick("contrast_direct", value=str(value)), AdjustContrast(value)
    if kind == "rotation":
        value = rng.choice(b.bank.value_grid("rotate_first"))
        return b.pick("rotate_direct", value=str(value)), Rotate(value)
    if kind == "cutout":
        if b.detections and rng.random() < _P_CUTOUT_OBJREF:
            return (
                b.pick("cutout_objref", object=_concept_noun(b.detections[0])),
                ImageCutout(),
            )
        return b.pick("cutout_direct"), ImageCutout()
    raise ValueError(f"unknown edit turn type {kind!r}")


def _implicature_followup(b: _Builder, kind: str, prev: Command,
                          ) -> tuple[str, Command] | None:
    """Follow-up repeating `kind` with a cumulative value, if one fits."""
    rng = b.rng
    if kind == "brightness":
        assert isinstance(prev, AdjustBrightness)
        grid = b.bank.value_grid("brightness_delta")
        if prev.value >= 0:
            deltas = [d for d in grid if prev.value + d <= 100]
            if not deltas:
                return None
            d = rng.choice(deltas)
            return (
                b.pick("brightness_more_up", value=str(d)),
                AdjustBrightness(prev.value + d),
            )
        deltas = [d for d in grid if prev.value - d >= -100]
        if not deltas:
            return None
        d = rng.choice(deltas)
        return (
            b.pick("brightness_more_down", value=str(d)),
            AdjustBrightness(prev.value - d),
        )
    if kind == "contrast":
        assert isinstance(prev, AdjustContrast)
        deltas = [d for d in b.bank.value_grid("contrast_delta")
                  if prev.value + d <= 100]
        if not deltas:
            return None
        d = rng.choice(deltas)
        return b.pick("contrast_more", value=str(d)), AdjustContrast(prev.value + d)
    if kind == "rotation":
        assert isinstance(prev, Rotate)
        deltas = [d for d in b.bank.value_grid("rotate_delta")
                  if prev.degrees + d <= 360]
        if not deltas:
            return None
        d = rng.choice(deltas)
        return b.pick("rotate_more", value=str(d)), Rotate(prev.degrees + d)
    return None


def synthesize_dialogue(dialogue_id: str, corpus: CorpusIndex,
                        bank: TemplateBank, rng: random.Random) -> Dialogue:
    """Generate one dialogue, executing every command as it is added."""
    b = _Builder(rng, corpus, bank, [], [], [], [])

    if rng.random() < _P_GREETING:
        b.say("user", rng.choice(bank.user_group("greeting")))
        b.say("assistant", rng.choice(bank.assistant_group("greeting")))

    query = _search_query(b)
    b.commit(b.pick("search_direct", query=" ".join(query)), Search(tuple(query)))

    kinds = rng.sample(_EDIT_TYPES, 3)
    used = set()
    impl_done = False
    for kind in kinds:
        if kind in used:
            continue
        used.add(kind)
        text, cmd = _build_turn(b, kind)
        if isinstance(cmd, ImageCutout):
            try:
                b.commit(text, cmd)
            except CutoutFailedError:
                spare = [t for t in _EDIT_TYPES if t not in used and t != "cutout"]
                alt = rng.choice(spare)
                used.add(alt)
                text, cmd = _build_turn(b, alt)
                b.commit(text, cmd)
                kind = alt
        else:
            b.commit(text, cmd)
        if not impl_done and kind in ("brightness", "contrast", "rotation"):
            if rng.random() < _P_IMPL:
                followup = _implicature_followup(b, kind, b.commands[-1])
                if followup is not None:
                    b.commit(*followup)
                    impl_done = True

    if b.detections and rng.random() < _P_OBJREF_SEARCH:
        noun = _concept_noun(b.detections[0])
        color = rng.choice(sorted(COLOR_TABLE))
        surface_tokens = color_surface_tokens(color)
        text = b.pick("search_objref", color=" ".join(surface_tokens))
        b.commit(text, Search(tuple(surface_tokens + [noun])))

    return Dialogue(
        id=dialogue_id,
        utterances=tuple(b.utterances),
        commands=tuple(b.commands),
        images=tuple(b.images),
        alignment=tuple(b.alignment),
    )


def synthesize_dialogues(n: int, corpus: CorpusIndex, bank: TemplateBank,
                         seed: int = 0) -> list[Dialogue]:
    """Generate ``n`` dialogues deterministically from ``seed``."""
    if n < 1:
        raise ValueError("need at least one dialogue")
    rng = random.Random(seed)
    return [
        synthesize_dialogue(f"syn-{i:04d}", corpus, bank, rng) for i in range(n)
    ]


__all__ = [
    "carry_detections",
    "rotate_bbox",
    "synthesize_dialogue",
    "synthesize_dialogues",
]
