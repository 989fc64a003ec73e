"""Executable command DSL: types, parser, serializer, token adapters.

The six commands travel as bracketed strings like "[adjust_attr brightness 40]".
Parsing is strict: wrong arity, out-of-range numbers, unknown names, and
malformed numerals are rejected, never clamped.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import (
    ArityError,
    InvalidQueryTokenError,
    NonNumericArgumentError,
    RangeError,
    UnknownColorError,
    UnknownCommandError,
)

# Color names; "sky blue" is two surface tokens.
COLOR_NAMES = (
    "red",
    "orange",
    "green",
    "blue",
    "sky_blue",
    "purple",
    "brown",
    "yellow",
    "pink",
)

BOS = "<bos>"
EOS = "<eos>"

_QUERY_TOKEN_RE = re.compile(r"^[a-z0-9]+$")
_INT_RE = re.compile(r"^-?\d+$")
_INTENSITY_RE = re.compile(r"^-?\d+(\.\d{1,3})?$")


def color_surface_tokens(color: str) -> list[str]:
    """Surface form of a color name ("sky_blue" -> ["sky", "blue"])."""
    return color.split("_")


# Longest first so "sky blue" wins over a hypothetical "sky".
_COLOR_BY_SURFACE = sorted(
    ((tuple(color_surface_tokens(c)), c) for c in COLOR_NAMES),
    key=lambda item: -len(item[0]),
)


@dataclass(frozen=True)
class Search:
    query: tuple[str, ...]

    def __post_init__(self):
        if not self.query:
            raise ArityError("search requires at least one query token")
        for tok in self.query:
            if not _QUERY_TOKEN_RE.match(tok):
                raise InvalidQueryTokenError(f"bad query token {tok!r}")


@dataclass(frozen=True)
class AdjustColor:
    color: str
    intensity: float

    def __post_init__(self):
        if self.color not in COLOR_NAMES:
            raise UnknownColorError(f"unknown color {self.color!r}")
        if not (0.0 <= self.intensity <= 1.0):
            raise RangeError(f"intensity {self.intensity} outside [0.0, 1.0]")


@dataclass(frozen=True)
class AdjustBrightness:
    value: int

    def __post_init__(self):
        if not (-100 <= self.value <= 100):
            raise RangeError(f"brightness {self.value} outside [-100, 100]")


@dataclass(frozen=True)
class AdjustContrast:
    value: int

    def __post_init__(self):
        if not (0 <= self.value <= 100):
            raise RangeError(f"contrast {self.value} outside [0, 100]")


@dataclass(frozen=True)
class Rotate:
    degrees: int

    def __post_init__(self):
        if not (0 <= self.degrees <= 360):
            raise RangeError(f"degrees {self.degrees} outside [0, 360]")


@dataclass(frozen=True)
class ImageCutout:
    pass


Command = Search | AdjustColor | AdjustBrightness | AdjustContrast | Rotate | ImageCutout

COMMAND_TYPE_NAMES = {
    Search: "search",
    AdjustColor: "color",
    AdjustBrightness: "brightness",
    AdjustContrast: "contrast",
    Rotate: "rotation",
    ImageCutout: "remove-back",
}


def command_type_label(cmd: Command) -> str:
    """Short label used in evaluation breakdowns and reports."""
    return COMMAND_TYPE_NAMES[type(cmd)]


def _parse_int(token: str, lo: int, hi: int, what: str) -> int:
    if not _INT_RE.match(token):
        raise NonNumericArgumentError(f"{what}: {token!r} is not an integer")
    value = int(token)
    if not (lo <= value <= hi):
        raise RangeError(f"{what} {value} outside [{lo}, {hi}]")
    return value


def _parse_intensity(token: str) -> float:
    if not _INTENSITY_RE.match(token):
        raise NonNumericArgumentError(
            f"intensity: {token!r} is not a decimal with up to 3 fractional digits"
        )
    value = float(token)
    if not (0.0 <= value <= 1.0):
        raise RangeError(f"intensity {value} outside [0.0, 1.0]")
    return value


def _match_color(tokens: list[str]) -> tuple[str, int]:
    """Greedy longest color-name match at the head of `tokens`.

    Returns (color, tokens consumed).
    """
    for surface, color in _COLOR_BY_SURFACE:
        n = len(surface)
        if tuple(tokens[:n]) == surface:
            return color, n
    raise UnknownColorError(f"no color name at {' '.join(tokens) or '<nothing>'!r}")


def _format_intensity(value: float) -> str:
    # Minimal decimal with 1..3 fractional digits; preserves every legal input.
    text = f"{value:.3f}"
    while text.endswith("0") and not text.endswith(".0"):
        text = text[:-1]
    return text


def tokens_to_command(tokens: list[str] | tuple[str, ...]) -> Command:
    """Build a validated Command from sentinel-free tokens."""
    tokens = list(tokens)
    if not tokens:
        raise UnknownCommandError("empty command")
    name, args = tokens[0], tokens[1:]
    if name == "search":
        if not args:
            raise ArityError("search requires at least one query token")
        return Search(tuple(args))
    if name == "adjust_color":
        if not args:
            raise ArityError("adjust_color requires a color and an intensity")
        color, used = _match_color(args)
        rest = args[used:]
        if len(rest) != 1:
            raise ArityError(
                f"adjust_color takes exactly one intensity, got {len(rest)} extra tokens"
            )
        return AdjustColor(color, _parse_intensity(rest[0]))
    if name == "adjust_attr":
        if len(args) != 2:
            raise ArityError(f"adjust_attr takes an attribute and a value, got {len(args)}")
        attr, raw = args
        if attr == "brightness":
            return AdjustBrightness(_parse_int(raw, -100, 100, "brightness"))
        if attr == "contrast":
            return AdjustContrast(_parse_int(raw, 0, 100, "contrast"))
        raise UnknownCommandError(f"unknown adjust_attr attribute {attr!r}")
    if name == "rotate":
        if len(args) != 1:
            raise ArityError(f"rotate takes one value, got {len(args)}")
        return Rotate(_parse_int(args[0], 0, 360, "degrees"))
    if name == "image_cutout":
        if args:
            raise ArityError("image_cutout takes no arguments")
        return ImageCutout()
    raise UnknownCommandError(f"unknown command {name!r}")


def parse_command(text: str) -> Command:
    """Parse a single bracketed command string into a validated Command."""
    stripped = text.strip()
    if not (stripped.startswith("[") and stripped.endswith("]")):
        raise UnknownCommandError(f"not a bracketed command: {text!r}")
    inner = stripped[1:-1]
    if "[" in inner or "]" in inner:
        raise UnknownCommandError(f"nested brackets: {text!r}")
    tokens = inner.split()
    return tokens_to_command(tokens)


def command_to_tokens(cmd: Command) -> list[str]:
    """Sentinel-free token list for a command (model-facing form)."""
    if isinstance(cmd, Search):
        return ["search", *cmd.query]
    if isinstance(cmd, AdjustColor):
        return ["adjust_color", *color_surface_tokens(cmd.color), _format_intensity(cmd.intensity)]
    if isinstance(cmd, AdjustBrightness):
        return ["adjust_attr", "brightness", str(cmd.value)]
    if isinstance(cmd, AdjustContrast):
        return ["adjust_attr", "contrast", str(cmd.value)]
    if isinstance(cmd, Rotate):
        return ["rotate", str(cmd.degrees)]
    if isinstance(cmd, ImageCutout):
        return ["image_cutout"]
    raise TypeError(f"not a Command: {cmd!r}")


def format_command(cmd: Command) -> str:
    """Canonical bracketed text form."""
    return "[" + " ".join(command_to_tokens(cmd)) + "]"


@dataclass(frozen=True)
class CommandTokens:
    """Decoder-facing token sequence with begin/end sentinels."""

    tokens: tuple[str, ...]
    valid: bool = True

    @property
    def with_sentinels(self) -> tuple[str, ...]:
        return (BOS, *self.tokens, EOS)

    def to_command(self) -> Command:
        return tokens_to_command(list(self.tokens))


def command_tokens(cmd: Command) -> CommandTokens:
    return CommandTokens(tuple(command_to_tokens(cmd)))
