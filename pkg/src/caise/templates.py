"""Template bank for synthetic dialogue generation.

The bank is a versioned JSON document shipped with the package.  It holds
user request templates grouped by command type and phrasing style, the
assistant's response templates, and the numeric value grids the generator
samples from.  The same bank also defines the generator-side vocabulary of
the command predictor: every surface token the model may need to *generate*
(rather than copy from the dialogue or from object concepts) must originate
here.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources
from typing import Mapping, Sequence

from .dialogue import tokenize
from .errors import SchemaError, TemplateGapError

TEMPLATES_VERSION = "caise-templates/1"

_PLACEHOLDER_RE = re.compile(r"\{(query|color|object|value)\}")

#: user-template groups that must exist, with the placeholder each uses
#: (``None`` means the template takes no placeholder).
_REQUIRED_USER_GROUPS: Mapping[str, str | None] = {
    "search_direct": "query",
    "search_objref": "color",
    "color_direct": "color",
    "color_objref": "object",
    "brightness_up": "value",
    "brightness_down": "value",
    "brightness_more_up": "value",
    "brightness_more_down": "value",
    "contrast_direct": "value",
    "contrast_more": "value",
    "rotate_direct": "value",
    "rotate_more": "value",
    "cutout_direct": None,
    "cutout_objref": "object",
    "greeting": None,
}

_REQUIRED_ASSISTANT_GROUPS = ("greeting", "search_result", "confirm")

_REQUIRED_VALUE_GRIDS = (
    "brightness_first",
    "brightness_delta",
    "contrast_first",
    "contrast_delta",
    "rotate_first",
    "rotate_delta",
    "intensity",
)


@dataclass(frozen=True)
class TemplateBank:
    """Validated, immutable view of a template document."""

    user: Mapping[str, tuple[str, ...]]
    assistant: Mapping[str, tuple[str, ...]]
    values: Mapping[str, tuple[int | str, ...]]

    def user_group(self, name: str) -> tuple[str, ...]:
        try:
            return self.user[name]
        except KeyError:
            raise TemplateGapError(f"no user template group named {name!r}")

    def assistant_group(self, name: str) -> tuple[str, ...]:
        try:
            return self.assistant[name]
        except KeyError:
            raise TemplateGapError(f"no assistant template group named {name!r}")

    def value_grid(self, name: str) -> tuple[int | str, ...]:
        try:
            return self.values[name]
        except KeyError:
            raise TemplateGapError(f"no value grid named {name!r}")

    def surface_tokens(self) -> list[str]:
        """All fixed tokens appearing in any template, placeholders removed.

        Sorted and de-duplicated; used to seed the generator vocabulary.
        """
        seen: set[str] = set()
        for group in (self.user, self.assistant):
            for texts in group.values():
                for text in texts:
                    stripped = _PLACEHOLDER_RE.sub(" ", text)
                    seen.update(tokenize(stripped))
        return sorted(seen)


def fill(template: str, **slots: str) -> str:
    """Substitute placeholder slots into a template.

    Raises :class:`TemplateGapError` if the template references a slot that
    was not supplied, or if any placeholder survives substitution.
    """
    def _sub(match: re.Match[str]) -> str:
        name = match.group(1)
        if name not in slots:
            raise TemplateGapError(
                f"template {template!r} needs slot {name!r} which was not provided"
            )
        return slots[name]

    out = _PLACEHOLDER_RE.sub(_sub, template)
    if "{" in out or "}" in out:
        raise TemplateGapError(f"unresolved placeholder in template {template!r}")
    return out


def _string_tuple(value: object, where: str) -> tuple[str, ...]:
    if (
        not isinstance(value, list)
        or not value
        or not all(isinstance(t, str) and t.strip() for t in value)
    ):
        raise SchemaError(f"{where} must be a non-empty list of non-empty strings")
    return tuple(value)


def load_template_bank(path: str | None = None) -> TemplateBank:
    """Load and validate a template bank.

    With no ``path`` the bank bundled with the package is used.
    """
    if path is None:
        raw = (
            resources.files("caise").joinpath("data/templates.json").read_text("utf-8")
        )
    else:
        with open(path, "r", encoding="utf-8") as fh:
            raw = fh.read()
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"template bank is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("template bank must be a JSON object")
    if doc.get("version") != TEMPLATES_VERSION:
        raise SchemaError(
            f"unsupported template bank version {doc.get('version')!r}; "
            f"expected {TEMPLATES_VERSION!r}"
        )

    user_doc = doc.get("user")
    assistant_doc = doc.get("assistant")
    values_doc = doc.get("values")
    if not isinstance(user_doc, dict) or not isinstance(assistant_doc, dict):
        raise SchemaError("template bank needs 'user' and 'assistant' objects")
    if not isinstance(values_doc, dict):
        raise SchemaError("template bank needs a 'values' object")

    user: dict[str, tuple[str, ...]] = {}
    for name, texts in user_doc.items():
        user[name] = _string_tuple(texts, f"user group {name!r}")
    assistant: dict[str, tuple[str, ...]] = {}
    for name, texts in assistant_doc.items():
        assistant[name] = _string_tuple(texts, f"assistant group {name!r}")

    for name, slot in _REQUIRED_USER_GROUPS.items():
        if name not in user:
            raise TemplateGapError(f"template bank is missing user group {name!r}")
        for text in user[name]:
            found = set(_PLACEHOLDER_RE.findall(text))
            expected = {slot} if slot else set()
            if found != expected:
                raise TemplateGapError(
                    f"user template {text!r} in group {name!r} must use "
                    f"placeholders {sorted(expected)!r}, found {sorted(found)!r}"
                )
    for name in _REQUIRED_ASSISTANT_GROUPS:
        if name not in assistant:
            raise TemplateGapError(
                f"template bank is missing assistant group {name!r}"
            )

    values: dict[str, tuple[int | str, ...]] = {}
    for name, grid in values_doc.items():
        if not isinstance(grid, list) or not grid:
            raise SchemaError(f"value grid {name!r} must be a non-empty list")
        if name == "intensity":
            if not all(isinstance(v, str) for v in grid):
                raise SchemaError("intensity grid must hold strings")
        else:
            if not all(isinstance(v, int) and not isinstance(v, bool) for v in grid):
                raise SchemaError(f"value grid {name!r} must hold integers")
        values[name] = tuple(grid)
    for name in _REQUIRED_VALUE_GRIDS:
        if name not in values:
            raise TemplateGapError(f"template bank is missing value grid {name!r}")

    return TemplateBank(user=user, assistant=assistant, values=values)
