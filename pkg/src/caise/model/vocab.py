"""Generator vocabulary.

The decoder's generate head can only emit tokens from this closed
vocabulary; everything else must be copied from the dialogue or from
detected-object concepts.  The vocabulary is therefore built from the
template bank alone — command keywords, color words, the numeric values the
templates use (closed under one round of cumulative follow-up addition),
intensity levels, and the fixed surface words of the templates.  Object
nouns are deliberately absent: naming an object the user talked about, or
one detected in an image, is only possible through the copy paths.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..commands import color_surface_tokens
from ..image_ops import COLOR_TABLE
from ..templates import TemplateBank

BOS = "<bos>"
EOS = "<eos>"
UNK = "<unk>"

_COMMAND_KEYWORDS = (
    "search", "adjust_color", "adjust_attr",
    "brightness", "contrast", "rotate", "image_cutout",
)


def _numeric_closure(bank: TemplateBank) -> set[str]:
    """All integer value tokens a ground-truth command can carry.

    Follow-up requests produce cumulative values (first value plus one
    delta, in range), and brightness supports both signs; the closure
    enumerates every reachable total as its token string.
    """
    out: set[int] = set()

    firsts = bank.value_grid("brightness_first")
    deltas = bank.value_grid("brightness_delta")
    for f in firsts:
        out.update((f, -f))
        for d in deltas:
            if f + d <= 100:
                out.update((f + d, -(f + d)))

    firsts = bank.value_grid("contrast_first")
    deltas = bank.value_grid("contrast_delta")
    for f in firsts:
        out.add(f)
        out.update(f + d for d in deltas if f + d <= 100)

    firsts = bank.value_grid("rotate_first")
    deltas = bank.value_grid("rotate_delta")
    for f in firsts:
        out.add(f)
        out.update(f + d for d in deltas if f + d <= 360)

    return {str(v) for v in out}


def build_vocab(bank: TemplateBank) -> tuple[str, ...]:
    """Deterministic vocabulary: sentinels first, then sorted content tokens."""
    content: set[str] = set(_COMMAND_KEYWORDS)
    for color in COLOR_TABLE:
        content.update(color_surface_tokens(color))
    content.update(_numeric_closure(bank))
    content.update(str(s) for s in bank.value_grid("intensity"))
    content.update(bank.surface_tokens())
    content -= {BOS, EOS, UNK}
    return (BOS, EOS, UNK, *sorted(content))


@dataclass(frozen=True)
class Vocabulary:
    """Token/id mapping with sentinel ids pinned to the first three slots."""

    tokens: tuple[str, ...]

    def __post_init__(self):
        if self.tokens[:3] != (BOS, EOS, UNK):
            raise ValueError("vocabulary must start with <bos>, <eos>, <unk>")
        if len(set(self.tokens)) != len(self.tokens):
            raise ValueError("vocabulary contains duplicates")
        object.__setattr__(
            self, "_index", {t: i for i, t in enumerate(self.tokens)}
        )

    @property
    def bos_id(self) -> int:
        return 0

    @property
    def eos_id(self) -> int:
        return 1

    @property
    def unk_id(self) -> int:
        return 2

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._index

    def id(self, token: str) -> int:
        """Base id of a token; unknown tokens map to ``<unk>``."""
        return self._index.get(token, self.unk_id)

    def token(self, token_id: int) -> str:
        return self.tokens[token_id]


@dataclass(frozen=True)
class ExtendedVocab:
    """Base vocabulary plus an instance's out-of-vocabulary copyable tokens.

    OOV tokens get ids after the base range, ordered by first occurrence in
    the instance's copy sources.
    """

    base: Vocabulary
    oov: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(
            self,
            "_oov_index",
            {t: len(self.base) + i for i, t in enumerate(self.oov)},
        )

    def __len__(self) -> int:
        return len(self.base) + len(self.oov)

    def id(self, token: str) -> int:
        """Extended id; tokens outside both ranges map to ``<unk>``."""
        if token in self.base:
            return self.base.id(token)
        return self._oov_index.get(token, self.base.unk_id)

    def token(self, token_id: int) -> str:
        if token_id < len(self.base):
            return self.base.token(token_id)
        return self.oov[token_id - len(self.base)]


def extend(base: Vocabulary, copyable_tokens) -> ExtendedVocab:
    """Extended vocabulary over an instance's copy sources, in first-seen order."""
    oov: list[str] = []
    seen: set[str] = set()
    for tok in copyable_tokens:
        if tok not in base and tok not in seen:
            seen.add(tok)
            oov.append(tok)
    return ExtendedVocab(base=base, oov=tuple(oov))
