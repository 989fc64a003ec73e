"""Local image corpus: ingestion, inverted-index keyword search, persistence.

Manifest format: JSON Lines, one entry per line:

  {"id": "ent-000", "path": "images/ent-000.png",
   "caption": "a red scooter parked by the wall",
   "tags": ["red", "scooter"],
   "detections": [{...ObjectDetection...}, ...]}

Paths are resolved relative to the manifest's directory.  The built index is
persisted as a single JSON document (version "caise-index/1").

Matching is exact-token: tokens are lowercased, ASCII punctuation is
stripped, and a trailing 's' is folded off tokens longer than three
characters (applied identically to captions, tags, and queries).  An entry's
score against a query is the pair (number of distinct query tokens matched,
total occurrence count of those tokens); ties break toward the smaller id.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from .dialogue import ObjectDetection, _detection_from_json, detection_to_json, tokenize
from .errors import (
    DuplicateIdError,
    EmptyManifestError,
    MissingImageFileError,
    SchemaError,
    SearchEmptyError,
)
from .raster import RasterImage, load_png

INDEX_VERSION = "caise-index/1"


def normalize_token(token: str) -> str:
    """Lowercase, strip punctuation, fold a trailing plural 's'."""
    parts = tokenize(token)
    tok = parts[0] if parts else ""
    if len(tok) > 3 and tok.endswith("s"):
        tok = tok[:-1]
    return tok


def normalize_tokens(tokens) -> list[str]:
    out = []
    for t in tokens:
        for part in tokenize(str(t)):
            n = normalize_token(part)
            if n:
                out.append(n)
    return out


@dataclass(frozen=True)
class CorpusEntry:
    id: str
    path: str  # relative to the corpus root
    caption: tuple[str, ...]  # lowercase caption tokens, as written
    tags: frozenset[str]
    detection_ids: tuple[str, ...]


class CorpusIndex:
    """Immutable inverted index over a corpus manifest."""

    def __init__(self, root, entries, detections, postings, token_counts):
        self.root = Path(root)
        self.entries: dict[str, CorpusEntry] = entries
        self.detections: dict[str, ObjectDetection] = detections
        # token -> ascending list of entry ids
        self.postings: dict[str, list[str]] = postings
        # entry id -> Counter of normalized tokens (caption occurrences + tags)
        self.token_counts: dict[str, Counter] = token_counts

    @property
    def doc_count(self) -> int:
        return len(self.entries)

    def entry(self, entry_id: str) -> CorpusEntry:
        return self.entries[entry_id]

    def detections_for(self, entry_id: str) -> tuple[ObjectDetection, ...]:
        e = self.entries[entry_id]
        return tuple(self.detections[d] for d in e.detection_ids)

    def image_path(self, entry_id: str) -> Path:
        return self.root / self.entries[entry_id].path

    def load_image(self, entry_id: str) -> RasterImage:
        return load_png(self.image_path(entry_id))

    def search(self, query, k: int = 10) -> list[tuple[str, tuple[int, int]]]:
        """Rank entries against the query; see module docstring for scoring."""
        terms = sorted(set(normalize_tokens(query)))
        if not terms:
            raise ValueError("query is empty after normalization")
        distinct: Counter = Counter()
        total: Counter = Counter()
        for term in terms:
            for entry_id in self.postings.get(term, ()):
                distinct[entry_id] += 1
                total[entry_id] += self.token_counts[entry_id][term]
        if not distinct:
            raise SearchEmptyError(f"no entry matches query {list(query)!r}")
        ranked = sorted(
            distinct, key=lambda eid: (-distinct[eid], -total[eid], eid)
        )
        return [(eid, (distinct[eid], total[eid])) for eid in ranked[:k]]

    def top_image(self, query) -> tuple[str, RasterImage]:
        """Backend hook for executing a search command: rank-1 entry + pixels."""
        entry_id, _score = self.search(query, k=1)[0]
        return entry_id, self.load_image(entry_id)


def _entry_token_counts(entry: CorpusEntry) -> Counter:
    counts = Counter(normalize_tokens(entry.caption))
    tag_tokens: set[str] = set()
    for t in entry.tags:
        tag_tokens.update(normalize_tokens([t]))
    counts.update(sorted(tag_tokens))
    return counts


def _build(root, entries: list[CorpusEntry], detections) -> CorpusIndex:
    token_counts = {e.id: _entry_token_counts(e) for e in entries}
    postings: dict[str, list[str]] = {}
    for entry_id in sorted(token_counts):
        for token in token_counts[entry_id]:
            postings.setdefault(token, []).append(entry_id)
    return CorpusIndex(
        root=root,
        entries={e.id: e for e in entries},
        detections=detections,
        postings=postings,
        token_counts=token_counts,
    )


def ingest(manifest_path: str | Path) -> CorpusIndex:
    """Parse a JSONL manifest, verify image files, and build the index."""
    manifest_path = Path(manifest_path)
    root = manifest_path.parent
    entries: list[CorpusEntry] = []
    detections: dict[str, ObjectDetection] = {}
    seen: set[str] = set()
    with open(manifest_path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"invalid JSON: {exc}", line_no) from exc
            if not isinstance(obj, dict):
                raise SchemaError("manifest record must be an object", line_no)
            unknown = set(obj) - {"id", "path", "caption", "tags", "detections"}
            if unknown:
                raise SchemaError(f"unknown field(s) {sorted(unknown)}", line_no)
            for key in ("id", "path", "caption"):
                if key not in obj:
                    raise SchemaError(f"missing field {key!r}", line_no)
            entry_id = str(obj["id"])
            if entry_id in seen:
                raise DuplicateIdError(f"duplicate corpus id {entry_id!r}")
            seen.add(entry_id)
            caption = tuple(tokenize(str(obj["caption"])))
            if not caption:
                raise SchemaError("caption is empty", line_no)
            dets = tuple(
                _detection_from_json(d, line_no) for d in obj.get("detections", [])
            )
            for det in dets:
                detections[det.id] = det
            entry = CorpusEntry(
                id=entry_id,
                path=str(obj["path"]),
                caption=caption,
                tags=frozenset(str(t).lower() for t in obj.get("tags", [])),
                detection_ids=tuple(d.id for d in dets),
            )
            if not (root / entry.path).is_file():
                raise MissingImageFileError(f"{entry_id}: no image at {entry.path!r}")
            entries.append(entry)
    if not entries:
        raise EmptyManifestError(f"no entries in {manifest_path}")
    return _build(root, entries, detections)


def save_index(index: CorpusIndex, path: str | Path) -> None:
    doc = {
        "version": INDEX_VERSION,
        "root": str(index.root),
        "entries": [
            {
                "id": e.id,
                "path": e.path,
                "caption": list(e.caption),
                "tags": sorted(e.tags),
                "detections": list(e.detection_ids),
            }
            for _, e in sorted(index.entries.items())
        ],
        "detections": [
            detection_to_json(d) for _, d in sorted(index.detections.items())
        ],
        "postings": {t: ids for t, ids in sorted(index.postings.items())},
        "token_counts": {
            eid: dict(sorted(c.items())) for eid, c in sorted(index.token_counts.items())
        },
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, separators=(",", ":"))
        fh.write("\n")


def load_index(path: str | Path) -> CorpusIndex:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    version = doc.get("version")
    if version != INDEX_VERSION:
        raise SchemaError(f"unsupported index version {version!r}", 1)
    entries = {}
    for e in doc["entries"]:
        entries[e["id"]] = CorpusEntry(
            id=e["id"],
            path=e["path"],
            caption=tuple(e["caption"]),
            tags=frozenset(e["tags"]),
            detection_ids=tuple(e["detections"]),
        )
    detections = {d["id"]: _detection_from_json(d, 1) for d in doc["detections"]}
    token_counts = {eid: Counter(c) for eid, c in doc["token_counts"].items()}
    return CorpusIndex(
        root=doc["root"],
        entries=entries,
        detections=detections,
        postings={t: list(ids) for t, ids in doc["postings"].items()},
        token_counts=token_counts,
    )


def load_corpus(path: str | Path) -> CorpusIndex:
    """Load a corpus given any of its on-disk forms: a directory holding
    ``manifest.jsonl``, a manifest JSONL (ingested), or a saved index JSON."""
    p = Path(path)
    if p.is_dir():
        manifest = p / "manifest.jsonl"
        if not manifest.is_file():
            raise EmptyManifestError(f"no manifest.jsonl under {p}")
        return ingest(manifest)
    if p.suffix == ".jsonl":
        return ingest(p)
    return load_index(p)
