"""Live edit-session state: utterances in, proposed commands out, executed
edits appended to an auditable history.

A session is a dialogue under construction.  The user speaks; the model
proposes a command (held as a *pending proposal* until a human resolves
it); accepting or overriding executes the command against the image/search
backend, appends the resulting image record, and confirms in the assistant
voice.  Replaying the recorded command list from scratch always reproduces
the final image byte for byte.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field

from .commands import Command, format_command
from .dialogue import ImageRecord, ObjectDetection, TaskInstance, Utterance, tokenize
from .errors import SessionStateError
from .image_ops import execute
from .raster import RasterImage
from .search import CorpusIndex
from .synth import carry_detections, reid_detections

DEFAULT_CONFIRMATION = "done, take a look"


@dataclass(frozen=True)
class Proposal:
    """A decoded command awaiting human resolution."""

    text: str                                  # bracketed surface form
    command: Command | None                    # parsed, when the tokens form one
    valid: bool
    gate_trace: tuple[tuple[float, float, float], ...]
    token_sources: tuple[str, ...]


@dataclass
class Session:
    """One conversation's mutable state; callers serialize access per session."""

    corpus: CorpusIndex
    id: str = field(default_factory=lambda: uuid.uuid4().hex)
    utterances: list[Utterance] = field(default_factory=list)
    commands: list[Command] = field(default_factory=list)
    images: list[ImageRecord] = field(default_factory=list)
    rasters: list[RasterImage] = field(default_factory=list)
    pending: Proposal | None = None
    _detections: tuple[ObjectDetection, ...] = ()

    @property
    def current_image(self) -> RasterImage | None:
        return self.rasters[-1] if self.rasters else None

    def add_user_utterance(self, text: str) -> TaskInstance:
        """Record the user's words and frame the next-command prediction.

        Raises SessionStateError while a proposal is pending — the human
        must resolve it before the conversation moves on.
        """
        if self.pending is not None:
            raise SessionStateError("a proposed command is awaiting resolution")
        tokens = tokenize(text)
        if not tokens:
            raise ValueError("utterance is empty after tokenization")
        self.utterances.append(Utterance("user", tuple(tokens)))
        return self.instance()

    def instance(self) -> TaskInstance:
        """The prediction problem implied by the current state (no target)."""
        if not self.utterances:
            raise SessionStateError("no utterances yet")
        return TaskInstance(
            dialogue_id=self.id,
            index=len(self.commands),
            utterances=tuple(self.utterances),
            image_history=tuple(self.images),
            command_history=tuple(self.commands),
            target=None,
        )

    def propose(self, proposal: Proposal) -> None:
        if self.pending is not None:
            raise SessionStateError("a proposed command is awaiting resolution")
        self.pending = proposal

    def resolve(self, command: Command, assistant_text: str | None = None) -> int:
        """Execute `command`, record the turn, and clear the pending proposal.

        Returns the new image's index in the history.  On execution failure
        the session is left untouched (the pending proposal stays pending)
        and the executor's error propagates.
        """
        if self.pending is None:
            raise SessionStateError("no proposed command to resolve")
        result = execute(command, self.current_image, search_backend=self.corpus)
        old = self.current_image
        image = result.image
        ordinal = len(self.images)
        if result.metadata.get("source") == "corpus":
            entry_id = result.metadata["corpus_id"]
            detections = reid_detections(self.corpus.detections_for(entry_id), ordinal)
            ref = f"corpus:{entry_id}"
        else:
            assert old is not None
            detections = reid_detections(
                carry_detections(
                    self._detections, command,
                    (old.width, old.height), (image.width, image.height),
                ),
                ordinal,
            )
            ref = f"edit:{image.content_hash()}"
        self._detections = detections
        self.commands.append(command)
        self.images.append(ImageRecord(ref=ref, detections=detections))
        self.rasters.append(image)
        reply = assistant_text if assistant_text else DEFAULT_CONFIRMATION
        self.utterances.append(Utterance("assistant", tuple(tokenize(reply))))
        self.pending = None
        return ordinal

    def replay(self) -> RasterImage | None:
        """Re-execute the recorded commands from scratch.

        The result must equal the live final image byte for byte; exposed so
        callers (and tests) can audit the invariant.
        """
        current: RasterImage | None = None
        for cmd in self.commands:
            current = execute(cmd, current, search_backend=self.corpus).image
        return current

    def snapshot(self) -> dict:
        """JSON-ready view of the full history."""
        return {
            "session_id": self.id,
            "utterances": [
                {"speaker": u.speaker, "tokens": list(u.tokens)} for u in self.utterances
            ],
            "commands": [format_command(c) for c in self.commands],
            "images": [
                {"index": i, "ref": rec.ref, "detections": len(rec.detections)}
                for i, rec in enumerate(self.images)
            ],
            "pending": proposal_payload(self.pending) if self.pending else None,
        }


def proposal_payload(p: Proposal) -> dict:
    return {
        "proposed_command": p.text,
        "valid": p.valid,
        "gate_trace": [list(g) for g in p.gate_trace],
        "token_sources": list(p.token_sources),
    }


class SessionStore:
    """In-memory session registry with one lock per session.

    Holding a session's lock serializes requests within that session;
    distinct sessions proceed concurrently.  Process-lifetime only.
    """

    def __init__(self, corpus: CorpusIndex):
        self._corpus = corpus
        self._sessions: dict[str, Session] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()

    def create(self) -> Session:
        s = Session(corpus=self._corpus)
        with self._registry_lock:
            self._sessions[s.id] = s
            self._locks[s.id] = threading.Lock()
        return s

    def get(self, session_id: str) -> Session | None:
        with self._registry_lock:
            return self._sessions.get(session_id)

    def lock(self, session_id: str) -> threading.Lock:
        with self._registry_lock:
            return self._locks[session_id]

    def __len__(self) -> int:
        with self._registry_lock:
            return len(self._sessions)
