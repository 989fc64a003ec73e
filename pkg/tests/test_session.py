"""Session state machine: proposal lifecycle, execution recording, replay."""

import pytest

from caise.commands import parse_command
from caise.errors import (
    CutoutFailedError,
    NoCurrentImageError,
    SessionStateError,
)
from caise.search import ingest
from caise.session import (
    DEFAULT_CONFIRMATION,
    Proposal,
    Session,
    SessionStore,
)
from caise.synthcorpus import gen_corpus


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("sess_corpus")
    return ingest(gen_corpus(root, n_entries=24, seed=2, feature_dim=4))


def shaped_query(corpus):
    entry = [e for e in sorted(corpus.entries.values(), key=lambda e: e.id)
             if e.detection_ids][0]
    skip = {"a", "an", "the", "on", "in", "plain", "background"}
    return [t for t in entry.caption if t not in skip]


def plain_query(corpus):
    entry = [e for e in sorted(corpus.entries.values(), key=lambda e: e.id)
             if not e.detection_ids][0]
    skip = {"a", "an", "the", "on", "in", "plain", "background"}
    return [t for t in entry.caption if t not in skip]


def make_proposal(text="[rotate 90]"):
    return Proposal(text=text, command=parse_command(text), valid=True,
                    gate_trace=((1.0, 0.0, 0.0),), token_sources=("generate",))


def test_utterance_builds_instance(corpus):
    s = Session(corpus=corpus)
    inst = s.add_user_utterance("Find me a red scooter!")
    assert inst.utterances[-1].tokens == ("find", "me", "a", "red", "scooter")
    assert inst.target is None
    assert inst.command_history == ()
    assert inst.image_history == ()
    assert inst.index == 0


def test_empty_utterance_rejected(corpus):
    s = Session(corpus=corpus)
    with pytest.raises(ValueError):
        s.add_user_utterance("?!")


def test_pending_blocks_new_utterance(corpus):
    s = Session(corpus=corpus)
    s.add_user_utterance("hello there")
    s.propose(make_proposal())
    with pytest.raises(SessionStateError):
        s.add_user_utterance("next thing")
    with pytest.raises(SessionStateError):
        s.propose(make_proposal())


def test_resolve_requires_pending(corpus):
    s = Session(corpus=corpus)
    s.add_user_utterance("rotate the photo")
    with pytest.raises(SessionStateError):
        s.resolve(parse_command("[rotate 90]"))


def test_resolve_search_records_turn(corpus):
    s = Session(corpus=corpus)
    s.add_user_utterance("find me something")
    s.propose(make_proposal("[search scooter]"))
    query = shaped_query(corpus)
    idx = s.resolve(parse_command(f"[search {' '.join(query)}]"))
    assert idx == 0
    assert s.pending is None
    assert len(s.commands) == len(s.images) == len(s.rasters) == 1
    assert s.images[0].ref.startswith("corpus:")
    assert s.images[0].detections  # shaped entry carries a detection
    assert all("@0" in d.id for d in s.images[0].detections)
    assert s.utterances[-1].speaker == "assistant"
    assert s.utterances[-1].tokens == ("done", "take", "a", "look")


def test_resolve_custom_assistant_text(corpus):
    s = Session(corpus=corpus)
    s.add_user_utterance("find me something")
    s.propose(make_proposal("[search x]"))
    s.resolve(parse_command(f"[search {' '.join(shaped_query(corpus))}]"),
              assistant_text="Here is your picture.")
    assert s.utterances[-1].tokens == ("here", "is", "your", "picture")


def test_edit_without_image_leaves_state(corpus):
    s = Session(corpus=corpus)
    s.add_user_utterance("rotate it")
    s.propose(make_proposal())
    with pytest.raises(NoCurrentImageError):
        s.resolve(parse_command("[rotate 90]"))
    assert s.pending is not None
    assert s.commands == [] and s.images == []


def test_cutout_failure_leaves_state(corpus):
    s = Session(corpus=corpus)
    s.add_user_utterance("get a backdrop")
    s.propose(make_proposal("[search x]"))
    s.resolve(parse_command(f"[search {' '.join(plain_query(corpus))}]"))
    s.add_user_utterance("cut out the object")
    s.propose(make_proposal("[image_cutout]"))
    with pytest.raises(CutoutFailedError):
        s.resolve(parse_command("[image_cutout]"))
    assert s.pending is not None
    assert len(s.commands) == 1


def test_rotate_carries_detections(corpus):
    s = Session(corpus=corpus)
    s.add_user_utterance("find me something")
    s.propose(make_proposal("[search x]"))
    s.resolve(parse_command(f"[search {' '.join(shaped_query(corpus))}]"))
    before = s.images[0].detections
    s.add_user_utterance("rotate it")
    s.propose(make_proposal("[rotate 45]"))
    s.resolve(parse_command("[rotate 45]"))
    after = s.images[1].detections
    assert len(after) == len(before)
    assert all("@1" in d.id for d in after)
    assert s.images[1].ref.startswith("edit:")
    # concepts and features carry, geometry may move
    assert [d.concept for d in after] == [d.concept for d in before]


def test_replay_reproduces_final_image(corpus):
    s = Session(corpus=corpus)
    script = [
        f"[search {' '.join(shaped_query(corpus))}]",
        "[adjust_attr brightness 25]",
        "[rotate 60]",
        "[adjust_color red 0.4]",
    ]
    for k, cmd in enumerate(script):
        s.add_user_utterance(f"do step {k}")
        s.propose(make_proposal(cmd))
        s.resolve(parse_command(cmd))
    assert s.replay().pixels == s.current_image.pixels
    assert len(s.rasters) == 4


def test_instance_sees_full_history(corpus):
    s = Session(corpus=corpus)
    s.add_user_utterance("find me something")
    s.propose(make_proposal("[search x]"))
    s.resolve(parse_command(f"[search {' '.join(shaped_query(corpus))}]"))
    inst = s.add_user_utterance("make it brighter")
    assert inst.index == 1
    assert len(inst.command_history) == 1
    assert len(inst.image_history) == 1
    # user, assistant, user
    assert [u.speaker for u in inst.utterances] == ["user", "assistant", "user"]


def test_store_creates_distinct_sessions(corpus):
    store = SessionStore(corpus)
    a, b = store.create(), store.create()
    assert a.id != b.id
    assert store.get(a.id) is a
    assert store.get("missing") is None
    assert len(store) == 2
    assert store.lock(a.id) is not store.lock(b.id)
