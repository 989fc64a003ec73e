"""Prediction scoring rules and report shape."""

import json

import pytest

from caise.commands import (
    AdjustBrightness,
    AdjustColor,
    AdjustContrast,
    ImageCutout,
    Rotate,
    Search,
    parse_command,
)
from caise.errors import LengthMismatchError
from caise.evaluator import EvalReport, command_match, describe_pair, evaluate

# 30 golden cases: (prediction text or None, reference text, expected match)
GOLDEN = [
    # search: order-free token multiset
    ("[search red scooter]", "[search red scooter]", True),
    ("[search juice glass]", "[search glass juice]", True),
    ("[search red red scooter]", "[search red scooter]", False),
    ("[search red scooter]", "[search red red scooter]", False),
    ("[search red]", "[search red scooter]", False),
    ("[search red scooter lamp]", "[search red scooter]", False),
    ("[search sky blue kettle]", "[search kettle sky blue]", True),
    # color: name only, intensity ignored
    ("[adjust_color red 0.3]", "[adjust_color red 0.9]", True),
    ("[adjust_color red 1.0]", "[adjust_color red 1.0]", True),
    ("[adjust_color green 0.5]", "[adjust_color red 0.5]", False),
    ("[adjust_color sky blue 0.2]", "[adjust_color sky blue 0.8]", True),
    ("[adjust_color blue 0.5]", "[adjust_color sky blue 0.5]", False),
    # brightness: exact value incl. sign
    ("[adjust_attr brightness 30]", "[adjust_attr brightness 30]", True),
    ("[adjust_attr brightness -30]", "[adjust_attr brightness 30]", False),
    ("[adjust_attr brightness 30]", "[adjust_attr brightness 35]", False),
    ("[adjust_attr brightness -80]", "[adjust_attr brightness -80]", True),
    # contrast: exact value
    ("[adjust_attr contrast 40]", "[adjust_attr contrast 40]", True),
    ("[adjust_attr contrast 45]", "[adjust_attr contrast 40]", False),
    # brightness vs contrast are different types
    ("[adjust_attr brightness 40]", "[adjust_attr contrast 40]", False),
    ("[adjust_attr contrast 40]", "[adjust_attr brightness 40]", False),
    # rotation: exact angle
    ("[rotate 90]", "[rotate 90]", True),
    ("[rotate 270]", "[rotate 90]", False),
    ("[rotate 360]", "[rotate 360]", True),
    # background removal: no arguments to disagree on
    ("[image_cutout]", "[image_cutout]", True),
    # cross-type never matches
    ("[search red scooter]", "[adjust_color red 0.5]", False),
    ("[adjust_color red 0.5]", "[search red scooter]", False),
    ("[image_cutout]", "[rotate 90]", False),
    ("[rotate 90]", "[image_cutout]", False),
    # unparseable predictions never match
    (None, "[image_cutout]", False),
    (None, "[search red scooter]", False),
]


def test_golden_table_is_thirty_cases():
    assert len(GOLDEN) == 30


@pytest.mark.parametrize("pred_text,gold_text,want", GOLDEN)
def test_golden_matches(pred_text, gold_text, want):
    pred = parse_command(pred_text) if pred_text else None
    gold = parse_command(gold_text)
    assert command_match(pred, gold) is want


def test_match_is_type_aware_not_reference_based():
    assert command_match(AdjustBrightness(10), AdjustBrightness(10))
    assert not command_match(AdjustBrightness(10), AdjustContrast(10))
    assert not command_match(AdjustContrast(10), AdjustBrightness(10))
    assert command_match(ImageCutout(), ImageCutout())
    assert not command_match(None, Rotate(5))


def test_evaluate_report_counts():
    pairs = [
        (Search(("red", "mug")), Search(("mug", "red"))),          # ok
        (Search(("red",)), Search(("mug", "red"))),                # wrong
        (AdjustColor("red", 0.1), AdjustColor("red", 0.9)),        # ok
        (Rotate(90), Rotate(45)),                                  # wrong
        (None, ImageCutout()),                                     # wrong
        (AdjustBrightness(-30), AdjustBrightness(-30)),            # ok
    ]
    report = evaluate(pairs)
    assert report.total == 6 and report.correct == 3
    assert report.accuracy == pytest.approx(0.5)
    assert report.per_type["search"].total == 2
    assert report.per_type["search"].correct == 1
    assert report.per_type["color"].correct == 1
    assert report.per_type["rotation"].correct == 0
    assert report.per_type["remove-back"].total == 1
    assert report.per_type["brightness"].accuracy == 1.0
    assert report.dialogue_total is None
    assert report.dialogue_success_rate is None


def test_dialogue_success_rate_never_exceeds_accuracy():
    pairs = [
        (Rotate(90), Rotate(90)),
        (Rotate(45), Rotate(90)),
        (ImageCutout(), ImageCutout()),
        (ImageCutout(), ImageCutout()),
    ]
    report = evaluate(pairs, dialogue_ids=["a", "a", "b", "b"])
    assert report.dialogue_total == 2
    assert report.dialogue_correct == 1  # only "b" is all-correct
    assert report.dialogue_success_rate <= report.accuracy


def test_dialogue_ids_length_mismatch():
    with pytest.raises(LengthMismatchError):
        evaluate([(Rotate(9), Rotate(9))], dialogue_ids=["a", "b"])


def test_report_json_and_table():
    pairs = [(Rotate(90), Rotate(90)), (None, Search(("mug",)))]
    report = evaluate(pairs, dialogue_ids=["d1", "d2"])
    doc = json.loads(report.to_json())
    assert doc["total"] == 2 and doc["correct"] == 1
    assert doc["per_type"]["rotation"]["accuracy"] == 1.0
    assert doc["dialogue_success_rate"] == 0.5
    table = report.table()
    assert "command type" in table and "overall" in table
    assert "dialogues" in table
    # aligned columns: every line has the same field boundaries
    lines = table.splitlines()
    assert all(len(l) <= len(lines[1]) + 10 for l in lines)


def test_describe_pair():
    s = describe_pair(None, Rotate(90))
    assert "<unparseable>" in s and "!=" in s
    s = describe_pair(Rotate(90), Rotate(90))
    assert "==" in s


def test_non_command_reference_rejected():
    with pytest.raises(TypeError):
        evaluate([(None, "not a command")])
