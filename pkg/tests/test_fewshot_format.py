import json

import pytest

from kextract.dataio import parse_fewshot_records, serialize_fewshot_records
from kextract.errors import ParseError, ValidationError

from .conftest import read_fixture


def test_fixture_round_trip():
    raw = read_fixture("fewshot.jsonl")
    records = parse_fewshot_records(raw)
    assert serialize_fewshot_records(records) == raw


def test_dolphin_record():
    r = parse_fewshot_records(read_fixture("fewshot.jsonl"))[0]
    assert (r.head, r.head_span) == ("dolphin", (1, 2))
    assert (r.tail, r.tail_span) == ("flukes", (4, 5))
    assert r.relation == "Component-Whole(e2,e1)"


def test_key_order_independent():
    line = read_fixture("fewshot.jsonl").splitlines()[0]
    obj = json.loads(line)
    shuffled = json.dumps({k: obj[k] for k in ["relation", "t", "token", "h"]})
    assert parse_fewshot_records(shuffled) == parse_fewshot_records(line)


def test_empty_span_rejected():
    obj = {
        "token": ["a", "b"],
        "h": {"name": "a", "pos": [0, 0]},
        "t": {"name": "b", "pos": [1, 2]},
        "relation": "r",
    }
    with pytest.raises(ValidationError) as exc:
        parse_fewshot_records(json.dumps(obj))
    assert exc.value.line == 1


def test_overlapping_spans_rejected():
    obj = {
        "token": ["a", "b", "c"],
        "h": {"name": "a b", "pos": [0, 2]},
        "t": {"name": "b c", "pos": [1, 3]},
        "relation": "r",
    }
    with pytest.raises(ValidationError):
        parse_fewshot_records(json.dumps(obj))


def test_span_out_of_range():
    obj = {
        "token": ["a"],
        "h": {"name": "a", "pos": [0, 1]},
        "t": {"name": "b", "pos": [1, 2]},
        "relation": "r",
    }
    with pytest.raises(ValidationError):
        parse_fewshot_records(json.dumps(obj))


def test_name_span_mismatch():
    obj = {
        "token": ["a", "b"],
        "h": {"name": "zzz", "pos": [0, 1]},
        "t": {"name": "b", "pos": [1, 2]},
        "relation": "r",
    }
    with pytest.raises(ValidationError):
        parse_fewshot_records(json.dumps(obj))


def test_missing_key_and_bad_json():
    with pytest.raises(ParseError):
        parse_fewshot_records('{"token": ["a"]}')
    with pytest.raises(ParseError) as exc:
        parse_fewshot_records("{broken\n")
    assert exc.value.line == 1


def test_blank_lines_skipped():
    raw = read_fixture("fewshot.jsonl")
    assert len(parse_fewshot_records("\n" + raw + "\n\n")) == 2
