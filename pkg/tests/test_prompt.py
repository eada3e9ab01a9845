import pytest

from kextract.dataio import FewShotRelationRecord, build_vocab, parse_fewshot_records
from kextract.errors import ValidationError
from kextract.lowres import PromptTemplate, build_relation_prompt, default_template
from kextract.lowres.prompt import TYPE_H_OFFSET, TYPE_T_OFFSET

from .conftest import read_fixture


@pytest.fixture
def dolphin():
    return parse_fewshot_records(read_fixture("fewshot.jsonl"))[0]


@pytest.fixture
def vocab(dolphin):
    return build_vocab([list(dolphin.tokens)])


def decode(ids, vocab):
    out = []
    for i in ids:
        if i < len(vocab):
            out.append(vocab.token_of(i))
        else:
            out.append(f"<virtual:{i - len(vocab)}>")
    return out


def test_dolphin_prompt_rendering(dolphin, vocab):
    template = PromptTemplate.parse("{SENT} {HEAD} {MASK} {TAIL}")
    ids, mask_pos = build_relation_prompt(dolphin, template, vocab)
    tokens = decode(ids, vocab)
    n = len(dolphin.tokens)
    assert tokens[:n] == list(dolphin.tokens)
    assert tokens[n:] == ["dolphin", "<mask>", "flukes"]
    assert mask_pos == n + 1
    assert ids.count(vocab.mask_id) == 1


def test_type_slots_render_virtual_ids(dolphin, vocab):
    ids, _ = build_relation_prompt(dolphin, default_template(), vocab)
    assert len(vocab) + TYPE_H_OFFSET in ids
    assert len(vocab) + TYPE_T_OFFSET in ids


def test_template_without_mask_rejected():
    with pytest.raises(ValidationError):
        PromptTemplate.parse("{SENT} {HEAD} {TAIL}")


def test_template_requires_single_sent():
    with pytest.raises(ValidationError):
        PromptTemplate.parse("{HEAD} {MASK}")
    with pytest.raises(ValidationError):
        PromptTemplate.parse("{SENT} {SENT} {MASK}")


def test_unknown_slot_rejected():
    with pytest.raises(ValidationError):
        PromptTemplate.parse("{SENT} {BOGUS} {MASK}")


def test_template_round_trip():
    text = "{SENT} {TYPE_H} {HEAD} {MASK} {TYPE_T} {TAIL}"
    assert str(PromptTemplate.parse(text)) == text


def test_label_never_leaks(dolphin, vocab):
    other = FewShotRelationRecord(
        tokens=dolphin.tokens,
        head=dolphin.head,
        head_span=dolphin.head_span,
        tail=dolphin.tail,
        tail_span=dolphin.tail_span,
        relation="Entity-Destination(e1,e2)",
    )
    template = default_template()
    assert build_relation_prompt(dolphin, template, vocab) == build_relation_prompt(
        other, template, vocab
    )


def test_label_tokens_absent_from_prompt():
    tokens = ("alpha", "beta", "gamma")
    record = FewShotRelationRecord(tokens, "alpha", (0, 1), "beta", (1, 2), "secret_rel")
    vocab = build_vocab([list(tokens) + ["secret_rel"]])
    ids, _ = build_relation_prompt(record, default_template(), vocab)
    assert vocab.id_of("secret_rel") not in ids


def test_literal_tokens_and_unk_warning(dolphin, caplog):
    vocab = build_vocab([["totally", "different"]])
    template = PromptTemplate.parse("{SENT} {HEAD} is {MASK} of {TAIL}")
    with caplog.at_level("WARNING"):
        ids, _ = build_relation_prompt(dolphin, template, vocab)
    assert vocab.unk_id in ids
    assert caplog.records
