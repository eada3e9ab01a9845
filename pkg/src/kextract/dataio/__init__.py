"""Tokenization and parsing/serialization of the five dataset formats."""

from kextract.dataio.bio import parse_bio, serialize_bio
from kextract.dataio.document import parse_document_corpus, serialize_document_corpus
from kextract.dataio.fewshot import parse_fewshot_records, serialize_fewshot_records
from kextract.dataio.records import (
    AttributeRecord,
    DocumentRecord,
    FewShotRelationRecord,
    Mention,
    RelationLabel,
    RelationRecord,
    TaggedSentence,
    bio_spans,
    check_bio_transitions,
)
from kextract.dataio.tabular import (
    parse_attribute_csv,
    parse_relation_csv,
    serialize_attribute_csv,
    serialize_relation_csv,
)
from kextract.dataio.tokenizer import (
    SUPPORTED_LANGUAGES,
    Token,
    align_offset,
    token_char_spans,
    tokenize,
)
from kextract.dataio.vocab import Vocabulary, build_vocab

__all__ = [
    "AttributeRecord",
    "DocumentRecord",
    "FewShotRelationRecord",
    "Mention",
    "RelationLabel",
    "RelationRecord",
    "SUPPORTED_LANGUAGES",
    "TaggedSentence",
    "Token",
    "Vocabulary",
    "align_offset",
    "bio_spans",
    "build_vocab",
    "check_bio_transitions",
    "parse_attribute_csv",
    "parse_bio",
    "parse_document_corpus",
    "parse_fewshot_records",
    "parse_relation_csv",
    "serialize_attribute_csv",
    "serialize_bio",
    "serialize_document_corpus",
    "serialize_fewshot_records",
    "serialize_relation_csv",
    "token_char_spans",
    "tokenize",
]
