"""English and Chinese tokenization.

English text is split on whitespace and leading/trailing punctuation is
detached into single-character tokens. Chinese text becomes one token per
Unicode code point with whitespace dropped.
"""

from __future__ import annotations

import string
from dataclasses import dataclass

from kextract.errors import AlignmentError, ConfigError

SUPPORTED_LANGUAGES = ("english", "chinese")

# ASCII punctuation plus the common CJK full-width marks.
_CJK_PUNCT = "，。！？；：、「」『』（）《》〈〉【】…—～·“”‘’"
PUNCTUATION = set(string.punctuation) | set(_CJK_PUNCT)


@dataclass(frozen=True)
class Token:
    text: str
    index: int

    def __post_init__(self):
        if not self.text:
            raise ValueError("token text must be non-empty")
        if self.index < 0:
            raise ValueError("token index must be non-negative")


def _split_english_word(word: str) -> list[str]:
    """Detach leading/trailing punctuation characters as their own tokens."""
    leading: list[str] = []
    trailing: list[str] = []
    start, end = 0, len(word)
    while start < end and word[start] in PUNCTUATION:
        leading.append(word[start])
        start += 1
    while end > start and word[end - 1] in PUNCTUATION:
        trailing.append(word[end - 1])
        end -= 1
    core = [word[start:end]] if end > start else []
    return leading + core + list(reversed(trailing))


def tokenize(text: str, language: str = "english") -> list[Token]:
    """Split ``text`` into tokens for the given language.

    Never fails on valid Unicode input; an empty or all-whitespace string
    yields an empty list.
    """
    if language not in SUPPORTED_LANGUAGES:
        raise ConfigError(
            f"unsupported language {language!r}; supported: {', '.join(SUPPORTED_LANGUAGES)}"
        )
    pieces: list[str] = []
    if language == "english":
        for word in text.split():
            pieces.extend(_split_english_word(word))
    else:
        pieces = [ch for ch in text if not ch.isspace()]
    return [Token(piece, i) for i, piece in enumerate(pieces)]


def token_char_spans(text: str, tokens: list[Token]) -> list[tuple[int, int]]:
    """Locate each token in ``text``, returning [start, end) code-point spans.

    Tokens produced by :func:`tokenize` always appear in order as substrings
    of the source, so a single left-to-right scan suffices.
    """
    spans: list[tuple[int, int]] = []
    cursor = 0
    for tok in tokens:
        pos = text.find(tok.text, cursor)
        if pos < 0:
            raise ValueError(f"token {tok.text!r} not found in source text after offset {cursor}")
        spans.append((pos, pos + len(tok.text)))
        cursor = pos + len(tok.text)
    return spans


def align_offset(
    text: str,
    tokens: list[Token],
    char_offset: int,
    mode: str = "strict",
) -> int:
    """Map a character offset to the index of the token starting there.

    In ``repair`` mode an offset that falls inside a token snaps to the
    nearest token start; ``strict`` raises :class:`AlignmentError`.
    """
    if not tokens:
        raise AlignmentError(f"offset {char_offset} in empty token sequence")
    spans = token_char_spans(text, tokens)
    for i, (start, _end) in enumerate(spans):
        if start == char_offset:
            return i
    if mode == "strict":
        raise AlignmentError(f"offset {char_offset} is not a token boundary")
    best = min(range(len(spans)), key=lambda i: abs(spans[i][0] - char_offset))
    return best
