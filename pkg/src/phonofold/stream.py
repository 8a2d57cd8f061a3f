"""Canonical phoneme-stream representation.

A stream is an ordered sequence of tokens: IPA segments (one phoneme each,
possibly several characters) and reserved word/utterance boundary markers.
The text form is a single line of space-separated tokens, with the literals
WORD_BOUNDARY and UTT_BOUNDARY marking boundaries.
"""

from __future__ import annotations

import unicodedata
from enum import Enum
from typing import Iterable, Iterator, Union

WORD_BOUNDARY = "WORD_BOUNDARY"
UTT_BOUNDARY = "UTT_BOUNDARY"


class Boundary(Enum):
    WORD = WORD_BOUNDARY
    UTT = UTT_BOUNDARY

    def __str__(self) -> str:
        return self.value


class IpaSegment(str):
    """One phoneme, stored in canonical decomposition (NFD).

    Construction normalizes and validates; constructing from an existing
    segment returns it unchanged, so normalization is idempotent.
    """

    __slots__ = ()

    def __new__(cls, text: str) -> "IpaSegment":
        if isinstance(text, IpaSegment):
            return text
        normalized = unicodedata.normalize("NFD", text)
        if not normalized:
            raise ValueError("segment text must be non-empty")
        if any(ch.isspace() for ch in normalized):
            raise ValueError(f"segment {text!r} contains whitespace")
        if normalized in (WORD_BOUNDARY, UTT_BOUNDARY):
            raise ValueError(f"{text!r} is a reserved boundary literal")
        return super().__new__(cls, normalized)

    def __repr__(self) -> str:
        return f"IpaSegment({str.__repr__(self)})"


StreamToken = Union[IpaSegment, Boundary]


def _coerce_token(token) -> StreamToken:
    if isinstance(token, (IpaSegment, Boundary)):
        return token
    if token == WORD_BOUNDARY:
        return Boundary.WORD
    if token == UTT_BOUNDARY:
        return Boundary.UTT
    return IpaSegment(token)


def repair_tokens(tokens: Iterable[StreamToken]) -> tuple[StreamToken, ...]:
    """Drop redundant word boundaries so the adjacency invariants hold.

    Runs of WordBoundary collapse to one, and a WordBoundary next to an
    UttBoundary (either side) is dropped: the utterance boundary subsumes it.
    """
    out: list[StreamToken] = []
    for token in tokens:
        if token is Boundary.WORD:
            if out and isinstance(out[-1], Boundary):
                continue  # redundant next to another boundary
            out.append(token)
        elif token is Boundary.UTT:
            if out and out[-1] is Boundary.WORD:
                out.pop()
            out.append(token)
        else:
            out.append(token)
    return tuple(out)


class PhonemeStream:
    """Immutable token sequence satisfying the boundary-adjacency invariants."""

    __slots__ = ("_tokens",)

    def __init__(self, tokens: Iterable = ()):
        toks = tuple(_coerce_token(t) for t in tokens)
        for prev, cur in zip(toks, toks[1:]):
            if prev is Boundary.WORD and cur is Boundary.WORD:
                raise ValueError("adjacent word boundaries")
            if Boundary.WORD in (prev, cur) and Boundary.UTT in (prev, cur):
                raise ValueError("word boundary adjacent to utterance boundary")
        self._tokens = toks

    @property
    def tokens(self) -> tuple[StreamToken, ...]:
        return self._tokens

    def __iter__(self) -> Iterator[StreamToken]:
        return iter(self._tokens)

    def __len__(self) -> int:
        return len(self._tokens)

    def __getitem__(self, index):
        return self._tokens[index]

    def __eq__(self, other) -> bool:
        if not isinstance(other, PhonemeStream):
            return NotImplemented
        return self._tokens == other._tokens

    def __hash__(self) -> int:
        return hash(self._tokens)

    def __repr__(self) -> str:
        return f"PhonemeStream({list(self._tokens)!r})"


def parse_stream(text: str) -> PhonemeStream:
    """Parse one line of space-separated tokens into a stream.

    Whitespace runs collapse to single separators; boundary literals become
    boundary tokens; adjacency violations are repaired by dropping redundant
    word boundaries. Total on text lines: an empty line is an empty stream.
    """
    tokens = [_coerce_token(t) for t in text.split()]
    return PhonemeStream(repair_tokens(tokens))


def emit_stream(stream: PhonemeStream, keep_word_boundaries: bool = True) -> str:
    """Render a stream as a single space-joined line.

    Word boundaries are omitted when the flag is off; utterance boundaries are
    always emitted except for a trailing one, which the one-utterance-per-line
    text form makes redundant.
    """
    tokens = list(stream)
    if not keep_word_boundaries:
        tokens = [t for t in tokens if t is not Boundary.WORD]
    if tokens and tokens[-1] is Boundary.UTT:
        tokens.pop()
    return " ".join(str(t) for t in tokens)


def segment_types(stream: PhonemeStream) -> set[IpaSegment]:
    """The set of distinct segments in a stream, boundaries excluded."""
    return {t for t in stream if isinstance(t, IpaSegment)}
