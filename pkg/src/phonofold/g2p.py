"""Grapheme-to-phoneme conversion backends.

Four backends produce uncorrected phoneme streams from orthographic text:

* rules      -- pre-processor rewrite rules, a greedy longest-match grapheme
                map, and post-processor rewrite rules over phoneme tokens;
* lexicon    -- pronunciation dictionary lookup with optional rule fallback;
* syllabary  -- greedy syllable segmentation of romanized text, a
                syllable-to-IPA table, and tone merging;
* passthrough -- ingests text that is already in phoneme-stream form.

Word-level converters return ``(segments, unmapped)`` where ``unmapped`` is
the set of characters that had no mapping and passed through verbatim.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .chars import count_vowel_glyphs, is_punctuation_word, is_syllabic_marked
from .errors import (
    ConversionError,
    FormatError,
    OutOfVocabularyError,
    PhonofoldError,
    SegmentationError,
    ToneAttachmentError,
    UnknownSegmentError,
)
from .stream import Boundary, IpaSegment, PhonemeStream, parse_stream, repair_tokens

DELETION_MARK = "∅"


def _nfd(text: str) -> str:
    return unicodedata.normalize("NFD", text)


@dataclass(frozen=True)
class RewriteRule:
    """Replace a symbol sequence, optionally restricted by literal context.

    Symbols are single characters for pre-processor rules and whole phoneme
    tokens for post-processor rules. Contexts are literal sequences; a ``#``
    anchor pins the match to the word edge. Application is one left-to-right
    pass with non-overlapping matches, contexts checked against the input.
    """

    target: tuple[str, ...]
    replacement: tuple[str, ...]
    left: tuple[str, ...] = ()
    right: tuple[str, ...] = ()
    left_anchor: bool = False
    right_anchor: bool = False

    def __post_init__(self):
        if not self.target:
            raise ValueError("rewrite target must be non-empty")

    def _context_ok(self, seq: Sequence[str], start: int, end: int) -> bool:
        if self.left:
            if start < len(self.left) or tuple(seq[start - len(self.left) : start]) != self.left:
                return False
        if self.left_anchor and start - len(self.left) != 0:
            return False
        if self.right:
            if tuple(seq[end : end + len(self.right)]) != self.right:
                return False
        if self.right_anchor and end + len(self.right) != len(seq):
            return False
        return True

    def apply(self, seq: Sequence[str]) -> tuple[str, ...]:
        target, width = self.target, len(self.target)
        out: list[str] = []
        i, n = 0, len(seq)
        while i < n:
            if tuple(seq[i : i + width]) == target and self._context_ok(seq, i, i + width):
                out.extend(self.replacement)
                i += width
            else:
                out.append(seq[i])
                i += 1
        return tuple(out)


class GraphemeMap:
    """Ordered grapheme-to-segments entries, matched longest-first.

    Ties between equal grapheme strings go to the earlier entry.
    """

    def __init__(self, entries: Iterable[tuple[str, Sequence[IpaSegment]]] = ()):
        self.entries: list[tuple[str, tuple[IpaSegment, ...]]] = []
        self._table: dict[str, tuple[IpaSegment, ...]] = {}
        for grapheme, segments in entries:
            grapheme = _nfd(grapheme)
            if not grapheme:
                raise ValueError("grapheme strings must be non-empty")
            segments = tuple(IpaSegment(s) for s in segments)
            self.entries.append((grapheme, segments))
            self._table.setdefault(grapheme, segments)
        self._lengths = sorted({len(g) for g in self._table}, reverse=True)

    def __len__(self) -> int:
        return len(self.entries)

    def match_at(self, text: str, pos: int):
        """Longest entry matching ``text`` at ``pos``; None when nothing does."""
        remaining = len(text) - pos
        for width in self._lengths:
            if width > remaining:
                continue
            segments = self._table.get(text[pos : pos + width])
            if segments is not None:
                return width, segments
        return None


@dataclass(frozen=True)
class RuleSet:
    """Conversion stages applied strictly in order pre -> map -> post."""

    pre_rules: tuple[RewriteRule, ...] = ()
    grapheme_map: GraphemeMap = field(default_factory=GraphemeMap)
    post_rules: tuple[RewriteRule, ...] = ()


@dataclass(frozen=True)
class Lexicon:
    """Case-folded word -> pronunciation map."""

    entries: dict

    def lookup(self, word: str):
        return self.entries.get(_nfd(word).casefold())


@dataclass(frozen=True)
class SyllableTable:
    """Romanized syllable -> (segments, optional tone glyphs).

    ``syllabic_segments`` hosts per-language nucleus exceptions (for
    example syllabic nasals); the default nucleus is the first vowel.
    """

    entries: dict
    syllabic_segments: frozenset = frozenset()

    def __post_init__(self):
        lengths = sorted({len(k) for k in self.entries}, reverse=True)
        object.__setattr__(self, "_lengths", lengths)


def convert_rules(rules: RuleSet, word: str) -> tuple[list[IpaSegment], set[str]]:
    """Run the pre/map/post pipeline on one whitespace-free word.

    Characters with no grapheme mapping pass through as single-character
    segments and are reported in the returned unmapped set; conversion never
    fails on unknown characters.
    """
    if rules.pre_rules:
        chars: Sequence[str] = tuple(_nfd(word))
        for rule in rules.pre_rules:
            chars = rule.apply(chars)
        text = "".join(chars)
    else:
        text = _nfd(word)

    segments: list[IpaSegment] = []
    unmapped: set[str] = set()
    passthrough: dict[str, IpaSegment] = {}
    table = rules.grapheme_map._table
    lengths = rules.grapheme_map._lengths
    pos, end = 0, len(text)
    while pos < end:
        for width in lengths:
            mapped = table.get(text[pos : pos + width])
            if mapped is not None:
                segments.extend(mapped)
                pos += width
                break
        else:
            ch = text[pos]
            segment = passthrough.get(ch)
            if segment is None:
                segment = passthrough[ch] = IpaSegment(ch)
            segments.append(segment)
            unmapped.add(ch)
            pos += 1

    if rules.post_rules:
        seq: Sequence[str] = tuple(segments)
        for rule in rules.post_rules:
            seq = rule.apply(seq)
        segments = [IpaSegment(s) for s in seq]
    return segments, unmapped


def convert_lexicon(
    lexicon: Lexicon, word: str, rules: RuleSet | None = None
) -> tuple[list[IpaSegment], set[str]]:
    """Dictionary lookup, falling back to the rule engine on a miss."""
    pronunciation = lexicon.lookup(word)
    if pronunciation is not None:
        return list(pronunciation), set()
    if rules is not None:
        return convert_rules(rules, word)
    raise OutOfVocabularyError(word)


def syllabify(table: SyllableTable, text: str) -> list[str]:
    """Greedy longest-match split of romanized text into table syllables.

    The whole input must be consumed; a position where no key matches raises
    a SegmentationError carrying the failure offset.
    """
    text = _nfd(text)
    syllables: list[str] = []
    pos = 0
    while pos < len(text):
        for width in table._lengths:
            candidate = text[pos : pos + width]
            if len(candidate) == width and candidate in table.entries:
                syllables.append(candidate)
                pos += width
                break
        else:
            raise SegmentationError(text, pos)
    return syllables


def syllable_to_ipa(table: SyllableTable, syllable: str) -> tuple[list[IpaSegment], str | None]:
    """Segments for one syllable plus its pending tone mark, if any."""
    entry = table.entries.get(_nfd(syllable))
    if entry is None:
        raise UnknownSegmentError(syllable, "syllable table")
    segments, tone = entry
    return list(segments), tone


def _nucleus_index(segments: Sequence[IpaSegment], syllabic: frozenset) -> int | None:
    for i, seg in enumerate(segments):
        if count_vowel_glyphs(seg) > 0:
            return i
    for i, seg in enumerate(segments):
        if seg in syllabic or is_syllabic_marked(seg):
            return i
    return None


def merge_tones(
    segments: Sequence[IpaSegment],
    tone: str | None,
    split_tones: bool = False,
    syllabic: frozenset = frozenset(),
) -> list[IpaSegment]:
    """Attach a tone mark to the syllable nucleus.

    Merged (default), the tone glyphs join the nucleus segment into one
    token; with ``split_tones`` the tone becomes its own token directly
    after the nucleus.
    """
    out = list(segments)
    if not tone:
        return out
    nucleus = _nucleus_index(out, syllabic)
    if nucleus is None:
        raise ToneAttachmentError(f"no nucleus for tone {tone!r} in {out!r}")
    if split_tones:
        out.insert(nucleus + 1, IpaSegment(tone))
    else:
        out[nucleus] = IpaSegment(out[nucleus] + tone)
    return out


@dataclass(frozen=True)
class RulesBackend:
    rules: RuleSet

    def convert_word(self, word: str) -> tuple[list[IpaSegment], set[str]]:
        return convert_rules(self.rules, word)


@dataclass(frozen=True)
class LexiconBackend:
    lexicon: Lexicon
    fallback: RuleSet | None = None

    def convert_word(self, word: str) -> tuple[list[IpaSegment], set[str]]:
        return convert_lexicon(self.lexicon, word, rules=self.fallback)


@dataclass(frozen=True)
class SyllabaryBackend:
    table: SyllableTable
    split_tones: bool = False

    def convert_word(self, word: str) -> tuple[list[IpaSegment], set[str]]:
        segments: list[IpaSegment] = []
        for syllable in syllabify(self.table, word):
            base, tone = syllable_to_ipa(self.table, syllable)
            segments.extend(
                merge_tones(
                    base,
                    tone,
                    split_tones=self.split_tones,
                    syllabic=self.table.syllabic_segments,
                )
            )
        return segments, set()


@dataclass(frozen=True)
class PassthroughBackend:
    """Accepts text some external tool already phonemized."""

    def convert_line(self, text: str) -> tuple[list, set[str]]:
        return list(parse_stream(text)), set()

    def convert_word(self, word: str) -> tuple[list[IpaSegment], set[str]]:
        return [IpaSegment(word)], set()


def convert_utterance(
    backend, text: str, keep_word_boundaries: bool = False
) -> tuple[PhonemeStream, set[str]]:
    """Convert one utterance to a phoneme stream.

    The utterance is split on whitespace; punctuation-only words are dropped;
    a WordBoundary goes between words when the flag is set; a single
    UttBoundary is appended to any non-empty result. Backend failures are
    re-raised as ConversionError carrying the word and its index.
    """
    unmapped: set[str] = set()
    tokens: list = []

    if hasattr(backend, "convert_line"):
        tokens, unmapped = backend.convert_line(text)
    else:
        first = True
        for index, word in enumerate(text.split()):
            if is_punctuation_word(word):
                continue
            try:
                segments, word_unmapped = backend.convert_word(word)
            except PhonofoldError as exc:
                raise ConversionError(word, index, exc) from exc
            unmapped |= word_unmapped
            if not segments:
                continue
            if keep_word_boundaries and not first:
                tokens.append(Boundary.WORD)
            tokens.extend(segments)
            first = False

    if tokens and tokens[-1] is not Boundary.UTT:
        tokens.append(Boundary.UTT)
    return PhonemeStream(repair_tokens(tokens)), unmapped


# --- file formats -----------------------------------------------------------
#
# Rule file: sections "pre:", "map:", "post:"; one rule per line in the form
# "lhs -> rhs" with an optional "/ left _ right" context suffix; "#" inside a
# context is a word-edge anchor, so comments are whole lines starting with #.
# Lexicon: word TAB space-separated segments. Syllable table: romanization
# TAB segments TAB tone glyphs (third column optional).


def _split_rule_line(line: str, source: str, line_num: int):
    if "->" not in line:
        raise FormatError("expected 'lhs -> rhs'", source=source, line=line_num)
    lhs_text, rhs_text = line.split("->", 1)
    context = None
    if "/" in rhs_text:
        rhs_text, context_text = rhs_text.split("/", 1)
        if "_" not in context_text:
            raise FormatError("context needs 'left _ right'", source=source, line=line_num)
        left_text, right_text = context_text.split("_", 1)
        context = (left_text.split(), right_text.split())
    lhs = lhs_text.split()
    rhs = rhs_text.split()
    if rhs == [DELETION_MARK]:
        rhs = []
    if not lhs:
        raise FormatError("empty lhs", source=source, line=line_num)
    return lhs, rhs, context


def _context_parts(tokens: list[str], side: str):
    anchored = False
    if side == "left" and tokens and tokens[0] == "#":
        anchored = True
        tokens = tokens[1:]
    if side == "right" and tokens and tokens[-1] == "#":
        anchored = True
        tokens = tokens[:-1]
    if "#" in tokens:
        raise ValueError("word-edge anchor only allowed at the outer context edge")
    return tokens, anchored


def _build_rewrite(lhs, rhs, context, as_chars: bool, source: str, line_num: int) -> RewriteRule:
    def expand(tokens):
        if as_chars:
            return tuple(_nfd("".join(tokens)))
        return tuple(_nfd(t) for t in tokens)

    left_tokens: list[str] = []
    right_tokens: list[str] = []
    left_anchor = right_anchor = False
    if context is not None:
        try:
            left_tokens, left_anchor = _context_parts(context[0], "left")
            right_tokens, right_anchor = _context_parts(context[1], "right")
        except ValueError as exc:
            raise FormatError(str(exc), source=source, line=line_num) from None
    try:
        return RewriteRule(
            target=expand(lhs),
            replacement=expand(rhs),
            left=expand(left_tokens),
            right=expand(right_tokens),
            left_anchor=left_anchor,
            right_anchor=right_anchor,
        )
    except ValueError as exc:
        raise FormatError(str(exc), source=source, line=line_num) from None


def parse_rule_file(text: str, source: str = "<string>") -> RuleSet:
    """Parse the pre/map/post rule file format into a RuleSet."""
    pre: list[RewriteRule] = []
    post: list[RewriteRule] = []
    map_entries: list[tuple[str, list[IpaSegment]]] = []
    section = None
    for line_num, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line in ("pre:", "map:", "post:"):
            section = line[:-1]
            continue
        if section is None:
            raise FormatError("rule line before any section header", source=source, line=line_num)
        lhs, rhs, context = _split_rule_line(line, source, line_num)
        if section == "pre":
            pre.append(_build_rewrite(lhs, rhs, context, True, source, line_num))
        elif section == "post":
            post.append(_build_rewrite(lhs, rhs, context, False, source, line_num))
        else:
            if context is not None:
                raise FormatError("map entries take no context", source=source, line=line_num)
            grapheme = _nfd("".join(lhs))
            try:
                segments = [IpaSegment(t) for t in rhs]
            except ValueError as exc:
                raise FormatError(str(exc), source=source, line=line_num) from None
            map_entries.append((grapheme, segments))
    return RuleSet(tuple(pre), GraphemeMap(map_entries), tuple(post))


def load_rule_file(path) -> RuleSet:
    with open(path, encoding="utf-8") as handle:
        return parse_rule_file(handle.read(), source=str(path))


def parse_lexicon(text: str, source: str = "<string>") -> Lexicon:
    """Parse the two-column tab-separated lexicon format.

    The first entry for a word wins, matching the primary-pronunciation
    convention of pronunciation dictionaries.
    """
    entries: dict = {}
    for line_num, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        parts = raw.rstrip("\n").split("\t")
        if len(parts) != 2:
            raise FormatError("expected 'word<TAB>segments'", source=source, line=line_num)
        word = _nfd(parts[0].strip()).casefold()
        if not word or " " in word:
            raise FormatError(f"bad lexicon word {parts[0]!r}", source=source, line=line_num)
        try:
            segments = tuple(IpaSegment(t) for t in parts[1].split())
        except ValueError as exc:
            raise FormatError(str(exc), source=source, line=line_num) from None
        entries.setdefault(word, segments)
    return Lexicon(entries)


def load_lexicon(path) -> Lexicon:
    with open(path, encoding="utf-8") as handle:
        return parse_lexicon(handle.read(), source=str(path))


def parse_syllable_table(
    text: str, source: str = "<string>", syllabic_segments: Iterable[str] = ()
) -> SyllableTable:
    """Parse the three-column tab-separated syllable table format."""
    entries: dict = {}
    first_line: dict = {}
    for line_num, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        parts = raw.rstrip("\n").split("\t")
        if len(parts) not in (2, 3):
            raise FormatError(
                "expected 'romanization<TAB>segments[<TAB>tone]'", source=source, line=line_num
            )
        key = _nfd(parts[0].strip())
        if not key:
            raise FormatError("empty romanization", source=source, line=line_num)
        if key in entries:
            raise FormatError(
                f"duplicate romanization {key!r} (lines {first_line[key]} and {line_num})",
                source=source,
                line=line_num,
            )
        try:
            segments = tuple(IpaSegment(t) for t in parts[1].split())
        except ValueError as exc:
            raise FormatError(str(exc), source=source, line=line_num) from None
        if not segments:
            raise FormatError("entry needs at least one segment", source=source, line=line_num)
        tone = _nfd(parts[2].strip()) if len(parts) == 3 and parts[2].strip() else None
        entries[key] = (segments, tone)
        first_line[key] = line_num
    return SyllableTable(entries, frozenset(IpaSegment(s) for s in syllabic_segments))


def load_syllable_table(path, syllabic_segments: Iterable[str] = ()) -> SyllableTable:
    with open(path, encoding="utf-8") as handle:
        return parse_syllable_table(
            handle.read(), source=str(path), syllabic_segments=syllabic_segments
        )
