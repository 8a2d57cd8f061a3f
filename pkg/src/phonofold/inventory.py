"""Reference phoneme inventories with ternary feature vectors.

Inventories are ingested from a PHOIBLE-style CSV: the five fixed columns
InventoryID, LanguageName, ISO6393, Phoneme and SegmentClass, followed by any
number of feature columns. The feature schema is taken from the header
verbatim, so the loader survives schema changes in the source database.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Collection, Iterable, Mapping

from .chars import classify_segment, count_vowel_glyphs
from .errors import FormatError, UnknownFeatureError, UnknownSegmentError
from .stream import IpaSegment

REQUIRED_COLUMNS = ("InventoryID", "LanguageName", "ISO6393", "Phoneme", "SegmentClass")

SEGMENT_CLASSES = ("consonant", "vowel", "tone")


class TernaryValue(Enum):
    PLUS = "+"
    MINUS = "-"
    UNSPECIFIED = "0"

    @classmethod
    def from_cell(cls, cell: str) -> "TernaryValue":
        cell = cell.strip()
        if cell == "+":
            return cls.PLUS
        if cell == "-":
            return cls.MINUS
        # multi-valued cells like "+,-" and anything unrecognized
        return cls.UNSPECIFIED


@dataclass(frozen=True)
class InventorySegment:
    segment: IpaSegment
    segment_class: str
    features: Mapping[str, TernaryValue]

    def __post_init__(self):
        if self.segment_class not in SEGMENT_CLASSES:
            raise ValueError(f"unknown segment class {self.segment_class!r}")


@dataclass(frozen=True)
class CountProfile:
    """Phoneme-type counts used for inventory matching."""

    n_types: int
    n_consonants: int
    n_vowels: int
    n_diphthongs: int

    @property
    def n_tones(self) -> int:
        return self.n_types - self.n_consonants - self.n_vowels

    def __post_init__(self):
        if min(self.n_types, self.n_consonants, self.n_vowels, self.n_diphthongs) < 0:
            raise ValueError("counts must be non-negative")
        if self.n_tones < 0:
            raise ValueError("consonants + vowels exceed total types")
        if self.n_diphthongs > self.n_vowels:
            raise ValueError("more diphthongs than vowels")

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.n_types, self.n_consonants, self.n_vowels, self.n_diphthongs)


@dataclass(frozen=True)
class Inventory:
    id: int
    language_name: str
    iso_code: str
    segments: tuple[InventorySegment, ...]
    _index: dict = field(init=False, repr=False, compare=False, default_factory=dict)

    def __post_init__(self):
        for seg in self.segments:
            if seg.segment in self._index:
                raise ValueError(f"duplicate segment {seg.segment!r} in inventory {self.id}")
            self._index[seg.segment] = seg

    def segment_texts(self) -> frozenset[IpaSegment]:
        return frozenset(self._index)

    def __contains__(self, segment) -> bool:
        return IpaSegment(segment) in self._index

    def lookup(self, segment) -> InventorySegment:
        seg = IpaSegment(segment)
        if seg not in self._index:
            raise UnknownSegmentError(seg, f"inventory {self.id}")
        return self._index[seg]


def is_diphthong(seg: InventorySegment) -> bool:
    """A vowel whose text carries two or more vowel-quality glyphs.

    Combining marks and length/tone marks are not vowel glyphs, so aː is a
    long monophthong while ɔɪ is a diphthong.
    """
    return seg.segment_class == "vowel" and count_vowel_glyphs(seg.segment) >= 2


def load_inventories(source) -> list[Inventory]:
    """Load all inventories from a CSV file path or open text file."""
    if hasattr(source, "read"):
        return _load(source, getattr(source, "name", "<file>"))
    with open(source, encoding="utf-8", newline="") as handle:
        return _load(handle, str(source))


def _load(handle, name: str) -> list[Inventory]:
    reader = csv.reader(handle)
    try:
        header = next(reader)
    except StopIteration:
        raise FormatError("empty inventory file", source=name) from None
    header = [col.strip() for col in header]
    for col in REQUIRED_COLUMNS:
        if col not in header:
            raise FormatError(f"missing column {col!r}", source=name)
    positions = {col: header.index(col) for col in REQUIRED_COLUMNS}
    feature_names = [col for col in header if col not in REQUIRED_COLUMNS]
    feature_positions = [header.index(col) for col in feature_names]

    grouped: dict[int, dict] = {}
    for line_num, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) < len(header):
            raise FormatError("row has fewer cells than the header", source=name, line=line_num)
        try:
            inv_id = int(row[positions["InventoryID"]])
        except ValueError:
            raise FormatError(
                f"bad InventoryID {row[positions['InventoryID']]!r}", source=name, line=line_num
            ) from None
        seg_text = row[positions["Phoneme"]].strip()
        seg_class = row[positions["SegmentClass"]].strip().lower()
        if seg_class not in SEGMENT_CLASSES:
            raise FormatError(f"unknown SegmentClass {seg_class!r}", source=name, line=line_num)
        try:
            segment = IpaSegment(seg_text)
        except ValueError as exc:
            raise FormatError(str(exc), source=name, line=line_num) from None
        features = {
            fname: TernaryValue.from_cell(row[pos])
            for fname, pos in zip(feature_names, feature_positions)
        }
        entry = grouped.setdefault(
            inv_id,
            {
                "language": row[positions["LanguageName"]].strip(),
                "iso": row[positions["ISO6393"]].strip(),
                "segments": [],
                "seen": set(),
            },
        )
        if segment in entry["seen"]:
            raise FormatError(
                f"duplicate segment {segment!r} in inventory {inv_id}", source=name, line=line_num
            )
        entry["seen"].add(segment)
        entry["segments"].append(InventorySegment(segment, seg_class, features))

    return [
        Inventory(inv_id, data["language"], data["iso"], tuple(data["segments"]))
        for inv_id, data in grouped.items()
    ]


def count_profile(source) -> CountProfile:
    """Count types/consonants/vowels/diphthongs for an Inventory or segment set.

    Bare segments are classified by glyph: tone-glyph-only tokens are tones,
    tokens with a vowel glyph are vowels, the rest consonants.
    """
    if isinstance(source, Inventory):
        classified = [(seg.segment, seg.segment_class) for seg in source.segments]
    else:
        segments = {IpaSegment(s) for s in source}
        classified = [(seg, classify_segment(seg)) for seg in segments]
    n_cons = sum(1 for _, cls in classified if cls == "consonant")
    n_vow = sum(1 for _, cls in classified if cls == "vowel")
    n_diph = sum(
        1 for seg, cls in classified if cls == "vowel" and count_vowel_glyphs(seg) >= 2
    )
    return CountProfile(len(classified), n_cons, n_vow, n_diph)


def _jaccard(a: frozenset, b: frozenset) -> float:
    union = a | b
    if not union:
        return 1.0
    return len(a & b) / len(union)


def best_match(
    observed: Collection, candidates: Iterable[Inventory]
) -> list[tuple[Inventory, int]]:
    """Rank candidate inventories against an observed segment set.

    Primary score is the L1 distance between count profiles (lower is
    better); ties break on larger Jaccard overlap of the segment sets, then
    on smaller inventory id. The full ranking is returned.
    """
    candidates = list(candidates)
    if not candidates:
        raise ValueError("no candidate inventories")
    observed_set = frozenset(IpaSegment(s) for s in observed)
    profile = count_profile(observed_set).as_tuple()

    scored = []
    for inv in candidates:
        inv_profile = count_profile(inv).as_tuple()
        l1 = sum(abs(a - b) for a, b in zip(profile, inv_profile))
        overlap = _jaccard(observed_set, inv.segment_texts())
        scored.append((l1, -overlap, inv.id, inv))
    scored.sort(key=lambda item: item[:3])
    return [(inv, l1) for l1, _, _, inv in scored]


def feature_of(inv: Inventory, segment, feature: str) -> TernaryValue:
    """Stored feature value; lookup failures are errors, never UNSPECIFIED."""
    seg = inv.lookup(segment)
    if feature not in seg.features:
        raise UnknownFeatureError(feature)
    return seg.features[feature]
