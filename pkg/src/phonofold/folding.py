"""Folding maps: ordered rewrite rules aligning backend output with an inventory.

A folding map is an authored look-up table applied to phoneme streams after
conversion. Rules apply in file order, one left-to-right pass each, and a
match never spans a word or utterance boundary. The module also computes the
unknown/unseen diff against a reference inventory and suggests candidate
mappings for unknowns that differ only by diacritics.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Collection, Iterable

from .chars import classify_segment, strip_marks
from .errors import FormatError
from .inventory import Inventory
from .stream import Boundary, IpaSegment, PhonemeStream, repair_tokens

DELETION_MARK = "∅"


class RuleKind(Enum):
    ONE_TO_ONE = "one_to_one"
    MERGE = "merge"
    SPLIT = "split"
    DELETE = "delete"
    CONTEXTUAL = "contextual"


@dataclass(frozen=True)
class FoldRule:
    lhs: tuple[IpaSegment, ...]
    rhs: tuple[IpaSegment, ...]

    def __post_init__(self):
        if not self.lhs:
            raise ValueError("fold rule lhs must be non-empty")

    @property
    def kind(self) -> RuleKind:
        if not self.rhs:
            return RuleKind.DELETE
        if len(self.lhs) == 1 and len(self.rhs) == 1:
            return RuleKind.ONE_TO_ONE
        if len(self.lhs) > 1 and len(self.rhs) == 1:
            return RuleKind.MERGE
        if len(self.lhs) == 1 and len(self.rhs) > 1:
            return RuleKind.SPLIT
        return RuleKind.CONTEXTUAL

    def __str__(self) -> str:
        rhs = " ".join(self.rhs) if self.rhs else DELETION_MARK
        return f"{' '.join(self.lhs)} -> {rhs}"


@dataclass(frozen=True)
class FoldMap:
    rules: tuple[FoldRule, ...]
    provenance: str = "<string>"


@dataclass(frozen=True)
class DiffReport:
    """U_K/U_S split of an observed segment set against a reference set."""

    observed: frozenset
    reference: frozenset
    unknown: frozenset
    unseen: frozenset


def parse_fold_map(text: str, source: str = "<string>") -> FoldMap:
    """Parse "lhs -> rhs" lines; "∅" or an empty rhs deletes.

    Lines whose first non-blank character is ``#`` are comments. Duplicate
    lhs sequences are rejected, naming both offending lines.
    """
    rules: list[FoldRule] = []
    seen: dict[tuple, int] = {}
    for line_num, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "->" not in line:
            raise FormatError("expected 'lhs -> rhs'", source=source, line=line_num)
        lhs_text, rhs_text = line.split("->", 1)
        try:
            lhs = tuple(IpaSegment(t) for t in lhs_text.split())
            rhs_tokens = rhs_text.split()
            if rhs_tokens == [DELETION_MARK]:
                rhs_tokens = []
            rhs = tuple(IpaSegment(t) for t in rhs_tokens)
        except ValueError as exc:
            raise FormatError(str(exc), source=source, line=line_num) from None
        if not lhs:
            raise FormatError("empty lhs", source=source, line=line_num)
        if lhs in seen:
            raise FormatError(
                f"duplicate lhs {' '.join(lhs)!r} (lines {seen[lhs]} and {line_num})",
                source=source,
                line=line_num,
            )
        seen[lhs] = line_num
        rules.append(FoldRule(lhs, rhs))
    return FoldMap(tuple(rules), provenance=source)


def load_fold_map(path) -> FoldMap:
    with open(path, encoding="utf-8") as handle:
        return parse_fold_map(handle.read(), source=str(path))


def _apply_rule(tokens: list, rule: FoldRule) -> list:
    lhs, width = rule.lhs, len(rule.lhs)
    out: list = []
    i, n = 0, len(tokens)
    while i < n:
        # Boundary tokens never equal segments, so a window comparison both
        # matches segment text and refuses to span boundaries.
        if i + width <= n and all(tokens[i + j] == lhs[j] for j in range(width)):
            out.extend(rule.rhs)
            i += width
        else:
            out.append(tokens[i])
            i += 1
    return out


def apply_fold(fold_map: FoldMap, stream: PhonemeStream) -> PhonemeStream:
    """Apply every rule in map order, each in one non-overlapping pass."""
    tokens = list(stream)
    for rule in fold_map.rules:
        tokens = _apply_rule(tokens, rule)
    return PhonemeStream(repair_tokens(tokens))


def check_fold_map(fold_map: FoldMap) -> list[str]:
    """Well-formedness diagnostics for an authored map.

    Flags rule outputs that feed other rules' patterns (double application
    could differ from single), lhs pairs that overlap (order-dependent
    matching), and deletion rules. A map with no diagnostics is idempotent
    under apply_fold.
    """
    diagnostics: list[str] = []
    rules = fold_map.rules
    lhs_tokens: set[IpaSegment] = set()
    for rule in rules:
        lhs_tokens.update(rule.lhs)
    for i, rule in enumerate(rules, start=1):
        feeding = sorted(set(rule.rhs) & lhs_tokens)
        if feeding:
            diagnostics.append(
                f"non-confluence: rule {i} ({rule}) outputs {', '.join(feeding)} "
                "which other rules (or itself) can match again"
            )
        if not rule.rhs:
            diagnostics.append(f"delete: rule {i} ({rule}) removes tokens outright")
    for i, a in enumerate(rules, start=1):
        for j, b in enumerate(rules, start=1):
            if i == j:
                continue
            if _lhs_overlap(a.lhs, b.lhs):
                diagnostics.append(
                    f"overlap: lhs of rule {i} ({a}) and rule {j} ({b}) "
                    "admit order-dependent matches"
                )
    return diagnostics


def _lhs_overlap(a: tuple, b: tuple) -> bool:
    # containment
    if len(b) <= len(a) and any(a[i : i + len(b)] == b for i in range(len(a) - len(b) + 1)):
        return True
    # non-empty proper suffix of a equals prefix of b
    for size in range(1, min(len(a), len(b))):
        if a[-size:] == b[:size]:
            return True
    return False


def diff_inventory(observed: Collection, inventory) -> DiffReport:
    """Split observed vs reference segments into unknown and unseen sets."""
    observed_set = frozenset(IpaSegment(s) for s in observed)
    if isinstance(inventory, Inventory):
        reference = inventory.segment_texts()
    else:
        reference = frozenset(IpaSegment(s) for s in inventory)
    return DiffReport(
        observed=observed_set,
        reference=reference,
        unknown=observed_set - reference,
        unseen=reference - observed_set,
    )


def suggest_mappings(
    report: DiffReport, inventory: Inventory | None = None
) -> list[tuple[IpaSegment, IpaSegment, str]]:
    """Candidate one-to-one mappings for unknown segments.

    A candidate pairs an unknown with an unseen segment whose bare form
    (diacritics, modifier letters and tone bars stripped) is identical;
    candidates agreeing in segment class rank first. Pairs written with
    entirely different symbols need human judgment and are never suggested.
    """
    suggestions: list[tuple[IpaSegment, IpaSegment, str]] = []
    for unknown in sorted(report.unknown):
        bare = strip_marks(unknown)
        if not bare:
            continue
        candidates = []
        for unseen in sorted(report.unseen):
            if strip_marks(unseen) != bare:
                continue
            if inventory is not None and unseen in inventory:
                unseen_class = inventory.lookup(unseen).segment_class
            else:
                unseen_class = classify_segment(unseen)
            same_class = unseen_class == classify_segment(unknown)
            candidates.append((0 if same_class else 1, unseen))
        for _, unseen in sorted(candidates):
            suggestions.append((unknown, unseen, "diacritic"))
    return suggestions


def diff_to_json(
    report: DiffReport, suggestions: Iterable[tuple] | None = None
) -> dict:
    return {
        "unknown": sorted(report.unknown),
        "unseen": sorted(report.unseen),
        "suggestions": [
            {"unknown": u, "candidate": c, "reason": r} for u, c, r in (suggestions or [])
        ],
    }


def diff_to_text(report: DiffReport, suggestions: Iterable[tuple] | None = None) -> str:
    lines = [
        f"unknown ({len(report.unknown)}): " + " ".join(sorted(report.unknown)),
        f"unseen  ({len(report.unseen)}): " + " ".join(sorted(report.unseen)),
    ]
    for unknown, candidate, reason in suggestions or []:
        lines.append(f"suggest {unknown} -> {candidate}  [{reason}]")
    return "\n".join(lines)
