"""Orthographic corpus ingestion, conversion and augmented CSV output.

Input is a CHILDES-style CSV of utterances; a schema mapping names the source
columns for the recognized fields and everything else passes through
untouched. Conversion fills a ``phonemized`` column with emitted phoneme
streams, keeps failed rows with the failure recorded in an ``errors`` column,
and accumulates an observed-segment summary for downstream inventory diffing.
"""

from __future__ import annotations

import csv
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import partial
from typing import Iterable, Iterator

from .errors import FormatError, PhonofoldError
from .folding import FoldMap, apply_fold
from .g2p import convert_utterance
from .stream import emit_stream, segment_types

AVERAGE_MONTH_DAYS = 30.44

DEFAULT_SCHEMA = {
    "utterance_id": "id",
    "transcript_id": "transcript_id",
    "corpus_id": "corpus_id",
    "collection_id": "collection_id",
    "speaker_role": "speaker_role",
    "target_child_age": "target_child_age",
    "gloss": "gloss",
}

# Columns this toolkit writes; picked up again transparently on re-read.
OUTPUT_COLUMNS = ("phonemized", "is_child", "errors")

_AGE_RE = re.compile(r"^(\d+);(\d+)(?:\.(\d+))?$")
_TRUE_VALUES = {"true", "1", "yes"}


@dataclass
class UtteranceRecord:
    utterance_id: str = ""
    transcript_id: str = ""
    corpus_id: str = ""
    collection_id: str = ""
    speaker_role: str = ""
    target_child_age: float | None = None
    age_text: str = ""
    gloss: str = ""
    phonemized: str | None = None
    is_child: bool = False
    error: str = ""
    extra: dict = field(default_factory=dict)


def parse_age(age_text: str) -> float | None:
    """CHAT age string "Y;MM.DD" to months; malformed input yields None."""
    match = _AGE_RE.match(age_text.strip())
    if not match:
        return None
    years, months, days = match.group(1), match.group(2), match.group(3) or "0"
    return int(years) * 12 + int(months) + int(days) / AVERAGE_MONTH_DAYS


def _age_from_cell(cell: str) -> float | None:
    cell = cell.strip()
    if not cell:
        return None
    try:
        months = float(cell)
    except ValueError:
        return parse_age(cell)
    return months if months >= 0 else None


def read_corpus(
    source,
    schema: dict | None = None,
    child_role: str = "CHI",
    row_errors: list | None = None,
) -> Iterator[UtteranceRecord]:
    """Yield records from a corpus CSV in file order.

    Unmapped columns land in ``extra`` in header order; previously written
    phonemized/is_child/errors columns are recognized and re-read. Rows that
    cannot be read are skipped and appended to ``row_errors`` as
    (line_number, message) when a list is supplied.
    """
    if hasattr(source, "read"):
        yield from _read(source, getattr(source, "name", "<file>"), schema, child_role, row_errors)
    else:
        with open(source, encoding="utf-8", newline="") as handle:
            yield from _read(handle, str(source), schema, child_role, row_errors)


def _read(handle, name, schema, child_role, row_errors) -> Iterator[UtteranceRecord]:
    schema = dict(DEFAULT_SCHEMA if schema is None else schema)
    if "gloss" not in schema:
        raise FormatError("schema must map the gloss column", source=name)
    reader = csv.DictReader(handle)
    if reader.fieldnames is None:
        raise FormatError("empty corpus file", source=name)
    columns = [c for c in reader.fieldnames if c is not None]
    missing = [source_col for source_col in schema.values() if source_col not in columns]
    if missing:
        raise FormatError("missing column(s) " + ", ".join(repr(c) for c in missing), source=name)
    mapped = set(schema.values()) | set(OUTPUT_COLUMNS)

    for row in reader:
        if None in row or any(value is None for value in row.values()):
            if row_errors is not None:
                row_errors.append((reader.line_num, "row does not match header"))
            continue

        def cell(key: str) -> str:
            col = schema.get(key)
            return row[col] if col is not None else ""

        age_text = cell("target_child_age")
        speaker_role = cell("speaker_role")
        record = UtteranceRecord(
            utterance_id=cell("utterance_id"),
            transcript_id=cell("transcript_id"),
            corpus_id=cell("corpus_id"),
            collection_id=cell("collection_id"),
            speaker_role=speaker_role,
            target_child_age=_age_from_cell(age_text),
            age_text=age_text,
            gloss=cell("gloss"),
            phonemized=row.get("phonemized") if "phonemized" in row else None,
            is_child=(
                row["is_child"].strip().lower() in _TRUE_VALUES
                if "is_child" in row
                else speaker_role == child_role
            ),
            error=row.get("errors", ""),
            extra={k: v for k, v in row.items() if k not in mapped},
        )
        yield record


@dataclass
class RunSummary:
    """Associatively mergeable per-run conversion summary."""

    rows: int = 0
    errors: int = 0
    observed: set = field(default_factory=set)
    unmapped: set = field(default_factory=set)

    def merge(self, other: "RunSummary") -> None:
        self.rows += other.rows
        self.errors += other.errors
        self.observed |= other.observed
        self.unmapped |= other.unmapped

    def to_json(self) -> dict:
        return {
            "rows": self.rows,
            "errors": self.errors,
            "observed_segments": sorted(self.observed),
            "unmapped_characters": sorted(self.unmapped),
        }


def _convert_one(
    record: UtteranceRecord,
    backend,
    fold_map: FoldMap | None,
    keep_word_boundaries: bool,
    uncorrected: bool,
):
    try:
        # Streams are built with word boundaries so folding never matches
        # across words; the caller's flag only controls emission.
        stream, unmapped = convert_utterance(backend, record.gloss, keep_word_boundaries=True)
        if not uncorrected and fold_map is not None:
            stream = apply_fold(fold_map, stream)
    except PhonofoldError as exc:
        return replace(record, phonemized="", error=str(exc)), set(), set()
    emitted = emit_stream(stream, keep_word_boundaries=keep_word_boundaries)
    observed = {str(s) for s in segment_types(stream)}
    return replace(record, phonemized=emitted, error=""), observed, unmapped


def convert_corpus(
    records: Iterable[UtteranceRecord],
    backend,
    fold_map: FoldMap | None = None,
    keep_word_boundaries: bool = False,
    uncorrected: bool = False,
    workers: int = 1,
) -> tuple[list[UtteranceRecord], RunSummary]:
    """Convert every record, preserving input order.

    Failed utterances keep their row with the error recorded. The summary
    collects the post-fold observed segment set and unmapped characters,
    independent of worker count.
    """
    if fold_map is None and not uncorrected:
        raise ValueError("fold_map is required unless uncorrected is set")
    records = list(records)
    job = partial(
        _convert_one,
        backend=backend,
        fold_map=None if uncorrected else fold_map,
        keep_word_boundaries=keep_word_boundaries,
        uncorrected=uncorrected,
    )
    summary = RunSummary()
    out: list[UtteranceRecord] = []
    if workers > 1 and len(records) > 1:
        chunksize = max(1, len(records) // (workers * 4))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, records, chunksize=chunksize))
    else:
        results = [job(r) for r in records]
    for converted, observed, unmapped in results:
        out.append(converted)
        summary.rows += 1
        if converted.error:
            summary.errors += 1
        summary.observed |= observed
        summary.unmapped |= unmapped
    return out, summary


def write_corpus(records: Iterable[UtteranceRecord], target, schema: dict | None = None) -> None:
    """Write records as CSV: original columns plus phonemized/is_child/errors."""
    schema = dict(DEFAULT_SCHEMA if schema is None else schema)
    records = list(records)
    extra_columns: list[str] = []
    if records:
        extra_columns = list(records[0].extra)
    header = list(schema.values()) + extra_columns + list(OUTPUT_COLUMNS)

    def rows():
        yield header
        for record in records:
            row = []
            for canonical in schema:
                if canonical == "target_child_age":
                    row.append(record.age_text)
                else:
                    row.append(getattr(record, canonical))
            row.extend(record.extra.get(col, "") for col in extra_columns)
            row.append(record.phonemized if record.phonemized is not None else "")
            row.append(str(record.is_child))
            row.append(record.error)
            yield row

    if hasattr(target, "write"):
        csv.writer(target).writerows(rows())
    else:
        with open(target, "w", encoding="utf-8", newline="") as handle:
            csv.writer(handle).writerows(rows())


def sort_by_age(records: Iterable[UtteranceRecord]) -> list[UtteranceRecord]:
    """Stable global sort by target child age; ageless records sort last."""
    return sorted(
        records, key=lambda r: (r.target_child_age is None, r.target_child_age or 0.0)
    )
