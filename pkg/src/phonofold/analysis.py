"""Corpus and inventory analytics.

Phoneme frequencies and unigram utterance information, age-bucketed
information curves, inventory comparison, distinctive-feature eligibility,
an exact one-sided binomial test, and silhouette scores for labeled
embedding sets.
"""

from __future__ import annotations

import csv
import math
import random
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import UnseenSymbolError
from .inventory import Inventory, TernaryValue
from .stream import IpaSegment, PhonemeStream, parse_stream

UNKNOWN_SYMBOL = "<unk>"

SMOOTHING_MODES = ("none", "add_one")


def frequency_table(streams: Iterable[PhonemeStream]) -> Counter:
    """Exact segment token counts over streams, boundaries excluded."""
    counts: Counter = Counter()
    for stream in streams:
        counts.update(t for t in stream if isinstance(t, IpaSegment))
    return counts


@dataclass(frozen=True)
class UnigramModel:
    probabilities: dict
    total_tokens: int
    smoothing: str = "none"

    def probability(self, segment) -> float:
        p = self.probabilities.get(segment)
        if p is None:
            if self.smoothing == "add_one":
                return self.probabilities[UNKNOWN_SYMBOL]
            raise UnseenSymbolError(str(segment))
        return p


def build_unigram(streams: Iterable[PhonemeStream], smoothing: str = "none") -> UnigramModel:
    """Maximum-likelihood unigram frequencies over segment tokens.

    add_one smoothing reserves one count of mass for the designated unknown
    symbol, so unseen segments keep non-zero probability.
    """
    if smoothing not in SMOOTHING_MODES:
        raise ValueError(f"smoothing must be one of {SMOOTHING_MODES}")
    counts = frequency_table(streams)
    total = sum(counts.values())
    if total == 0:
        raise ValueError("no segment tokens to model")
    if smoothing == "add_one":
        denom = total + len(counts) + 1
        probabilities = {seg: (c + 1) / denom for seg, c in counts.items()}
        probabilities[UNKNOWN_SYMBOL] = 1 / denom
    else:
        probabilities = {seg: c / total for seg, c in counts.items()}
    return UnigramModel(probabilities, total, smoothing)


def utterance_information(model: UnigramModel, stream: PhonemeStream) -> float:
    """Total information in bits: the sum of -log2 P over segment tokens."""
    bits = 0.0
    for token in stream:
        if isinstance(token, IpaSegment):
            bits -= math.log2(model.probability(token))
    return bits


@dataclass(frozen=True)
class InfoCurvePoint:
    """Mean utterance information for one year-of-age bucket.

    Bucket k covers ages [12k, 12k + 12) months.
    """

    age_bucket: int
    mean_information: float
    n_utterances: int


def info_by_age(
    records,
    pooled: bool = True,
    sample_size: int | None = None,
    seed: int | None = None,
) -> list[InfoCurvePoint]:
    """Mean unigram utterance information per year-of-age bucket.

    Records need an age and a phonemized stream with at least one segment;
    others are skipped, and empty buckets are omitted. ``pooled`` estimates
    probabilities from all (sampled) data, otherwise per bucket. Sampling is
    per bucket and only happens when ``sample_size`` is given.
    """
    buckets: dict[int, list[PhonemeStream]] = {}
    for record in records:
        age = getattr(record, "target_child_age", None)
        phonemized = getattr(record, "phonemized", None)
        if age is None or not phonemized:
            continue
        stream = parse_stream(phonemized)
        if not any(isinstance(t, IpaSegment) for t in stream):
            continue
        buckets.setdefault(int(age // 12), []).append(stream)

    if sample_size is not None:
        rng = random.Random(seed)
        for bucket, streams in sorted(buckets.items()):
            if len(streams) > sample_size:
                buckets[bucket] = rng.sample(streams, sample_size)

    if not buckets:
        return []

    pooled_model = None
    if pooled:
        pooled_model = build_unigram(s for streams in buckets.values() for s in streams)

    points = []
    for bucket, streams in sorted(buckets.items()):
        model = pooled_model if pooled else build_unigram(streams)
        mean = sum(utterance_information(model, s) for s in streams) / len(streams)
        points.append(InfoCurvePoint(bucket, mean, len(streams)))
    return points


@dataclass(frozen=True)
class VennReport:
    only_a: frozenset
    both: frozenset
    only_b: frozenset

    @property
    def counts(self) -> tuple[int, int, int]:
        return (len(self.only_a), len(self.both), len(self.only_b))


def compare_inventories(a: Iterable, b: Iterable) -> VennReport:
    """Exact three-way partition of two segment sets."""
    set_a = frozenset(IpaSegment(s) for s in a)
    set_b = frozenset(IpaSegment(s) for s in b)
    return VennReport(only_a=set_a - set_b, both=set_a & set_b, only_b=set_b - set_a)


def eligible_features(inventory: Inventory, min_each: int = 4) -> list[str]:
    """Features with at least ``min_each`` plus and ``min_each`` minus segments.

    Unspecified values count toward neither side.
    """
    plus: Counter = Counter()
    minus: Counter = Counter()
    names: set[str] = set()
    for seg in inventory.segments:
        for feature, value in seg.features.items():
            names.add(feature)
            if value is TernaryValue.PLUS:
                plus[feature] += 1
            elif value is TernaryValue.MINUS:
                minus[feature] += 1
    return sorted(f for f in names if plus[f] >= min_each and minus[f] >= min_each)


def binomial_test(successes: int, trials: int, p0: float = 0.5) -> float:
    """One-sided upper-tail exact binomial p-value, computed in log space.

    p = sum over i in [successes, trials] of C(trials, i) p0^i (1-p0)^(n-i);
    log-space accumulation keeps the tail accurate for trials up to 10^4.
    """
    if not (isinstance(successes, int) and isinstance(trials, int)):
        raise ValueError("successes and trials must be integers")
    if trials < 1 or not 0 <= successes <= trials:
        raise ValueError(f"need 0 <= successes <= trials, trials >= 1; got {successes}/{trials}")
    if not 0.0 < p0 < 1.0:
        raise ValueError("p0 must lie strictly between 0 and 1")
    if successes == 0:
        return 1.0
    log_p, log_q = math.log(p0), math.log1p(-p0)
    log_n_fact = math.lgamma(trials + 1)
    terms = [
        log_n_fact
        - math.lgamma(i + 1)
        - math.lgamma(trials - i + 1)
        + i * log_p
        + (trials - i) * log_q
        for i in range(successes, trials + 1)
    ]
    peak = max(terms)
    total = peak + math.log(sum(math.exp(t - peak) for t in terms))
    return min(1.0, math.exp(total))


@dataclass(frozen=True)
class LabeledVectorSet:
    """Uniform-dimension real vectors with parallel cluster labels."""

    vectors: np.ndarray
    labels: tuple

    def __post_init__(self):
        vectors = np.asarray(self.vectors, dtype=float)
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "labels", tuple(self.labels))
        if vectors.ndim != 2:
            raise ValueError("vectors must form an (n, d) matrix")
        if len(self.labels) != vectors.shape[0]:
            raise ValueError("labels and vectors must have equal length")


def load_labeled_vectors(source, label_column: str = "label") -> LabeledVectorSet:
    """Read a LabeledVectorSet from CSV: one label column, the rest numeric."""
    if hasattr(source, "read"):
        rows = list(csv.DictReader(source))
    else:
        with open(source, encoding="utf-8", newline="") as handle:
            rows = list(csv.DictReader(handle))
    if not rows:
        raise ValueError("no vector rows")
    numeric = [c for c in rows[0] if c != label_column]
    labels = tuple(row[label_column] for row in rows)
    vectors = np.array([[float(row[c]) for c in numeric] for row in rows])
    return LabeledVectorSet(vectors, labels)


def silhouette(data: LabeledVectorSet, metric: str = "euclidean") -> float:
    """Mean silhouette score over all points, Euclidean distance.

    Per point, s = (b - a) / max(a, b) where a is the mean distance to the
    point's own cluster (excluding itself) and b the smallest mean distance
    to any other cluster; singleton-cluster points and a = b = 0 score 0.
    """
    if metric != "euclidean":
        raise ValueError("only the euclidean metric is supported")
    vectors = data.vectors
    labels = np.asarray(data.labels, dtype=object)
    unique = sorted(set(data.labels), key=str)
    if len(unique) < 2:
        raise ValueError("silhouette needs at least two distinct labels")

    diff = vectors[:, None, :] - vectors[None, :, :]
    distances = np.sqrt((diff * diff).sum(axis=-1))
    n = vectors.shape[0]

    masks = {label: labels == label for label in unique}
    sizes = {label: int(mask.sum()) for label, mask in masks.items()}
    cluster_sums = {label: distances[:, mask].sum(axis=1) for label, mask in masks.items()}

    scores = np.zeros(n)
    for i in range(n):
        own = data.labels[i]
        if sizes[own] == 1:
            continue  # singleton convention: score 0
        a = cluster_sums[own][i] / (sizes[own] - 1)
        b = min(cluster_sums[other][i] / sizes[other] for other in unique if other != own)
        denom = max(a, b)
        scores[i] = 0.0 if denom == 0.0 else (b - a) / denom
    return float(scores.mean())


def curve_rows(points: Sequence[InfoCurvePoint]) -> list[list]:
    """Plot-ready rows for the information curve CSV."""
    rows: list[list] = [["age_bucket", "mean_information", "n_utterances"]]
    for point in points:
        rows.append([point.age_bucket, repr(point.mean_information), point.n_utterances])
    return rows
