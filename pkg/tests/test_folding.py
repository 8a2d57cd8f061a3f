import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from phonofold.errors import FormatError
from phonofold.folding import (
    DiffReport,
    FoldMap,
    FoldRule,
    RuleKind,
    apply_fold,
    check_fold_map,
    diff_inventory,
    diff_to_json,
    load_fold_map,
    parse_fold_map,
    suggest_mappings,
)
from phonofold.inventory import load_inventories
from phonofold.stream import IpaSegment, emit_stream, parse_stream, segment_types


def fold(text):
    return parse_fold_map(text)


def run(map_text, stream_text):
    return emit_stream(apply_fold(fold(map_text), parse_stream(stream_text)))


class TestParse:
    def test_merge_rule(self):
        rule = fold("d ʒ -> dʒ").rules[0]
        assert rule.lhs == ("d", "ʒ") and rule.rhs == ("dʒ",)
        assert rule.kind is RuleKind.MERGE

    def test_one_to_one_rule(self):
        rule = fold("n -> n̪").rules[0]
        assert rule.kind is RuleKind.ONE_TO_ONE
        assert rule.rhs == ("n̪",)

    def test_split_rule(self):
        rule = fold("aɪʊ -> aɪ ʊ").rules[0]
        assert rule.kind is RuleKind.SPLIT

    def test_delete_rule_both_spellings(self):
        assert fold("x -> ∅").rules[0].kind is RuleKind.DELETE
        assert fold("x ->").rules[0].kind is RuleKind.DELETE

    def test_contextual_rule(self):
        assert fold("U O -> w O").rules[0].kind is RuleKind.CONTEXTUAL

    def test_duplicate_lhs_reports_both_lines(self):
        with pytest.raises(FormatError, match=r"lines 1 and 3"):
            fold("a -> b\n# comment\na -> c\n")

    def test_empty_lhs_rejected(self):
        with pytest.raises(FormatError, match="empty lhs"):
            fold("-> b\n")

    def test_comments_and_order_preserved(self, fixtures):
        fold_map = load_fold_map(fixtures / "french.fold")
        assert [str(r.lhs[0]) for r in fold_map.rules] == ["ɔ", "ɛ", "d", "t"]
        assert fold_map.provenance.endswith("french.fold")


class TestApply:
    def test_serbian_consonant_merge(self):
        assert run("d ʒ -> dʒ", "d ʒ a") == "dʒ a"

    def test_estonian_duplication(self):
        assert run("d d -> dː", "d d a d d") == "dː a dː"

    def test_korean_diacritic_sequences(self):
        assert run("k h -> kʰ\np h -> pʰ", "k h a p h") == "kʰ a pʰ"

    def test_match_never_spans_word_boundary(self):
        out = run("d ʒ -> dʒ", "d WORD_BOUNDARY ʒ")
        assert out == "d WORD_BOUNDARY ʒ"

    def test_match_never_spans_utt_boundary(self):
        assert run("d ʒ -> dʒ", "d UTT_BOUNDARY ʒ") == "d UTT_BOUNDARY ʒ"

    def test_boundaries_untouched(self):
        out = run("a -> b", "a WORD_BOUNDARY a UTT_BOUNDARY a")
        assert out == "b WORD_BOUNDARY b UTT_BOUNDARY b"

    def test_rules_apply_in_file_order(self):
        # first rule consumes the pair before the second can see it
        assert run("d ʒ -> dʒ\nʒ -> z", "d ʒ ʒ") == "dʒ z"

    def test_empty_map_is_identity(self):
        assert run("", "a b c") == "a b c"

    def test_token_count_law_per_kind(self):
        cases = [
            ("n -> m", "n a n", 0, 2),       # one_to_one
            ("d ʒ -> dʒ", "d ʒ a d ʒ", -1, 2),  # merge
            ("aɪʊ -> aɪ ʊ", "aɪʊ b", +1, 1),    # split
            ("q -> ∅", "q a q", -1, 2),         # delete
        ]
        for map_text, stream_text, delta, matches in cases:
            before = parse_stream(stream_text)
            after = apply_fold(fold(map_text), before)
            assert len(after) - len(before) == delta * matches, map_text


class TestCheck:
    def test_feeding_rules_flagged(self):
        diagnostics = check_fold_map(fold("a -> b\nb -> c"))
        assert any("non-confluence" in d for d in diagnostics)

    def test_clean_single_rule(self):
        assert check_fold_map(fold("a -> b")) == []

    def test_lhs_overlap_flagged(self):
        diagnostics = check_fold_map(fold("x y -> z\ny w -> v"))
        assert any("overlap" in d for d in diagnostics)

    def test_lhs_containment_flagged(self):
        diagnostics = check_fold_map(fold("a b c -> x\nb -> y"))
        assert any("overlap" in d for d in diagnostics)

    def test_delete_rules_flagged(self):
        diagnostics = check_fold_map(fold("q -> ∅"))
        assert any("delete" in d for d in diagnostics)

    def test_french_fixture_map_is_clean(self, fixtures):
        assert check_fold_map(load_fold_map(fixtures / "french.fold")) == []


class TestDiff:
    def test_simple_sets(self):
        report = diff_inventory({"a", "b", "c"}, {"a", "b", "d"})
        assert report.unknown == {"c"}
        assert report.unseen == {"d"}

    def test_perfect_alignment(self):
        report = diff_inventory({"a", "b"}, {"a", "b"})
        assert report.unknown == set() and report.unseen == set()

    def test_french_fixture_scenario(self, fixtures):
        (inv,) = load_inventories(fixtures / "french_inventory.csv")
        fold_map = load_fold_map(fixtures / "french.fold")
        observed = set()
        for line in (fixtures / "french_backend_output.txt").read_text("utf-8").splitlines():
            observed |= segment_types(apply_fold(fold_map, parse_stream(line)))
        report = diff_inventory(observed, inv)
        assert report.unknown == {"dʒ", "tʃ"}
        assert report.unseen == {"ɧ"}


class TestSuggest:
    def test_diacritic_pair_suggested(self):
        report = diff_inventory({"t", "a"}, {"tʰ", "a"})
        suggestions = suggest_mappings(report)
        assert suggestions == [("t", "tʰ", "diacritic")]

    def test_different_symbols_not_suggested(self):
        report = diff_inventory({"a", "n"}, {"ɒ", "n"})
        assert suggest_mappings(report) == []

    def test_empty_unknown_set(self):
        report = diff_inventory({"a"}, {"a"})
        assert suggest_mappings(report) == []

    def test_json_shape(self):
        report = diff_inventory({"t"}, {"tʰ"})
        payload = diff_to_json(report, suggest_mappings(report))
        assert payload == {
            "unknown": ["t"],
            "unseen": ["tʰ"],
            "suggestions": [{"unknown": "t", "candidate": "tʰ", "reason": "diacritic"}],
        }


# --- properties ---------------------------------------------------------

TOKEN_POOL = [IpaSegment(t) for t in "abdemnoqstuzʃʒ"]
RHS_POOL = [IpaSegment(t) for t in ["dʒ", "kʰ", "øː", "ɪ", "ʏ", "ŋ"]]


def random_clean_map(rng):
    """Maps whose lhs and rhs vocabularies are disjoint pass checks cleanly."""
    rules = []
    seen = set()
    for _ in range(rng.randint(1, 4)):
        lhs = tuple(rng.sample(TOKEN_POOL, rng.randint(1, 2)))
        if lhs in seen or any(_overlaps(lhs, other) for other in seen):
            continue
        seen.add(lhs)
        rhs = tuple(rng.choice(RHS_POOL) for _ in range(rng.randint(1, 2)))
        rules.append(FoldRule(lhs, rhs))
    return FoldMap(tuple(rules))


def _overlaps(a, b):
    joined = lambda t: "".join(t)
    return joined(a) in joined(b) or joined(b) in joined(a) or set(a) & set(b)


def random_stream(rng):
    tokens = []
    for _ in range(rng.randint(0, 20)):
        tokens.append(rng.choice(TOKEN_POOL))
        if rng.random() < 0.15:
            tokens.append("WORD_BOUNDARY")
    return parse_stream(" ".join(tokens))


def boundary_shape(stream):
    """Boundary tokens with how many segments precede each one."""
    shape, segments_seen = [], 0
    for token in stream:
        if isinstance(token, IpaSegment):
            segments_seen += 1
        else:
            shape.append((token, segments_seen))
    return shape


def test_clean_maps_are_idempotent():
    rng = random.Random(7)
    checked = 0
    while checked < 100:
        fold_map = random_clean_map(rng)
        if not fold_map.rules or check_fold_map(fold_map):
            continue
        checked += 1
        for _ in range(5):
            stream = random_stream(rng)
            once = apply_fold(fold_map, stream)
            assert apply_fold(fold_map, once) == once


def test_boundary_positions_stable_relative_to_survivors():
    # one-to-one maps keep every segment, so each boundary must still sit
    # after the same number of segments as before
    fold_map = fold("a -> ɪ\nb -> ʏ")
    rng = random.Random(13)
    for _ in range(50):
        stream = random_stream(rng)
        folded = apply_fold(fold_map, stream)
        assert boundary_shape(folded) == boundary_shape(stream)


@given(
    st.sets(st.sampled_from("abcdefgh"), max_size=6),
    st.sets(st.sampled_from("abcdefgh"), max_size=6),
)
def test_diff_report_invariants(observed, reference):
    report = diff_inventory(observed, reference)
    assert report.unknown.isdisjoint(report.unseen)
    assert report.unknown <= report.observed
    assert report.unseen <= report.reference
    assert report.observed - report.unknown == report.reference - report.unseen
