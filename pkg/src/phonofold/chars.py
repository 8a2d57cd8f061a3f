"""Character-level classification helpers for IPA text.

Segment classes are inferred from base glyphs: a token made only of tone
glyphs is a tone, a token containing at least one vowel-quality glyph is a
vowel, anything else is a consonant.
"""

from __future__ import annotations

import unicodedata

# IPA vowel-quality letters (chart vowels plus r-colored and barred extras).
VOWEL_GLYPHS = frozenset("iyɨʉɯuɪʏʊeøɘɵɤoəɚɝɛœɜɞʌɔæɐaɶɑɒᵻᵿ")

# Chao tone letters, up/downstep, rise/fall arrows, superscript tone digits.
TONE_GLYPHS = frozenset("˥˦˧˨˩ꜛꜜ↗↘⁰¹²³⁴⁵⁶⁷⁸⁹")

# Combining marks that flag a syllabic consonant (vertical line below/above).
SYLLABIC_MARKS = frozenset("̩̍")

# Categories removed when reducing a segment to its bare base form:
# nonspacing marks, modifier letters (ʰ ː), modifier symbols (tone bars).
_MARK_CATEGORIES = ("Mn", "Lm", "Sk")


def count_vowel_glyphs(text: str) -> int:
    return sum(1 for ch in text if ch in VOWEL_GLYPHS)


def is_tone_only(text: str) -> bool:
    return bool(text) and all(ch in TONE_GLYPHS for ch in text)


def classify_segment(text: str) -> str:
    """Infer 'tone', 'vowel' or 'consonant' for a bare segment string."""
    if is_tone_only(text):
        return "tone"
    if count_vowel_glyphs(text) > 0:
        return "vowel"
    return "consonant"


def strip_marks(text: str) -> str:
    """Drop diacritics, modifier letters and tone bars, keeping base glyphs."""
    decomposed = unicodedata.normalize("NFD", text)
    return "".join(ch for ch in decomposed if unicodedata.category(ch) not in _MARK_CATEGORIES)


def is_syllabic_marked(text: str) -> bool:
    return any(ch in SYLLABIC_MARKS for ch in text)


def is_punctuation_word(word: str) -> bool:
    """True when every character of the word is Unicode punctuation."""
    return bool(word) and all(unicodedata.category(ch).startswith("P") for ch in word)
