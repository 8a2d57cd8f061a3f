"""Grapheme-to-phoneme conversion and validation toolkit.

Converts orthographic corpora to a whitespace-delimited IPA phoneme-stream
representation, folds backend output onto reference phoneme inventories,
reports inventory discrepancies, and computes corpus-level phonological
statistics.
"""

from .analysis import (
    InfoCurvePoint,
    LabeledVectorSet,
    UnigramModel,
    VennReport,
    binomial_test,
    build_unigram,
    compare_inventories,
    eligible_features,
    frequency_table,
    info_by_age,
    silhouette,
    utterance_information,
)
from .corpus import (
    RunSummary,
    UtteranceRecord,
    convert_corpus,
    parse_age,
    read_corpus,
    write_corpus,
)
from .errors import PhonofoldError
from .folding import (
    DiffReport,
    FoldMap,
    FoldRule,
    apply_fold,
    check_fold_map,
    diff_inventory,
    load_fold_map,
    parse_fold_map,
    suggest_mappings,
)
from .g2p import (
    GraphemeMap,
    Lexicon,
    LexiconBackend,
    PassthroughBackend,
    RewriteRule,
    RuleSet,
    RulesBackend,
    SyllabaryBackend,
    SyllableTable,
    convert_lexicon,
    convert_rules,
    convert_utterance,
    load_lexicon,
    load_rule_file,
    load_syllable_table,
    merge_tones,
    syllabify,
    syllable_to_ipa,
)
from .inventory import (
    CountProfile,
    Inventory,
    InventorySegment,
    TernaryValue,
    best_match,
    count_profile,
    feature_of,
    is_diphthong,
    load_inventories,
)
from .stream import (
    UTT_BOUNDARY,
    WORD_BOUNDARY,
    Boundary,
    IpaSegment,
    PhonemeStream,
    emit_stream,
    parse_stream,
    segment_types,
)

__version__ = "0.1.0"
