"""apesynth: synthetic post-editing corpus construction.

Turns parallel bitexts into synthetic post-editing triplets whose error
quantity and error types track the statistics of a gold corpus: word-level
edit alignment, gold statistics extraction, masked-LM data construction,
stochastic reference masking, pluggable mask fillers, corpus interleaving,
and TER/BLEU evaluation.
"""

from .align import Alignment, EditOp, OpKind, TerResult, edit_rate, levenshtein_align, ter_align
from .corpus import (
    MASK_TOKEN,
    Bitext,
    MaskedRecord,
    MlmTrainRecord,
    TokenSeq,
    Triplet,
    read_corpus,
    write_corpus,
)
from .errors import (
    ApeSynthError,
    CorpusFormatError,
    FillerProtocolError,
    FillerTrainingError,
    RecordError,
    StatsError,
)
from .filler import (
    ExternalFiller,
    FillerModel,
    NativeFiller,
    fill,
    synthesize_triplets,
    train_native_filler,
)
from .interleave import InterleaveConfig, InterleaveReport, interleave
from .masker import TokenVocab, mask_corpus, mask_reference, rand_corpus, rand_noise
from .metrics import corpus_bleu, corpus_ter, distribution_report
from .mlm_data import build_mlm_corpus, build_mlm_record
from .seeding import record_rng, stage_seed
from .stats import (
    EditRateDist,
    ErrorTypeDist,
    collect_edit_rate_dist,
    collect_error_type_dist,
    collect_statistics,
    load_stats,
    sample_edit_rate,
    save_stats,
)

__version__ = "0.1.0"
