"""Length-control dataset augmentation and evaluation toolkit.

The package turns a plain (source, reference) corpus into training records
that teach a generator to hit a requested output length, by splicing
remaining-length special tokens into the reference at fixed strides.  It also
ships the matching protocol validator, an evaluation harness (length MAE,
ROUGE, infinite-generation accounting, extrapolation and hyperparameter
sweeps), desk-scale generators that exercise the whole pipeline without GPU
training, and an LLM-judge client for quality scoring.
"""

from .augment import (
    AugmentedExample,
    MaskDirective,
    MixManifest,
    assign_residuals,
    augment_gretel,
    augment_hansel,
    augment_multi_unit,
    augment_vanilla,
    augmented_from_record,
    build_inference_context,
    compose_mix,
    compose_single,
    mix_counts,
    read_augmented,
    task_prompt,
)
from .config import (
    FRAMEWORK_GRETEL,
    FRAMEWORK_HANSEL,
    FRAMEWORK_VANILLA,
    FRAMEWORK_VANILLA_STAR,
    FRAMEWORKS,
    HanselConfig,
    load_config,
)
from .corpus import Example, read_corpus, write_jsonl
from .errors import (
    BoundaryError,
    ConfigError,
    CorpusError,
    EmptyReferenceError,
    HanselError,
    JudgeUnavailableError,
    MalformedTokenError,
    NoDataError,
    ProtocolError,
    ScoreParseError,
    TokenParseError,
)
from .evaluation import (
    CorpusStats,
    EvalRecord,
    EvalReport,
    GridCell,
    TargetSweepRow,
    corpus_stats,
    detect_infinite,
    evaluate,
    mae,
    read_generations,
    sweep_hyperparams,
    sweep_targets,
)
from .experiments import PairedRun, paired_extrapolation, paired_extrapolation_suite
from .judge import CATEGORIES, JudgeClient, JudgeConfig, QualityScore, judge
from .ngram import MODE_FREE, MODE_PROTOCOL, NgramModel, generate, make_ngram_generator, train_ngram
from .protocol import AutomatonVerdict, Violation, opening_token, placement_positions, validate
from .rouge import RougeScore, porter_stem, rouge
from .rule_follower import (
    RESIDUAL_FINISH_SENTENCE,
    RESIDUAL_STOP_AT_ZERO,
    RuleFollowerConfig,
    make_grid_cell_runner,
    rule_follow,
)
from .synthetic import TEMPLATES, make_corpus, write_dialog_fixture
from .tokens import (
    ParsedStream,
    PlacedToken,
    SpecialToken,
    TokenRendering,
    parse_stream,
    parse_token,
    strip_tokens,
    token_for_remaining,
)
from .units import (
    LengthUnit,
    Segmentation,
    count,
    insert_at_unit_boundary,
    segment,
)

__version__ = "0.1.0"
