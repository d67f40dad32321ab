"""Bridge from length-trail augmented JSONL to a finetuning ecosystem.

Consumes the augmentation toolkit's file formats (never its code): registers
the rendered length tokens as atomic tokenizer vocabulary, materializes
label-masked training sequences honoring each record's mask anchor, and
converts model generations back into evaluation-harness input.
"""

from .collect import collect_generations, collect_record
from .errors import AdapterError, CorruptRecordError, RecordError, RegistrationError
from .masking import (
    IGNORE_INDEX,
    MaskedSequence,
    mask_record,
    materialize_masks,
    training_text,
)
from .registration import (
    TokenRegistration,
    max_major_for_length,
    register_tokens,
    rendered_inventory,
)
from .tokenizer_io import (
    corpus_text_lines,
    load_tokenizer,
    save_tokenizer,
    train_byte_level_tokenizer,
)
from .wire import UNIT_CODES, TokenMatch, WireFormat

__version__ = "0.1.0"
