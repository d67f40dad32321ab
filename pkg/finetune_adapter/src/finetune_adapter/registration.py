"""Registering rendered length tokens as atomic tokenizer vocabulary.

Every token the protocol can produce for a stride and a corpus-derived
maximum major counter is added as a special (never split, always extracted)
vocabulary item: compact forms for each major, full forms for each non-zero
minor below the stride.  Registration is idempotent; a rendered string that
already exists as ordinary (non-special) vocabulary is a collision and an
explicit error, because encoding would then be ambiguous between text and
protocol.
"""

from __future__ import annotations

from dataclasses import dataclass

from tokenizers import AddedToken, Tokenizer

from .errors import RegistrationError
from .wire import WireFormat

EMBEDDING_INIT_MEAN = "mean-of-existing"


@dataclass(frozen=True)
class TokenRegistration:
    tokens: tuple[str, ...]
    ids: tuple[int, ...]
    embedding_init: str = EMBEDDING_INIT_MEAN

    @property
    def id_by_token(self) -> dict[str, int]:
        return dict(zip(self.tokens, self.ids))

    def to_dict(self) -> dict:
        return {
            "tokens": list(self.tokens),
            "ids": list(self.ids),
            "embedding_init": self.embedding_init,
        }


def max_major_for_length(max_length: int, delta: int) -> int:
    """Largest major counter an opening token can carry for a corpus whose
    longest reference has ``max_length`` units."""
    if delta < 1:
        raise RegistrationError(f"stride must be >= 1, got {delta}")
    if max_length < 0:
        raise RegistrationError(f"max length must be >= 0, got {max_length}")
    return max_length // delta


def rendered_inventory(
    delta: int, max_major: int, unit_code: str = "w", wire: WireFormat | None = None
) -> list[str]:
    """All rendered forms for majors 0..max_major and minors below the stride:
    one compact form per major plus the full forms with non-zero minors."""
    wire = wire or WireFormat()
    out: list[str] = []
    for major in range(max_major + 1):
        out.append(wire.render(unit_code, major, 0))
        for minor in range(1, delta):
            out.append(wire.render(unit_code, major, minor))
    return out


def register_tokens(
    tokenizer: Tokenizer,
    delta: int,
    max_major: int,
    unit_code: str = "w",
    wire: WireFormat | None = None,
) -> TokenRegistration:
    """Add the full token inventory to a tokenizer as atomic specials.

    Returns the rendered strings and their ids.  Re-registration returns the
    same ids; a rendered string already present as ordinary vocabulary raises
    RegistrationError.  New embeddings should be initialized to the mean of
    the existing embedding matrix (recorded in the registration, applied by
    the training loop).
    """
    inventory = rendered_inventory(delta, max_major, unit_code, wire)
    added_special = {
        idx for idx, token in tokenizer.get_added_tokens_decoder().items() if token.special
    }
    to_add: list[AddedToken] = []
    for rendered in inventory:
        existing = tokenizer.token_to_id(rendered)
        if existing is None:
            to_add.append(AddedToken(rendered, special=True))
        elif existing not in added_special:
            raise RegistrationError(
                f"rendered token {rendered!r} collides with existing vocabulary id {existing}"
            )
    if to_add:
        tokenizer.add_special_tokens(to_add)

    ids = []
    for rendered in inventory:
        token_id = tokenizer.token_to_id(rendered)
        encoded = tokenizer.encode(rendered).ids
        if token_id is None or encoded != [token_id]:
            raise RegistrationError(
                f"rendered token {rendered!r} did not register atomically (ids {encoded})"
            )
        ids.append(token_id)
    return TokenRegistration(tokens=tuple(inventory), ids=tuple(ids))
