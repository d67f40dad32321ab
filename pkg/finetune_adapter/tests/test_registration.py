from __future__ import annotations

import pytest

from finetune_adapter import (
    RegistrationError,
    max_major_for_length,
    register_tokens,
    rendered_inventory,
    train_byte_level_tokenizer,
)

LINES = ["the quick brown fox jumps over the lazy dog."] * 40


def fresh_tokenizer():
    return train_byte_level_tokenizer(LINES, vocab_size=300)


class TestInventory:
    def test_max_major_from_corpus_max_length(self):
        assert max_major_for_length(126, 20) == 6

    def test_inventory_covers_all_pairs(self):
        inventory = rendered_inventory(delta=20, max_major=6)
        assert len(inventory) == 7 * 20  # one rendered form per (major, minor) pair
        compact = [t for t in inventory if t.count(":") == 2]
        full = [t for t in inventory if t.count(":") == 3]
        assert len(compact) == 7 and len(full) == 7 * 19
        assert "<|len:w:6|>" in compact and "<|len:w:6:19|>" in full

    def test_inventory_respects_unit_code(self):
        assert rendered_inventory(2, 1, unit_code="s") == [
            "<|len:s:0|>", "<|len:s:0:1|>", "<|len:s:1|>", "<|len:s:1:1|>",
        ]


class TestRegistration:
    def test_every_token_registers_atomically(self):
        tok = fresh_tokenizer()
        registration = register_tokens(tok, delta=20, max_major=6)
        assert len(registration.ids) == 140
        assert len(set(registration.ids)) == 140
        for rendered, token_id in registration.id_by_token.items():
            assert tok.encode(rendered).ids == [token_id]
            assert tok.decode([token_id], skip_special_tokens=False) == rendered

    def test_atomic_when_glued_to_text(self):
        tok = fresh_tokenizer()
        registration = register_tokens(tok, delta=10, max_major=3)
        ids = tok.encode("<|len:w:2:5|>the quick fox<|len:w:0|>").ids
        assert ids[0] == registration.id_by_token["<|len:w:2:5|>"]
        assert ids[-1] == registration.id_by_token["<|len:w:0|>"]

    def test_reregistration_is_idempotent(self):
        tok = fresh_tokenizer()
        first = register_tokens(tok, delta=20, max_major=4)
        vocab_after_first = tok.get_vocab_size()
        second = register_tokens(tok, delta=20, max_major=4)
        assert second.ids == first.ids
        assert tok.get_vocab_size() == vocab_after_first

    def test_collision_with_ordinary_vocab_is_an_error(self):
        tok = fresh_tokenizer()
        tok.add_tokens(["<|len:w:0|>"])  # ordinary, non-special vocabulary entry
        with pytest.raises(RegistrationError):
            register_tokens(tok, delta=10, max_major=1)

    def test_embedding_init_policy_recorded(self):
        tok = fresh_tokenizer()
        registration = register_tokens(tok, delta=10, max_major=1)
        assert registration.embedding_init == "mean-of-existing"
