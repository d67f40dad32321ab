"""ROUGE-1/2/L with an explicit, auditable preprocessing rule.

Preprocessing: lowercase, split on non-alphanumeric characters, drop empties.
No stemming by default; pass ``stemmer=porter_stem`` (or any str -> str
callable) to enable it.  Scores are F1 with precision/recall reported
alongside; n-gram overlap uses clipped counts and ROUGE-L uses the longest
common subsequence.

The exact tokenization of other ROUGE implementations may differ slightly;
this module trades drop-in compatibility for a rule that can be audited and
re-implemented from this docstring alone.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Sequence

_TOKEN_SPLIT_RE = re.compile(r"[^0-9a-z]+")

VARIANTS = ("r1", "r2", "rL")


@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f1: float
    reference_empty: bool = False


def tokenize(text: str, stemmer: Callable[[str], str] | None = None) -> list[str]:
    tokens = [t for t in _TOKEN_SPLIT_RE.split(text.lower()) if t]
    if stemmer is not None:
        tokens = [stemmer(t) for t in tokens]
    return tokens


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    """Longest common subsequence length, O(len(a) * len(b))."""
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            if x == y:
                cur.append(prev[j - 1] + 1)
            else:
                cur.append(max(prev[j], cur[j - 1]))
        prev = cur
    return prev[len(b)]


def rouge_n(candidate: Sequence[str], reference: Sequence[str], n: int) -> RougeScore:
    cand = _ngrams(candidate, n)
    ref = _ngrams(reference, n)
    overlap = sum((cand & ref).values())
    precision = overlap / sum(cand.values()) if cand else 0.0
    recall = overlap / sum(ref.values()) if ref else 0.0
    return RougeScore(precision=precision, recall=recall, f1=_f1(precision, recall))


def rouge_l(candidate: Sequence[str], reference: Sequence[str]) -> RougeScore:
    lcs = lcs_length(candidate, reference)
    precision = lcs / len(candidate) if candidate else 0.0
    recall = lcs / len(reference) if reference else 0.0
    return RougeScore(precision=precision, recall=recall, f1=_f1(precision, recall))


def rouge(
    candidate: str,
    reference: str,
    variant: str,
    *,
    stemmer: Callable[[str], str] | None = None,
) -> RougeScore:
    """Score a candidate against a reference; variant is r1, r2, or rL.

    An empty reference yields zero scores with ``reference_empty`` set rather
    than an error, so corpus-level loops can keep going.
    """
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    cand = tokenize(candidate, stemmer)
    ref = tokenize(reference, stemmer)
    if not ref:
        return RougeScore(precision=0.0, recall=0.0, f1=0.0, reference_empty=True)
    if variant == "r1":
        return rouge_n(cand, ref, 1)
    if variant == "r2":
        return rouge_n(cand, ref, 2)
    return rouge_l(cand, ref)


# --------------------------------------------------------------------------
# Porter stemmer (classic algorithm), for the optional stemming toggle.
# --------------------------------------------------------------------------

_VOWELS = "aeiou"


def _is_consonant(word: str, i: int) -> bool:
    ch = word[i]
    if ch in _VOWELS:
        return False
    if ch == "y":
        return i == 0 or not _is_consonant(word, i - 1)
    return True


def _measure(stem: str) -> int:
    """Number of vowel-consonant sequences in [C](VC)^m[V]."""
    m = 0
    prev_vowel = False
    for i in range(len(stem)):
        if _is_consonant(stem, i):
            if prev_vowel:
                m += 1
            prev_vowel = False
        else:
            prev_vowel = True
    return m


def _has_vowel(stem: str) -> bool:
    return any(not _is_consonant(stem, i) for i in range(len(stem)))


def _ends_double_consonant(word: str) -> bool:
    return (
        len(word) >= 2
        and word[-1] == word[-2]
        and _is_consonant(word, len(word) - 1)
    )


def _ends_cvc(word: str) -> bool:
    if len(word) < 3:
        return False
    if not (
        _is_consonant(word, len(word) - 3)
        and not _is_consonant(word, len(word) - 2)
        and _is_consonant(word, len(word) - 1)
    ):
        return False
    return word[-1] not in "wxy"


def _replace_suffix(word: str, rules: list[tuple[str, str]], min_measure: int) -> str:
    for suffix, repl in rules:
        if word.endswith(suffix):
            stem = word[: len(word) - len(suffix)]
            if _measure(stem) > min_measure:
                return stem + repl
            return word
    return word


def porter_stem(word: str) -> str:
    """Stem a lowercase word with the classic Porter algorithm."""
    if len(word) <= 2:
        return word
    w = word

    # Step 1a
    if w.endswith("sses"):
        w = w[:-2]
    elif w.endswith("ies"):
        w = w[:-2]
    elif not w.endswith("ss") and w.endswith("s"):
        w = w[:-1]

    # Step 1b
    flag_1b = False
    if w.endswith("eed"):
        if _measure(w[:-3]) > 0:
            w = w[:-1]
    elif w.endswith("ed") and _has_vowel(w[:-2]):
        w = w[:-2]
        flag_1b = True
    elif w.endswith("ing") and _has_vowel(w[:-3]):
        w = w[:-3]
        flag_1b = True
    if flag_1b:
        if w.endswith(("at", "bl", "iz")):
            w += "e"
        elif _ends_double_consonant(w) and not w.endswith(("l", "s", "z")):
            w = w[:-1]
        elif _measure(w) == 1 and _ends_cvc(w):
            w += "e"

    # Step 1c
    if w.endswith("y") and _has_vowel(w[:-1]):
        w = w[:-1] + "i"

    # Step 2
    w = _replace_suffix(
        w,
        [
            ("ational", "ate"), ("tional", "tion"), ("enci", "ence"), ("anci", "ance"),
            ("izer", "ize"), ("abli", "able"), ("alli", "al"), ("entli", "ent"),
            ("eli", "e"), ("ousli", "ous"), ("ization", "ize"), ("ation", "ate"),
            ("ator", "ate"), ("alism", "al"), ("iveness", "ive"), ("fulness", "ful"),
            ("ousness", "ous"), ("aliti", "al"), ("iviti", "ive"), ("biliti", "ble"),
        ],
        0,
    )

    # Step 3
    w = _replace_suffix(
        w,
        [
            ("icate", "ic"), ("ative", ""), ("alize", "al"), ("iciti", "ic"),
            ("ical", "ic"), ("ful", ""), ("ness", ""),
        ],
        0,
    )

    # Step 4
    for suffix in (
        "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement",
        "ment", "ent", "ion", "ou", "ism", "ate", "iti", "ous", "ive", "ize",
    ):
        if w.endswith(suffix):
            stem = w[: len(w) - len(suffix)]
            if suffix == "ion" and not stem.endswith(("s", "t")):
                continue
            if _measure(stem) > 1:
                w = stem
            break

    # Step 5a
    if w.endswith("e"):
        stem = w[:-1]
        m = _measure(stem)
        if m > 1 or (m == 1 and not _ends_cvc(stem)):
            w = stem

    # Step 5b
    if _measure(w) > 1 and _ends_double_consonant(w) and w.endswith("l"):
        w = w[:-1]

    return w
