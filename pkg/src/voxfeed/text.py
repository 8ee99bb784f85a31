"""Word-level text utilities used by both feed parsing and dialog building."""

from __future__ import annotations

import re

# Pinned so grammars and shortcut indexes are reproducible across runs.
STOPWORDS = frozenset({
    "a", "an", "the", "and", "or", "of", "to", "in", "on", "at",
    "for", "is", "are", "with", "by",
})

# Maximal runs of letters/digits; hyphen, apostrophe and underscore all separate.
_WORD_RE = re.compile(r"[^\W_]+", re.UNICODE)

_NUMBER_WORDS = (
    "one", "two", "three", "four", "five", "six", "seven", "eight", "nine",
    "ten", "eleven", "twelve", "thirteen", "fourteen", "fifteen", "sixteen",
    "seventeen", "eighteen", "nineteen", "twenty",
)


def tokenize(text: str) -> list[str]:
    """Lowercased words of ``text``, order and duplicates preserved."""
    return _WORD_RE.findall(text.lower())


def split_words(text: str) -> list[str]:
    """Like :func:`tokenize` but with the original casing kept."""
    return _WORD_RE.findall(text)


def is_stopword(word: str) -> bool:
    return word.lower() in STOPWORDS


def number_word(n: int) -> str:
    """Spoken form of a positive integer: 'one'..'twenty', then digits."""
    if n < 1:
        raise ValueError(f"number_word expects a positive integer, got {n}")
    if n <= len(_NUMBER_WORDS):
        return _NUMBER_WORDS[n - 1]
    return str(n)
