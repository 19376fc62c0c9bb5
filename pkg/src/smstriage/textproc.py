"""Text normalization and n-gram extraction for short messages.

Messages are lowercased, punctuation is stripped, and tokens are the
remaining whitespace-delimited runs of alphanumerics. Features are the
unigrams plus adjacent-pair bigrams of that token stream. No stemming or
spell correction: abbreviations like "frm" are kept as-is because they
carry signal of their own in SMS text.
"""

import re

# Anything that is not a word character, plus underscore, counts as
# punctuation. Underscore is excluded from tokens because it is the join
# character for bigram display text.
_PUNCT = re.compile(r"[^\w\s]|_")

Ngram = tuple[str, ...]


def normalize(text: str) -> str:
    """Lowercase, replace punctuation with spaces, collapse whitespace."""
    cleaned = _PUNCT.sub(" ", text.lower())
    return " ".join(cleaned.split())


def tokenize(normalized: str) -> list[str]:
    return normalized.split()


def extract_ngrams(normalized: str) -> list[Ngram]:
    """All unigrams followed by all adjacent bigrams, in order of appearance.

    Returns a list (multiset semantics: repeats are kept).
    """
    tokens = normalized.split()
    grams: list[Ngram] = [(t,) for t in tokens]
    grams.extend((a, b) for a, b in zip(tokens, tokens[1:]))
    return grams


def ngram_text(gram: Ngram) -> str:
    """Display text of a feature; bigram terms joined by one underscore."""
    return "_".join(gram)
