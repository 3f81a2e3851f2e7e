"""Shared text normalization and tokenization.

Every score in this package depends on how strings are split and
normalized, so the rules live in one place:

* ``tokenize`` — lowercase, separate punctuation from adjacent word
  characters, split on whitespace.  Used by BLEU, ROUGE, and the
  per-dialogue aspect statistics.
* ``normalize_value`` — canonical form for slot values and labels:
  lowercase, collapsed whitespace, surrounding punctuation stripped.
  Exact-match metrics (joint goal accuracy, intent accuracy) compare
  this form.
* ``normalize_token`` — canonical form for domain and slot names.

The characters ``[``, ``]`` and ``,`` delimit the flat belief-state
rendering, so ``normalize_value`` and ``normalize_token`` remove them;
otherwise a stored value could collide with the rendering syntax and
the render/parse round trip would not be invertible.
"""

from __future__ import annotations

import re

_PUNCT_RE = re.compile(r"([^\w\s])")
_WS_RE = re.compile(r"\s+")
_RESERVED_RE = re.compile(r"[\[\],]")

# Characters stripped from the ends of a value; identical to
# string.punctuation but kept literal so the rule is visible here.
_EDGE_PUNCT = "!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~"


def tokenize(text: str) -> list[str]:
    """Split ``text`` into lowercase tokens, punctuation separated.

    >>> tokenize("I want Italian food, please.")
    ['i', 'want', 'italian', 'food', ',', 'please', '.']
    """
    lowered = _PUNCT_RE.sub(r" \1 ", text.lower())
    return lowered.split()


def normalize_value(value: str) -> str:
    """Normalize a slot value: lowercase, single spaces, trimmed edges.

    Reserved rendering delimiters are dropped entirely.  Returns the
    empty string when nothing survives, which callers treat as an
    invalid value.
    """
    cleaned = _RESERVED_RE.sub(" ", value.lower())
    cleaned = _WS_RE.sub(" ", cleaned).strip()
    cleaned = cleaned.strip(_EDGE_PUNCT).strip()
    return _WS_RE.sub(" ", cleaned)


def normalize_token(token: str) -> str:
    """Normalize a domain or slot name to a single lowercase token."""
    cleaned = _RESERVED_RE.sub("", token.lower())
    return _WS_RE.sub("_", cleaned.strip())
