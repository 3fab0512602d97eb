"""Word tokenizer shared by deduplication and the bias audit."""

from __future__ import annotations

import re

# letter runs only: digits, punctuation and underscores separate words
_WORD_RE = re.compile(r"[^\W\d_]+")


def word_tokenize(text: str) -> list[str]:
    """Lowercased runs of Unicode letters, in order of appearance."""
    return [m.group(0).lower() for m in _WORD_RE.finditer(text)]
