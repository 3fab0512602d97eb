"""Per-document statistics consumed by every heuristic filter.

Conventions (all fractions are integer ratios, so results are exact and
reproducible):

* lines: ``text.split("\\n")``, right-stripped, empty lines ignored;
* paragraphs: runs of non-blank lines separated by blank lines;
* words: ``text.split()`` (Unicode whitespace); n-grams are over the
  lowercased words, and character mass is the summed length of the
  original words covered;
* a repeated line/paragraph/n-gram counts only from its second occurrence;
* the top n-gram is the most frequent one (count >= 2; among equally
  frequent ones, the largest covered mass); overlapping occurrences are
  not double counted.
"""

from __future__ import annotations

import string
from dataclasses import dataclass, field
from itertools import accumulate

BULLETS = ("•", "●", "○", "▪", "▫", "■", "□", "‣", "⁃", "◦", "-", "*", "–")
ELLIPSES = ("...", "…")
TERMINAL_PUNCT = (".", "!", "?", '"', "'", "”", "’", "…")
STOP_WORDS = frozenset({"the", "be", "to", "of", "and", "that", "have", "with"})
TOP_NGRAM_SIZES = (2, 3, 4)
DUP_NGRAM_SIZES = (5, 6, 7, 8, 9, 10)

_STRIP_CHARS = string.punctuation + "“”‘’«»…"


@dataclass
class DocumentMetrics:
    word_count: int = 0
    line_count: int = 0
    paragraph_count: int = 0
    char_count: int = 0
    mean_word_length: float = 0.0
    symbol_to_word_ratio: float = 0.0
    bullet_line_fraction: float = 0.0
    ellipsis_line_fraction: float = 0.0
    alpha_word_fraction: float = 0.0
    stop_word_hits: int = 0
    duplicate_line_fraction: float = 0.0
    duplicate_line_char_fraction: float = 0.0
    duplicate_paragraph_fraction: float = 0.0
    duplicate_paragraph_char_fraction: float = 0.0
    top_ngram_char_fraction: dict[int, float] = field(default_factory=lambda: dict.fromkeys(TOP_NGRAM_SIZES, 0.0))
    duplicated_ngram_char_fraction: dict[int, float] = field(default_factory=lambda: dict.fromkeys(DUP_NGRAM_SIZES, 0.0))
    lines_end_punct_fraction: float = 0.0
    lines_shorter_30_fraction: float = 0.0
    avg_words_per_line: float = 0.0
    avg_line_length: float = 0.0
    line_with_most_3_words_fraction: float = 0.0

    def get(self, selector: str) -> float:
        """Look up ``name`` or ``name.n`` (for the n-gram maps)."""
        name, _, n = selector.partition(".")
        value = getattr(self, name)
        if isinstance(value, dict):
            if not n:
                raise KeyError(f"{selector}: n-gram metrics need a size, e.g. {name}.2")
            return value[int(n)]
        if n:
            raise KeyError(selector)
        return value


def _ratio(num: int, den: int) -> float:
    return num / den if den else 0.0


def _repeat_mass(items: list[str]) -> tuple[int, int]:
    """(count, summed length) of items equal to an earlier item."""
    seen: set[str] = set()
    count = mass = 0
    for item in items:
        if item in seen:
            count += 1
            mass += len(item)
        else:
            seen.add(item)
    return count, mass


def _covered_mass(starts, n: int, prefix: list[int]) -> int:
    """Mass of the union of word windows [s, s+n) for ascending ``starts``."""
    total = 0
    end = 0
    for s in starts:
        lo = max(s, end)
        hi = s + n
        if hi > lo:
            total += prefix[hi] - prefix[lo]
            end = hi
    return total


def _dup_ngram_mass(grams: list[str], n: int, prefix: list[int]) -> int:
    seen: set[tuple[str, ...]] = set()
    dup_starts = []
    for i in range(len(grams) - n + 1):
        key = tuple(grams[i : i + n])
        if key in seen:
            dup_starts.append(i)
        else:
            seen.add(key)
    return _covered_mass(dup_starts, n, prefix)


def _top_ngram_mass(grams: list[str], n: int, prefix: list[int]) -> int:
    positions: dict[tuple[str, ...], list[int]] = {}
    for i in range(len(grams) - n + 1):
        positions.setdefault(tuple(grams[i : i + n]), []).append(i)
    if not positions:
        return 0
    best = max(len(p) for p in positions.values())
    if best < 2:
        return 0
    return max(_covered_mass(p, n, prefix) for p in positions.values() if len(p) == best)


def compute_metrics(text: str, short_line_len: int = 30) -> DocumentMetrics:
    lines = []
    paragraphs = []
    block: list[str] = []
    for line in text.split("\n"):
        line = line.rstrip()
        if line.strip():
            lines.append(line)
            block.append(line)
        elif block:
            paragraphs.append("\n".join(block))
            block = []
    if block:
        paragraphs.append("\n".join(block))
    words = text.split()
    grams = [w.lower() for w in words]
    prefix = [0, *accumulate(len(w) for w in words)]

    m = DocumentMetrics()
    m.word_count = n_words = len(words)
    m.line_count = n_lines = len(lines)
    m.paragraph_count = len(paragraphs)
    m.char_count = line_chars = sum(len(line) for line in lines)
    word_chars = prefix[-1]
    if not n_words and not n_lines:
        return m

    m.mean_word_length = _ratio(word_chars, n_words)
    hashes = text.count("#")
    ellipses = text.count("...") + text.count("…")
    m.symbol_to_word_ratio = _ratio(max(hashes, ellipses), n_words)
    m.alpha_word_fraction = _ratio(sum(1 for w in words if any(c.isalpha() for c in w)), n_words)
    m.stop_word_hits = sum(1 for w in words if w.strip(_STRIP_CHARS).lower() in STOP_WORDS)

    m.bullet_line_fraction = _ratio(sum(1 for line in lines if line.lstrip().startswith(BULLETS)), n_lines)
    m.ellipsis_line_fraction = _ratio(sum(1 for line in lines if line.endswith(ELLIPSES)), n_lines)
    m.lines_end_punct_fraction = _ratio(sum(1 for line in lines if line.endswith(TERMINAL_PUNCT)), n_lines)
    m.lines_shorter_30_fraction = _ratio(sum(1 for line in lines if len(line) < short_line_len), n_lines)
    m.line_with_most_3_words_fraction = _ratio(sum(1 for line in lines if len(line.split()) <= 3), n_lines)
    m.avg_words_per_line = _ratio(n_words, n_lines)
    m.avg_line_length = _ratio(line_chars, n_lines)

    dup_lines, dup_line_chars = _repeat_mass(lines)
    m.duplicate_line_fraction = _ratio(dup_lines, n_lines)
    m.duplicate_line_char_fraction = _ratio(dup_line_chars, line_chars)
    dup_paras, dup_para_chars = _repeat_mass(paragraphs)
    m.duplicate_paragraph_fraction = _ratio(dup_paras, len(paragraphs))
    m.duplicate_paragraph_char_fraction = _ratio(dup_para_chars, sum(len(p) for p in paragraphs))

    m.top_ngram_char_fraction = {n: _ratio(_top_ngram_mass(grams, n, prefix), word_chars) for n in TOP_NGRAM_SIZES}
    m.duplicated_ngram_char_fraction = {
        n: _ratio(_dup_ngram_mass(grams, n, prefix), word_chars) for n in DUP_NGRAM_SIZES
    }
    return m
