"""Lighter global deduplication variants: by URL and by line."""

from __future__ import annotations

import random
import re
from collections.abc import Iterable
from dataclasses import dataclass, field

from ..document import Document
from ..filters.rules import count_sentences

LINE_MODES = ("plain", "min_words", "span3")
_NUMBER_RE = re.compile(r"\d+")


def _seeded_order(docs: list[Document], seed: int) -> list[Document]:
    order = sorted(docs, key=lambda d: d.id)
    random.Random(seed).shuffle(order)
    return order


@dataclass
class UrlDedupResult:
    kept: list[Document] = field(default_factory=list)
    removed: list[str] = field(default_factory=list)
    missing_url: list[str] = field(default_factory=list)


def url_dedup(docs: Iterable[Document], seed: int = 0) -> UrlDedupResult:
    """One document per lowercased URL; the first in a seeded shuffle wins.

    Documents without a URL have no key, so they are kept and flagged.
    Kept documents come back in input order.
    """
    docs = list(docs)
    winners: dict[str, str] = {}
    for doc in _seeded_order(docs, seed):
        if doc.url:
            winners.setdefault(doc.url.strip().lower(), doc.id)
    result = UrlDedupResult()
    for doc in docs:
        if not doc.url:
            result.missing_url.append(doc.id)
            result.kept.append(doc)
        elif winners[doc.url.strip().lower()] == doc.id:
            result.kept.append(doc)
        else:
            result.removed.append(doc.id)
    return result


@dataclass
class LineDedupResult:
    kept: list[Document] = field(default_factory=list)
    dropped: list[str] = field(default_factory=list)
    lines_removed: int = 0


def normalize_numbers(line: str) -> str:
    return _NUMBER_RE.sub("0", line)


def _plain_removals(lines: list[str], seen: set, min_words: int) -> set[int]:
    out = set()
    for i, line in enumerate(lines):
        key = line.strip()
        if not key or len(key.split()) < min_words:
            continue
        if key in seen:
            out.add(i)
        else:
            seen.add(key)
    return out


def _span_removals(lines: list[str], seen: set) -> set[int]:
    # windows of three consecutive non-blank lines, digits collapsed
    idx = [i for i, line in enumerate(lines) if line.strip()]
    norm = [normalize_numbers(lines[i].strip()) for i in idx]
    out = set()
    for w in range(len(idx) - 2):
        key = tuple(norm[w : w + 3])
        if key in seen:
            out.update(idx[w : w + 3])
        else:
            seen.add(key)
    return out


def line_dedup(docs: Iterable[Document], mode: str = "plain", seed: int = 0) -> LineDedupResult:
    """Remove repeated lines across the whole collection.

    Documents are visited in a seeded shuffle, so which occurrence survives
    is random but reproducible. ``min_words`` only targets lines of at least
    10 words and then drops documents left with fewer than 3 sentences;
    ``span3`` removes repeated 3-line spans with every number read as 0.
    """
    if mode not in LINE_MODES:
        raise ValueError(f"unknown line dedup mode {mode!r}; expected one of {LINE_MODES}")
    docs = list(docs)
    seen: set = set()
    new_text: dict[str, str] = {}
    result = LineDedupResult()
    for doc in _seeded_order(docs, seed):
        lines = doc.text.split("\n")
        if mode == "span3":
            drop = _span_removals(lines, seen)
        else:
            drop = _plain_removals(lines, seen, 10 if mode == "min_words" else 0)
        result.lines_removed += len(drop)
        if drop:
            new_text[doc.id] = "\n".join(line for i, line in enumerate(lines) if i not in drop)
    for doc in docs:
        if doc.id in new_text:
            doc = doc.with_text(new_text[doc.id])
        if mode == "min_words" and count_sentences(doc.text) < 3:
            result.dropped.append(doc.id)
            continue
        result.kept.append(doc)
    return result
