"""Subgroup-term counts and TF-IDF word association tables.

A "data instance" is a document. Association for a subgroup term:

1. vocabulary: words that occur at least twice in the whole corpus;
2. select the documents containing the term;
3. score each vocabulary word co-occurring in that subcorpus with
   TF = raw count in the subcorpus and IDF = ln(N / df) over the full corpus;
4. delta = score minus the mean score of all co-occurring vocabulary words;
5. keep rows whose score is positive, sorted by delta (descending).

The term's own tokens are not counted as co-occurring words.
"""

from __future__ import annotations

import math
from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

from .words import word_tokenize

# subgroup terms used when none are given on the command line
DEFAULT_TERMS = (
    "man", "woman", "non-binary",
    "christian", "muslim", "jewish", "hindu", "buddhist", "atheist",
    "black", "white", "asian", "latino",
    "gay", "lesbian", "straight",
)


def _texts(corpus: Iterable) -> list[str]:
    return [item if isinstance(item, str) else item.text for item in corpus]


def term_tokens(term: str) -> tuple[str, ...]:
    tokens = tuple(word_tokenize(term))
    if not tokens:
        raise ValueError(f"term {term!r} has no word characters")
    return tokens


def count_term(tokens: Sequence[str], term: tuple[str, ...]) -> int:
    n = len(term)
    if n == 1:
        return sum(1 for t in tokens if t == term[0])
    return sum(1 for i in range(len(tokens) - n + 1) if tuple(tokens[i : i + n]) == term)


def term_distribution(corpus: Iterable, terms: Sequence[str]) -> dict[str, int]:
    """Occurrences of each term; multi-word terms such as ``non-binary``
    count as consecutive token sequences."""
    if not terms:
        raise ValueError("need at least one term")
    parsed = {t: term_tokens(t) for t in terms}
    counts = dict.fromkeys(terms, 0)
    for text in _texts(corpus):
        tokens = word_tokenize(text)
        for term, toks in parsed.items():
            counts[term] += count_term(tokens, toks)
    return counts


@dataclass
class AssociationRow:
    word: str
    tfidf: float
    delta: float


@dataclass
class AssociationTable:
    subgroup_term: str
    corpus_doc_count: int
    selected_doc_count: int = 0
    rows: list[AssociationRow] = field(default_factory=list)
    # every co-occurring vocabulary word before the positive-score cut
    all_scores: dict[str, float] = field(default_factory=dict)

    def as_rows(self) -> list[dict]:
        return [{"term": self.subgroup_term, "word": r.word, "tfidf": r.tfidf, "delta": r.delta} for r in self.rows]


def tfidf_association(corpus: Iterable, subgroup_terms: Sequence[str]) -> dict[str, AssociationTable]:
    docs = [word_tokenize(t) for t in _texts(corpus)]
    n_docs = len(docs)
    if n_docs < 2:
        raise ValueError("association needs a corpus of at least 2 documents")
    freq = Counter(w for d in docs for w in d)
    vocab = {w for w, c in freq.items() if c >= 2}
    df = Counter(w for d in docs for w in set(d))

    tables = {}
    for term in subgroup_terms:
        toks = term_tokens(term)
        selected = [d for d in docs if count_term(d, toks)]
        table = AssociationTable(term, n_docs, len(selected))
        tf = Counter(w for d in selected for w in d if w in vocab and w not in toks)
        if tf:
            scores = {w: c * math.log(n_docs / df[w]) for w, c in tf.items()}
            mean = math.fsum(scores.values()) / len(scores)
            table.all_scores = scores
            rows = [AssociationRow(w, s, s - mean) for w, s in scores.items() if s > 0]
            rows.sort(key=lambda r: (-r.delta, r.word))
            table.rows = rows
        tables[term] = table
    return tables


def format_table(table: AssociationTable, limit: int | None = 20) -> str:
    head = f"# {table.subgroup_term}: {table.selected_doc_count} of {table.corpus_doc_count} documents"
    lines = [head, f"{'word':<24} {'tfidf':>10} {'delta':>10}"]
    for r in table.rows[:limit]:
        lines.append(f"{r.word:<24} {r.tfidf:>10.4f} {r.delta:>10.4f}")
    return "\n".join(lines) + "\n"
