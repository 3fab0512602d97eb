"""Keep/drop decisions for the URL, Gopher, C4 and FineWeb rule families.

Every function is pure. Rules inside a family are evaluated in the order
listed in the ``*_RULES`` tables, and the first violated one names the
decision, so attribution is deterministic.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable
from urllib.parse import urlsplit

from .config import FilterConfig
from .metrics import DocumentMetrics

STAGES = ("url", "language", "gopher_quality", "gopher_repetition", "c4", "fineweb_custom", "score_gate")

POLICY_PHRASES = ("terms of use", "privacy policy", "cookie policy", "uses cookies", "use of cookies")
C4_LINE_END = (".", "!", "?", '"')

_JAVASCRIPT_RE = re.compile(r"\bjavascript\b", re.I)
_LOREM_RE = re.compile(r"lorem\s+ipsum", re.I)
_SENTENCE_SPLIT_RE = re.compile(r"[.!?]+(?=\s|$)")


@dataclass(frozen=True)
class FilterDecision:
    keep: bool
    rule_id: str = ""
    triggering_value: float = 0.0
    stage: str = ""

    def __post_init__(self):
        if not self.keep and not self.rule_id:
            raise ValueError("a drop decision needs a rule_id")


def _keep(stage: str) -> FilterDecision:
    return FilterDecision(True, "", 0.0, stage)


@dataclass(frozen=True)
class Rule:
    rule_id: str
    value: Callable[[DocumentMetrics], float]
    drops: Callable[[float, FilterConfig], bool]


def _evaluate(rules, metrics: DocumentMetrics, config: FilterConfig, stage: str) -> FilterDecision:
    for rule in rules:
        value = rule.value(metrics)
        if rule.drops(value, config):
            return FilterDecision(False, rule.rule_id, float(value), stage)
    return _keep(stage)


# Gopher ---------------------------------------------------------------------

GOPHER_QUALITY_RULES = (
    Rule("min_words", lambda m: m.word_count, lambda v, c: v < c.min_words),
    Rule("max_words", lambda m: m.word_count, lambda v, c: v > c.max_words),
    Rule(
        "mean_word_len",
        lambda m: m.mean_word_length,
        lambda v, c: not c.min_mean_word_len <= v <= c.max_mean_word_len,
    ),
    Rule("symbol_word_ratio", lambda m: m.symbol_to_word_ratio, lambda v, c: v > c.symbol_word_ratio_max),
    Rule("bullet_lines", lambda m: m.bullet_line_fraction, lambda v, c: v > c.bullet_frac_max),
    Rule("ellipsis_lines", lambda m: m.ellipsis_line_fraction, lambda v, c: v > c.ellipsis_frac_max),
    Rule("alpha_words", lambda m: m.alpha_word_fraction, lambda v, c: v < c.alpha_word_frac_min),
    Rule("stop_words", lambda m: m.stop_word_hits, lambda v, c: v < c.stop_word_min),
)


def _top(n):
    return Rule(f"top_{n}gram", lambda m: m.top_ngram_char_fraction[n], lambda v, c: v >= c.top_ngram_max[n])


def _dup(n):
    return Rule(
        f"dup_{n}gram", lambda m: m.duplicated_ngram_char_fraction[n], lambda v, c: v >= c.dup_ngram_max[n]
    )


GOPHER_REPETITION_RULES = (
    Rule("dup_line_frac", lambda m: m.duplicate_line_fraction, lambda v, c: v >= c.dup_line_frac_max),
    Rule("dup_para_frac", lambda m: m.duplicate_paragraph_fraction, lambda v, c: v >= c.dup_para_frac_max),
    Rule("dup_line_char_frac", lambda m: m.duplicate_line_char_fraction, lambda v, c: v >= c.dup_line_char_frac_max),
    Rule(
        "dup_para_char_frac",
        lambda m: m.duplicate_paragraph_char_fraction,
        lambda v, c: v >= c.dup_para_char_frac_max,
    ),
    *(_top(n) for n in (2, 3, 4)),
    *(_dup(n) for n in range(5, 11)),
)


def gopher_quality(metrics: DocumentMetrics, config: FilterConfig) -> FilterDecision:
    return _evaluate(GOPHER_QUALITY_RULES, metrics, config, "gopher_quality")


def gopher_repetition(metrics: DocumentMetrics, config: FilterConfig) -> FilterDecision:
    return _evaluate(GOPHER_REPETITION_RULES, metrics, config, "gopher_repetition")


# C4 -------------------------------------------------------------------------


def count_sentences(text: str) -> int:
    """Spans ended by . ! ? followed by whitespace or end of text, plus any tail."""
    return sum(1 for piece in _SENTENCE_SPLIT_RE.split(text) if piece.strip())


def c4_line_reason(line: str, config: FilterConfig) -> str:
    """Why C4 would remove this line, or "" to keep it."""
    lowered = line.lower()
    if _JAVASCRIPT_RE.search(line):
        return "c4_javascript"
    if any(phrase in lowered for phrase in POLICY_PHRASES):
        return "c4_policy"
    if config.terminal_punct_enabled and not line.rstrip().endswith(C4_LINE_END):
        return "c4_terminal_punct"
    if config.c4_word_rule == "line" and len(line.split()) < config.min_words_per_line:
        return "c4_word_lengths"
    return ""


def c4_line_rules(text: str, config: FilterConfig) -> tuple[str, int, FilterDecision]:
    kept = []
    removed = 0
    for line in text.split("\n"):
        if not line.strip():
            kept.append("")
        elif c4_line_reason(line, config):
            removed += 1
        else:
            kept.append(line)
    out = re.sub(r"\n{3,}", "\n\n", "\n".join(kept)).strip("\n")
    sentences = count_sentences(out)
    if sentences < config.min_sentences:
        return out, removed, FilterDecision(False, "c4_min_sentences", float(sentences), "c4")
    return out, removed, _keep("c4")


def c4_doc_rules(text: str, metrics: DocumentMetrics, config: FilterConfig) -> FilterDecision:
    if _LOREM_RE.search(text):
        return FilterDecision(False, "c4_lorem_ipsum", 1.0, "c4")
    if "{" in text:
        return FilterDecision(False, "c4_curly_bracket", 1.0, "c4")
    if config.c4_word_rule == "document":
        shortest = min((len(line.split()) for line in text.split("\n") if line.strip()), default=0)
        if shortest < config.min_words_per_line:
            return FilterDecision(False, "c4_word_lengths", float(shortest), "c4")
    return _keep("c4")


# FineWeb custom ---------------------------------------------------------------


def _sampled(doc_key: str, seed: int, rate: float) -> bool:
    digest = hashlib.blake2b(f"{seed}:{doc_key}".encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little") < rate * 2**64


def fineweb_custom(
    metrics: DocumentMetrics, config: FilterConfig, *, doc_key: str = "", seed: int = 0
) -> FilterDecision:
    """The three FineWeb rules, then any enabled candidate rules.

    ``doc_key`` and ``seed`` only matter for the sampled average-line-length
    rule, which applies to a seeded Bernoulli subsample of documents.
    """
    stage = "fineweb_custom"
    punct = metrics.lines_end_punct_fraction
    if punct <= config.punct_line_max and not (config.punct_keep_zero and punct == 0):
        return FilterDecision(False, "fw_punct_lines", punct, stage)
    if metrics.duplicate_line_char_fraction >= config.dup_line_char_max:
        return FilterDecision(False, "fw_dup_line_chars", metrics.duplicate_line_char_fraction, stage)
    if metrics.lines_shorter_30_fraction >= config.short_line_max:
        return FilterDecision(False, "fw_short_lines", metrics.lines_shorter_30_fraction, stage)

    if config.three_word_line_max is not None:
        v = metrics.line_with_most_3_words_fraction
        if v > config.three_word_line_max:
            return FilterDecision(False, "fw_three_word_lines", v, stage)
    if config.avg_words_per_line_min is not None and metrics.avg_words_per_line < config.avg_words_per_line_min:
        return FilterDecision(False, "fw_avg_words_per_line", metrics.avg_words_per_line, stage)
    if config.avg_line_length_min is not None and metrics.avg_line_length < config.avg_line_length_min:
        rate = config.avg_line_length_sample_rate
        if rate is None or _sampled(doc_key, seed, rate):
            return FilterDecision(False, "fw_avg_line_length", metrics.avg_line_length, stage)
    for n, limit in sorted((config.fw_top_ngram_max or {}).items()):
        v = metrics.top_ngram_char_fraction[n]
        if v > limit:
            return FilterDecision(False, f"fw_top_{n}gram", v, stage)
    for n, limit in sorted((config.fw_dup_ngram_max or {}).items()):
        v = metrics.duplicated_ngram_char_fraction[n]
        if v > limit:
            return FilterDecision(False, f"fw_dup_{n}gram", v, stage)
    return _keep(stage)


# URL blocklist ------------------------------------------------------------------


@dataclass(frozen=True)
class Blocklist:
    domains: frozenset[str] = frozenset()
    patterns: tuple[str, ...] = ()

    @classmethod
    def from_lines(cls, lines) -> "Blocklist":
        domains, patterns = set(), []
        for lineno, raw in enumerate(lines, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            kind, sep, value = line.partition(":")
            value = value.strip().lower()
            if not sep or kind not in ("domain", "pattern") or not value:
                raise ValueError(f"blocklist line {lineno}: expected 'domain:' or 'pattern:' entry")
            if kind == "domain":
                domains.add(value.strip(".").removeprefix("*."))
            else:
                patterns.append(value)
        return cls(frozenset(domains), tuple(patterns))

    @classmethod
    def load(cls, path: str | Path) -> "Blocklist":
        with open(path, encoding="utf-8") as fh:
            return cls.from_lines(fh)


def url_host(url: str) -> str:
    url = url.strip().lower()
    if "://" not in url and not url.startswith("//"):
        url = "//" + url
    host = urlsplit(url).hostname or ""
    return host.strip(".")


def url_filter(url: str, blocklist: Blocklist) -> FilterDecision:
    host = url_host(url)
    labels = host.split(".") if host else []
    for i in range(len(labels)):
        if ".".join(labels[i:]) in blocklist.domains:
            return FilterDecision(False, "url_domain", 1.0, "url")
    lowered = url.lower()
    for pattern in blocklist.patterns:
        if pattern in lowered:
            return FilterDecision(False, "url_pattern", 1.0, "url")
    return _keep("url")
