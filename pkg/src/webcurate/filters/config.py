"""Filter thresholds with per-field provenance and legal ranges.

Provenance tags:
    paper          value stated by the FineWeb recipe
    gopher-default original MassiveText/Gopher threshold
    c4-default     original C4 setting
    candidate      optional rule from the FineWeb filter study (off by default)
    invented       artifact choice, documented here
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any


def _f(default, provenance: str, lo: float | None = 0.0, hi: float | None = None, **kw):
    return field(default=default, metadata={"provenance": provenance, "range": (lo, hi)}, **kw)


def _fd(default: dict, provenance: str, lo=0.0, hi=1.0):
    return field(
        default_factory=lambda: dict(default),
        metadata={"provenance": provenance, "range": (lo, hi)},
    )


@dataclass
class FilterConfig:
    # language gate
    lang_threshold: float = _f(0.65, "paper", 0.0, 1.0)
    lang_mode: str = _f("threshold", "invented", None)
    lang_target: str = _f("en", "paper", None)

    # FineWeb custom filters; drop when punct <= max, dup chars >= max, short >= max
    punct_line_max: float = _f(0.12, "paper", 0.0, 1.0)
    dup_line_char_max: float = _f(0.1, "paper", 0.0, 1.0)
    short_line_max: float = _f(0.67, "paper", 0.0, 1.0)
    short_line_len: int = _f(30, "paper", 1)

    # C4
    min_words_per_line: int = _f(3, "c4-default", 0)
    min_sentences: int = _f(5, "c4-default", 0)
    terminal_punct_enabled: bool = _f(False, "paper", None)
    c4_word_rule: str = _f("line", "invented", None)

    # Gopher quality
    min_words: int = _f(50, "gopher-default", 0)
    max_words: int = _f(100_000, "gopher-default", 0)
    min_mean_word_len: float = _f(3.0, "gopher-default", 0.0)
    max_mean_word_len: float = _f(10.0, "gopher-default", 0.0)
    symbol_word_ratio_max: float = _f(0.1, "gopher-default", 0.0)
    bullet_frac_max: float = _f(0.9, "gopher-default", 0.0, 1.0)
    ellipsis_frac_max: float = _f(0.3, "gopher-default", 0.0, 1.0)
    alpha_word_frac_min: float = _f(0.8, "gopher-default", 0.0, 1.0)
    stop_word_min: int = _f(2, "gopher-default", 0)

    # Gopher repetition; drop when value >= max
    dup_line_frac_max: float = _f(0.3, "gopher-default", 0.0, 1.0)
    dup_para_frac_max: float = _f(0.3, "gopher-default", 0.0, 1.0)
    dup_line_char_frac_max: float = _f(0.2, "gopher-default", 0.0, 1.0)
    dup_para_char_frac_max: float = _f(0.2, "gopher-default", 0.0, 1.0)
    top_ngram_max: dict = _fd({2: 0.2, 3: 0.18, 4: 0.16}, "gopher-default")
    dup_ngram_max: dict = _fd(
        {5: 0.15, 6: 0.14, 7: 0.13, 8: 0.12, 9: 0.11, 10: 0.10}, "gopher-default"
    )

    # optional candidate rules, all off by default
    punct_keep_zero: bool = _f(False, "candidate", None)
    three_word_line_max: float | None = _f(None, "candidate", 0.0, 1.0)
    avg_words_per_line_min: float | None = _f(None, "candidate", 0.0)
    avg_line_length_min: float | None = _f(None, "candidate", 0.0)
    avg_line_length_sample_rate: float | None = _f(None, "candidate", 0.0, 1.0)
    fw_top_ngram_max: dict | None = _f(None, "candidate", 0.0, 1.0)
    fw_dup_ngram_max: dict | None = _f(None, "candidate", 0.0, 1.0)

    def __post_init__(self):
        # JSON round-trips turn n-gram keys into strings
        for name in ("top_ngram_max", "dup_ngram_max", "fw_top_ngram_max", "fw_dup_ngram_max"):
            value = getattr(self, name)
            if value is not None:
                setattr(self, name, {int(k): v for k, v in value.items()})
        self.validate()

    def validate(self) -> None:
        for f in fields(self):
            value = getattr(self, f.name)
            lo, hi = f.metadata["range"]
            if value is None or isinstance(value, (str, bool)):
                continue
            values = value.values() if isinstance(value, dict) else [value]
            for v in values:
                if isinstance(v, float) and math.isnan(v):
                    raise ValueError(f"{f.name}: NaN threshold")
                if lo is not None and v < lo or hi is not None and v > hi:
                    raise ValueError(f"{f.name}={v} outside [{lo}, {hi}]")
        if self.min_mean_word_len > self.max_mean_word_len:
            raise ValueError("min_mean_word_len > max_mean_word_len")
        if self.lang_mode not in ("threshold", "argmax"):
            raise ValueError(f"lang_mode must be 'threshold' or 'argmax', not {self.lang_mode!r}")
        if self.c4_word_rule not in ("line", "document", "off"):
            raise ValueError(f"c4_word_rule must be line, document or off, not {self.c4_word_rule!r}")

    @staticmethod
    def provenance(name: str) -> str:
        for f in fields(FilterConfig):
            if f.name == name:
                return f.metadata["provenance"]
        raise KeyError(name)

    def to_dict(self) -> dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def to_text(self) -> str:
        """Flat ``key = json-value  # provenance`` lines; dicts are flattened."""
        out = []
        for f in fields(self):
            value = getattr(self, f.name)
            tag = f.metadata["provenance"]
            if isinstance(value, dict):
                for k in sorted(value):
                    out.append(f"{f.name}.{k} = {json.dumps(value[k])}  # {tag}")
            else:
                out.append(f"{f.name} = {json.dumps(value)}  # {tag}")
        return "\n".join(out) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "FilterConfig":
        known = {f.name: f for f in fields(cls)}
        kwargs: dict[str, Any] = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"line {lineno}: expected key = value")
            key = key.strip()
            try:
                parsed = json.loads(value.strip())
            except json.JSONDecodeError as exc:
                raise ValueError(f"line {lineno}: bad value {value.strip()!r}") from exc
            name, dot, sub = key.partition(".")
            if name not in known:
                raise ValueError(f"line {lineno}: unknown key {name!r}")
            if dot:
                current = kwargs.get(name)
                if current is None:
                    # a flattened dict replaces the default wholesale
                    current = kwargs[name] = {}
                current[int(sub)] = parsed
            else:
                kwargs[name] = parsed
        return cls(**kwargs)

    @classmethod
    def load(cls, path: str | Path) -> "FilterConfig":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))
