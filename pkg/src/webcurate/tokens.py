"""Token counters: whitespace units or greedy byte-pair merges."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path


class MergesFormatError(ValueError):
    pass


def count_whitespace(text: str) -> int:
    if not text:
        raise ValueError("cannot count tokens of empty text")
    return len(text.split())


@lru_cache(maxsize=1)
def _byte_alphabet() -> dict[int, str]:
    # printable stand-ins for all 256 bytes, as used by byte-level BPE vocabularies
    keep = list(range(ord("!"), ord("~") + 1)) + list(range(0xA1, 0xAD)) + list(range(0xAE, 0x100))
    table = {b: chr(b) for b in keep}
    extra = 0
    for b in range(256):
        if b not in table:
            table[b] = chr(256 + extra)
            extra += 1
    return table


@dataclass
class BpeModel:
    ranks: dict[tuple[str, str], int]
    byte_level: bool = False
    source: str = ""

    @classmethod
    def from_lines(cls, lines, byte_level: bool = False, source: str = "") -> "BpeModel":
        ranks: dict[tuple[str, str], int] = {}
        for lineno, raw in enumerate(lines, 1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.startswith("#version"):
                continue
            parts = line.split(" ")
            if len(parts) != 2 or not parts[0] or not parts[1]:
                raise MergesFormatError(f"{source or 'merges'} line {lineno}: expected 'left right', got {line!r}")
            ranks.setdefault((parts[0], parts[1]), len(ranks))
        return cls(ranks, byte_level, source)

    @classmethod
    def load(cls, path: str | Path, byte_level: bool = False) -> "BpeModel":
        with open(path, encoding="utf-8") as fh:
            return cls.from_lines(fh, byte_level, str(path))

    def _symbols(self, word: str, first: bool) -> list[str]:
        if not self.byte_level:
            return list(word)
        table = _byte_alphabet()
        raw = (word if first else " " + word).encode("utf-8")
        return [table[b] for b in raw]

    def encode_word(self, symbols: list[str]) -> list[str]:
        ranks = self.ranks
        while len(symbols) > 1:
            best, best_rank = None, None
            for pair in zip(symbols, symbols[1:]):
                r = ranks.get(pair)
                if r is not None and (best_rank is None or r < best_rank):
                    best, best_rank = pair, r
            if best is None:
                break
            merged, i = [], 0
            while i < len(symbols):
                if i + 1 < len(symbols) and (symbols[i], symbols[i + 1]) == best:
                    merged.append(symbols[i] + symbols[i + 1])
                    i += 2
                else:
                    merged.append(symbols[i])
                    i += 1
            symbols = merged
        return symbols

    def tokenize(self, text: str) -> list[str]:
        out = []
        for i, word in enumerate(text.split()):
            out.extend(self._encode_cached(word, i == 0))
        return out

    def _encode_cached(self, word: str, first: bool) -> tuple[str, ...]:
        cache = self.__dict__.setdefault("_cache", {})
        key = (word, first)
        hit = cache.get(key)
        if hit is None:
            hit = cache[key] = tuple(self.encode_word(self._symbols(word, first)))
        return hit

    def count(self, text: str) -> int:
        if not text:
            raise ValueError("cannot count tokens of empty text")
        return len(self.tokenize(text))


@dataclass(frozen=True)
class TokenCounter:
    """What the manifest records about the counter in use."""

    kind: str = "whitespace"
    model: BpeModel | None = None

    @classmethod
    def build(cls, kind: str = "whitespace", model_path: str | None = None, byte_level: bool = False) -> "TokenCounter":
        if kind == "whitespace":
            return cls()
        if kind == "bpe":
            if not model_path:
                raise ValueError("bpe token counting needs a merges file")
            return cls("bpe", BpeModel.load(model_path, byte_level))
        raise ValueError(f"unknown token counter {kind!r}")

    def describe(self) -> str:
        return self.kind if self.model is None else f"bpe:{self.model.source}"

    def __call__(self, text: str) -> int:
        return count_whitespace(text) if self.model is None else self.model.count(text)


def count_tokens(text: str, counter: TokenCounter = TokenCounter()) -> int:
    return counter(text)
