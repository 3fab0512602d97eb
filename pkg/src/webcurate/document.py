"""The curated document and its datasheet-schema output row."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Any

# key order of emitted records; fixed for byte-identical output
OUTPUT_FIELDS = (
    "text",
    "id",
    "dump",
    "url",
    "date",
    "file_path",
    "language",
    "language_score",
    "token_count",
)


@dataclass
class Document:
    id: str
    text: str
    url: str = ""
    dump: str = ""
    date: str = ""
    file_path: str = ""
    language: str | None = None
    language_score: float | None = None
    token_count: int | None = None
    # pipeline bookkeeping; never serialized
    meta: dict[str, Any] = field(default_factory=dict, compare=False, repr=False)

    def with_text(self, text: str) -> "Document":
        if text == self.text:
            return self
        return replace(self, text=text, token_count=None, meta=dict(self.meta, text_changed=True))

    def to_record(self) -> dict[str, Any]:
        return {
            "text": self.text,
            "id": self.id,
            "dump": self.dump,
            "url": self.url,
            "date": self.date,
            "file_path": self.file_path,
            "language": self.language if self.language is not None else "",
            "language_score": self.language_score if self.language_score is not None else 0.0,
            "token_count": self.token_count if self.token_count is not None else 0,
        }

    @classmethod
    def from_record(cls, obj: dict[str, Any]) -> "Document":
        if "text" not in obj or "id" not in obj:
            raise ValueError("record needs at least 'text' and 'id'")
        return cls(
            id=str(obj["id"]),
            text=obj["text"],
            url=obj.get("url") or "",
            dump=obj.get("dump") or "",
            date=obj.get("date") or "",
            file_path=obj.get("file_path") or "",
            language=obj.get("language"),
            language_score=obj.get("language_score"),
            token_count=obj.get("token_count"),
        )


def dump_record(record: dict[str, Any]) -> str:
    """One JSON line with the datasheet key order."""
    ordered = {k: record[k] for k in OUTPUT_FIELDS}
    return json.dumps(ordered, ensure_ascii=False)


def load_jsonl(stream) -> list[Document]:
    docs = []
    for lineno, line in enumerate(stream, 1):
        if isinstance(line, bytes):
            line = line.decode("utf-8")
        if not line.strip():
            continue
        try:
            docs.append(Document.from_record(json.loads(line)))
        except (json.JSONDecodeError, ValueError) as exc:
            raise ValueError(f"line {lineno}: {exc}") from exc
    return docs
