"""Main-content extraction from response HTML.

The extractor is a deliberately simple heuristic:

1. decode (declared charset, ``<meta charset>``, else UTF-8 with replacement);
2. tokenize with the stdlib tolerant HTML parser (entities decoded);
3. discard script/style/head content and whole nav/header/footer/aside/form
   subtrees;
4. cut the remaining text into lines at block-level element boundaries;
5. drop lines that are mostly link text (link-character density above
   ``max_link_density``) and lines shorter than ``min_line_length`` unless
   they close a paragraph with sentence-final punctuation.
"""

from __future__ import annotations

import codecs
import re
import unicodedata
from dataclasses import dataclass
from html.parser import HTMLParser

_MULTI_BLANK_RE = re.compile(r"\n{3,}")
_META_CHARSET_RE = re.compile(rb"""<meta[^>]+charset\s*=\s*["']?\s*([A-Za-z0-9_:.-]+)""", re.I)
_WS_RE = re.compile(r"\s+")
# tag-shaped text that survives entity decoding (e.g. "&lt;b&gt;") is removed too
_TAG_RE = re.compile(r"</?[A-Za-z][A-Za-z0-9:-]*(?:\s[^<>]*)?/?>|<(?:script|style)", re.I)

# subtrees whose text is never content
SKIP_TAGS = frozenset({"script", "style", "noscript", "template", "head", "svg", "iframe", "object", "select"})
BOILERPLATE_TAGS = frozenset({"nav", "header", "footer", "aside", "form"})
BLOCK_TAGS = frozenset(
    {
        "address", "article", "blockquote", "body", "br", "caption", "dd", "details", "div",
        "dl", "dt", "figcaption", "figure", "h1", "h2", "h3", "h4", "h5", "h6", "hr", "html",
        "li", "main", "ol", "p", "pre", "section", "summary", "table", "tbody", "td", "tfoot",
        "th", "thead", "tr", "ul",
    }
)
VOID_TAGS = frozenset({"area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta", "source", "track", "wbr"})
SENTENCE_END = (".", "!", "?", '"', "”", "…")


@dataclass(frozen=True)
class ExtractedText:
    text: str
    line_count: int
    extraction_mode: str  # "heuristic_warc" | "wet_passthrough"


@dataclass(frozen=True)
class ExtractorConfig:
    min_line_length: int = 10
    max_link_density: float = 0.5
    min_lines: int = 1


def normalize_text(text: str) -> str:
    """NFC, LF newlines, no trailing whitespace, at most one blank line in a row."""
    text = unicodedata.normalize("NFC", text)
    text = text.replace("\r\n", "\n").replace("\r", "\n")
    text = "\n".join(line.rstrip() for line in text.split("\n"))
    return _MULTI_BLANK_RE.sub("\n\n", text)


def _count_lines(text: str) -> int:
    return sum(1 for line in text.split("\n") if line.strip())


@dataclass
class _Line:
    text: str
    link_chars: int
    closes_paragraph: bool


class _BlockCollector(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.lines: list[_Line] = []
        self._skip: list[str] = []
        self._pieces: list[tuple[str, bool]] = []
        self._link_depth = 0
        self._open_p = False

    def _flush(self, closes_paragraph: bool = False) -> None:
        if not self._pieces:
            return
        pieces = [(_TAG_RE.sub("", p), in_link) for p, in_link in self._pieces]
        text = _WS_RE.sub(" ", "".join(p for p, _ in pieces)).strip()
        link_chars = sum(len(_WS_RE.sub(" ", p).strip()) for p, in_link in pieces if in_link)
        self._pieces = []
        if text:
            self.lines.append(_Line(text, min(link_chars, len(text)), closes_paragraph))

    def _block_boundary(self, tag: str, opening: bool) -> None:
        if tag == "br":
            self._flush()
            return
        # an open <p> ends at its close tag or at the next block boundary
        self._flush(closes_paragraph=self._open_p)
        self._open_p = opening and tag == "p"

    def handle_starttag(self, tag, attrs):
        if tag == "body" and "head" in self._skip:
            # unclosed <head>
            del self._skip[self._skip.index("head"):]
        if tag in SKIP_TAGS or tag in BOILERPLATE_TAGS:
            if tag not in VOID_TAGS:
                self._flush()
                self._skip.append(tag)
            return
        if self._skip:
            return
        if tag in BLOCK_TAGS:
            self._block_boundary(tag, opening=tag not in VOID_TAGS)
        elif tag == "a":
            self._link_depth += 1

    def handle_startendtag(self, tag, attrs):
        if not self._skip and tag in BLOCK_TAGS:
            self._block_boundary(tag, opening=False)

    def handle_endtag(self, tag):
        if self._skip:
            if tag in self._skip:
                # close the innermost matching element and anything left open inside it
                i = len(self._skip) - 1 - self._skip[::-1].index(tag)
                del self._skip[i:]
            return
        if tag in BLOCK_TAGS:
            self._block_boundary(tag, opening=False)
        elif tag == "a" and self._link_depth:
            self._link_depth -= 1

    def handle_data(self, data):
        if not self._skip:
            self._pieces.append((data, self._link_depth > 0))

    def close(self):
        super().close()
        self._flush(closes_paragraph=self._open_p)


def decode_html(html_bytes: bytes, declared_charset: str | None = None) -> str:
    for candidate in (declared_charset, _sniff_meta_charset(html_bytes)):
        if not candidate:
            continue
        try:
            codecs.lookup(candidate)
        except LookupError:
            continue
        return html_bytes.decode(candidate, errors="replace")
    return html_bytes.decode("utf-8", errors="replace")


def _sniff_meta_charset(html_bytes: bytes) -> str | None:
    m = _META_CHARSET_RE.search(html_bytes[:4096])
    return m.group(1).decode("ascii") if m else None


def looks_like_html(text: str) -> bool:
    head = text[:1024]
    return "<" in head or "<!doctype" in text[:4096].lower()


def extract_with_reason(
    html_bytes: bytes,
    declared_charset: str | None = None,
    config: ExtractorConfig = ExtractorConfig(),
) -> tuple[ExtractedText | None, str]:
    """Like extract_main_text, but also returns a reason code.

    Reason is "" on success, else one of ``not_html``, ``empty``,
    ``too_few_lines``.
    """
    text = decode_html(html_bytes, declared_charset)
    if not text.strip():
        return None, "empty"
    if not looks_like_html(text):
        return None, "not_html"
    parser = _BlockCollector()
    parser.feed(text)
    parser.close()

    kept = []
    for line in parser.lines:
        if line.link_chars / len(line.text) > config.max_link_density:
            continue
        if len(line.text) < config.min_line_length and not (
            line.closes_paragraph and line.text.endswith(SENTENCE_END)
        ):
            continue
        kept.append(line.text)
    if not kept:
        return None, "empty"
    if len(kept) < config.min_lines:
        return None, "too_few_lines"
    out = normalize_text("\n".join(kept))
    return ExtractedText(out, _count_lines(out), "heuristic_warc"), ""


def extract_main_text(
    html_bytes: bytes,
    declared_charset: str | None = None,
    config: ExtractorConfig = ExtractorConfig(),
) -> ExtractedText | None:
    return extract_with_reason(html_bytes, declared_charset, config)[0]


def wet_passthrough(text: str) -> ExtractedText | None:
    out = normalize_text(text).strip("\n")
    if not out.strip():
        return None
    return ExtractedText(out, _count_lines(out), "wet_passthrough")


def charset_from_content_type(value: str | None) -> str | None:
    if not value:
        return None
    m = re.search(r"charset\s*=\s*[\"']?([A-Za-z0-9_:.-]+)", value, re.I)
    return m.group(1) if m else None
