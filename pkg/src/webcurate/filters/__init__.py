from .config import FilterConfig
from .metrics import DocumentMetrics, compute_metrics
from .rules import (
    Blocklist,
    FilterDecision,
    c4_doc_rules,
    c4_line_rules,
    count_sentences,
    fineweb_custom,
    gopher_quality,
    gopher_repetition,
    url_filter,
)

__all__ = [
    "Blocklist",
    "DocumentMetrics",
    "FilterConfig",
    "FilterDecision",
    "c4_doc_rules",
    "c4_line_rules",
    "compute_metrics",
    "count_sentences",
    "fineweb_custom",
    "gopher_quality",
    "gopher_repetition",
    "url_filter",
]
