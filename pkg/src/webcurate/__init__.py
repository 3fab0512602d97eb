"""Curation toolkit for web-crawl text: WARC I/O, extraction, language
identification, heuristic filters, MinHash deduplication, PII scrubbing and
a sharded pipeline that ties them together."""

from .document import Document
from .pipeline import PipelineConfig, RunManifest, run

__version__ = "0.1.0"

__all__ = ["Document", "PipelineConfig", "RunManifest", "run", "__version__"]
