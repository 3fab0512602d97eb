"""End-to-end curation run: read, filter, deduplicate, scrub, count, write.

Stage order is fixed (toggles only switch stages on or off):

    url, extract, language, gopher_quality, gopher_repetition,
    dedup, c4, fineweb_custom, pii, score_gate

Deduplication sits after the base filters and before the C4 and custom
filters. Every stage other than dedup is a per-document map that runs
shard by shard; dedup is the one exchange point, implemented as sorted
posting runs (one per shard) merged and grouped by bucket key.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from collections import Counter
from dataclasses import asdict, dataclass, field, fields
from decimal import ROUND_HALF_UP, Decimal, InvalidOperation
from pathlib import Path
from typing import Any, Callable

from .dedup.cluster import UnionFind
from .dedup.minhash import DedupParams
from .dedup.policies import dedup_global_iterative, doc_keys
from .dedup.spill import group_by_key, merge_postings, write_postings
from .document import Document, dump_record, load_jsonl
from .extraction import charset_from_content_type, extract_with_reason, wet_passthrough
from .filters import (
    Blocklist,
    FilterConfig,
    c4_doc_rules,
    c4_line_rules,
    compute_metrics,
    fineweb_custom,
    gopher_quality,
    gopher_repetition,
    url_filter,
)
from .langid import LangModel, classify, language_decision, read_score_file
from .pii import ScrubReport, anonymize
from .records import WarcReader, dump_from_path, split_http
from .tokens import TokenCounter

STAGE_ORDER = (
    "url",
    "extract",
    "language",
    "gopher_quality",
    "gopher_repetition",
    "dedup",
    "c4",
    "fineweb_custom",
    "pii",
    "score_gate",
)
INPUT_FORMATS = ("warc", "wet", "jsonl")
DEDUP_MODES = ("per_snapshot", "global_iterative")
TMPDIR_ENV = "WEBCURATE_TMPDIR"


class PipelineError(RuntimeError):
    pass


def _default_stages() -> dict[str, bool]:
    stages = dict.fromkeys(STAGE_ORDER, True)
    stages["score_gate"] = False
    return stages


@dataclass
class PipelineConfig:
    inputs: list[str] = field(default_factory=list)
    input_format: str = "jsonl"
    output_dir: str = "out"
    stages: dict[str, bool] = field(default_factory=_default_stages)
    filters: FilterConfig = field(default_factory=FilterConfig)
    dedup: DedupParams = field(default_factory=DedupParams)
    dedup_mode: str = "per_snapshot"
    blocklist: str | None = None
    lang_model: str | None = None
    lang_scores: str | None = None
    edu_scores: str | None = None
    edu_threshold: int = 3
    token_counter: str = "whitespace"
    bpe_model: str | None = None
    shard_count: int = 1
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.filters, dict):
            self.filters = FilterConfig(**self.filters)
        if isinstance(self.dedup, dict):
            self.dedup = DedupParams(**self.dedup)
        unknown = set(self.stages) - set(STAGE_ORDER)
        if unknown:
            raise ValueError(f"unknown stages: {sorted(unknown)}")
        self.stages = {s: bool(self.stages.get(s, False)) for s in STAGE_ORDER}
        if self.input_format not in INPUT_FORMATS:
            raise ValueError(f"input_format must be one of {INPUT_FORMATS}")
        if self.dedup_mode not in DEDUP_MODES:
            raise ValueError(f"dedup_mode must be one of {DEDUP_MODES}")
        if self.shard_count < 1:
            raise ValueError("shard_count must be >= 1")
        if self.input_format == "warc" and not self.stages["extract"]:
            raise ValueError("warc input needs the extract stage")
        if self.stages["score_gate"] and not self.edu_scores:
            raise ValueError("score_gate needs an edu_scores file")

    def enabled(self, stage: str) -> bool:
        return self.stages[stage]

    def to_dict(self) -> dict[str, Any]:
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["filters"] = {k: _jsonable(v) for k, v in self.filters.to_dict().items()}
        out["dedup"] = asdict(self.dedup)
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        return cls(**data)


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): v for k, v in value.items()}
    return value


def shard_of(doc_id: str, shard_count: int) -> int:
    digest = hashlib.blake2b(doc_id.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little") % shard_count


def round_half_up(value: str | float) -> int:
    try:
        return int(Decimal(str(value).strip()).to_integral_value(rounding=ROUND_HALF_UP))
    except InvalidOperation as exc:
        raise ValueError(f"not a number: {value!r}") from exc


def read_edu_scores(path: str | Path) -> dict[str, int]:
    """``id<TAB>score`` lines; decimal scores are rounded half up."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'id<TAB>score'")
            out[parts[0]] = round_half_up(parts[1])
    return out


def score_gate(docs, scores: dict[str, int], threshold: int = 3):
    """Yield ``(doc, rule_id)``; rule_id is "" for kept documents."""
    for doc in docs:
        score = scores.get(doc.id)
        if score is None:
            yield doc, "unscored"
        elif score >= threshold:
            yield doc, ""
        else:
            yield doc, "edu_score"


# manifest -----------------------------------------------------------------------


@dataclass
class StageTally:
    stage: str
    enabled: bool
    input: int = 0
    kept: int = 0
    dropped: int = 0
    input_tokens: int = 0
    kept_tokens: int = 0
    dropped_tokens: int = 0
    output_tokens: int = 0
    rules: Counter = field(default_factory=Counter)
    dropped_ids: list[tuple[str, str]] = field(default_factory=list, repr=False)

    def add(self, other: "StageTally") -> None:
        for name in ("input", "kept", "dropped", "input_tokens", "kept_tokens", "dropped_tokens", "output_tokens"):
            setattr(self, name, getattr(self, name) + getattr(other, name))
        self.rules.update(other.rules)
        self.dropped_ids.extend(other.dropped_ids)

    def as_dict(self) -> dict[str, Any]:
        out = asdict(self)
        del out["dropped_ids"]
        out["rules"] = dict(sorted(self.rules.items()))
        return out


@dataclass
class RunManifest:
    config: dict[str, Any]
    seed: int
    token_counter: str
    input_records: int = 0
    stages: list[StageTally] = field(default_factory=list)
    dedup: dict[str, Any] = field(default_factory=dict)
    pii: ScrubReport = field(default_factory=ScrubReport)
    errors: list[dict[str, Any]] = field(default_factory=list)
    output_records: int = 0
    output_tokens: int = 0
    output_files: list[str] = field(default_factory=list)

    def stage(self, name: str) -> StageTally:
        for s in self.stages:
            if s.stage == name:
                return s
        raise KeyError(name)

    def check_conservation(self) -> None:
        """Raise if any stage's accounting does not reconcile."""
        previous = self.input_records
        for s in self.stages:
            if s.input != previous:
                raise AssertionError(f"{s.stage}: input {s.input} != previous output {previous}")
            if s.kept + s.dropped != s.input:
                raise AssertionError(f"{s.stage}: kept + dropped != input")
            if s.kept_tokens + s.dropped_tokens != s.input_tokens:
                raise AssertionError(f"{s.stage}: token tallies do not reconcile")
            if sum(s.rules.values()) != s.dropped:
                raise AssertionError(f"{s.stage}: per-rule drops do not sum to dropped")
            previous = s.kept
        if previous != self.output_records:
            raise AssertionError("output record count differs from last stage")

    def to_json(self) -> str:
        data = {
            "config": self.config,
            "seed": self.seed,
            "token_counter": self.token_counter,
            "input_records": self.input_records,
            "stages": [s.as_dict() for s in self.stages],
            "dedup": self.dedup,
            "pii": asdict(self.pii),
            "errors": self.errors,
            "output": {
                "records": self.output_records,
                "tokens": self.output_tokens,
                "files": self.output_files,
            },
        }
        return json.dumps(data, indent=2, sort_keys=False, ensure_ascii=False) + "\n"


# stages ---------------------------------------------------------------------------


@dataclass
class _Context:
    config: PipelineConfig
    counter: TokenCounter
    blocklist: Blocklist | None = None
    lang_model: LangModel | None = None
    lang_scores: dict[str, tuple[str, float]] | None = None
    edu_scores: dict[str, int] | None = None
    pii: ScrubReport = field(default_factory=ScrubReport)

    def tokens(self, doc: Document) -> int:
        return self.counter(doc.text) if doc.text.strip() else 0


def _metrics(doc: Document, short_line_len: int):
    cached = doc.meta.get("metrics")
    if cached is not None and cached[0] is doc.text:
        return cached[1]
    m = compute_metrics(doc.text, short_line_len)
    doc.meta["metrics"] = (doc.text, m)
    return m


StageFn = Callable[[Document, _Context], "tuple[Document | None, str]"]


def _stage_url(doc, ctx):
    if ctx.blocklist is None:
        return doc, ""
    d = url_filter(doc.url, ctx.blocklist)
    return (doc, "") if d.keep else (None, d.rule_id)


def _stage_extract(doc, ctx):
    fmt = ctx.config.input_format
    if fmt == "jsonl":
        return doc, ""
    if fmt == "wet":
        out = wet_passthrough(doc.text)
        if out is None:
            return None, "extract_empty"
        return doc.with_text(out.text), ""
    headers, body = split_http(doc.meta.pop("payload", b""))
    charset = charset_from_content_type(headers.get("content-type"))
    out, reason = extract_with_reason(body, charset)
    if out is None:
        return None, f"extract_{reason}"
    doc.text = out.text
    return doc, ""


def _stage_language(doc, ctx):
    fc = ctx.config.filters
    if not doc.text.strip():
        return None, "lang_empty"
    if ctx.lang_model is not None:
        label, score, _ = classify(ctx.lang_model, doc.text)
    elif ctx.lang_scores is not None:
        hit = ctx.lang_scores.get(doc.id)
        if hit is None:
            return None, "lang_unscored"
        label, score = hit
    elif doc.language and doc.language_score is not None:
        label, score = doc.language, doc.language_score
    else:
        return None, "lang_unscored"
    if not language_decision(label, score, target=fc.lang_target, threshold=fc.lang_threshold, mode=fc.lang_mode):
        return None, "lang_score" if label == fc.lang_target else "lang_other"
    doc.language, doc.language_score = label, round(float(score), 6)
    return doc, ""


def _stage_gopher_quality(doc, ctx):
    fc = ctx.config.filters
    d = gopher_quality(_metrics(doc, fc.short_line_len), fc)
    return (doc, "") if d.keep else (None, d.rule_id)


def _stage_gopher_repetition(doc, ctx):
    fc = ctx.config.filters
    d = gopher_repetition(_metrics(doc, fc.short_line_len), fc)
    return (doc, "") if d.keep else (None, d.rule_id)


def _stage_c4(doc, ctx):
    fc = ctx.config.filters
    d = c4_doc_rules(doc.text, None, fc)
    if not d.keep:
        return None, d.rule_id
    text, _, d = c4_line_rules(doc.text, fc)
    if not d.keep:
        return None, d.rule_id
    return doc.with_text(text), ""


def _stage_fineweb(doc, ctx):
    fc = ctx.config.filters
    d = fineweb_custom(_metrics(doc, fc.short_line_len), fc, doc_key=doc.id, seed=ctx.config.seed)
    return (doc, "") if d.keep else (None, d.rule_id)


def _stage_pii(doc, ctx):
    text, report = anonymize(doc.text)
    ctx.pii = ctx.pii + report
    return doc.with_text(text), ""


def _stage_score_gate(doc, ctx):
    (_, rule), = score_gate([doc], ctx.edu_scores, ctx.config.edu_threshold)
    return (doc, "") if not rule else (None, rule)


STAGE_FNS: dict[str, StageFn] = {
    "url": _stage_url,
    "extract": _stage_extract,
    "language": _stage_language,
    "gopher_quality": _stage_gopher_quality,
    "gopher_repetition": _stage_gopher_repetition,
    "c4": _stage_c4,
    "fineweb_custom": _stage_fineweb,
    "pii": _stage_pii,
    "score_gate": _stage_score_gate,
}


def _run_map_stage(name: str, docs: list[Document], ctx: _Context) -> tuple[list[Document], StageTally]:
    tally = StageTally(name, ctx.config.enabled(name))
    fn = STAGE_FNS[name]
    out = []
    for doc in docs:
        original = doc
        before = ctx.tokens(doc)
        tally.input += 1
        tally.input_tokens += before
        if tally.enabled:
            doc, rule = fn(doc, ctx)
        else:
            rule = ""
        if doc is None:
            tally.dropped += 1
            tally.dropped_tokens += before
            tally.rules[rule] += 1
            tally.dropped_ids.append((original.id, rule))
        else:
            tally.kept += 1
            tally.kept_tokens += before
            tally.output_tokens += ctx.tokens(doc)
            out.append(doc)
    return out, tally


# input ------------------------------------------------------------------------------


def _check_inputs(config: PipelineConfig) -> None:
    if not config.inputs:
        raise PipelineError("no input paths given")
    for path in config.inputs:
        if not os.path.isfile(path) or not os.access(path, os.R_OK):
            raise PipelineError(f"cannot read input {path}")
        if config.input_format in ("warc", "wet"):
            with open(path, "rb") as fh:
                head = fh.read(5)
            if not (head.startswith(b"\x1f\x8b") or head == b"WARC/"):
                raise PipelineError(f"{path}: neither gzip nor WARC data")
    for label, path in (
        ("blocklist", config.blocklist),
        ("lang_model", config.lang_model),
        ("lang_scores", config.lang_scores),
        ("edu_scores", config.edu_scores),
        ("bpe_model", config.bpe_model),
    ):
        if path is not None and not os.path.isfile(path):
            raise PipelineError(f"cannot read {label} {path}")


def _read_documents(config: PipelineConfig, errors: list[dict]) -> list[Document]:
    docs = []
    for path in config.inputs:
        if config.input_format == "jsonl":
            with open(path, encoding="utf-8") as fh:
                for doc in load_jsonl(fh):
                    doc.meta["source"] = path
                    docs.append(doc)
            continue
        with open(path, "rb") as fh:
            reader = WarcReader(fh, source_path=path)
            dump = dump_from_path(path)
            for record in reader:
                if record.record_type == "warcinfo":
                    for line in record.payload.decode("utf-8", "replace").splitlines():
                        key, sep, value = line.partition(":")
                        if sep and key.strip().lower() == "ispartof":
                            dump = value.strip()
                    continue
                wanted = "response" if config.input_format == "warc" else "conversion"
                if record.record_type != wanted:
                    continue
                doc = Document(
                    id=record.record_id,
                    text="",
                    url=record.target_uri or "",
                    dump=dump,
                    date=record.date,
                    file_path=path,
                )
                if wanted == "response":
                    doc.meta["payload"] = record.payload
                else:
                    doc.text = record.payload.decode("utf-8", errors="replace")
                docs.append(doc)
            for err in reader.errors:
                errors.append(
                    {"file": path, "offset": err.byte_offset, "record_id": err.record_id, "message": err.message}
                )
    seen: set[str] = set()
    unique = []
    for doc in docs:
        if doc.id in seen:
            errors.append({"file": doc.file_path or doc.meta.get("source", ""), "offset": None,
                           "record_id": doc.id, "message": "duplicate document id; later copy skipped"})
            continue
        seen.add(doc.id)
        unique.append(doc)
    return unique


# dedup barrier ------------------------------------------------------------------------


def _dedup(shards: list[list[Document]], ctx: _Context, spill_dir: str) -> tuple[list[list[Document]], StageTally, dict]:
    config = ctx.config
    tally = StageTally("dedup", config.enabled("dedup"))
    for shard in shards:
        for doc in shard:
            t = ctx.tokens(doc)
            tally.input += 1
            tally.input_tokens += t
    stats: dict[str, Any] = {"mode": config.dedup_mode if tally.enabled else "off"}
    removed: set[str] = set()
    if tally.enabled:
        exempt = []
        if config.dedup_mode == "per_snapshot":
            runs = []
            nodes = []
            for i, shard in enumerate(shards):
                postings = []
                for doc in shard:
                    keys = doc_keys(doc.text, config.dedup)
                    if keys is None:
                        exempt.append(doc.id)
                        continue
                    nodes.append((doc.dump, doc.id))
                    postings.extend((k, doc.dump, doc.id) for k in keys)
                run = os.path.join(spill_dir, f"postings_{i:05d}.bin")
                write_postings(run, postings)
                runs.append(run)
            uf = UnionFind()
            for node in nodes:
                uf.add(node)
            for (key, scope), members in group_by_key(merge_postings(runs)):
                for other in members[1:]:
                    uf.union((scope, members[0]), (scope, other))
            sizes = Counter(uf.find(n) for n in nodes)
            removed = {doc_id for dump, doc_id in nodes if uf.find((dump, doc_id)) != (dump, doc_id)}
            stats["duplicate_clusters"] = sum(1 for s in sizes.values() if s > 1)
            stats["largest_cluster"] = max(sizes.values(), default=0)
        else:
            by_dump: dict[str, list] = {}
            for shard in shards:
                for doc in shard:
                    by_dump.setdefault(doc.dump, []).append((doc.id, doc.text))
            order = [sorted(by_dump[d]) for d in sorted(by_dump, reverse=True)]
            result = dedup_global_iterative(order, config.dedup)
            removed = set(result.removed)
            exempt = result.exempt
            stats["duplicate_clusters"] = result.duplicate_clusters
            stats["largest_cluster"] = result.largest_cluster
        stats["exempt"] = len(exempt)
        stats["exempt_ids"] = sorted(exempt)
        stats["removed"] = len(removed)
    out = []
    for shard in shards:
        kept = []
        for doc in shard:
            t = ctx.tokens(doc)
            if doc.id in removed:
                tally.dropped += 1
                tally.dropped_tokens += t
                tally.rules["minhash_duplicate"] += 1
                tally.dropped_ids.append((doc.id, "minhash_duplicate"))
            else:
                tally.kept += 1
                tally.kept_tokens += t
                tally.output_tokens += t
                kept.append(doc)
        out.append(kept)
    return out, tally, stats


# run --------------------------------------------------------------------------------------


def _build_context(config: PipelineConfig) -> _Context:
    counter = TokenCounter.build(config.token_counter, config.bpe_model)
    ctx = _Context(config, counter)
    if config.enabled("url") and config.blocklist:
        ctx.blocklist = Blocklist.load(config.blocklist)
    if config.enabled("language"):
        if config.lang_model:
            ctx.lang_model = LangModel.load(config.lang_model)
        elif config.lang_scores:
            ctx.lang_scores = read_score_file(config.lang_scores)
    if config.enabled("score_gate"):
        ctx.edu_scores = read_edu_scores(config.edu_scores)
    return ctx


def run(config: PipelineConfig) -> RunManifest:
    """Run the pipeline and write ``shard_XXXXX.jsonl`` files,
    ``dropped.tsv`` (id, stage, rule per removed document) and
    ``manifest.json`` into ``config.output_dir``."""
    _check_inputs(config)
    try:
        ctx = _build_context(config)
    except (OSError, ValueError) as exc:
        raise PipelineError(str(exc)) from exc
    manifest = RunManifest(config.to_dict(), config.seed, ctx.counter.describe())

    docs = _read_documents(config, manifest.errors)
    manifest.input_records = len(docs)
    shards: list[list[Document]] = [[] for _ in range(config.shard_count)]
    for doc in docs:
        shards[shard_of(doc.id, config.shard_count)].append(doc)

    tallies: dict[str, StageTally] = {}

    def map_stage(name):
        total = StageTally(name, config.enabled(name))
        for i, shard in enumerate(shards):
            shards[i], part = _run_map_stage(name, shard, ctx)
            total.add(part)
        tallies[name] = total

    for name in STAGE_ORDER[:5]:
        map_stage(name)
    tmp_root = os.environ.get(TMPDIR_ENV) or None
    with tempfile.TemporaryDirectory(prefix="webcurate-", dir=tmp_root) as spill_dir:
        shards, tallies["dedup"], manifest.dedup = _dedup(shards, ctx, spill_dir)
    for name in STAGE_ORDER[6:]:
        map_stage(name)
    manifest.stages = [tallies[name] for name in STAGE_ORDER]
    manifest.pii = ctx.pii

    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for i, shard in enumerate(shards):
        name = f"shard_{i:05d}.jsonl"
        shard.sort(key=lambda d: (d.dump, d.id))
        with open(out_dir / name, "w", encoding="utf-8", newline="\n") as fh:
            for doc in shard:
                if doc.token_count is None or doc.meta.get("text_changed"):
                    doc.token_count = ctx.tokens(doc)
                fh.write(dump_record(doc.to_record()) + "\n")
                manifest.output_records += 1
                manifest.output_tokens += doc.token_count
        manifest.output_files.append(name)
    with open(out_dir / "dropped.tsv", "w", encoding="utf-8", newline="\n") as fh:
        for tally in manifest.stages:
            for doc_id, rule in sorted(tally.dropped_ids):
                fh.write(f"{doc_id}\t{tally.stage}\t{rule}\n")
    manifest.check_conservation()
    (out_dir / "manifest.json").write_text(manifest.to_json(), encoding="utf-8")
    return manifest


def read_output(output_dir: str | Path) -> list[dict[str, Any]]:
    """All records of a run, in (dump, id) order across shards."""
    rows = []
    for path in sorted(Path(output_dir).glob("shard_*.jsonl")):
        with open(path, encoding="utf-8") as fh:
            rows.extend(json.loads(line) for line in fh if line.strip())
    rows.sort(key=lambda r: (r["dump"], r["id"]))
    return rows
