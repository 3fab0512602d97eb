"""Command-line entry point: ``webcurate <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .document import Document, dump_record, load_jsonl
from .pipeline import STAGE_ORDER, PipelineConfig, PipelineError, run


def _load_corpus(path: str) -> list[Document]:
    """A .jsonl corpus, or a plain text file with one document per blank-line-free line."""
    if path.endswith(".jsonl"):
        with open(path, encoding="utf-8") as fh:
            return load_jsonl(fh)
    with open(path, encoding="utf-8") as fh:
        return [Document(f"{path}:{i}", line.rstrip("\n")) for i, line in enumerate(fh, 1) if line.strip()]


# run ------------------------------------------------------------------------


def _config_from_args(args) -> PipelineConfig:
    data: dict = {
        "inputs": args.inputs,
        "input_format": args.format,
        "output_dir": args.output,
        "dedup_mode": args.dedup_mode,
        "blocklist": args.blocklist,
        "lang_model": args.lang_model,
        "lang_scores": args.lang_scores,
        "edu_scores": args.edu_scores,
        "edu_threshold": args.edu_threshold,
        "token_counter": args.token_counter,
        "bpe_model": args.bpe_model,
        "shard_count": args.shards,
        "seed": args.seed,
    }
    if args.stages is not None:
        wanted = [s.strip() for s in args.stages.split(",") if s.strip()]
        unknown = set(wanted) - set(STAGE_ORDER)
        if unknown:
            raise SystemExit(f"unknown stages: {', '.join(sorted(unknown))}")
        data["stages"] = {s: s in wanted for s in STAGE_ORDER}
    elif args.edu_scores:
        data["stages"] = {s: True for s in STAGE_ORDER}
    if args.filter_config:
        from .filters import FilterConfig

        data["filters"] = FilterConfig.load(args.filter_config)
    if args.config:
        # the config file wins over command-line flags
        file_data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        if "stages" in file_data and isinstance(file_data["stages"], list):
            file_data["stages"] = {s: s in file_data["stages"] for s in STAGE_ORDER}
        data.update(file_data)
    return PipelineConfig.from_dict(data)


def cmd_run(args) -> int:
    try:
        config = _config_from_args(args)
        manifest = run(config)
    except (PipelineError, ValueError) as exc:
        print(f"webcurate run: {exc}", file=sys.stderr)
        return 2
    print(f"{'stage':<18} {'in':>8} {'kept':>8} {'dropped':>8}")
    for s in manifest.stages:
        mark = "" if s.enabled else "  (off)"
        print(f"{s.stage:<18} {s.input:>8} {s.kept:>8} {s.dropped:>8}{mark}")
    print(f"wrote {manifest.output_records} records to {config.output_dir}")
    if manifest.errors:
        print(f"{len(manifest.errors)} record errors, see manifest.json", file=sys.stderr)
    return 0


# dedup-sim --------------------------------------------------------------------


def cmd_dedup_sim(args) -> int:
    from .dedup.simulate import simulate_duplicate_distribution

    total_tokens = args.snapshots * args.tokens_per_snapshot
    for fraction in args.fractions:
        sample = int(round(fraction * total_tokens / args.tokens_per_doc)) * args.tokens_per_doc
        d = simulate_duplicate_distribution(
            args.snapshots, args.tokens_per_snapshot, args.tokens_per_doc, sample, args.seed, args.replicates
        )
        print(f"# sample fraction {fraction:g}: {d.sample_size} docs/replicate, "
              f"{100 * d.unique_fraction():.2f}% of sampled documents unique")
        print(f"{'copies':>8} {'observed':>10} {'expected':>12}")
        for k in range(1, len(d.counts)):
            if d.counts[k] or d.expected[k] >= 0.5:
                print(f"{k:>8} {int(d.counts[k]):>10} {d.expected[k]:>12.2f}")
    return 0


# threshold-lab ----------------------------------------------------------------


def cmd_threshold_lab(args) -> int:
    import numpy as np

    from .threshold_lab import Binning, collect, histogram_of, metric_values, report

    high = _load_corpus(args.high)
    low = _load_corpus(args.low)
    rows = []
    for metric in args.metric:
        if args.quantile:
            hv = metric_values(high, metric)
            lv = metric_values(low, metric)
            edges = Binning(args.bins, kind="quantile").edges(np.concatenate([hv, lv]))
            hh, hl = histogram_of(metric, hv, edges), histogram_of(metric, lv, edges)
        else:
            binning = Binning(args.bins, args.range[0], args.range[1])
            hh = collect(high, metric, binning)
            hl = collect(low, metric, edges=hh.bin_edges)
        text, part = report(hh, hl, args.min_gap)
        print(text)
        rows.extend(part)
    if args.json:
        Path(args.json).write_text(json.dumps(rows, indent=2) + "\n", encoding="utf-8")
    return 0


# bias-audit ---------------------------------------------------------------------


def cmd_bias_audit(args) -> int:
    from .bias import DEFAULT_TERMS, format_table, term_distribution, tfidf_association

    corpus = _load_corpus(args.corpus)
    terms = [t.strip().lower() for t in args.terms.split(",")] if args.terms else list(DEFAULT_TERMS)
    counts = term_distribution(corpus, terms)
    print("# term counts")
    for term in terms:
        print(f"{term:<20} {counts[term]:>8}")
    tables = tfidf_association(corpus, terms)
    rows = []
    for term in terms:
        if tables[term].rows:
            print()
            print(format_table(tables[term], args.top), end="")
        rows.extend(tables[term].as_rows())
    if args.json:
        Path(args.json).write_text(json.dumps({"counts": counts, "rows": rows}, indent=2) + "\n", encoding="utf-8")
    return 0


# pii-scan -----------------------------------------------------------------------


def cmd_pii_scan(args) -> int:
    from .pii import ScrubReport, anonymize

    total = ScrubReport()
    out = open(args.output, "w", encoding="utf-8") if args.output else None
    try:
        with open(args.input, encoding="utf-8") as fh:
            docs = load_jsonl(fh) if args.input.endswith(".jsonl") else None
            if docs is None:
                fh.seek(0)
                text, total = anonymize(fh.read())
                if out:
                    out.write(text)
        if docs is not None:
            for doc in docs:
                text, rep = anonymize(doc.text)
                total = total + rep
                if out:
                    out.write(dump_record(doc.with_text(text).to_record()) + "\n")
    finally:
        if out:
            out.close()
    print(f"emails_replaced={total.emails_replaced} ips_replaced={total.ips_replaced} "
          f"ips_skipped_private={total.ips_skipped_private}")
    return 0


# warc-cat -------------------------------------------------------------------------


def cmd_warc_cat(args) -> int:
    from .records import WarcFormatError, WarcReader

    status = 0
    for path in args.files:
        try:
            with open(path, "rb") as fh:
                reader = WarcReader(fh, source_path=path)
                for rec in reader:
                    print(f"{path}\t{rec.byte_offset}\t{rec.record_type}\t{rec.record_id}\t"
                          f"{rec.target_uri or '-'}\t{len(rec.payload)}")
                    if args.payload:
                        sys.stdout.write(rec.payload.decode("utf-8", "replace") + "\n")
                for err in reader.errors:
                    print(f"{path}: offset {err.byte_offset}: {err.message}", file=sys.stderr)
                    status = 1
        except (OSError, WarcFormatError) as exc:
            print(f"{path}: {exc}", file=sys.stderr)
            status = 2
    return status


# langid-train ---------------------------------------------------------------------


def cmd_langid_train(args) -> int:
    from . import langid

    samples = []
    with open(args.data, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            label, sep, text = line.rstrip("\n").partition("\t")
            if not sep:
                print(f"{args.data}:{lineno}: expected 'label<TAB>text'", file=sys.stderr)
                return 2
            samples.append((text, label))
    model = langid.train(samples, epochs=args.epochs, seed=args.seed)
    model.save(args.output)
    print(f"labels={','.join(model.labels)} heldout_accuracy={model.heldout_accuracy:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="webcurate", description="Web-crawl text curation toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run the curation pipeline")
    p.add_argument("inputs", nargs="*", help="input files")
    p.add_argument("--format", choices=("warc", "wet", "jsonl"), default="jsonl")
    p.add_argument("--output", "-o", default="out")
    p.add_argument("--config", help="JSON file with pipeline settings; overrides flags")
    p.add_argument("--filter-config", help="filter thresholds in 'key = value' form")
    p.add_argument("--stages", help=f"comma-separated enabled stages out of {','.join(STAGE_ORDER)}")
    p.add_argument("--dedup-mode", choices=("per_snapshot", "global_iterative"), default="per_snapshot")
    p.add_argument("--blocklist")
    p.add_argument("--lang-model")
    p.add_argument("--lang-scores", help="'id<TAB>label<TAB>score' file")
    p.add_argument("--edu-scores", help="'id<TAB>score' file; enables the score gate")
    p.add_argument("--edu-threshold", type=int, default=3)
    p.add_argument("--token-counter", choices=("whitespace", "bpe"), default="whitespace")
    p.add_argument("--bpe-model", help="merges file for the bpe counter")
    p.add_argument("--shards", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("dedup-sim", help="duplicate multiplicities in random samples")
    p.add_argument("--snapshots", type=int, default=100)
    p.add_argument("--tokens-per-snapshot", type=int, default=1_000_000)
    p.add_argument("--tokens-per-doc", type=int, default=1_000)
    p.add_argument("--fractions", type=float, nargs="+", default=[0.00005, 0.0005, 0.005, 0.05])
    p.add_argument("--replicates", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_dedup_sim)

    p = sub.add_parser("threshold-lab", help="propose thresholds from two corpora")
    p.add_argument("--high", required=True, help="higher-quality corpus (.jsonl or text)")
    p.add_argument("--low", required=True, help="lower-quality corpus")
    p.add_argument("--metric", action="append", required=True)
    p.add_argument("--bins", type=int, default=50)
    p.add_argument("--range", type=float, nargs=2, default=(0.0, 1.0))
    p.add_argument("--quantile", action="store_true")
    p.add_argument("--min-gap", type=float, default=0.01)
    p.add_argument("--json")
    p.set_defaults(func=cmd_threshold_lab)

    p = sub.add_parser("bias-audit", help="subgroup term counts and TF-IDF associations")
    p.add_argument("corpus")
    p.add_argument("--terms", help="comma-separated subgroup terms")
    p.add_argument("--top", type=int, default=20)
    p.add_argument("--json")
    p.set_defaults(func=cmd_bias_audit)

    p = sub.add_parser("pii-scan", help="anonymize emails and public IPs")
    p.add_argument("input")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_pii_scan)

    p = sub.add_parser("warc-cat", help="list the records of WARC/WET files")
    p.add_argument("files", nargs="+")
    p.add_argument("--payload", action="store_true")
    p.set_defaults(func=cmd_warc_cat)

    p = sub.add_parser("langid-train", help="train the toy language classifier")
    p.add_argument("data", help="'label<TAB>text' lines")
    p.add_argument("--output", "-o", required=True)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_langid_train)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
