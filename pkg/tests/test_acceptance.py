"""End-to-end acceptance checks, one test per criterion.

Each test records a one-line verdict through the ``acceptance`` fixture;
the terminal summary lists all of them after the run.
"""

import io
import json
import random
import time
from pathlib import Path

import mpmath
import numpy as np

from boundary_cases import CASES, evaluate
from corpora import EN, bilingual_corpus, sentences
from oracles import brute_metrics, delta_mean, pairwise_clusters, tfidf_mismatches
from webcurate.bias import tfidf_association
from webcurate.dedup import (
    bucket_keys,
    cluster,
    dedup_documents,
    doc_keys,
    match_probability,
    signature_values,
    simulate_duplicate_distribution,
)
from webcurate.filters import FilterConfig, compute_metrics
from webcurate.langid import language_decision, train
from webcurate.pipeline import STAGE_ORDER, PipelineConfig, read_output, run
from webcurate.records import WarcReader, WarcWriter, http_response

FIX = Path(__file__).parent / "fixtures"
CRAWL = FIX / "crawl"


# 1 --------------------------------------------------------------------------------


LSH_LEVELS = [  # (shared shingles, private shingles per side, Jaccard, target rate)
    (140, 30, 0.70, 0.56),
    (150, 25, 0.75, 0.77),
    (160, 20, 0.80, 0.92),
    (170, 15, 0.85, 0.988),
]
LSH_PAIRS = 10_000


def _fresh_shingles(rng, n):
    return [f"w{v:016x} x y z q" for v in rng.integers(0, 2**63, size=n)]


def test_lsh_detection_rates(acceptance):
    """Pairs of synthetic shingle sets with |A∩B| = c and |A\\B| = |B\\A| = k.

    The signature of a union is the elementwise minimum of the parts'
    signatures, so the shared part is hashed once per pair.
    """
    rng = np.random.default_rng(20240601)
    start = time.perf_counter()
    rates, ok = [], True
    for shared, private, s, target in LSH_LEVELS:
        assert shared / (shared + 2 * private) == s
        hits = 0
        for _ in range(LSH_PAIRS):
            common = signature_values(_fresh_shingles(rng, shared))
            a = np.minimum(common, signature_values(_fresh_shingles(rng, private)))
            b = np.minimum(common, signature_values(_fresh_shingles(rng, private)))
            hits += any(x == y for x, y in zip(bucket_keys(a), bucket_keys(b)))
        rate = hits / LSH_PAIRS
        rates.append(f"s={s}: {rate:.4f} (target {target})")
        ok &= abs(rate - target) <= 0.02
    elapsed = time.perf_counter() - start
    ok &= elapsed < 300
    acceptance.record(1, ok, "; ".join(rates) + f"; {elapsed:.0f}s")
    assert ok


# 2 --------------------------------------------------------------------------------


def test_match_probability_formula(acceptance):
    grid = np.linspace(0.0, 1.0, 1000)
    got = np.array([match_probability(float(s)) for s in grid])
    with mpmath.workdps(50):
        exact = [1 - (1 - mpmath.mpf(float(s)) ** 8) ** 14 for s in grid]
        worst = float(max(abs(mpmath.mpf(g) - e) for g, e in zip(got, exact)))
    monotone = bool(np.all(np.diff(got) >= 0))
    ends = got[0] == 0.0 and got[-1] == 1.0
    ok = worst < 1e-12 and monotone and ends
    acceptance.record(2, ok, f"max error {worst:.2e}, monotone={monotone}, endpoints exact={ends}")
    assert ok


# 3 --------------------------------------------------------------------------------


def _random_corpus(rng: random.Random, pool: list[str]):
    """Up to 200 documents: originals plus copies with a few words edited."""
    bases = [" ".join(rng.sample(pool, 6)) for _ in range(rng.randint(5, 60))]
    docs = {}
    for i in range(rng.randint(20, 200)):
        words = rng.choice(bases).split()
        for _ in range(rng.choice([0, 0, 1, 2, 4, 8])):
            words[rng.randrange(len(words))] = rng.choice(["alpha", "beta", "gamma", "delta", "omega"])
        docs[f"doc{i:04d}"] = " ".join(words)
    return docs


def test_clusters_match_pairwise_oracle(acceptance):
    rng = random.Random(99)
    pool = sentences(EN, 300, 5)
    failures, nontrivial = [], 0
    for trial in range(50):
        docs = _random_corpus(rng, pool)
        keys = {d: doc_keys(t) for d, t in docs.items()}
        postings = sorted((k, d) for d, ks in keys.items() for k in ks)
        got = {frozenset(c) for c in cluster(postings, keys).clusters().values()}
        want = pairwise_clusters(keys)
        kept = set(dedup_documents(docs.items()).kept)
        nontrivial += any(len(c) > 1 for c in want)
        if got != want or kept != {min(c) for c in want}:
            failures.append(trial)
    ok = not failures and nontrivial == 50
    acceptance.record(3, ok, f"50 corpora, {nontrivial} with duplicates, mismatches: {failures or 'none'}")
    assert ok


# 4 --------------------------------------------------------------------------------


FRACTIONS = (0.00005, 0.0005, 0.005, 0.05)
TOTAL_TOKENS = 100 * 1_000_000  # 100 snapshots of 1,000 documents of 1,000 tokens


def test_duplicate_simulator(acceptance):
    worst, ok, unique = 0.0, True, None
    for i, fraction in enumerate(FRACTIONS):
        d = simulate_duplicate_distribution(100, 1_000_000, 1_000, round(fraction * TOTAL_TOKENS), seed=i,
                                            replicates=100)
        for _, _, obs, exp, var in d.merged_bins():
            z = abs(obs - exp) / np.sqrt(var) if var > 0 else (0.0 if obs == exp else np.inf)
            worst = max(worst, z)
            ok &= z <= 3
        if fraction == FRACTIONS[0]:
            unique = d.unique_fraction()
    ok &= unique >= 0.99
    acceptance.record(4, ok, f"largest bin deviation {worst:.2f} sigma; unique at 5e-5: {100 * unique:.2f}%")
    assert ok


# 5 --------------------------------------------------------------------------------


def test_filter_boundaries(acceptance):
    wrong = []
    for case in CASES:
        keep, value = evaluate(case)
        if keep != case.keep or (case.value is not None and value != case.value):
            wrong.append(case.name)
    rules = {c.rule_id for c in CASES if c.rule_id}
    ok = not wrong
    acceptance.record(5, ok, f"{len(CASES) - len(wrong)}/{len(CASES)} cases over {len(rules)} rules; failed: {wrong or 'none'}")
    assert ok


# 6 --------------------------------------------------------------------------------


LINE_PARTS = ["the", "of", "and", "cat", "Cat", "sat", "#", "...", "…", "-", "•", "2024", "x", "to", "with",
              "hello,", "world.", "why?", "yes!", '"quote"', "a", "longerword", "mat"]


def _fuzz_doc(rng: random.Random) -> str:
    lines: list[str] = []
    for _ in range(rng.randint(0, 200)):
        if lines and rng.random() < 0.2:
            lines.append(rng.choice(lines))
        elif rng.random() < 0.1:
            lines.append("")
        else:
            lines.append(" ".join(rng.choice(LINE_PARTS) for _ in range(rng.randint(1, 6))))
    return "\n".join(lines)


def test_metrics_match_brute_force(acceptance):
    rng = random.Random(6)
    fields = None
    mismatched = []
    for i in range(500):
        text = _fuzz_doc(rng)
        got = compute_metrics(text).__dict__
        want = brute_metrics(text)
        fields = len(want)
        if got != want:
            mismatched.append(i)
    ok = not mismatched
    acceptance.record(6, ok, f"500 documents x {fields} metrics; mismatches: {mismatched[:5] or 'none'}")
    assert ok


# 7 --------------------------------------------------------------------------------


def test_bias_tfidf_oracle(acceptance):
    oracle = json.loads((FIX / "bias" / "tfidf_oracle.json").read_text())
    tables = tfidf_association(oracle["corpus"], list(oracle["tables"]))
    problems = tfidf_mismatches(tables, oracle)
    rng = random.Random(7)
    vocab = ["man", "woman", "car", "food", "red", "the", "is", "cooks", "drives", "fast"]
    worst = 0.0
    for _ in range(200):
        corpus = [" ".join(rng.choices(vocab, k=rng.randint(1, 10))) for _ in range(rng.randint(2, 15))]
        for table in [*tfidf_association(corpus, ["man", "woman"]).values(), *tables.values()]:
            if table.rows:
                worst = max(worst, abs(delta_mean(table)))
    ok = not problems and worst <= 1e-9
    acceptance.record(7, ok, f"oracle differences: {problems or 'none'}; largest |mean delta| {worst:.1e}")
    assert ok


# 8 --------------------------------------------------------------------------------


def _crawl_config(out, shards=1):
    return PipelineConfig(
        inputs=[str(CRAWL / "crawl.jsonl")],
        output_dir=str(out),
        stages=dict.fromkeys(STAGE_ORDER, True),
        blocklist=str(CRAWL / "blocklist.txt"),
        lang_scores=str(CRAWL / "lang_scores.tsv"),
        edu_scores=str(CRAWL / "edu_scores.tsv"),
        shard_count=shards,
    )


def _files(out):
    return {p.name: p.read_bytes() for p in sorted(Path(out).iterdir())}


def _reconciles(manifest_path) -> bool:
    data = json.loads(Path(manifest_path).read_text())
    previous = data["input_records"]
    for s in data["stages"]:
        if s["input"] != previous or s["kept"] + s["dropped"] != s["input"] or sum(s["rules"].values()) != s["dropped"]:
            return False
        if s["kept_tokens"] + s["dropped_tokens"] != s["input_tokens"]:
            return False
        previous = s["kept"]
    return previous == data["output"]["records"]


def test_pipeline_determinism_and_conservation(acceptance, tmp_path):
    out = tmp_path / "run"
    run(_crawl_config(out))
    first = _files(out)
    run(_crawl_config(out))
    identical = _files(out) == first
    reconciled = _reconciles(out / "manifest.json")
    records = read_output(out)
    dropped = (out / "dropped.tsv").read_bytes()
    shard_ok = True
    for shards in (4, 16):
        other = tmp_path / f"shards{shards}"
        run(_crawl_config(other, shards))
        shard_ok &= read_output(other) == records and (other / "dropped.tsv").read_bytes() == dropped
        shard_ok &= _reconciles(other / "manifest.json")
    ok = identical and reconciled and shard_ok
    acceptance.record(8, ok, f"byte-identical reruns={identical}, counts reconcile={reconciled}, "
                             f"shards 1/4/16 agree={shard_ok} ({len(records)} records kept)")
    assert ok


# 9 --------------------------------------------------------------------------------


def _random_record(rng: random.Random):
    kind = rng.choice(["warcinfo", "request", "response", "conversion"])
    size = rng.choice([0, 1, 10, 100, 1000, 20_000])
    payload = bytes(rng.getrandbits(8) for _ in range(size))
    if kind == "response" and rng.random() < 0.5:
        payload = http_response(payload)
    uri = None if kind == "warcinfo" else f"https://h{rng.randrange(1000)}.example/{rng.randrange(10**6)}"
    extra = [("WARC-Payload-Digest", f"sha1:{rng.getrandbits(64):x}")] if rng.random() < 0.3 else []
    return kind, payload, uri, extra


def test_warc_round_trip(acceptance):
    rng = random.Random(9)
    round_trip_ok = True
    records = 0
    for compress in (True, False):
        buf = io.BytesIO()
        w = WarcWriter(buf, compress=compress)
        written = []
        for _ in range(500):
            kind, payload, uri, extra = _random_record(rng)
            written.append(w.write(kind, payload, target_uri=uri, headers=extra))
        reader = WarcReader(io.BytesIO(buf.getvalue()), chunk_size=rng.choice([997, 1 << 16]))
        got = list(reader)
        round_trip_ok &= got == written and not reader.errors
        records += len(written)

    positioned = True
    for trial in range(25):
        buf = io.BytesIO()
        w = WarcWriter(buf)
        written = [w.write(*_random_record(rng)[:2]) for _ in range(12)]
        data = bytearray(buf.getvalue())
        bad = sorted(rng.sample(range(12), rng.randint(1, 3)))
        for j in bad:
            start = written[j].byte_offset
            for p in range(start + 12, start + 20):
                data[p] ^= 0xFF
        reader = WarcReader(io.BytesIO(bytes(data)))
        got = [r.record_id for r in reader]
        want = [r.record_id for i, r in enumerate(written) if i not in bad]
        positioned &= got == want and [e.byte_offset for e in reader.errors] == [written[j].byte_offset for j in bad]
    ok = round_trip_ok and records == 1000 and positioned
    acceptance.record(9, ok, f"{records} fuzzed records round-trip={round_trip_ok}; "
                             f"25 corrupted streams with positioned errors={positioned}")
    assert ok


# 10 -------------------------------------------------------------------------------


def test_language_gate(acceptance):
    model = train(bilingual_corpus(), epochs=5, seed=3)
    cfg = FilterConfig()
    at = language_decision("en", 0.65, threshold=cfg.lang_threshold)
    below = language_decision("en", float(np.nextafter(0.65, 0)), threshold=cfg.lang_threshold)
    ok = model.heldout_accuracy >= 0.95 and at and not below
    acceptance.record(10, ok, f"held-out accuracy {model.heldout_accuracy:.3f}; keep at 0.65={at}, "
                              f"keep just below={below}")
    assert ok

