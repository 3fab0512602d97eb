"""Regenerate the 100-document fixture crawl.

Every document is written to fail exactly one stage (or none), and its
expected fate is recorded in expected.tsv as ``id  stage  rule``; kept
documents have an empty stage. Run from this directory:

    python make_crawl.py
"""

from __future__ import annotations

import json
import random
import sys
import uuid
from pathlib import Path

HERE = Path(__file__).resolve().parent
sys.path.insert(0, str(HERE.parents[1]))

from corpora import DE, EN, sentences  # noqa: E402
from webcurate.filters import FilterConfig, compute_metrics, gopher_quality, gopher_repetition  # noqa: E402

MAIN_DUMP = "CC-MAIN-2023-50"
OLD_DUMP = "CC-MAIN-2023-40"

pool = iter(sentences(EN, 1200, 2024))
german = iter(sentences(DE, 200, 77))
docs: list[dict] = []
expected: list[tuple[str, str, str]] = []
lang: dict[str, tuple[str, float]] = {}
edu: dict[str, str] = {}


def doc_id(n: int) -> str:
    # ids sort in creation order, so an original always wins its dedup cluster
    return f"<urn:uuid:{uuid.UUID(int=(0x4000 << 64) + n)}>"


def add(text: str, stage: str = "", rule: str = "", *, url: str | None = None, dump: str = MAIN_DUMP,
        label: str = "en", score: float = 0.93, edu_score: str | None = "4") -> str:
    n = len(docs)
    did = doc_id(n)
    docs.append({
        "text": text,
        "id": did,
        "dump": dump,
        "url": url or f"https://site{n:03d}.example.org/page/{n}",
        "date": "2023-12-01T10:00:00Z",
        "file_path": f"s3://commoncrawl/crawl-data/{dump}/segments/fixture/warc/part-{n // 25:05d}.warc.gz",
        "language": None,
        "language_score": None,
        "token_count": None,
    })
    expected.append((did, stage, rule))
    lang[did] = (label, score)
    if edu_score is not None:
        edu[did] = edu_score
    return did


def passes_gopher(text: str) -> bool:
    """Template sentences occasionally share a 5-gram; such candidates are
    redrawn so that a document only fails the stage it was written for."""
    m = compute_metrics(text)
    return gopher_quality(m, FilterConfig()).keep and gopher_repetition(m, FilterConfig()).keep


def good_text(k: int = 8) -> str:
    while True:
        text = "\n".join(next(pool) for _ in range(k))
        if passes_gopher(text):
            return text


# kept: ordinary English articles ------------------------------------------------
good_texts = [good_text() for _ in range(38)]
for t in good_texts:
    add(t)
# boundary cases that stay in
add(good_text(), score=0.65)  # language gate is inclusive
add(good_text(), edu_score="2.5")  # rounds half up to 3
add(good_text() + "\nWrite to the editor at jo.smith@news-site.org today.", edu_score="3")
add(good_text() + "\nThe mirror lives at 8.8.4.4 while staff use 10.1.2.3 inside.")
# copies of kept articles in an older dump survive per-snapshot dedup
for t in good_texts[:3]:
    add(t, dump=OLD_DUMP)

# url ------------------------------------------------------------------------------
for i in range(5):
    add(good_text(), "url", "url_domain", url=f"http://{'www.' if i % 2 else ''}casino-{i % 2}.example.com/x{i}")
for i in range(3):
    add(good_text(), "url", "url_pattern", url=f"https://shop{i}.example.net/free-porn-{i}.html")

# language ---------------------------------------------------------------------------
for i in range(8):
    add("\n".join(next(german) for _ in range(8)), "language", "lang_other", label="de", score=0.97)
add(good_text(), "language", "lang_score", score=0.64)
add(good_text(), "language", "lang_score", score=0.3)

# gopher quality ---------------------------------------------------------------------
for i in range(4):
    add(next(pool) + "\n" + next(pool), "gopher_quality", "min_words")
for i in range(2):
    lines = good_text().split("\n")
    add("\n".join(f"#tag{j} #news {line}" for j, line in enumerate(lines)), "gopher_quality", "symbol_word_ratio")
for i in range(2):
    lines = good_text(10).split("\n")
    add("\n".join(f"- {line}" for line in lines), "gopher_quality", "bullet_lines")
for i in range(2):
    lines = good_text().split("\n")
    nums = " ".join(str(1000 + 7 * j) for j in range(12))
    add("\n".join(f"{line} {nums}" for line in lines), "gopher_quality", "alpha_words")

# gopher repetition ---------------------------------------------------------------------
for i in range(3):
    lines = good_text(6).split("\n")
    add("\n".join(lines + lines[:3]), "gopher_repetition", "dup_line_frac")

# dedup: copies inside the same dump ----------------------------------------------------
for t in good_texts[3:7]:
    add(t, "dedup", "minhash_duplicate")
for t in good_texts[7:9]:
    words = t.split(" ")
    words[len(words) // 2] = "suddenly"
    add(" ".join(words), "dedup", "minhash_duplicate")

# c4 ------------------------------------------------------------------------------------
for i in range(2):
    add(good_text() + "\nLorem ipsum dolor sit amet, consectetur adipiscing elit.", "c4", "c4_lorem_ipsum")
for i in range(2):
    add(good_text() + "\nThe config block {debug: true} was left in the page.", "c4", "c4_curly_bracket")
for i in range(3):
    while True:
        keep = "\n".join(next(pool) for _ in range(4))
        noise = "\n".join(f"JavaScript notice: {next(pool)}" for _ in range(5))
        if passes_gopher(keep + "\n" + noise):
            break
    add(keep + "\n" + noise, "c4", "c4_min_sentences")

# fineweb custom -----------------------------------------------------------------------
for i in range(3):
    # sentences end mid-line; no line ends with punctuation
    while True:
        body = [next(pool) for _ in range(8)]
        text = "\n".join(f"{body[j]} {body[j + 1][:-1]}" for j in range(0, 8, 2))
        if passes_gopher(text):
            break
    add(text, "fineweb_custom", "fw_punct_lines")
for i in range(2):
    lines = good_text(5).split("\n")
    repeated = "Freshly brewed peppermint tea was served steaming."
    add("\n".join(lines[:2] + [repeated] + lines[2:] + [repeated]), "fineweb_custom", "fw_dup_line_chars")
for i in range(3):
    rng = random.Random(i)
    adjs = ["Brave", "Sleepy", "Clever", "Hungry", "Gentle", "Curious", "Noisy", "Patient"]
    nouns = ["otters", "ravens", "badgers", "herons", "beavers", "weasels", "pigeons", "rabbits"]
    verbs = ["swim", "wander", "gather", "listen", "whistle", "travel", "rest", "dance"]
    advs = ["slowly", "quietly", "often", "together", "happily", "outside", "early", "nightly"]
    short: list[str] = []
    while len(short) < 14:
        line = f"{rng.choice(adjs)} {rng.choice(nouns)} {rng.choice(verbs)} {rng.choice(advs)}."
        if len(line) < 30 and line not in short:
            short.append(line)
    add(next(pool) + "\n" + "\n".join(short), "fineweb_custom", "fw_short_lines")

# score gate ---------------------------------------------------------------------------
add(good_text(), "score_gate", "edu_score", edu_score="2.4")
add(good_text(), "score_gate", "edu_score", edu_score="1")
add(good_text(), "score_gate", "unscored", edu_score=None)


if __name__ == "__main__":
    assert len(docs) == 100, len(docs)
    with open(HERE / "crawl.jsonl", "w", encoding="utf-8") as fh:
        for d in docs:
            fh.write(json.dumps(d, ensure_ascii=False) + "\n")
    with open(HERE / "expected.tsv", "w", encoding="utf-8") as fh:
        for row in expected:
            fh.write("\t".join(row) + "\n")
    with open(HERE / "lang_scores.tsv", "w", encoding="utf-8") as fh:
        for did, (label, score) in lang.items():
            fh.write(f"{did}\t{label}\t{score}\n")
    with open(HERE / "edu_scores.tsv", "w", encoding="utf-8") as fh:
        for did, score in edu.items():
            fh.write(f"{did}\t{score}\n")
    (HERE / "blocklist.txt").write_text(
        "# fixture blocklist\ndomain: casino-0.example.com\ndomain: casino-1.example.com\npattern: porn\n",
        encoding="utf-8",
    )
    print(f"wrote {len(docs)} documents")
