"""Per-snapshot and iterative-global MinHash deduplication."""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

from .cluster import UnionFind, cluster
from .minhash import DedupParams, bucket_keys, shingle, signature_values


@dataclass
class DedupResult:
    kept: list[str] = field(default_factory=list)
    removed: list[str] = field(default_factory=list)
    # too short to shingle; kept without comparison
    exempt: list[str] = field(default_factory=list)
    duplicate_clusters: int = 0
    largest_cluster: int = 0


def _id_text(doc) -> tuple[str, str]:
    if isinstance(doc, tuple):
        return doc[0], doc[1]
    return doc.id, doc.text


def doc_keys(text: str, params: DedupParams = DedupParams()) -> list[int] | None:
    """The document's bucket keys, or None when it has fewer than n words."""
    shingles = shingle(text, params.ngram_size)
    if not shingles:
        return None
    return bucket_keys(signature_values(shingles, params), params)


def dedup_documents(docs: Iterable, params: DedupParams = DedupParams()) -> DedupResult:
    """Cluster one collection and keep the smallest id of each cluster.

    ``docs`` yields Documents or ``(doc_id, text)`` pairs.
    """
    result = DedupResult()
    postings = []
    ids = []
    for doc in docs:
        doc_id, text = _id_text(doc)
        keys = doc_keys(text, params)
        if keys is None:
            result.exempt.append(doc_id)
            continue
        ids.append(doc_id)
        postings.extend((k, doc_id) for k in keys)
    postings.sort()
    cmap = cluster(postings, ids)
    removed = cmap.removed()
    result.kept = sorted(set(ids) - removed)
    result.removed = sorted(removed)
    result.exempt.sort()
    result.duplicate_clusters = cmap.duplicate_clusters()
    result.largest_cluster = cmap.largest()
    return result


def dedup_per_snapshot(docs: Iterable, params: DedupParams = DedupParams()) -> dict[str, DedupResult]:
    """Deduplicate each dump on its own; cross-dump copies all survive."""
    by_dump: dict[str, list] = {}
    for doc in docs:
        by_dump.setdefault(doc.dump, []).append(doc)
    return {dump: dedup_documents(group, params) for dump, group in sorted(by_dump.items())}


def dedup_global_iterative(snapshots: Sequence[Iterable], params: DedupParams = DedupParams()) -> DedupResult:
    """Process snapshots newest first, each against everything seen so far.

    The bucket index holds every processed document, including ones that
    were themselves removed, so a chain of near-duplicates through an older
    copy still links newer documents. Union-find nodes are ``(rank, id)``:
    the smaller tuple is the newer dump, then the smaller id, so the root of
    a cluster is always the document the policy keeps.
    """
    result = DedupResult()
    uf = UnionFind()
    first: dict[int, tuple[int, str]] = {}
    removed: list[str] = []
    kept: list[str] = []
    for rank, snapshot in enumerate(snapshots):
        nodes = []
        for doc in snapshot:
            doc_id, text = _id_text(doc)
            keys = doc_keys(text, params)
            if keys is None:
                result.exempt.append(doc_id)
                continue
            node = (rank, doc_id)
            uf.add(node)
            nodes.append(node)
            for key in keys:
                holder = first.setdefault(key, node)
                if holder != node:
                    uf.union(holder, node)
        for node in nodes:
            (removed if uf.find(node) != node else kept).append(node[1])
    sizes: dict = {}
    for node in list(uf.parent):
        root = uf.find(node)
        sizes[root] = sizes.get(root, 0) + 1
    result.kept = sorted(kept)
    result.removed = sorted(removed)
    result.exempt.sort()
    result.duplicate_clusters = sum(1 for s in sizes.values() if s > 1)
    result.largest_cluster = max(sizes.values(), default=0)
    return result
