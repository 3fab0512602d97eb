from .cluster import ClusterMap, UnionFind, cluster, cluster_groups, group_postings
from .minhash import (
    DedupParams,
    MinHashSignature,
    bucket_keys,
    match_probability,
    shingle,
    signature,
    signature_values,
)
from .policies import DedupResult, dedup_documents, dedup_global_iterative, dedup_per_snapshot, doc_keys
from .simulate import DuplicateDistribution, expected_multiplicities, simulate_duplicate_distribution
from .variants import LineDedupResult, UrlDedupResult, line_dedup, url_dedup

__all__ = [
    "ClusterMap",
    "DedupParams",
    "DedupResult",
    "DuplicateDistribution",
    "LineDedupResult",
    "MinHashSignature",
    "UnionFind",
    "UrlDedupResult",
    "bucket_keys",
    "cluster",
    "cluster_groups",
    "dedup_documents",
    "dedup_global_iterative",
    "dedup_per_snapshot",
    "doc_keys",
    "expected_multiplicities",
    "group_postings",
    "line_dedup",
    "match_probability",
    "shingle",
    "signature",
    "signature_values",
    "simulate_duplicate_distribution",
    "url_dedup",
]
