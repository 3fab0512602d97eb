"""Union-find over bucket-key postings."""

from __future__ import annotations

from collections.abc import Iterable, Iterator
from itertools import groupby


class UnionFind:
    """Disjoint sets whose root is always the smallest member.

    Keeping the minimum as root makes the final partition, and every
    root, independent of the order in which unions arrive.

    >>> uf = UnionFind()
    >>> uf.union("b", "c"); uf.union("c", "a")
    >>> uf.find("b")
    'a'
    """

    def __init__(self):
        self.parent: dict = {}

    def add(self, x) -> None:
        self.parent.setdefault(x, x)

    def __contains__(self, x) -> bool:
        return x in self.parent

    def find(self, x):
        parent = self.parent
        if x not in parent:
            parent[x] = x
            return x
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, x, y) -> None:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return
        if ry < rx:
            rx, ry = ry, rx
        self.parent[ry] = rx


class ClusterMap:
    def __init__(self, uf: UnionFind):
        self._uf = uf
        self.sizes: dict = {}
        for x in list(uf.parent):
            root = uf.find(x)
            self.sizes[root] = self.sizes.get(root, 0) + 1

    @property
    def parent(self) -> dict:
        return self._uf.parent

    def find(self, x):
        return self._uf.find(x)

    def clusters(self) -> dict:
        out: dict = {}
        for x in sorted(self._uf.parent):
            out.setdefault(self._uf.find(x), []).append(x)
        return out

    def kept(self) -> set:
        """One document per cluster: the lexicographically smallest id."""
        return set(self.sizes)

    def removed(self) -> set:
        return {x for x in self._uf.parent if self._uf.find(x) != x}

    def duplicate_clusters(self) -> int:
        return sum(1 for size in self.sizes.values() if size > 1)

    def largest(self) -> int:
        return max(self.sizes.values(), default=0)


def group_postings(sorted_postings: Iterable[tuple[int, str]]) -> Iterator[tuple[int, list[str]]]:
    """Group key-sorted ``(key, doc_id)`` postings into ``(key, doc_ids)``."""
    for key, group in groupby(sorted_postings, key=lambda p: p[0]):
        yield key, [doc_id for _, doc_id in group]


def cluster(postings: Iterable[tuple[int, str]], doc_ids: Iterable[str] = ()) -> ClusterMap:
    """Union every pair of documents that share a bucket key.

    ``doc_ids`` registers documents that may have no collisions so they
    show up as singleton clusters.
    """
    uf = UnionFind()
    for doc_id in doc_ids:
        uf.add(doc_id)
    first: dict[int, str] = {}
    for key, doc_id in postings:
        uf.add(doc_id)
        holder = first.setdefault(key, doc_id)
        if holder != doc_id:
            uf.union(holder, doc_id)
    return ClusterMap(uf)


def cluster_groups(groups: Iterable[tuple[int, list[str]]], doc_ids: Iterable[str] = ()) -> ClusterMap:
    """Reduce step over grouped postings (e.g. from a merge of spill files)."""
    uf = UnionFind()
    for doc_id in doc_ids:
        uf.add(doc_id)
    for _, members in groups:
        head = members[0]
        uf.add(head)
        for other in members[1:]:
            uf.union(head, other)
    return ClusterMap(uf)
