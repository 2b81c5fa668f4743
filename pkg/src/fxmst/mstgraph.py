"""Minimal spanning trees over the correlation distance ``sqrt((1 - C)/2)``."""

from __future__ import annotations

import io
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidCorrelationError

CLAMP_TOL = 1e-12

GROUP_COLORS = {
    "A_STAR": "#d62728",
    "A": "#1f77b4",
    "B": "#2ca02c",
    "C": "#ff7f0e",
    "METAL": "#bcbd22",
    "FICTITIOUS": "#7f7f7f",
    None: "#ffffff",
}


class UnionFind:
    """Disjoint sets with path compression and union by rank."""

    def __init__(self, n):
        self.parent = list(range(n))
        self.rank = [0] * n
        self.components = n

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x, y):
        """Merge the sets of ``x`` and ``y``; False if they were already joined."""
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return False
        if self.rank[rx] < self.rank[ry]:
            rx, ry = ry, rx
        self.parent[ry] = rx
        if self.rank[rx] == self.rank[ry]:
            self.rank[rx] += 1
        self.components -= 1
        return True


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    currencies: tuple
    entries: np.ndarray
    base: str | None = None
    degenerate: tuple = ()

    @property
    def N(self):
        return len(self.currencies)


@dataclass(frozen=True, eq=False)
class MstTree:
    base: str | None
    nodes: tuple
    edges: tuple  # (a, b, distance) with a < b, in acceptance order
    multiplicities: dict
    flagged: tuple = field(default=())

    @property
    def N(self):
        return len(self.nodes)

    def weight(self):
        return sum(d for _, _, d in self.edges)

    def edge_set(self):
        return {(a, b) for a, b, _ in self.edges}


def distances(C):
    """Entrywise ``d = sqrt((1 - C)/2)`` with a zero diagonal.

    Entries outside ``[-1, 1]`` by no more than 1e-12 are clamped; anything
    further out is rejected.
    """
    entries = np.asarray(C.entries, dtype=float)
    if np.any(entries > 1.0 + CLAMP_TOL) or np.any(entries < -1.0 - CLAMP_TOL):
        raise InvalidCorrelationError("correlation entries outside [-1, 1]")
    entries = np.clip(entries, -1.0, 1.0)
    D = np.sqrt((1.0 - entries) / 2.0)
    np.fill_diagonal(D, 0.0)
    D.setflags(write=False)
    return DistanceMatrix(tuple(C.currencies), D, getattr(C, "base", None), tuple(getattr(C, "degenerate", ())))


def build_mst(D):
    """Kruskal's algorithm on the complete graph of ``D``.

    Candidate edges are taken in ascending ``(distance, min code, max code)``
    order, which makes the tree unique even when distances tie.
    """
    codes = tuple(D.currencies)
    n = len(codes)
    if n < 2:
        raise ValueError("a spanning tree needs at least 2 nodes")
    W = np.asarray(D.entries, dtype=float)
    iu, ju = np.triu_indices(n, k=1)
    lo = [min(codes[i], codes[j]) for i, j in zip(iu, ju)]
    hi = [max(codes[i], codes[j]) for i, j in zip(iu, ju)]
    order = sorted(range(len(iu)), key=lambda e: (W[iu[e], ju[e]], lo[e], hi[e]))
    uf = UnionFind(n)
    edges = []
    degree = Counter()
    for e in order:
        i, j = int(iu[e]), int(ju[e])
        if uf.union(i, j):
            edges.append((lo[e], hi[e], float(W[i, j])))
            degree[codes[i]] += 1
            degree[codes[j]] += 1
            if len(edges) == n - 1:
                break
    flagged = tuple(c for c, f in zip(codes, D.degenerate) if f) if D.degenerate else ()
    return MstTree(D.base, codes, tuple(edges), {c: degree[c] for c in codes}, flagged)


def tree_from_correlation(C):
    return build_mst(distances(C))


# ---------------------------------------------------------------------------
# Export


def export_dot(tree, groups=None, colors=None):
    """Graphviz text for ``tree``: nodes coloured by group, edges labelled with distance."""
    colors = {**GROUP_COLORS, **(colors or {})}
    name = f"MST_{tree.base}" if tree.base else "MST"
    lines = [f'graph "{name}" {{', "  node [shape=ellipse, style=filled];"]
    flagged = set(tree.flagged)
    for code in sorted(tree.nodes):
        group = groups.get(code) if groups is not None else None
        key = group.value if group is not None else None
        attrs = [f'label="{code}"', f'fillcolor="{colors.get(key, colors[None])}"']
        if code in flagged:
            attrs.append('style="filled,dashed"')
        lines.append(f'  "{code}" [{", ".join(attrs)}];')
    for a, b, d in tree.edges:
        lines.append(f'  "{a}" -- "{b}" [label="{d:.4f}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def dumps_edges(tree):
    buf = io.StringIO()
    buf.write("A,B,distance\n")
    for a, b, d in tree.edges:
        buf.write(f"{a},{b},{d!r}\n")
    return buf.getvalue()


def dumps_multiplicities(tree):
    buf = io.StringIO()
    buf.write("code,K\n")
    for code in sorted(tree.nodes):
        buf.write(f"{code},{tree.multiplicities[code]}\n")
    return buf.getvalue()
