"""Weighted gallery graph, spanning tree, and traversal order.

Edge weights are the median similarity of the links between two galleries.
The synchronization path between galleries should follow the most
trustworthy (most similar) links, so the spanning tree minimizes the cost
``1 - weight``, i.e. it is the maximum-similarity spanning tree. Traversal
is breadth-first from the reference gallery.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass
from typing import Mapping

from .links import GalleryPair, Link, LinkSet


@dataclass(frozen=True)
class GraphEdge:
    weight: float  # median link similarity, in (0, 1]
    links: tuple[Link, ...]


@dataclass(frozen=True)
class GalleryGraph:
    nodes: tuple[str, ...]
    edges: Mapping[GalleryPair, GraphEdge]


@dataclass(frozen=True)
class SpanningTree:
    root: str
    edges: tuple[GalleryPair, ...]
    # (parent, child, edge pair key), parents always listed before children
    traversal: tuple[tuple[str, str, GalleryPair], ...]

    @property
    def galleries(self) -> tuple[str, ...]:
        seen = [self.root]
        seen.extend(child for _, child, _ in self.traversal)
        return tuple(seen)


class _UnionFind:
    def __init__(self, items):
        self._parent = {x: x for x in items}

    def find(self, x):
        p = self._parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self._parent[rb] = ra
        return True


def build_graph(links: LinkSet) -> GalleryGraph:
    """One edge per gallery pair holding at least one link; weight = median similarity."""
    edges: dict[GalleryPair, GraphEdge] = {}
    for pair, pair_links in links.by_pair.items():
        if not pair_links:
            continue
        weight = float(statistics.median(l.similarity for l in pair_links))
        edges[pair] = GraphEdge(weight=weight, links=tuple(pair_links))
    return GalleryGraph(nodes=tuple(sorted(links.gallery_ids)), edges=edges)


def _components(graph: GalleryGraph) -> _UnionFind:
    uf = _UnionFind(graph.nodes)
    for a, b in graph.edges:
        uf.union(a, b)
    return uf


def spanning_tree(graph: GalleryGraph, root: str) -> SpanningTree:
    """Kruskal over edge cost ``1 - weight``, restricted to the root's component.

    Equal costs are broken by the lexicographic gallery pair, so the tree is
    deterministic. The traversal is breadth-first from the root with children
    visited in lexicographic order.
    """
    if root not in graph.nodes:
        raise KeyError(f"root gallery {root!r} not in graph")
    ordered = sorted(graph.edges, key=lambda pair: (1.0 - graph.edges[pair].weight, pair))
    uf = _UnionFind(graph.nodes)
    forest: dict[str, list[tuple[str, GalleryPair]]] = {n: [] for n in graph.nodes}
    for pair in ordered:
        a, b = pair
        if uf.union(a, b):
            forest[a].append((b, pair))
            forest[b].append((a, pair))

    tree_edges: list[GalleryPair] = []
    traversal: list[tuple[str, str, GalleryPair]] = []
    visited = {root}
    frontier = [root]
    while frontier:
        nxt: list[str] = []
        for parent in frontier:
            for child, pair in sorted(forest[parent]):
                if child in visited:
                    continue
                visited.add(child)
                tree_edges.append(pair)
                traversal.append((parent, child, pair))
                nxt.append(child)
        frontier = nxt
    return SpanningTree(root=root, edges=tuple(tree_edges), traversal=tuple(traversal))


def unreachable_galleries(graph: GalleryGraph, root: str) -> list[str]:
    """Galleries outside the root's connected component, sorted."""
    uf = _components(graph)
    root_rep = uf.find(root)
    return sorted(n for n in graph.nodes if uf.find(n) != root_rep)


def export_dot(graph: GalleryGraph, tree: SpanningTree | None = None) -> str:
    """Graphviz rendering of the gallery graph, with tree edges drawn bold."""
    tree_pairs = set(tree.edges) if tree is not None else set()
    lines = ["graph galleries {"]
    for node in graph.nodes:
        shape = "box"
        if tree is not None and node == tree.root:
            shape = "ellipse"
        lines.append(f'  "{node}" [shape={shape}];')
    for pair in sorted(graph.edges):
        a, b = pair
        edge = graph.edges[pair]
        style = "penwidth=2.5, color=black" if pair in tree_pairs else "color=gray, style=dashed"
        lines.append(f'  "{a}" -- "{b}" [label="{edge.weight:.3f}", {style}];')
    lines.append("}")
    return "\n".join(lines) + "\n"
