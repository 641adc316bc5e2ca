"""Turn a graph into sequential views: per-origin path covers and a coarser
motif-condensed level, both rendered as label-token sequences."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from .graphs import Graph, GraphError, NodeRecord


@dataclass(frozen=True)
class Path:
    """Simple path in a graph, anchored at its origin node."""

    origin: int
    nodes: tuple[int, ...]

    def __post_init__(self):
        if not self.nodes or self.nodes[0] != self.origin:
            raise GraphError(f"path must start at its origin {self.origin}")
        if len(set(self.nodes)) != len(self.nodes):
            raise GraphError("path revisits a node")

    @property
    def length(self) -> int:
        return len(self.nodes) - 1

    def edge_set(self) -> frozenset[tuple[int, int]]:
        pairs = zip(self.nodes, self.nodes[1:])
        return frozenset((min(a, b), max(a, b)) for a, b in pairs)

    def check_in(self, g: Graph) -> None:
        for a, b in zip(self.nodes, self.nodes[1:]):
            if not g.has_edge(a, b):
                raise GraphError(f"path step {a}-{b} is not an edge")


@dataclass(frozen=True)
class PathCoverConfig:
    l: int
    minimize: bool = False

    def __post_init__(self):
        if self.l < 1:
            raise ValueError(f"path length bound must be >= 1, got {self.l}")


@dataclass(frozen=True)
class SuperNode:
    id: int
    members: frozenset[int]
    label: str


@dataclass(frozen=True)
class SuperGraph:
    """Condensed view of a graph: one super-node per motif group."""

    base: Graph
    super_nodes: tuple[SuperNode, ...]
    super_edges: tuple[tuple[int, int], ...]

    def member_of(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for sn in self.super_nodes:
            for m in sn.members:
                out[m] = sn.id
        return out

    def as_graph(self) -> Graph:
        nodes = tuple(NodeRecord(sn.id, sn.label) for sn in self.super_nodes)
        return Graph(f"{self.base.name}.super", nodes, self.super_edges)


@dataclass(frozen=True)
class SequenceBundle:
    """Label-token sequences at both levels plus their originating paths."""

    base_sequences: tuple[tuple[str, ...], ...]
    super_sequences: tuple[tuple[str, ...], ...]
    provenance: dict[tuple[str, int], Path] = field(compare=False)

    def to_json(self) -> dict:
        return {
            "base": [list(s) for s in self.base_sequences],
            "super": [list(s) for s in self.super_sequences],
            "provenance": {
                f"{level}:{i}": {"origin": p.origin, "nodes": list(p.nodes)}
                for (level, i), p in sorted(self.provenance.items())
            },
        }


def enumerate_paths(g: Graph, u: int, l: int) -> list[Path]:
    """All simple paths from ``u`` with 1 <= length <= ``l``.

    Emitted in lexicographic order of their node-id sequences (preorder DFS
    over ascending neighbor ids gives exactly that order).
    """
    if l < 1:
        raise ValueError(f"path length bound must be >= 1, got {l}")
    if not g.has_node(u):
        raise GraphError(f"unknown node id {u}")
    out: list[Path] = []
    trail = [u]
    on_trail = {u}

    def walk():
        if len(trail) - 1 >= l:
            return
        for w in g.neighbors(trail[-1]):
            if w in on_trail:
                continue
            trail.append(w)
            on_trail.add(w)
            out.append(Path(u, tuple(trail)))
            walk()
            on_trail.discard(w)
            trail.pop()

    walk()
    return out


def _reduce_cover(paths: list[Path]) -> list[Path]:
    # Greedy pass, longest first: keep a path only if it contributes an edge
    # not already covered by kept paths of the same origin.
    kept: list[Path] = []
    covered: set[tuple[int, int]] = set()
    for p in sorted(paths, key=lambda p: (-p.length, p.nodes)):
        edges = p.edge_set()
        if edges - covered:
            kept.append(p)
            covered |= edges
    kept.sort(key=lambda p: p.nodes)
    return kept


def path_cover(g: Graph, cfg: PathCoverConfig) -> list[Path]:
    """Per-origin path cover: for every node, simple paths of length <= l.

    Guarantees that every edge of the graph is traversed by some returned
    path, and every edge incident to a node appears in a path anchored at
    that node.  With ``minimize`` the per-origin lists drop paths whose edge
    sets are already covered, without weakening either guarantee.
    """
    cover: list[Path] = []
    for nid in sorted(g.node_ids):
        paths = enumerate_paths(g, nid, cfg.l)
        if cfg.minimize:
            paths = _reduce_cover(paths)
        cover.extend(paths)
    return cover


class _UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # Anchor on the smaller root so group ids are stable.
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


def triangles(g: Graph) -> list[tuple[int, int, int]]:
    """All triangles (a, b, c) with a < b < c, each reported once."""
    out = []
    for u, v, _ in g.edges:
        common = set(g.neighbors(u)) & set(g.neighbors(v))
        for w in common:
            if w > v:
                out.append((u, v, w))
    return sorted(out)


def condense_motifs(g: Graph) -> SuperGraph:
    """Merge every maximal group of node-sharing triangles into one
    super-node; nodes outside all triangles become singletons."""
    uf = _UnionFind(g.node_ids)
    for a, b, c in triangles(g):
        uf.union(a, b)
        uf.union(b, c)
    groups: dict[int, list[int]] = {}
    for nid in g.node_ids:
        groups.setdefault(uf.find(nid), []).append(nid)

    labels = g.labels
    super_nodes = []
    member_to_super: dict[int, int] = {}
    for sid, root in enumerate(sorted(groups, key=lambda r: min(groups[r]))):
        members = frozenset(groups[root])
        label = "{" + ",".join(sorted(labels[m] for m in members)) + "}"
        super_nodes.append(SuperNode(sid, members, label))
        for m in members:
            member_to_super[m] = sid

    super_edges: set[tuple[int, int]] = set()
    for u, v, _ in g.edges:
        su, sv = member_to_super[u], member_to_super[v]
        if su != sv:
            super_edges.add((min(su, sv), max(su, sv)))
    return SuperGraph(g, tuple(super_nodes), tuple(sorted(super_edges)))


def _label_tokens(g: Graph, paths: list[Path]) -> list[tuple[str, ...]]:
    labels = g.labels
    return [tuple(labels[n] for n in p.nodes) for p in paths]


def sequentialize(g: Graph, cfg: PathCoverConfig) -> SequenceBundle:
    """Path-cover sequences of the graph and of its motif-condensed view."""
    base_paths = path_cover(g, cfg)
    sgraph = condense_motifs(g).as_graph()
    super_paths = path_cover(sgraph, cfg)
    provenance: dict[tuple[str, int], Path] = {}
    for i, p in enumerate(base_paths):
        provenance[("base", i)] = p
    for i, p in enumerate(super_paths):
        provenance[("super", i)] = p
    return SequenceBundle(
        base_sequences=tuple(_label_tokens(g, base_paths)),
        super_sequences=tuple(_label_tokens(sgraph, super_paths)),
        provenance=provenance,
    )
