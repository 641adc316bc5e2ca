"""Labeled undirected graphs: parsing, canonical text form, k-hop neighborhoods.

The text format is line oriented.  A document starts with ``graph <name>``,
followed by ``node <id> <label>`` records, followed by
``edge <src> <dst> [<label>]`` records.  Blank lines and lines starting with
``#`` are ignored.  Node ids are decimal non-negative integers.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property


class GraphError(ValueError):
    """A graph document or constructed graph violates a structural rule."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class GraphParseError(GraphError):
    """Malformed record in a graph document."""


class GraphReferenceError(GraphError):
    """An edge endpoint references a node id that was never declared."""


class GraphDuplicateError(GraphError):
    """A node id or an (unordered) edge appears more than once."""


DEFAULT_LABEL = "_"


@dataclass(frozen=True, order=True)
class NodeRecord:
    id: int
    label: str = DEFAULT_LABEL

    def __post_init__(self):
        if self.id < 0:
            raise GraphError(f"node id must be non-negative, got {self.id}")
        if not self.label:
            raise GraphError(f"node {self.id} has an empty label")


# Canonical edge form: (min id, max id, optional label).
Edge = tuple[int, int, str | None]


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable labeled undirected simple graph.

    ``nodes`` keeps construction order; ``edges`` are normalized to
    ascending (min, max) pairs and sorted, so equal graphs serialize to
    identical documents.
    """

    name: str
    nodes: tuple[NodeRecord, ...] = ()
    edges: tuple[Edge, ...] = ()

    def __post_init__(self):
        if not self.name or len(self.name.split()) != 1:
            raise GraphError(f"graph name must be a single token, got {self.name!r}")
        nodes = tuple(self.nodes)
        ids = [n.id for n in nodes]
        idset = set(ids)
        if len(idset) != len(ids):
            dup = next(i for i in ids if ids.count(i) > 1)
            raise GraphDuplicateError(f"duplicate node id {dup}")
        normalized: list[Edge] = []
        seen: set[tuple[int, int]] = set()
        for e in self.edges:
            if len(e) == 2:
                u, v, label = e[0], e[1], None
            else:
                u, v, label = e
            if u == v:
                raise GraphError(f"self-loop on node {u}")
            if u not in idset:
                raise GraphReferenceError(f"edge endpoint {u} is not a declared node")
            if v not in idset:
                raise GraphReferenceError(f"edge endpoint {v} is not a declared node")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise GraphDuplicateError(f"duplicate edge {key[0]}-{key[1]}")
            seen.add(key)
            normalized.append((key[0], key[1], label))
        normalized.sort(key=lambda e: (e[0], e[1]))
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", tuple(normalized))

    def _key(self):
        return (self.name, tuple(sorted(self.nodes)), self.edges)

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def node_ids(self) -> frozenset[int]:
        return frozenset(n.id for n in self.nodes)

    @cached_property
    def labels(self) -> dict[int, str]:
        return {n.id: n.label for n in self.nodes}

    @cached_property
    def adjacency(self) -> dict[int, tuple[int, ...]]:
        adj: dict[int, list[int]] = {n.id: [] for n in self.nodes}
        for u, v, _ in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return {u: tuple(sorted(ws)) for u, ws in adj.items()}

    def has_node(self, u: int) -> bool:
        return u in self.node_ids

    def neighbors(self, u: int) -> tuple[int, ...]:
        try:
            return self.adjacency[u]
        except KeyError:
            raise GraphError(f"unknown node id {u}") from None

    def degree(self, u: int) -> int:
        return len(self.neighbors(u))

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adjacency.get(u, ())

    def edge_pairs(self) -> frozenset[tuple[int, int]]:
        return frozenset((u, v) for u, v, _ in self.edges)


def parse_graph(text: str) -> Graph:
    """Parse a graph document, reporting the offending line on error."""
    name: str | None = None
    nodes: list[NodeRecord] = []
    node_ids: set[int] = set()
    edges: list[Edge] = []
    edge_keys: set[tuple[int, int]] = set()
    section = "header"

    def parse_id(token: str, lineno: int) -> int:
        if not token.isdigit():
            raise GraphParseError(f"expected non-negative integer id, got {token!r}", lineno)
        return int(token)

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(maxsplit=1)
        keyword = parts[0]
        if section == "header":
            if keyword != "graph":
                raise GraphParseError(f"expected 'graph <name>' header, got {keyword!r}", lineno)
            tokens = line.split()
            if len(tokens) != 2:
                raise GraphParseError("graph header takes exactly one name token", lineno)
            name = tokens[1]
            section = "nodes"
            continue
        if keyword == "node":
            if section == "edges":
                raise GraphParseError("node record after edge records", lineno)
            tokens = line.split(maxsplit=2)
            if len(tokens) < 2:
                raise GraphParseError("node record needs an id", lineno)
            nid = parse_id(tokens[1], lineno)
            if nid in node_ids:
                raise GraphDuplicateError(f"duplicate node id {nid}", lineno)
            node_ids.add(nid)
            label = tokens[2].strip() if len(tokens) == 3 else DEFAULT_LABEL
            nodes.append(NodeRecord(nid, label or DEFAULT_LABEL))
        elif keyword == "edge":
            section = "edges"
            tokens = line.split(maxsplit=3)
            if len(tokens) < 3:
                raise GraphParseError("edge record needs two endpoint ids", lineno)
            u = parse_id(tokens[1], lineno)
            v = parse_id(tokens[2], lineno)
            if u == v:
                raise GraphParseError(f"self-loop on node {u}", lineno)
            for endpoint in (u, v):
                if endpoint not in node_ids:
                    raise GraphReferenceError(
                        f"edge endpoint {endpoint} is not a declared node", lineno
                    )
            key = (min(u, v), max(u, v))
            if key in edge_keys:
                raise GraphDuplicateError(f"duplicate edge {key[0]}-{key[1]}", lineno)
            edge_keys.add(key)
            label = tokens[3].strip() if len(tokens) == 4 else None
            edges.append((key[0], key[1], label or None))
        else:
            raise GraphParseError(f"unknown record type {keyword!r}", lineno)

    if name is None:
        raise GraphParseError("empty document: missing 'graph <name>' header", 1)
    return Graph(name, tuple(nodes), tuple(edges))


def serialize_graph(g: Graph) -> str:
    """Canonical document: nodes ascending by id, edges ascending by pair."""
    lines = [f"graph {g.name}"]
    for n in sorted(g.nodes):
        lines.append(f"node {n.id} {n.label}")
    for u, v, label in g.edges:
        if label:
            lines.append(f"edge {u} {v} {label}")
        else:
            lines.append(f"edge {u} {v}")
    return "\n".join(lines) + "\n"


def hop_distances(g: Graph, u: int, limit: int | None = None) -> dict[int, int]:
    """BFS shortest-path hop distances from ``u``, optionally capped."""
    if not g.has_node(u):
        raise GraphError(f"unknown node id {u}")
    dist = {u: 0}
    queue = deque([u])
    while queue:
        x = queue.popleft()
        if limit is not None and dist[x] >= limit:
            continue
        for w in g.neighbors(x):
            if w not in dist:
                dist[w] = dist[x] + 1
                queue.append(w)
    return dist


def khop_subgraph(g: Graph, u: int, l: int) -> Graph:
    """Subgraph induced by all nodes within ``l`` hops of ``u``."""
    if l < 0:
        raise GraphError(f"hop bound must be >= 0, got {l}")
    dist = hop_distances(g, u, limit=l)
    nodes = tuple(n for n in g.nodes if n.id in dist)
    edges = tuple(e for e in g.edges if e[0] in dist and e[1] in dist)
    return Graph(g.name, nodes, edges)
