"""Registry of graph-analysis APIs: embedded descriptions, vector-index
retrieval, and the built-in executable tools behind the demo scenarios.

Registry file format, one api per record:

    api <id>
    desc <free text>
    in <graph|graph-pair|value|none>
    out <graph|value|report>
    exec <tag>
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import taumg
from .chains import ApiCall, ChainError, ref_index
from .embedding import EMBED_DIM, EmbeddingBackend, HashingEmbedder
from .graphs import Graph, parse_graph, serialize_graph, hop_distances
from .matching import graph_similarity
from .taumg import VectorSet, greedy_search

INPUT_KINDS = ("graph", "graph-pair", "value", "none")
OUTPUT_KINDS = ("graph", "value", "report")

# Chemical element symbols recognized by the molecule/social classifier.
ELEMENTS = {
    "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne", "Na", "Mg", "Al",
    "Si", "P", "S", "Cl", "Ar", "K", "Ca", "Fe", "Cu", "Zn", "Br", "I",
}


class RegistryError(ValueError):
    pass


class DuplicateApiError(RegistryError):
    pass


class UnknownApiError(RegistryError):
    pass


class EmptyRegistryError(RegistryError):
    pass


class ExecutionError(RuntimeError):
    """A tool invocation failed (bad argument, type mismatch, missing api)."""


@dataclass(frozen=True)
class ApiSpec:
    id: str
    description: str
    input_kind: str
    output_kind: str
    executable: str

    def __post_init__(self):
        if not self.id:
            raise RegistryError("api id must be non-empty")
        if not self.description:
            raise RegistryError(f"api {self.id} needs a description")
        if self.input_kind not in INPUT_KINDS:
            raise RegistryError(f"api {self.id}: bad input kind {self.input_kind!r}")
        if self.output_kind not in OUTPUT_KINDS:
            raise RegistryError(f"api {self.id}: bad output kind {self.output_kind!r}")


@dataclass(frozen=True)
class ApiResult:
    kind: str  # graph | value | report
    value: object

    def render(self) -> str:
        if self.kind == "graph":
            return serialize_graph(self.value).rstrip("\n")
        if self.kind == "report":
            return str(self.value)
        return json.dumps(self.value, sort_keys=True)


@dataclass
class StepOutput:
    api: str
    result: ApiResult


@dataclass
class ExecutionContext:
    """State threaded through one chain execution."""

    graph: Graph
    store: "GraphStore"
    outputs: list[StepOutput] = field(default_factory=list)


class GraphStore:
    """Directory of graph documents, loaded once and ordered by name."""

    def __init__(self, graphs: dict[str, Graph] | None = None):
        self._graphs = dict(sorted((graphs or {}).items()))

    @classmethod
    def from_dir(cls, path) -> "GraphStore":
        graphs = {}
        for p in sorted(Path(path).glob("*.graph")):
            g = parse_graph(p.read_text())
            graphs[g.name] = g
        return cls(graphs)

    def __len__(self) -> int:
        return len(self._graphs)

    def items(self):
        return list(self._graphs.items())

    def get(self, name: str) -> Graph | None:
        return self._graphs.get(name)


class ApiRegistry:
    """Api specs plus their description embeddings; retrieval goes through a
    lazily (re)built tau-MG index over the embeddings."""

    def __init__(self, embedder: EmbeddingBackend | None = None):
        self.embedder = embedder or HashingEmbedder(EMBED_DIM)
        self._specs: dict[str, ApiSpec] = {}
        self._vectors: dict[str, np.ndarray] = {}
        self._lock = threading.Lock()
        self._index: tuple[VectorSet, taumg.TauMgIndex, list[str]] | None = None

    def __len__(self) -> int:
        return len(self._specs)

    def __contains__(self, api_id: str) -> bool:
        return api_id in self._specs

    def get(self, api_id: str) -> ApiSpec:
        try:
            return self._specs[api_id]
        except KeyError:
            raise UnknownApiError(f"unknown api {api_id!r}") from None

    def specs(self) -> list[ApiSpec]:
        return list(self._specs.values())

    def embed_text(self, text: str) -> np.ndarray:
        return self.embedder.embed(text)

    def register(self, spec: ApiSpec) -> None:
        with self._lock:
            if spec.id in self._specs:
                raise DuplicateApiError(f"api {spec.id!r} is already registered")
            self._specs[spec.id] = spec
            self._vectors[spec.id] = self.embedder.embed(spec.description)
            self._index = None  # rebuilt lazily before the next retrieval

    def _ensure_index(self):
        index = self._index
        if index is not None:
            return index
        with self._lock:
            if self._index is None:
                ids = list(self._specs)
                dset = VectorSet(np.array([self._vectors[i] for i in ids]))
                tau = taumg.default_tau(dset)
                built = taumg.build(dset, tau)
                self._index = (dset, built, ids)
            return self._index

    def retrieve_by_vector(self, vec: np.ndarray, k: int) -> list[tuple[ApiSpec, float]]:
        if not self._specs:
            raise EmptyRegistryError("no apis registered")
        dset, built, ids = self._ensure_index()
        k = min(k, len(ids))
        beam = max(taumg.DEFAULT_BEAM, k)
        hits = greedy_search(dset, built, vec, beam=beam, k=k)
        # Unit vectors: cosine = 1 - d^2/2, so euclidean rank = cosine rank.
        out = [(self.get(ids[r.id]), 1.0 - r.distance**2 / 2.0) for r in hits]
        out.sort(key=lambda pair: (-pair[1], pair[0].id))
        return out

    def retrieve(self, question: str, k: int) -> list[tuple[ApiSpec, float]]:
        if not self._specs:
            raise EmptyRegistryError("no apis registered")
        return self.retrieve_by_vector(self.embed_text(question), k)


# ---------------------------------------------------------------------------
# Built-in tools
# ---------------------------------------------------------------------------


def _resolve_args(call: ApiCall, ctx: ExecutionContext) -> dict[str, object]:
    resolved: dict[str, object] = {}
    for name, value in call.args:
        k = ref_index(value)
        if k is None:
            resolved[name] = value
        else:
            if k >= len(ctx.outputs):
                raise ExecutionError(
                    f"{call.api}: argument {name}=${k} references a step that has not run"
                )
            resolved[name] = ctx.outputs[k].result
    return resolved


def _input_graph(ctx: ExecutionContext, args: dict) -> Graph:
    value = args.get("graph")
    if value is None:
        return ctx.graph
    if isinstance(value, ApiResult):
        if value.kind != "graph":
            raise ExecutionError(f"graph argument resolved to a {value.kind} output")
        return value.value
    raise ExecutionError("graph argument must be a $k reference to a graph output")


def _tool_load_graph(ctx, args):
    return ApiResult("graph", ctx.graph)


def _tool_node_count(ctx, args):
    return ApiResult("value", _input_graph(ctx, args).n_nodes)


def _tool_edge_count(ctx, args):
    return ApiResult("value", _input_graph(ctx, args).n_edges)


def _tool_degree_stats(ctx, args):
    g = _input_graph(ctx, args)
    if g.n_nodes == 0:
        return ApiResult("value", {"min": 0, "mean": 0.0, "max": 0})
    degrees = [g.degree(n.id) for n in g.nodes]
    return ApiResult(
        "value",
        {"min": min(degrees), "mean": round(sum(degrees) / len(degrees), 6), "max": max(degrees)},
    )


def _components(g: Graph) -> list[list[int]]:
    seen: set[int] = set()
    comps = []
    for nid in sorted(g.node_ids):
        if nid in seen:
            continue
        dist = hop_distances(g, nid)
        comp = sorted(dist)
        seen.update(comp)
        comps.append(comp)
    return comps


def _tool_connected_components(ctx, args):
    g = _input_graph(ctx, args)
    comps = _components(g)
    return ApiResult("value", {"count": len(comps), "components": comps})


def _find_by_label(g: Graph, label: str) -> int:
    for n in sorted(g.nodes):
        if n.label == label:
            return n.id
    raise ExecutionError(f"no node labeled {label!r}")


def _tool_shortest_path(ctx, args):
    g = _input_graph(ctx, args)
    src, dst = args.get("src"), args.get("dst")
    if not isinstance(src, str) or not isinstance(dst, str):
        raise ExecutionError("shortest_path needs src=<label> and dst=<label>")
    a, b = _find_by_label(g, src), _find_by_label(g, dst)
    dist = hop_distances(g, a)
    return ApiResult("value", {"src": src, "dst": dst, "hops": dist.get(b)})


def classify_graph(g: Graph) -> str:
    """Molecule when all labels are element symbols and degree stays <= 4,
    otherwise social."""
    if g.n_nodes == 0:
        return "social"
    if all(n.label in ELEMENTS for n in g.nodes) and all(
        g.degree(n.id) <= 4 for n in g.nodes
    ):
        return "molecule"
    return "social"


def _tool_classify_graph(ctx, args):
    return ApiResult("value", classify_graph(_input_graph(ctx, args)))


def _tool_similarity_search(ctx, args):
    g = _input_graph(ctx, args)
    j = args.get("j", "2")
    if isinstance(j, ApiResult):
        raise ExecutionError("similarity_search argument j must be a literal integer")
    try:
        top = int(j)
    except ValueError:
        raise ExecutionError(f"similarity_search argument j={j!r} is not an integer") from None
    scored = [
        {"name": name, "similarity": round(graph_similarity(g, other), 6)}
        for name, other in ctx.store.items()
    ]
    scored.sort(key=lambda r: (-r["similarity"], r["name"]))
    return ApiResult("value", scored[:top])


def _tool_detect_suspect_edges(ctx, args):
    g = _input_graph(ctx, args)
    suspects = []
    for u, v, _ in g.edges:
        trimmed = Graph(g.name, g.nodes, tuple(e for e in g.edges if (e[0], e[1]) != (u, v)))
        if hop_distances(trimmed, u, limit=2).get(v) is not None:
            suspects.append({"src": u, "dst": v})
    return ApiResult("value", suspects)


def _parse_edge_list(value: object) -> list[tuple[int, int]]:
    if isinstance(value, ApiResult):
        if value.kind != "value" or not isinstance(value.value, list):
            raise ExecutionError("edge list reference must point at a detected-edge output")
        return [(int(e["src"]), int(e["dst"])) for e in value.value]
    pairs = []
    for part in str(value).split(","):
        part = part.strip()
        if not part:
            continue
        bits = part.split("-")
        if len(bits) != 2:
            raise ExecutionError(f"bad edge literal {part!r} (expected u-v)")
        pairs.append((int(bits[0]), int(bits[1])))
    return pairs


def _tool_edit_edges(ctx, args):
    g = _input_graph(ctx, args)
    removals = {tuple(sorted(p)) for p in _parse_edge_list(args.get("remove", ""))}
    additions = [tuple(sorted(p)) for p in _parse_edge_list(args.get("add", ""))]
    edges = [e for e in g.edges if (e[0], e[1]) not in removals]
    present = {(e[0], e[1]) for e in edges}
    for u, v in additions:
        if (u, v) not in present:
            edges.append((u, v, None))
            present.add((u, v))
    return ApiResult("graph", Graph(g.name, g.nodes, tuple(edges)))


def _tool_report(ctx, args):
    lines = [f"Report for graph '{ctx.graph.name}'"]
    for i, out in enumerate(ctx.outputs):
        lines.append(f"{i}. {out.api}: {out.result.render()}")
    return ApiResult("report", "\n".join(lines))


_TOOLS = {
    "load_graph": _tool_load_graph,
    "node_count": _tool_node_count,
    "edge_count": _tool_edge_count,
    "degree_stats": _tool_degree_stats,
    "connected_components": _tool_connected_components,
    "shortest_path": _tool_shortest_path,
    "classify_graph": _tool_classify_graph,
    "similarity_search": _tool_similarity_search,
    "detect_suspect_edges": _tool_detect_suspect_edges,
    "edit_edges": _tool_edit_edges,
    "report": _tool_report,
}


def execute(registry: ApiRegistry, call: ApiCall, ctx: ExecutionContext) -> ApiResult:
    """Run one call against the context; deterministic, and side-effect-free
    except for what the caller does with the returned result."""
    spec = registry.get(call.api)
    tool = _TOOLS.get(spec.executable)
    if tool is None:
        raise ExecutionError(f"api {call.api!r} has no runnable backend ({spec.executable})")
    args = _resolve_args(call, ctx)
    result = tool(ctx, args)
    if result.kind != spec.output_kind:
        raise ExecutionError(
            f"api {call.api!r} produced a {result.kind} but declares {spec.output_kind}"
        )
    return result


def run_chain_step(registry: ApiRegistry, call: ApiCall, ctx: ExecutionContext) -> ApiResult:
    result = execute(registry, call, ctx)
    ctx.outputs.append(StepOutput(call.api, result))
    return result


# ---------------------------------------------------------------------------
# Shipped registry and persistence
# ---------------------------------------------------------------------------


def builtin_specs() -> list[ApiSpec]:
    mk = ApiSpec
    return [
        mk("load_graph", "Load the uploaded user graph so later steps can analyze it.",
           "none", "graph", "load_graph"),
        mk("node_count", "Count how many nodes the graph has.",
           "graph", "value", "node_count"),
        mk("edge_count", "Count how many edges the graph has.",
           "graph", "value", "edge_count"),
        mk("degree_stats", "Compute the minimum, mean, and maximum node degree of the graph.",
           "graph", "value", "degree_stats"),
        mk("connected_components",
           "Count the connected components and communities of the graph and list the nodes of each component.",
           "graph", "value", "connected_components"),
        mk("shortest_path",
           "Find the shortest path hop distance between two labeled nodes using breadth first search.",
           "graph", "value", "shortest_path"),
        mk("classify_graph", "Predict whether the graph is a chemical molecule or a social network.",
           "graph", "value", "classify_graph"),
        mk("similarity_search",
           "Search the molecule graph store for the graphs most similar to the uploaded graph and rank the top matches.",
           "graph", "value", "similarity_search"),
        mk("detect_suspect_edges",
           "Detect suspect incorrect edges whose endpoints stay connected within two hops after removing the edge.",
           "graph", "value", "detect_suspect_edges"),
        mk("edit_edges", "Edit the graph by applying a list of edge additions and removals.",
           "graph", "graph", "edit_edges"),
        mk("report", "Assemble the outputs of the previous steps into a brief text report.",
           "value", "report", "report"),
    ]


def builtin_registry(embedder: EmbeddingBackend | None = None) -> ApiRegistry:
    registry = ApiRegistry(embedder)
    for spec in builtin_specs():
        registry.register(spec)
    return registry


def parse_registry(text: str) -> list[ApiSpec]:
    specs = []
    record: dict[str, str] = {}

    def flush():
        if not record:
            return
        try:
            specs.append(
                ApiSpec(
                    id=record["api"],
                    description=record["desc"],
                    input_kind=record["in"],
                    output_kind=record["out"],
                    executable=record["exec"],
                )
            )
        except KeyError as missing:
            raise RegistryError(f"api record {record.get('api', '?')!r} is missing {missing}") from None
        record.clear()

    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, rest = line.partition(" ")
        if key == "api":
            flush()
        if key not in ("api", "desc", "in", "out", "exec"):
            raise RegistryError(f"unknown registry field {key!r}")
        record[key] = rest.strip()
    flush()
    return specs


def serialize_registry(specs: list[ApiSpec]) -> str:
    blocks = []
    for s in specs:
        blocks.append(
            f"api {s.id}\ndesc {s.description}\nin {s.input_kind}\nout {s.output_kind}\nexec {s.executable}\n"
        )
    return "\n".join(blocks)


def load_registry(path, embedder: EmbeddingBackend | None = None) -> ApiRegistry:
    registry = ApiRegistry(embedder)
    for spec in parse_registry(Path(path).read_text()):
        registry.register(spec)
    return registry
