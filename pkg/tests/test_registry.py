import numpy as np
import pytest

from graphchain.chains import ApiCall, parse_step
from graphchain.graphs import Graph, NodeRecord, parse_graph
from graphchain.matching import graph_similarity
from graphchain.registry import (
    ApiRegistry,
    ApiSpec,
    DuplicateApiError,
    EmptyRegistryError,
    ExecutionContext,
    ExecutionError,
    GraphStore,
    RegistryError,
    UnknownApiError,
    builtin_registry,
    builtin_specs,
    classify_graph,
    execute,
    load_registry,
    parse_registry,
    run_chain_step,
    serialize_registry,
)


def path_graph(labels, name="p"):
    nodes = tuple(NodeRecord(i, lab) for i, lab in enumerate(labels))
    return Graph(name, nodes, tuple((i, i + 1) for i in range(len(labels) - 1)))


def ctx_for(graph, store=None):
    return ExecutionContext(graph=graph, store=store or GraphStore())


@pytest.fixture(scope="module")
def registry():
    return builtin_registry()


class TestApiSpec:
    def test_bad_kind_rejected(self):
        with pytest.raises(RegistryError):
            ApiSpec("x", "desc", "tensor", "value", "t")

    def test_empty_description_rejected(self):
        with pytest.raises(RegistryError):
            ApiSpec("x", "", "graph", "value", "t")


class TestRegistryBasics:
    def test_register_and_size(self):
        reg = ApiRegistry()
        for i in range(5):
            reg.register(ApiSpec(f"a{i}", f"tool number {i}", "graph", "value", "stub:x"))
        assert len(reg) == 5

    def test_duplicate_rejected(self):
        reg = ApiRegistry()
        spec = ApiSpec("a", "a tool", "graph", "value", "stub:x")
        reg.register(spec)
        with pytest.raises(DuplicateApiError):
            reg.register(spec)

    def test_unknown_get(self):
        with pytest.raises(UnknownApiError):
            ApiRegistry().get("nope")

    def test_retrieve_empty_registry(self):
        with pytest.raises(EmptyRegistryError):
            ApiRegistry().retrieve("anything", 3)


class TestRetrieval:
    def test_k_covers_whole_registry(self, registry):
        ranked = registry.retrieve("graph", len(registry))
        assert len(ranked) == len(registry)
        scores = [s for _, s in ranked]
        assert scores == sorted(scores, reverse=True)

    def test_own_description_is_top1(self, registry):
        for spec in registry.specs():
            top = registry.retrieve(spec.description, 1)[0][0]
            assert top.id == spec.id

    def test_ranking_matches_brute_force_cosine(self):
        # synthetic 50-api registry, 20 queries: index rank == full-scan rank
        reg = ApiRegistry()
        words = [f"tool{i} alpha{i % 7} beta{i % 5} gamma{i % 3}" for i in range(50)]
        for i, w in enumerate(words):
            reg.register(ApiSpec(f"api{i:02d}", f"performs {w} duties", "graph", "value", "s"))
        vecs = {s.id: reg.embedder.embed(s.description) for s in reg.specs()}
        for qi in range(20):
            q = f"alpha{qi % 7} gamma{qi % 3} duties"
            qv = reg.embedder.embed(q)
            got = [s.id for s, _ in reg.retrieve(q, 5)]
            exact = sorted(vecs, key=lambda a: (np.linalg.norm(vecs[a] - qv), a))[:5]
            assert got == exact

    def test_register_invalidates_index(self):
        reg = ApiRegistry()
        reg.register(ApiSpec("aa", "first tool about testing", "graph", "value", "s"))
        assert reg.retrieve("testing", 1)[0][0].id == "aa"
        reg.register(ApiSpec("bb", "second gadget about shipping", "graph", "value", "s"))
        assert {s.id for s, _ in reg.retrieve("shipping", 2)} == {"aa", "bb"}


class TestClassify:
    def test_molecule(self):
        assert classify_graph(path_graph("CCO")) == "molecule"

    def test_social_labels(self):
        assert classify_graph(path_graph(["alice", "bob"])) == "social"

    def test_high_degree_is_social(self):
        center = [NodeRecord(0, "C")] + [NodeRecord(i, "H") for i in range(1, 7)]
        g = Graph("star", tuple(center), tuple((0, i) for i in range(1, 7)))
        assert classify_graph(g) == "social"


class TestExecute:
    def test_connected_components_path(self, registry):
        result = execute(registry, ApiCall("connected_components"), ctx_for(path_graph("abc")))
        assert result.value["count"] == 1

    def test_components_two_islands(self, registry):
        g = Graph("two", (NodeRecord(0, "a"), NodeRecord(1, "b"), NodeRecord(2, "c")), ((0, 1),))
        result = execute(registry, ApiCall("connected_components"), ctx_for(g))
        assert result.value == {"count": 2, "components": [[0, 1], [2]]}

    def test_shortest_path_hops(self, registry):
        g = path_graph(["a", "b", "c"])
        call = parse_step("shortest_path src=a dst=c")
        assert execute(registry, call, ctx_for(g)).value["hops"] == 2

    def test_shortest_path_missing_label(self, registry):
        with pytest.raises(ExecutionError):
            execute(registry, parse_step("shortest_path src=a dst=zz"), ctx_for(path_graph("ab")))

    def test_shortest_path_needs_args(self, registry):
        with pytest.raises(ExecutionError):
            execute(registry, ApiCall("shortest_path"), ctx_for(path_graph("ab")))

    def test_node_and_edge_count(self, registry):
        ctx = ctx_for(path_graph("abcd"))
        assert execute(registry, ApiCall("node_count"), ctx).value == 4
        assert execute(registry, ApiCall("edge_count"), ctx).value == 3

    def test_degree_stats(self, registry):
        got = execute(registry, ApiCall("degree_stats"), ctx_for(path_graph("abc"))).value
        assert got == {"min": 1, "mean": pytest.approx(4 / 3, abs=1e-6), "max": 2}

    def test_similarity_search_ranks_identical_first(self, registry):
        tri = parse_graph("graph q\nnode 0 C\nnode 1 C\nnode 2 O\nedge 0 1\nedge 0 2\nedge 1 2")
        store = GraphStore(
            {
                "tri_cco": parse_graph(
                    "graph tri_cco\nnode 0 C\nnode 1 C\nnode 2 O\nedge 0 1\nedge 0 2\nedge 1 2"
                ),
                "path_ccc": parse_graph(
                    "graph path_ccc\nnode 0 C\nnode 1 C\nnode 2 C\nedge 0 1\nedge 1 2"
                ),
            }
        )
        got = execute(registry, parse_step("similarity_search j=2"), ctx_for(tri, store)).value
        assert got[0]["name"] == "tri_cco"
        # oracle: exhaustive similarity computation over the store
        sims = {name: graph_similarity(tri, g) for name, g in store.items()}
        assert got[0]["similarity"] == pytest.approx(max(sims.values()))

    def test_detect_suspect_edges_triangle(self, registry):
        tri = parse_graph("graph t\nnode 0 a\nnode 1 b\nnode 2 c\nedge 0 1\nedge 0 2\nedge 1 2")
        got = execute(registry, ApiCall("detect_suspect_edges"), ctx_for(tri)).value
        # every triangle edge is bypassable via the third node
        assert got == [{"src": 0, "dst": 1}, {"src": 0, "dst": 2}, {"src": 1, "dst": 2}]

    def test_detect_suspect_edges_bridge(self, registry):
        g = path_graph("ab")
        assert execute(registry, ApiCall("detect_suspect_edges"), ctx_for(g)).value == []

    def test_edit_edges_remove_by_reference(self, registry):
        tri = parse_graph("graph t\nnode 0 a\nnode 1 b\nnode 2 c\nedge 0 1\nedge 0 2\nedge 1 2")
        ctx = ctx_for(tri)
        run_chain_step(registry, ApiCall("detect_suspect_edges"), ctx)
        result = run_chain_step(registry, parse_step("edit_edges remove=$0"), ctx)
        assert result.value.n_edges == 0

    def test_edit_edges_literals(self, registry):
        g = path_graph("abc")
        result = execute(registry, parse_step("edit_edges remove=0-1 add=0-2"), ctx_for(g))
        assert result.value.edge_pairs() == {(1, 2), (0, 2)}

    def test_edit_edges_noop_without_args(self, registry):
        g = path_graph("abc")
        assert execute(registry, ApiCall("edit_edges"), ctx_for(g)).value == g

    def test_report_assembles_prior_outputs(self, registry):
        ctx = ctx_for(path_graph("abc", name="mygraph"))
        run_chain_step(registry, ApiCall("load_graph"), ctx)
        run_chain_step(registry, ApiCall("node_count"), ctx)
        report = execute(registry, ApiCall("report"), ctx)
        assert "mygraph" in report.value
        assert "1. node_count: 3" in report.value

    def test_graph_argument_references_prior_output(self, registry):
        g = path_graph("abc")
        ctx = ctx_for(g)
        run_chain_step(registry, parse_step("edit_edges remove=0-1"), ctx)
        got = execute(registry, parse_step("node_count graph=$0"), ctx)
        assert got.value == 3
        got2 = execute(registry, parse_step("edge_count graph=$0"), ctx)
        assert got2.value == 1

    def test_forward_reference_rejected_at_parse(self):
        from graphchain.chains import ChainError, parse_chain

        with pytest.raises(ChainError):
            parse_chain("node_count graph=$0\nedit_edges")

    def test_unknown_api(self, registry):
        with pytest.raises(UnknownApiError):
            execute(registry, ApiCall("nope"), ctx_for(path_graph("ab")))

    def test_stub_api_not_runnable(self):
        reg = ApiRegistry()
        reg.register(ApiSpec("ext", "external thing", "graph", "value", "stub:remote"))
        with pytest.raises(ExecutionError):
            execute(reg, ApiCall("ext"), ctx_for(path_graph("ab")))

    def test_execute_is_deterministic(self, registry):
        g = path_graph("abcd")
        a = execute(registry, ApiCall("degree_stats"), ctx_for(g))
        b = execute(registry, ApiCall("degree_stats"), ctx_for(g))
        assert a == b


class TestRegistryFile:
    def test_round_trip(self, tmp_path):
        specs = builtin_specs()
        text = serialize_registry(specs)
        assert parse_registry(text) == specs
        path = tmp_path / "reg.txt"
        path.write_text(text)
        reg = load_registry(path)
        assert len(reg) == len(specs)

    def test_missing_field_rejected(self):
        with pytest.raises(RegistryError):
            parse_registry("api x\ndesc thing\nin graph\nout value\n")

    def test_unknown_field_rejected(self):
        with pytest.raises(RegistryError):
            parse_registry("api x\nbogus y\n")


class TestGraphStore:
    def test_from_dir_sorted(self, tmp_path):
        (tmp_path / "b.graph").write_text("graph bb\nnode 0 x\n")
        (tmp_path / "a.graph").write_text("graph aa\nnode 0 y\n")
        store = GraphStore.from_dir(tmp_path)
        assert [name for name, _ in store.items()] == ["aa", "bb"]
        assert store.get("aa").labels[0] == "y"
