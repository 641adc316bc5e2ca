import random

import networkx as nx
import pytest

from graphchain.graphs import Graph, GraphError, NodeRecord
from graphchain.sequences import (
    Path,
    PathCoverConfig,
    condense_motifs,
    enumerate_paths,
    path_cover,
    sequentialize,
    triangles,
)


def path_graph(labels):
    nodes = tuple(NodeRecord(i, lab) for i, lab in enumerate(labels))
    return Graph("p", nodes, tuple((i, i + 1) for i in range(len(labels) - 1)))


def triangle_graph(labels=("C", "C", "O")):
    nodes = tuple(NodeRecord(i, lab) for i, lab in enumerate(labels))
    return Graph("t", nodes, ((0, 1), (0, 2), (1, 2)))


def random_graph(rng, n, max_degree=4):
    nodes = tuple(NodeRecord(i, rng.choice("CNOS")) for i in range(n))
    edges = set()
    attempts = [(i, j) for i in range(n) for j in range(i + 1, n)]
    rng.shuffle(attempts)
    degree = {i: 0 for i in range(n)}
    for u, v in attempts:
        if degree[u] < max_degree and degree[v] < max_degree and rng.random() < 0.4:
            edges.add((u, v))
            degree[u] += 1
            degree[v] += 1
    return Graph("r", nodes, tuple(edges))


def dfs_paths_oracle(g, u, l):
    """Exhaustive simple-path enumeration, implemented independently."""
    out = []

    def rec(path):
        if len(path) - 1 >= 1:
            out.append(tuple(path))
        if len(path) - 1 == l:
            return
        for w in sorted(g.neighbors(path[-1])):
            if w not in path:
                rec(path + [w])

    rec([u])
    return sorted(out)


class TestEnumeratePaths:
    def test_path_end_origin(self):
        g = path_graph("abc")
        assert [p.nodes for p in enumerate_paths(g, 0, 1)] == [(0, 1)]

    def test_path_mid_origin(self):
        g = path_graph("abc")
        assert [p.nodes for p in enumerate_paths(g, 1, 1)] == [(1, 0), (1, 2)]

    def test_triangle_matches_dfs_oracle(self):
        g = triangle_graph()
        got = [p.nodes for p in enumerate_paths(g, 0, 2)]
        assert sorted(got) == dfs_paths_oracle(g, 0, 2)
        assert set(got) == {(0, 1), (0, 2), (0, 1, 2), (0, 2, 1)}

    def test_lexicographic_order(self):
        g = triangle_graph()
        got = [p.nodes for p in enumerate_paths(g, 0, 2)]
        assert got == sorted(got)

    def test_random_graphs_match_oracle(self):
        rng = random.Random(11)
        for _ in range(15):
            g = random_graph(rng, rng.randint(1, 10))
            u = rng.choice(sorted(g.node_ids))
            got = [p.nodes for p in enumerate_paths(g, u, 3)]
            assert sorted(got) == dfs_paths_oracle(g, u, 3)

    def test_unknown_node(self):
        with pytest.raises(GraphError):
            enumerate_paths(path_graph("ab"), 9, 1)

    def test_paths_are_simple_and_adjacent(self):
        rng = random.Random(3)
        g = random_graph(rng, 12)
        for p in enumerate_paths(g, 0, 4):
            p.check_in(g)  # raises on a bad path


def covered_edges(paths):
    out = set()
    for p in paths:
        out |= p.edge_set()
    return out


def cover_property_holds(g, paths):
    """Oracle: every edge covered, and every incident edge of u covered by a
    path anchored at u (edges enumerated independently via networkx)."""
    h = nx.Graph()
    h.add_nodes_from(g.node_ids)
    h.add_edges_from(g.edge_pairs())
    all_edges = {(min(u, v), max(u, v)) for u, v in h.edges}
    if all_edges - covered_edges(paths):
        return False
    by_origin = {}
    for p in paths:
        by_origin.setdefault(p.origin, set()).update(p.edge_set())
    for u in h.nodes:
        for v in h.neighbors(u):
            if (min(u, v), max(u, v)) not in by_origin.get(u, set()):
                return False
    return True


class TestPathCover:
    def test_small_path_per_origin(self):
        g = path_graph("abc")
        cover = path_cover(g, PathCoverConfig(l=1))
        got = {(p.origin, p.nodes) for p in cover}
        assert got == {(0, (0, 1)), (1, (1, 0)), (1, (1, 2)), (2, (2, 1))}

    def test_single_node(self):
        g = Graph("one", (NodeRecord(0, "C"),))
        assert path_cover(g, PathCoverConfig(l=3)) == []

    def test_empty_graph(self):
        assert path_cover(Graph("e"), PathCoverConfig(l=2)) == []

    def test_cover_property_random(self):
        rng = random.Random(23)
        for _ in range(20):
            g = random_graph(rng, rng.randint(1, 18))
            cover = path_cover(g, PathCoverConfig(l=3))
            assert cover_property_holds(g, cover)

    def test_minimize_keeps_cover_property(self):
        rng = random.Random(29)
        for _ in range(20):
            g = random_graph(rng, rng.randint(1, 15))
            full = path_cover(g, PathCoverConfig(l=3))
            small = path_cover(g, PathCoverConfig(l=3, minimize=True))
            assert len(small) <= len(full)
            assert covered_edges(small) == covered_edges(full)
            assert cover_property_holds(g, small)

    def test_minimize_drops_redundant_subpaths(self):
        g = path_graph("abcd")
        small = path_cover(g, PathCoverConfig(l=3, minimize=True))
        per_origin = {}
        for p in small:
            per_origin.setdefault(p.origin, []).append(p)
        # from node 0 the single length-3 path covers everything
        assert [p.nodes for p in per_origin[0]] == [(0, 1, 2, 3)]

    def test_degree_two_path_count_bound(self):
        # max-degree-2 graphs: at most 2l paths per origin
        l = 3
        for labels in ("ab", "abcd", "abcdefg"):
            g = path_graph(labels)
            cover = path_cover(g, PathCoverConfig(l=l))
            per_origin = {}
            for p in cover:
                per_origin[p.origin] = per_origin.get(p.origin, 0) + 1
            assert all(count <= 2 * l for count in per_origin.values())


def nx_triangles(g):
    h = nx.Graph()
    h.add_nodes_from(g.node_ids)
    h.add_edges_from(g.edge_pairs())
    return {tuple(sorted(c)) for c in nx.enumerate_all_cliques(h) if len(c) == 3}


class TestCondenseMotifs:
    def test_triangle_collapses(self):
        sg = condense_motifs(triangle_graph())
        assert len(sg.super_nodes) == 1
        assert sg.super_nodes[0].label == "{C,C,O}"
        assert sg.super_edges == ()

    def test_path_stays_singletons(self):
        sg = condense_motifs(path_graph("abc"))
        assert len(sg.super_nodes) == 3
        assert len(sg.super_edges) == 2

    def test_two_triangles_sharing_node(self):
        nodes = tuple(NodeRecord(i, "C") for i in range(5))
        edges = ((0, 1), (0, 2), (1, 2), (2, 3), (2, 4), (3, 4))
        g = Graph("bow", nodes, edges)
        sg = condense_motifs(g)
        assert len(sg.super_nodes) == 1
        assert sg.super_nodes[0].members == frozenset(range(5))

    def test_triangle_list_matches_networkx(self):
        rng = random.Random(31)
        for _ in range(15):
            g = random_graph(rng, rng.randint(1, 14))
            assert set(triangles(g)) == nx_triangles(g)

    def test_union_find_against_networkx_oracle(self):
        rng = random.Random(37)
        for _ in range(15):
            g = random_graph(rng, rng.randint(1, 14))
            h = nx.Graph()
            h.add_nodes_from(g.node_ids)
            for a, b, c in nx_triangles(g):
                h.add_edge(a, b)
                h.add_edge(b, c)
            expected = {frozenset(comp) for comp in nx.connected_components(h)}
            got = {sn.members for sn in condense_motifs(g).super_nodes}
            assert got == expected

    def test_every_base_node_covered_and_edges_sound(self):
        rng = random.Random(41)
        for _ in range(15):
            g = random_graph(rng, rng.randint(1, 14))
            sg = condense_motifs(g)
            member_of = sg.member_of()
            assert set(member_of) == g.node_ids
            derived = set()
            for u, v in g.edge_pairs():
                su, sv = member_of[u], member_of[v]
                if su != sv:
                    derived.add((min(su, sv), max(su, sv)))
            assert set(sg.super_edges) == derived


class TestSequentialize:
    def test_labels_on_path(self):
        g = path_graph("CON")  # labels C, O, N
        bundle = sequentialize(g, PathCoverConfig(l=1))
        assert ("C", "O") in bundle.base_sequences
        assert ("O", "C") in bundle.base_sequences
        assert ("O", "N") in bundle.base_sequences
        assert ("N", "O") in bundle.base_sequences

    def test_empty_graph_empty_bundle(self):
        bundle = sequentialize(Graph("e"), PathCoverConfig(l=2))
        assert bundle.base_sequences == ()
        assert bundle.super_sequences == ()
        assert bundle.provenance == {}

    def test_token_counts_match_path_lengths(self):
        rng = random.Random(43)
        g = random_graph(rng, 12)
        bundle = sequentialize(g, PathCoverConfig(l=3))
        for (level, i), p in bundle.provenance.items():
            seqs = bundle.base_sequences if level == "base" else bundle.super_sequences
            assert len(seqs[i]) == p.length + 1
            assert len(seqs[i]) >= 1

    def test_super_sequences_use_motif_labels(self):
        # triangle + tail: super level has 2 nodes, one is the motif label
        nodes = tuple(NodeRecord(i, lab) for i, lab in enumerate("CCON"))
        g = Graph("m", nodes, ((0, 1), (0, 2), (1, 2), (2, 3)))
        bundle = sequentialize(g, PathCoverConfig(l=1))
        flat = {tok for seq in bundle.super_sequences for tok in seq}
        assert flat == {"{C,C,O}", "{N}"}


class TestPathType:
    def test_origin_mismatch_rejected(self):
        with pytest.raises(GraphError):
            Path(1, (0, 1))

    def test_revisit_rejected(self):
        with pytest.raises(GraphError):
            Path(0, (0, 1, 0))

    def test_config_validation(self):
        with pytest.raises(ValueError):
            PathCoverConfig(l=0)
