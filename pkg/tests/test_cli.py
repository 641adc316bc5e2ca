import numpy as np
import pytest

from graphchain.cli import main
from graphchain.taumg import VectorSet

MOLECULE = "graph mol\nnode 0 C\nnode 1 O\nnode 2 N\nedge 0 1\nedge 1 2\n"
TRIANGLE = "graph t\nnode 0 C\nnode 1 C\nnode 2 O\nedge 0 1\nedge 0 2\nedge 1 2\n"


@pytest.fixture
def graph_file(tmp_path):
    p = tmp_path / "g.graph"
    p.write_text(MOLECULE)
    return p


class TestSeq:
    def test_base_sequences(self, graph_file, capsys):
        assert main(["seq", "--graph", str(graph_file), "--l", "1"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert "base: C O" in lines
        assert all(line.startswith("base: ") for line in lines)

    def test_super_flag_adds_super_lines(self, tmp_path, capsys):
        p = tmp_path / "t.graph"
        p.write_text(TRIANGLE)
        main(["seq", "--graph", str(p), "--l", "1", "--super"])
        out = capsys.readouterr().out
        assert "base: " in out
        # a lone triangle condenses to one super-node: no super paths exist
        p2 = tmp_path / "p.graph"
        p2.write_text(MOLECULE)
        main(["seq", "--graph", str(p2), "--l", "1", "--super"])
        out = capsys.readouterr().out
        assert "super: {C} {O}" in out

    def test_minimize_reduces_lines(self, graph_file, capsys):
        main(["seq", "--graph", str(graph_file), "--l", "2"])
        full = len(capsys.readouterr().out.splitlines())
        main(["seq", "--graph", str(graph_file), "--l", "2", "--minimize"])
        small = len(capsys.readouterr().out.splitlines())
        assert small <= full


class TestLoss:
    def test_prints_breakdown_and_matching(self, tmp_path, capsys):
        a = tmp_path / "a.chain"
        b = tmp_path / "b.chain"
        a.write_text("load\nfilter\n")
        b.write_text("load\nclean\n")
        assert main(["loss", "--chain", str(a), "--ref", str(b)]) == 0
        out = capsys.readouterr().out
        assert "X 1.0" in out
        assert "total 1.0" in out
        assert "0->0 1->1" in out

    def test_alpha_flag(self, tmp_path, capsys):
        a = tmp_path / "a.chain"
        b = tmp_path / "b.chain"
        a.write_text("load\nextra\n")
        b.write_text("load\n")
        main(["loss", "--chain", str(a), "--ref", str(b), "--alpha", "2.0"])
        out = capsys.readouterr().out
        assert "alpha 2.0" in out
        assert "total 3.0" in out  # 1 gap in X + 2*1 in Y


class TestPlan:
    def test_plans_chain_for_question(self, graph_file, capsys):
        rc = main(
            ["plan", "--question", "how many nodes are in this graph", "--graph", str(graph_file),
             "--r", "4", "--max-len", "5", "--seed", "0"]
        )
        assert rc == 0
        out = capsys.readouterr().out
        assert "chain:" in out
        assert "node_count" in out
        assert "step 0:" in out


class TestIndexCli:
    def test_build_query_audit(self, tmp_path, capsys):
        rng = np.random.default_rng(0)
        vectors = tmp_path / "vecs.txt"
        VectorSet(rng.random((80, 4))).save(vectors)
        index = tmp_path / "index.txt"
        assert main(["index", "build", "--vectors", str(vectors), "--tau", "0.05",
                     "--out", str(index)]) == 0
        capsys.readouterr()

        query = tmp_path / "q.txt"
        VectorSet(rng.random((2, 4))).save(query)
        assert main(["index", "query", "--index", str(index), "--vectors", str(vectors),
                     "--query", str(query), "--k", "2", "--beam", "8"]) == 0
        out = capsys.readouterr().out
        assert out.startswith("query 0:")
        assert len(out.strip().splitlines()) == 2

        assert main(["index", "audit", "--index", str(index), "--vectors", str(vectors)]) == 0
        assert "construction_violations=0" in capsys.readouterr().out


class TestApisCli:
    def test_list_builtin(self, capsys):
        assert main(["apis", "list"]) == 0
        out = capsys.readouterr().out
        assert "connected_components" in out

    def test_retrieve(self, capsys):
        assert main(["apis", "retrieve", "--question", "count the nodes", "--k", "2"]) == 0
        out = capsys.readouterr().out
        assert "node_count" in out

    def test_add_then_list(self, tmp_path, capsys):
        reg = tmp_path / "reg.txt"
        assert main(["apis", "add", "--registry", str(reg), "--id", "toxicity",
                     "--desc", "predict molecular toxicity of the graph"]) == 0
        capsys.readouterr()
        assert main(["apis", "list", "--registry", str(reg)]) == 0
        assert "toxicity" in capsys.readouterr().out

    def test_add_duplicate_fails(self, tmp_path, capsys):
        reg = tmp_path / "reg.txt"
        main(["apis", "add", "--registry", str(reg), "--id", "x", "--desc", "thing one"])
        assert main(["apis", "add", "--registry", str(reg), "--id", "x", "--desc", "thing two"]) == 1


class TestErrors:
    def test_missing_file_reports_error(self, tmp_path, capsys):
        rc = main(["seq", "--graph", str(tmp_path / "none.graph"), "--l", "1"])
        assert rc == 2
        assert "error:" in capsys.readouterr().err
