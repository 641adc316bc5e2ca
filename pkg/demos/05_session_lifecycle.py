"""One full conversation turn: submit a prompt, inspect the proposed chain,
edit and confirm it, watch execution events, and replay the persisted log."""

import tempfile
from importlib import resources
from pathlib import Path

from graphchain import ExemplarStore, Orchestrator, RolloutConfig, parse_chain
from graphchain.orchestrator import SessionLog, fold_session
from graphchain.registry import GraphStore, builtin_registry

GRAPH = """\
graph suspect_kg
node 0 alice
node 1 bob
node 2 carol
node 3 dave
edge 0 1
edge 0 2
edge 1 2
edge 2 3
"""

registry = builtin_registry()
log_text = resources.files("graphchain.data").joinpath("exemplars.log").read_text()
exemplars = ExemplarStore.from_log_text(log_text, registry.embedder)

with tempfile.TemporaryDirectory() as tmp:
    orch = Orchestrator(
        registry, exemplars, GraphStore(), Path(tmp),
        cfg=RolloutConfig(r=8, max_len=5, seed=3),
    )

    print("suggested questions for this graph:")
    from graphchain import parse_graph

    for q in orch.suggest_questions(parse_graph(GRAPH)):
        print("  -", q)
    print()

    session = orch.submit_prompt("clean the graph by removing suspect incorrect edges", GRAPH)
    print(f"session {session.id[:8]}... proposed:")
    for step in session.chain.steps:
        print("  ", step.api)
    print()

    # the user editor: pin the cleaning chain with an explicit binding
    edited = parse_chain("load_graph\ndetect_suspect_edges\nedit_edges remove=$1\nreport\n")
    orch.confirm_chain(session.id, edited)
    print("confirmed an edited 4-step chain; executing:")
    for event in orch.execute_chain(session.id):
        payload = event.payload if len(event.payload) < 64 else event.payload[:61] + "..."
        print(f"  [{event.seq}] step {event.step_index} {event.kind}: {payload}")
    print()
    print("final status:", orch.get_session(session.id).status)
    print()

    log = SessionLog(orch.log_dir / f"{session.id}.log")
    replayed = fold_session(session.id, log.records(), orch.seq_l)
    same = replayed.to_view() == orch.get_session(session.id).to_view()
    print(f"replayed {len(log.records())} log records -> identical state: {same}")
