"""Command line entry points.

    graphchain seq     --graph g.graph --l 2 [--minimize] [--super]
    graphchain loss    --chain a.chain --ref b.chain [--alpha 1.0]
    graphchain plan    --question "..." --graph g.graph [--r N] [--max-len N]
                       [--seed N] [--exhaustive]
    graphchain index   build|query|audit ...
    graphchain apis    list|add|retrieve ...
    graphchain serve   --port N [--registry F] [--store DIR] --log-dir DIR
    graphchain session submit|confirm|execute|tail --url http://...
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from importlib import resources
from pathlib import Path

from . import taumg
from .chains import parse_chain, serialize_step
from .embedding import embedder_from_env
from .graphs import parse_graph
from .matching import optimal_matching
from .orchestrator import Orchestrator, default_seed
from .planner import ExemplarStore, RolloutConfig, generate_chain, reference_chains
from .registry import ApiSpec, GraphStore, builtin_registry, load_registry, serialize_registry
from .sequences import PathCoverConfig, sequentialize


def _data_text(name: str) -> str:
    return resources.files("graphchain.data").joinpath(name).read_text()


def _default_exemplars(embedder) -> ExemplarStore:
    return ExemplarStore.from_log_text(_data_text("exemplars.log"), embedder)


def _default_store() -> GraphStore:
    root = resources.files("graphchain.data").joinpath("store")
    with resources.as_file(root) as path:
        return GraphStore.from_dir(path)


def _make_registry(path: str | None):
    embedder = embedder_from_env()
    if path:
        return load_registry(path, embedder)
    return builtin_registry(embedder)


def cmd_seq(args) -> int:
    g = parse_graph(Path(args.graph).read_text())
    bundle = sequentialize(g, PathCoverConfig(l=args.l, minimize=args.minimize))
    for seq in bundle.base_sequences:
        print("base: " + " ".join(seq))
    if args.super:
        for seq in bundle.super_sequences:
            print("super: " + " ".join(seq))
    return 0


def cmd_loss(args) -> int:
    c = parse_chain(Path(args.chain).read_text())
    ref = parse_chain(Path(args.ref).read_text())
    m, breakdown = optimal_matching(c, ref, args.alpha)
    print(f"X {breakdown.x}")
    print(f"Y {breakdown.y}")
    print(f"alpha {breakdown.alpha}")
    print(f"total {breakdown.total}")
    pairs = " ".join(f"{i}->{j}" for i, j in m.pairs())
    print(f"matching {pairs}" if pairs else "matching (empty)")
    return 0


def cmd_plan(args) -> int:
    registry = _make_registry(args.registry)
    if args.exemplars:
        store = ExemplarStore.from_log_text(Path(args.exemplars).read_text(), registry.embedder)
    else:
        store = _default_exemplars(registry.embedder)
    parse_graph(Path(args.graph).read_text())  # fail fast on a bad upload
    cfg = RolloutConfig(
        r=args.r, max_len=args.max_len, seed=args.seed, exhaustive=args.exhaustive, k=args.k
    )
    refs = reference_chains(registry.embed_text(args.question), store, args.refs)
    trace: list = []
    chain = generate_chain(args.question, registry, refs, cfg, trace=trace)
    for entry in trace:
        ranked = " ".join(f"{api}={score:.3f}" for score, api in entry["scores"])
        print(f"step {entry['step']}: {ranked}")
    print("chain:")
    for step in chain.steps:
        print("  " + serialize_step(step))
    return 0


def cmd_index_build(args) -> int:
    dset = taumg.VectorSet.load(args.vectors)
    tau = args.tau if args.tau is not None else taumg.default_tau(dset)
    index = taumg.build(dset, tau, args.max_degree)
    index.save(args.out, dset.dim)
    print(f"built taumg index: n={index.n} edges={index.edge_count} tau={tau:.6f} entry={index.entry_point}")
    return 0


def cmd_index_query(args) -> int:
    dset = taumg.VectorSet.load(args.vectors)
    index = taumg.TauMgIndex.load(args.index)
    queries = taumg.VectorSet.load(args.query)
    for qi in range(queries.n):
        hits = taumg.greedy_search(dset, index, queries.vectors[qi], beam=args.beam, k=args.k)
        row = " ".join(f"{h.id}:{h.distance:.6f}" for h in hits)
        print(f"query {qi}: {row}")
    return 0


def cmd_index_audit(args) -> int:
    dset = taumg.VectorSet.load(args.vectors)
    index = taumg.TauMgIndex.load(args.index)
    violations = taumg.audit_occlusion(dset, index)
    repairs = index.repair_edges()
    print(f"edges={index.edge_count} construction_violations={len(violations)} repair_edges={len(repairs)}")
    for u, v, w in violations[:20]:
        print(f"violation: edge {u}->{v} occluded by kept neighbor {w}")
    return 0 if not violations else 1


def cmd_apis_list(args) -> int:
    registry = _make_registry(args.registry)
    for s in registry.specs():
        print(f"{s.id}\t{s.input_kind}->{s.output_kind}\t{s.description}")
    return 0


def cmd_apis_add(args) -> int:
    path = Path(args.registry)
    specs = []
    if path.exists():
        from .registry import parse_registry

        specs = parse_registry(path.read_text())
    if any(s.id == args.id for s in specs):
        print(f"api {args.id!r} already present", file=sys.stderr)
        return 1
    specs.append(ApiSpec(args.id, args.desc, args.input, args.output, args.exec))
    path.write_text(serialize_registry(specs))
    print(f"registered {args.id} ({len(specs)} apis)")
    return 0


def cmd_apis_retrieve(args) -> int:
    registry = _make_registry(args.registry)
    for spec, score in registry.retrieve(args.question, args.k):
        print(f"{score:.4f}\t{spec.id}\t{spec.description}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .server import build_app

    registry = _make_registry(args.registry)
    store = GraphStore.from_dir(args.store) if args.store else _default_store()
    exemplars = _default_exemplars(registry.embedder)
    if args.exemplars:
        exemplars = ExemplarStore.from_log_text(Path(args.exemplars).read_text(), registry.embedder)
    orch = Orchestrator(
        registry, exemplars, store, args.log_dir, cfg=RolloutConfig(seed=default_seed())
    )
    uvicorn.run(build_app(orch), host=args.host, port=args.port)
    return 0


def _client(url: str):
    import httpx

    return httpx.Client(base_url=url, timeout=30.0)


def cmd_session_submit(args) -> int:
    with _client(args.url) as client:
        resp = client.post(
            "/sessions",
            json={"question": args.question, "graph_document": Path(args.graph).read_text()},
        )
        resp.raise_for_status()
        view = resp.json()
    print(json.dumps(view, indent=2, sort_keys=True))
    return 0


def cmd_session_confirm(args) -> int:
    body = {}
    if args.chain:
        chain = parse_chain(Path(args.chain).read_text())
        body["chain"] = [{"api": s.api, "args": dict(s.args)} for s in chain.steps]
    with _client(args.url) as client:
        resp = client.post(f"/sessions/{args.id}/confirm", json=body)
        resp.raise_for_status()
        print(json.dumps(resp.json(), indent=2, sort_keys=True))
    return 0


def cmd_session_execute(args) -> int:
    with _client(args.url) as client:
        resp = client.post(f"/sessions/{args.id}/execute")
        resp.raise_for_status()
        print(json.dumps(resp.json(), indent=2, sort_keys=True))
    return 0


def cmd_session_tail(args) -> int:
    since = args.since
    with _client(args.url) as client:
        while True:
            resp = client.get(f"/sessions/{args.id}/events", params={"since": since})
            resp.raise_for_status()
            data = resp.json()
            for event in data["events"]:
                print(f"[{event['seq']}] step {event['step_index']} {event['kind']}: {event['payload']}")
                since = event["seq"]
            if data["status"] in ("done", "failed"):
                print(f"status: {data['status']}")
                return 0 if data["status"] == "done" else 1
            time.sleep(args.poll)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="graphchain")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("seq", help="print path-cover sequences of a graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--minimize", action="store_true")
    p.add_argument("--super", action="store_true")
    p.set_defaults(func=cmd_seq)

    p = sub.add_parser("loss", help="matching loss between two chains")
    p.add_argument("--chain", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--alpha", type=float, default=1.0)
    p.set_defaults(func=cmd_loss)

    p = sub.add_parser("plan", help="plan an api chain for a question")
    p.add_argument("--question", required=True)
    p.add_argument("--graph", required=True)
    p.add_argument("--r", type=int, default=16)
    p.add_argument("--max-len", type=int, default=8)
    p.add_argument("--seed", type=int, default=default_seed())
    p.add_argument("--exhaustive", action="store_true")
    p.add_argument("--k", type=int, default=8)
    p.add_argument("--refs", type=int, default=3)
    p.add_argument("--registry")
    p.add_argument("--exemplars")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("index", help="vector index operations")
    isub = p.add_subparsers(dest="index_command", required=True)

    b = isub.add_parser("build")
    b.add_argument("--vectors", required=True)
    b.add_argument("--tau", type=float, default=None)
    b.add_argument("--out", required=True)
    b.add_argument("--max-degree", type=int, default=taumg.DEFAULT_MAX_DEGREE)
    b.set_defaults(func=cmd_index_build)

    q = isub.add_parser("query")
    q.add_argument("--index", required=True)
    q.add_argument("--vectors", required=True)
    q.add_argument("--query", required=True)
    q.add_argument("--k", type=int, default=1)
    q.add_argument("--beam", type=int, default=taumg.DEFAULT_BEAM)
    q.set_defaults(func=cmd_index_query)

    a = isub.add_parser("audit")
    a.add_argument("--index", required=True)
    a.add_argument("--vectors", required=True)
    a.set_defaults(func=cmd_index_audit)

    p = sub.add_parser("apis", help="registry operations")
    asub = p.add_subparsers(dest="apis_command", required=True)

    l = asub.add_parser("list")
    l.add_argument("--registry")
    l.set_defaults(func=cmd_apis_list)

    ad = asub.add_parser("add")
    ad.add_argument("--registry", required=True)
    ad.add_argument("--id", required=True)
    ad.add_argument("--desc", required=True)
    ad.add_argument("--input", default="graph", dest="input")
    ad.add_argument("--output", default="value", dest="output")
    ad.add_argument("--exec", default="stub:external", dest="exec")
    ad.set_defaults(func=cmd_apis_add)

    r = asub.add_parser("retrieve")
    r.add_argument("--question", required=True)
    r.add_argument("--k", type=int, default=5)
    r.add_argument("--registry")
    r.set_defaults(func=cmd_apis_retrieve)

    p = sub.add_parser("serve", help="run the http service")
    p.add_argument("--port", type=int, default=8733)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--registry")
    p.add_argument("--store")
    p.add_argument("--exemplars")
    p.add_argument("--log-dir", required=True)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("session", help="talk to a running service")
    ssub = p.add_subparsers(dest="session_command", required=True)

    su = ssub.add_parser("submit")
    su.add_argument("--url", default="http://127.0.0.1:8733")
    su.add_argument("--question", required=True)
    su.add_argument("--graph", required=True)
    su.set_defaults(func=cmd_session_submit)

    co = ssub.add_parser("confirm")
    co.add_argument("--url", default="http://127.0.0.1:8733")
    co.add_argument("--id", required=True)
    co.add_argument("--chain")
    co.set_defaults(func=cmd_session_confirm)

    ex = ssub.add_parser("execute")
    ex.add_argument("--url", default="http://127.0.0.1:8733")
    ex.add_argument("--id", required=True)
    ex.set_defaults(func=cmd_session_execute)

    ta = ssub.add_parser("tail")
    ta.add_argument("--url", default="http://127.0.0.1:8733")
    ta.add_argument("--id", required=True)
    ta.add_argument("--since", type=int, default=0)
    ta.add_argument("--poll", type=float, default=0.25)
    ta.set_defaults(func=cmd_session_tail)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
