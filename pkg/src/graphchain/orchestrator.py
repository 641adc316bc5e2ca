"""Session lifecycle: prompt intake, chain proposal, confirmation, monitored
execution, and append-only persistence.

Each session is one log file of JSON records (session-created,
chain-proposed, chain-edited, status-changed, step-event); in-memory state
is a pure fold over the log, so replaying a log reconstructs the session
exactly.  The session id is the log filename and never appears inside the
records.
"""

from __future__ import annotations

import json
import os
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

from .chains import ApiCall, ApiChain, ChainError, serialize_step
from .graphs import Graph, parse_graph
from .planner import ExemplarStore, PlanningError, RolloutConfig, generate_chain, reference_chains
from .registry import (
    ApiRegistry,
    ExecutionContext,
    GraphStore,
    UnknownApiError,
    classify_graph,
    run_chain_step,
)
from .sequences import PathCoverConfig, SequenceBundle, sequentialize

ENV_SEED = "GRAPHCHAIN_SEED"

STATUS_FLOW = {
    "proposed": {"confirmed"},
    "confirmed": {"executing"},
    "executing": {"done", "failed"},
    "done": set(),
    "failed": set(),
}


class SessionError(RuntimeError):
    pass


class UnknownSessionError(SessionError):
    pass


class StatusError(SessionError):
    """Operation applied in the wrong lifecycle state."""


@dataclass(frozen=True)
class StepEvent:
    seq: int
    step_index: int
    kind: str  # started | finished | error | needs_confirmation
    payload: str
    ts: float

    def to_record(self) -> dict:
        return {
            "type": "step-event",
            "seq": self.seq,
            "step_index": self.step_index,
            "kind": self.kind,
            "payload": self.payload,
            "ts": self.ts,
        }


@dataclass
class Session:
    id: str
    question: str
    graph_document: str
    graph: Graph
    sequences: SequenceBundle
    chain: ApiChain
    seed: int
    status: str = "proposed"
    events: list[StepEvent] = field(default_factory=list)
    final_payload: str | None = None

    def to_view(self) -> dict:
        return {
            "id": self.id,
            "question": self.question,
            "status": self.status,
            "graph_name": self.graph.name,
            "n_nodes": self.graph.n_nodes,
            "n_edges": self.graph.n_edges,
            "chain": chain_to_json(self.chain),
            "seed": self.seed,
            "n_events": len(self.events),
            "final_payload": self.final_payload,
        }


def chain_to_json(chain: ApiChain) -> list[dict]:
    return [{"api": s.api, "args": dict(s.args)} for s in chain.steps]


def chain_from_json(data) -> ApiChain:
    if not isinstance(data, list):
        raise ChainError("chain must be a list of steps")
    steps = []
    for entry in data:
        args = tuple((str(k), str(v)) for k, v in entry.get("args", {}).items())
        steps.append(ApiCall(str(entry["api"]), args))
    return ApiChain(tuple(steps))


def default_seed() -> int:
    return int(os.environ.get(ENV_SEED, "0"))


class SessionLog:
    """One append-only record file per session."""

    def __init__(self, path: Path):
        self.path = path

    def append(self, record: dict) -> None:
        with open(self.path, "a") as f:
            f.write(json.dumps(record, sort_keys=True) + "\n")

    def records(self) -> list[dict]:
        if not self.path.exists():
            return []
        out = []
        with open(self.path) as f:
            for line in f:
                if line.strip():
                    out.append(json.loads(line))
        return out


def fold_session(session_id: str, records: list[dict], seq_l: int) -> Session:
    """Rebuild session state from its log records."""
    session: Session | None = None
    for rec in records:
        kind = rec["type"]
        if kind == "session-created":
            graph = parse_graph(rec["graph"])
            session = Session(
                id=session_id,
                question=rec["question"],
                graph_document=rec["graph"],
                graph=graph,
                sequences=sequentialize(graph, PathCoverConfig(l=seq_l)),
                chain=ApiChain((), partial=True),
                seed=rec["seed"],
            )
            continue
        if session is None:
            raise SessionError(f"log for {session_id} does not start with session-created")
        if kind in ("chain-proposed", "chain-edited"):
            session.chain = chain_from_json(rec["chain"])
        elif kind == "status-changed":
            session.status = rec["status"]
            if rec["status"] == "done":
                session.final_payload = rec.get("payload")
        elif kind == "step-event":
            session.events.append(
                StepEvent(rec["seq"], rec["step_index"], rec["kind"], rec["payload"], rec["ts"])
            )
        else:
            raise SessionError(f"unknown log record type {kind!r}")
    if session is None:
        raise SessionError(f"empty log for session {session_id}")
    return session


class Orchestrator:
    """Ties retrieval, planning, and execution together behind a session
    state machine with per-session write serialization."""

    def __init__(
        self,
        registry: ApiRegistry,
        exemplars: ExemplarStore,
        store: GraphStore,
        log_dir,
        cfg: RolloutConfig | None = None,
        seq_l: int = 2,
        refs_k: int = 3,
    ):
        self.registry = registry
        self.exemplars = exemplars
        self.store = store
        self.log_dir = Path(log_dir)
        self.log_dir.mkdir(parents=True, exist_ok=True)
        self.cfg = cfg or RolloutConfig(seed=default_seed())
        self.seq_l = seq_l
        self.refs_k = refs_k
        self._sessions: dict[str, Session] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._master = threading.Lock()
        for path in sorted(self.log_dir.glob("*.log")):
            sid = path.stem
            self._sessions[sid] = fold_session(sid, SessionLog(path).records(), seq_l)
            self._locks[sid] = threading.Lock()

    def _log(self, sid: str) -> SessionLog:
        return SessionLog(self.log_dir / f"{sid}.log")

    def _lock(self, sid: str) -> threading.Lock:
        with self._master:
            if sid not in self._locks:
                raise UnknownSessionError(f"unknown session {sid!r}")
            return self._locks[sid]

    # -- lifecycle ---------------------------------------------------------

    def submit_prompt(self, question: str, graph_document: str) -> Session:
        graph = parse_graph(graph_document)
        sequences = sequentialize(graph, PathCoverConfig(l=self.seq_l))
        qvec = self.registry.embed_text(question)
        refs = reference_chains(qvec, self.exemplars, self.refs_k)
        chain = generate_chain(question, self.registry, refs, self.cfg)

        sid = uuid.uuid4().hex
        session = Session(
            id=sid,
            question=question,
            graph_document=graph_document,
            graph=graph,
            sequences=sequences,
            chain=chain,
            seed=self.cfg.seed,
        )
        with self._master:
            self._sessions[sid] = session
            self._locks[sid] = threading.Lock()
        log = self._log(sid)
        log.append(
            {"type": "session-created", "question": question, "graph": graph_document,
             "seed": self.cfg.seed, "ts": time.time()}
        )
        log.append({"type": "chain-proposed", "chain": chain_to_json(chain), "ts": time.time()})
        return session

    def get_session(self, sid: str) -> Session:
        try:
            return self._sessions[sid]
        except KeyError:
            raise UnknownSessionError(f"unknown session {sid!r}") from None

    def list_sessions(self) -> list[Session]:
        return list(self._sessions.values())

    def get_events(self, sid: str, since: int = 0) -> list[StepEvent]:
        return [e for e in self.get_session(sid).events if e.seq > since]

    def confirm_chain(self, sid: str, edited: ApiChain | None = None) -> Session:
        with self._lock(sid):
            session = self.get_session(sid)
            if session.status != "proposed":
                raise StatusError(f"cannot confirm a session in status {session.status!r}")
            log = self._log(sid)
            if edited is not None:
                for step in edited.steps:
                    if step.api not in self.registry:
                        raise UnknownApiError(f"unknown api {step.api!r} in edited chain")
                session.chain = edited
                log.append(
                    {"type": "chain-edited", "chain": chain_to_json(edited), "ts": time.time()}
                )
            self._set_status(session, log, "confirmed")
            return session

    def regenerate(self, sid: str, seed: int) -> Session:
        """Re-plan with a different seed while still proposed."""
        with self._lock(sid):
            session = self.get_session(sid)
            if session.status != "proposed":
                raise StatusError(f"cannot regenerate a session in status {session.status!r}")
            cfg = RolloutConfig(
                r=self.cfg.r, max_len=self.cfg.max_len, alpha=self.cfg.alpha,
                seed=seed, exhaustive=self.cfg.exhaustive, k=self.cfg.k,
            )
            qvec = self.registry.embed_text(session.question)
            refs = reference_chains(qvec, self.exemplars, self.refs_k)
            session.chain = generate_chain(session.question, self.registry, refs, cfg)
            session.seed = seed
            self._log(sid).append(
                {"type": "chain-proposed", "chain": chain_to_json(session.chain), "ts": time.time()}
            )
            return session

    def _set_status(self, session: Session, log: SessionLog, status: str, payload: str | None = None):
        if status not in STATUS_FLOW[session.status]:
            raise StatusError(f"cannot move from {session.status!r} to {status!r}")
        session.status = status
        record = {"type": "status-changed", "status": status, "ts": time.time()}
        if payload is not None:
            record["payload"] = payload
            session.final_payload = payload
        log.append(record)

    def execute_chain(self, sid: str) -> Iterator[StepEvent]:
        """Run the confirmed chain step by step, yielding events as they are
        appended to the log.  Step errors end the run with a failed status
        instead of propagating."""
        lock = self._lock(sid)
        with lock:
            session = self.get_session(sid)
            if session.status != "confirmed":
                raise StatusError(f"cannot execute a session in status {session.status!r}")
            log = self._log(sid)
            self._set_status(session, log, "executing")

        def emit(step_index: int, kind: str, payload: str) -> StepEvent:
            with lock:
                seq = session.events[-1].seq + 1 if session.events else 1
                event = StepEvent(seq, step_index, kind, payload, time.time())
                session.events.append(event)
                log.append(event.to_record())
                return event

        def run() -> Iterator[StepEvent]:
            ctx = ExecutionContext(graph=session.graph, store=self.store)
            last_payload = ""
            for i, call in enumerate(session.chain.steps):
                yield emit(i, "started", serialize_step(call))
                try:
                    result = run_chain_step(self.registry, call, ctx)
                except Exception as exc:
                    yield emit(i, "error", str(exc))
                    with lock:
                        self._set_status(session, log, "failed")
                    return
                last_payload = result.render()
                yield emit(i, "finished", last_payload)
            with lock:
                self._set_status(session, log, "done", payload=last_payload)

        return run()

    # -- panel 2 -----------------------------------------------------------

    def suggest_questions(self, graph: Graph) -> list[str]:
        if graph.n_nodes == 0:
            return [
                "How many nodes are in this graph?",
                "How many edges are in this graph?",
            ]
        kind = classify_graph(graph)
        if kind == "molecule":
            return [
                "What molecules are similar to this graph?",
                "Write a brief report for this molecule.",
                "How many nodes are in this graph?",
            ]
        return [
            "How many communities are in this network?",
            "Is the network connected?",
            "Write a brief report for this network.",
        ]
