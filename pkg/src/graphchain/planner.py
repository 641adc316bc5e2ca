"""Iterative chain construction by rollout search.

Each step scores every candidate api by randomly completing the partial
chain r times and taking the best (smallest) loss any completion achieves
against any reference chain; the api with the highest score (negated loss)
is appended.  A terminator sentinel competes once the chain is non-empty.
When the whole completion space is small, full enumeration replaces the
random rollouts and the scores become exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .chains import ApiCall, ApiChain, parse_joined_chain
from .matching import optimal_matching
from .registry import ApiRegistry
from .taumg import VectorSet, greedy_search
from . import taumg

END_API = "__end__"
EXH_CAP = 10_000


class PlanningError(RuntimeError):
    pass


@dataclass(frozen=True)
class CandidateSet:
    """Apis eligible to extend the current partial chain, best first."""

    apis: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.apis)) != len(self.apis):
            raise PlanningError("duplicate api in candidate set")

    def __len__(self) -> int:
        return len(self.apis)


@dataclass(frozen=True)
class RolloutConfig:
    r: int = 16
    max_len: int = 8
    alpha: float = 1.0
    seed: int = 0
    exhaustive: bool = False
    k: int = 8  # candidate-set size fed to retrieval
    aggregate: str = "mean"  # combine rollout losses: "mean" or "min"

    def __post_init__(self):
        if self.r < 1:
            raise ValueError(f"r must be >= 1, got {self.r}")
        if self.max_len < 1:
            raise ValueError(f"max_len must be >= 1, got {self.max_len}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.alpha <= 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.aggregate not in ("mean", "min"):
            raise ValueError(f"aggregate must be 'mean' or 'min', got {self.aggregate!r}")


@dataclass(frozen=True)
class ReferenceSet:
    chains: tuple[ApiChain, ...]
    provenance: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.chains:
            raise ValueError("reference set must be non-empty")
        if any(c.partial for c in self.chains):
            raise ValueError("reference chains must be full")
        if not self.provenance:
            object.__setattr__(self, "provenance", tuple("dataset" for _ in self.chains))
        if len(self.provenance) != len(self.chains):
            raise ValueError("one provenance tag per chain")


CandidateProvider = Callable[[ApiChain], CandidateSet]


@lru_cache(maxsize=200_000)
def _cached_total(ids_c: tuple[str, ...], ids_r: tuple[str, ...], alpha: float) -> float:
    c = ApiChain(tuple(ApiCall(a) for a in ids_c), partial=not ids_c)
    r = ApiChain(tuple(ApiCall(a) for a in ids_r))
    return optimal_matching(c, r, alpha)[1].total


def best_reference_loss(chain: ApiChain, refs: ReferenceSet, alpha: float) -> float:
    """Smallest matching loss of the chain against any reference."""
    return min(_cached_total(chain.api_ids, ref.api_ids, alpha) for ref in refs.chains)


def propose_candidates(
    c_p: ApiChain,
    registry: ApiRegistry,
    question_vector: np.ndarray,
    k: int,
) -> CandidateSet:
    """Top-k retrieval hits for the question, kept only when their input
    signature can be satisfied by the user graph or an earlier step's
    output; the terminator joins once the chain is non-empty."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    ranked = registry.retrieve_by_vector(question_vector, k)

    graphs = 1  # the user graph is always on hand
    values = 0
    for step in c_p.steps:
        kind = registry.get(step.api).output_kind
        if kind == "graph":
            graphs += 1
        elif kind == "value":
            values += 1

    def compatible(spec) -> bool:
        need = spec.input_kind
        if need == "none":
            return True
        if need == "graph":
            return graphs >= 1
        if need == "graph-pair":
            return graphs >= 2
        return values >= 1

    apis = [spec.id for spec, _ in ranked if compatible(spec)]
    if len(c_p) >= 1:
        apis.append(END_API)
    return CandidateSet(tuple(apis))


def _substream(cfg: RolloutConfig, step_index: int, rank: int) -> np.random.Generator:
    # Independent per-candidate streams so parallel scoring order cannot
    # change the draws; nested in the rollout count by construction.
    seq = np.random.SeedSequence((cfg.seed, step_index, rank))
    return np.random.Generator(np.random.PCG64(seq))


def rollout(
    c_p: ApiChain,
    api: str,
    provider: CandidateProvider,
    cfg: RolloutConfig,
    rng: np.random.Generator,
) -> ApiChain:
    """Extend c_p with ``api`` and then uniform random draws until the
    terminator is drawn or the length cap is hit."""
    if api == END_API:
        raise PlanningError("rollout starts from a concrete api, not the terminator")
    if len(c_p) + 1 > cfg.max_len:
        raise PlanningError("no room to extend the chain")
    chain = c_p.append(ApiCall(api))
    while len(chain) < cfg.max_len:
        cand = provider(chain)
        if not cand.apis:
            break
        pick = cand.apis[int(rng.integers(len(cand.apis)))]
        if pick == END_API:
            break
        chain = chain.append(ApiCall(pick))
    return chain.finalized()


def _enumerate_completions(
    chain: ApiChain, provider: CandidateProvider, cfg: RolloutConfig, cap: int
) -> list[ApiChain] | None:
    """All full chains reachable from ``chain``; None when more than ``cap``."""
    done: list[ApiChain] = []
    stack = [chain]
    while stack:
        cur = stack.pop()
        if len(cur) >= cfg.max_len:
            done.append(cur.finalized())
        else:
            cand = provider(cur)
            if not cand.apis:
                done.append(cur.finalized())
                continue
            for api in cand.apis:
                if api == END_API:
                    done.append(cur.finalized())
                else:
                    stack.append(cur.append(ApiCall(api)))
        if len(done) > cap:
            return None
    return done


def score_api(
    api: str,
    c_p: ApiChain,
    provider: CandidateProvider,
    refs: ReferenceSet,
    cfg: RolloutConfig,
    rng: np.random.Generator,
) -> float:
    """Negated completion loss through ``api`` (higher is better).

    Exhaustive mode enumerates every completion and scores the best one;
    otherwise r random rollouts are aggregated per the config (mean of the
    rollout losses by default, or their minimum for a best-case estimate)."""
    if api == END_API:
        return -best_reference_loss(c_p.finalized(), refs, cfg.alpha)
    start = c_p.append(ApiCall(api))
    if cfg.exhaustive:
        completions = _enumerate_completions(start, provider, cfg, EXH_CAP)
        if completions is not None:
            return -min(best_reference_loss(c, refs, cfg.alpha) for c in completions)
    losses = [
        best_reference_loss(rollout(c_p, api, provider, cfg, rng), refs, cfg.alpha)
        for _ in range(cfg.r)
    ]
    if cfg.aggregate == "min":
        return -min(losses)
    return -sum(losses) / len(losses)


def extend(
    c_p: ApiChain,
    cand: CandidateSet,
    provider: CandidateProvider,
    refs: ReferenceSet,
    cfg: RolloutConfig,
    step_index: int,
    trace: list | None = None,
) -> ApiChain:
    """Append the best-scoring candidate; ties go to the ascending api id
    with the terminator sorting last.  Choosing the terminator finalizes
    the chain instead of appending a step."""
    if not cand.apis:
        raise PlanningError("empty candidate set")
    scored = []
    for rank, api in enumerate(cand.apis):
        rng = _substream(cfg, step_index, rank)
        scored.append((score_api(api, c_p, provider, refs, cfg, rng), api))
    if trace is not None:
        trace.append({"step": step_index, "scores": sorted(scored, key=lambda s: (-s[0], s[1]))})
    _, winner = min(scored, key=lambda s: (-s[0], s[1] == END_API, s[1]))
    if winner == END_API:
        return c_p.finalized()
    return c_p.append(ApiCall(winner))


def generate_chain(
    question: str,
    registry: ApiRegistry,
    refs: ReferenceSet,
    cfg: RolloutConfig,
    trace: list | None = None,
) -> ApiChain:
    """Plan a full chain for the question: retrieve candidates, score them
    by rollouts against the references, extend, repeat until the terminator
    wins or the cap is reached.  Deterministic for a fixed config."""
    qvec = registry.embed_text(question)

    def provider(partial: ApiChain) -> CandidateSet:
        return propose_candidates(partial, registry, qvec, cfg.k)

    chain = ApiChain((), partial=True)
    step_index = 0
    while chain.partial and len(chain) < cfg.max_len:
        cand = provider(chain)
        if not cand.apis:
            if len(chain) == 0:
                raise PlanningError(f"no candidate apis for question {question!r}")
            break
        chain = extend(chain, cand, provider, refs, cfg, step_index, trace)
        step_index += 1
    return chain.finalized() if chain.partial else chain


# ---------------------------------------------------------------------------
# Exemplar store: logged (question, chain) pairs retrieved as references
# ---------------------------------------------------------------------------


class ExemplarFormatError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ExemplarStore:
    """Question-indexed chains ingested from action logs.  Nearest stored
    questions supply the reference chains at planning time."""

    def __init__(self, embedder):
        self.embedder = embedder
        self._records: list[tuple[str, ApiChain]] = []
        self._index: tuple[VectorSet, taumg.TauMgIndex] | None = None

    def __len__(self) -> int:
        return len(self._records)

    def records(self) -> list[tuple[str, ApiChain]]:
        return list(self._records)

    def add(self, question: str, chain: ApiChain) -> None:
        self._records.append((question, chain))
        self._index = None

    @classmethod
    def from_log_text(cls, text: str, embedder) -> "ExemplarStore":
        store = cls(embedder)
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3 or parts[0] != "Q":
                raise ExemplarFormatError(
                    "expected 'Q<TAB><question><TAB><chain steps joined by ;>'", lineno
                )
            try:
                chain = parse_joined_chain(parts[2])
            except Exception as exc:
                raise ExemplarFormatError(f"bad chain: {exc}", lineno) from exc
            store.add(parts[1], chain)
        return store

    def _ensure_index(self):
        if self._index is None:
            vecs = np.array([self.embedder.embed(q) for q, _ in self._records])
            dset = VectorSet(vecs)
            self._index = (dset, taumg.build(dset, taumg.default_tau(dset)))
        return self._index

    def nearest(self, question_vector: np.ndarray, k: int) -> ReferenceSet:
        if not self._records:
            raise PlanningError("exemplar store is empty")
        k = min(k, len(self._records))
        dset, built = self._ensure_index()
        hits = greedy_search(dset, built, question_vector, beam=max(taumg.DEFAULT_BEAM, k), k=k)
        chains = tuple(self._records[r.id][1] for r in hits)
        return ReferenceSet(chains, tuple("retrieved-exemplar" for _ in chains))


def reference_chains(question_vector: np.ndarray, store: ExemplarStore, k: int) -> ReferenceSet:
    """Chains of the k stored questions nearest to the query vector."""
    return store.nearest(question_vector, k)
