"""graphchain: answer natural-language questions about graphs by retrieving
analysis APIs, planning API chains with rollout search, and executing
confirmed chains under live monitoring."""

from .chains import ApiCall, ApiChain, chain_of, parse_chain, serialize_chain
from .graphs import Graph, NodeRecord, khop_subgraph, parse_graph, serialize_graph
from .matching import (
    LossBreakdown,
    MatchingMatrix,
    edit_cost,
    graph_edit_distance,
    loss,
    optimal_matching,
    regularizer,
)
from .orchestrator import Orchestrator, Session, StepEvent
from .planner import (
    END_API,
    CandidateSet,
    ExemplarStore,
    ReferenceSet,
    RolloutConfig,
    generate_chain,
    propose_candidates,
    reference_chains,
    rollout,
    score_api,
)
from .registry import ApiRegistry, ApiSpec, GraphStore, builtin_registry, execute
from .sequences import (
    Path,
    PathCoverConfig,
    SequenceBundle,
    SuperGraph,
    condense_motifs,
    enumerate_paths,
    path_cover,
    sequentialize,
)
from .taumg import AnnResult, TauMgIndex, VectorSet, brute_force, build, greedy_search, occluded

__version__ = "0.1.0"

__all__ = [
    "AnnResult",
    "ApiCall",
    "ApiChain",
    "ApiRegistry",
    "ApiSpec",
    "CandidateSet",
    "END_API",
    "ExemplarStore",
    "Graph",
    "GraphStore",
    "LossBreakdown",
    "MatchingMatrix",
    "NodeRecord",
    "Orchestrator",
    "Path",
    "PathCoverConfig",
    "ReferenceSet",
    "RolloutConfig",
    "SequenceBundle",
    "Session",
    "StepEvent",
    "SuperGraph",
    "TauMgIndex",
    "VectorSet",
    "brute_force",
    "build",
    "builtin_registry",
    "chain_of",
    "condense_motifs",
    "edit_cost",
    "enumerate_paths",
    "execute",
    "generate_chain",
    "graph_edit_distance",
    "greedy_search",
    "khop_subgraph",
    "loss",
    "occluded",
    "optimal_matching",
    "parse_chain",
    "parse_graph",
    "path_cover",
    "propose_candidates",
    "reference_chains",
    "regularizer",
    "rollout",
    "score_api",
    "sequentialize",
    "serialize_chain",
    "serialize_graph",
]
