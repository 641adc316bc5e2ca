"""tau-MG proximity graph for approximate nearest neighbor search.

Construction scans each node's candidates nearest-first and keeps an edge
(u, v) unless an already-kept closer neighbor w occludes it, i.e. w lies
strictly inside both ball(u, d(u,v)) and ball(v, d(u,v) - 3*tau).  Larger
tau shrinks the second ball, so occlusion fires less often and more edges
survive.  Search is best-first beam routing from the medoid entry point;
a brute-force scan serves as the exact oracle.

File formats (UTF-8 text):
  vectors:  line 1 ``<n> <d>``, then n lines of d reals
  index:    line 1 ``taumg <n> <d> <tau> <entry>``, then ``edges <id> <nb>*``
            per node; trailing ``repair <u> <v>`` lines record connectivity
            edges added outside the occlusion scan
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field

import numpy as np

DEFAULT_MAX_DEGREE = 32
DEFAULT_BEAM = 32
DEFAULT_TAU_RATE = 0.05


class IndexError_(ValueError):
    """Invalid index input (kept distinct from the builtin IndexError)."""


class DimensionMismatch(IndexError_):
    pass


@dataclass(frozen=True)
class VectorSet:
    """Dense array of vectors; row index is the vector id."""

    vectors: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.vectors, dtype=np.float64))
        if arr.ndim != 2:
            raise IndexError_(f"vectors must be a 2-d array, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "vectors", arr)

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def save(self, path) -> None:
        with open(path, "w") as f:
            f.write(f"{self.n} {self.dim}\n")
            for row in self.vectors:
                f.write(" ".join(repr(float(x)) for x in row) + "\n")

    @classmethod
    def load(cls, path) -> "VectorSet":
        with open(path) as f:
            header = f.readline().split()
            if len(header) != 2:
                raise IndexError_("vector file must start with '<n> <d>'")
            n, d = int(header[0]), int(header[1])
            data = np.loadtxt(f, ndmin=2)
        if data.shape != (n, d):
            raise IndexError_(f"vector file declares {n}x{d} but holds {data.shape}")
        return cls(data)


@dataclass(frozen=True)
class AnnResult:
    id: int
    distance: float

    def __post_init__(self):
        if self.distance < 0:
            raise ValueError("distance must be non-negative")


@dataclass
class SearchStats:
    hops: int = 0
    distance_evals: int = 0
    path: tuple[int, ...] = ()


@dataclass
class TauMgIndex:
    """Directed adjacency built under the occlusion rule.

    ``adjacency[u]`` lists out-neighbors in retention order (ascending
    distance from u); the first ``n_construction[u]`` entries came from the
    occlusion scan, anything after was added by reachability repair.
    """

    tau: float
    entry_point: int
    adjacency: list[list[int]]
    n_construction: list[int] = field(default_factory=list)
    metric: str = "euclidean"

    def __post_init__(self):
        if not self.n_construction:
            self.n_construction = [len(a) for a in self.adjacency]

    @property
    def n(self) -> int:
        return len(self.adjacency)

    @property
    def edge_count(self) -> int:
        return sum(len(a) for a in self.adjacency)

    def repair_edges(self) -> list[tuple[int, int]]:
        out = []
        for u, adj in enumerate(self.adjacency):
            for v in adj[self.n_construction[u] :]:
                out.append((u, v))
        return out

    def save(self, path, dim: int) -> None:
        with open(path, "w") as f:
            f.write(f"taumg {self.n} {dim} {self.tau!r} {self.entry_point}\n")
            for u, adj in enumerate(self.adjacency):
                f.write("edges " + " ".join(str(x) for x in [u, *adj]) + "\n")
            for u, v in self.repair_edges():
                f.write(f"repair {u} {v}\n")

    @classmethod
    def load(cls, path) -> "TauMgIndex":
        adjacency: list[list[int]] = []
        repairs: set[tuple[int, int]] = set()
        with open(path) as f:
            header = f.readline().split()
            if len(header) != 5 or header[0] != "taumg":
                raise IndexError_("index file must start with 'taumg <n> <d> <tau> <entry>'")
            n, _, tau, entry = int(header[1]), int(header[2]), float(header[3]), int(header[4])
            adjacency = [[] for _ in range(n)]
            for line in f:
                tokens = line.split()
                if not tokens:
                    continue
                if tokens[0] == "edges":
                    u = int(tokens[1])
                    adjacency[u] = [int(x) for x in tokens[2:]]
                elif tokens[0] == "repair":
                    repairs.add((int(tokens[1]), int(tokens[2])))
                else:
                    raise IndexError_(f"unknown index record {tokens[0]!r}")
        n_construction = []
        for u, adj in enumerate(adjacency):
            reps = sum(1 for v in adj if (u, v) in repairs)
            n_construction.append(len(adj) - reps)
        return cls(tau=tau, entry_point=entry, adjacency=adjacency, n_construction=n_construction)


def distance(a: np.ndarray, b: np.ndarray) -> float:
    if a.shape != b.shape:
        raise DimensionMismatch(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))


def occluded(u: np.ndarray, v: np.ndarray, w: np.ndarray, tau: float, metric: str = "euclidean") -> bool:
    """Does kept neighbor w of u occlude the candidate edge (u, v)?

    True iff d(u,w) < d(u,v) and d(v,w) < d(u,v) - 3*tau (open balls, so
    tau=0 reduces to the classical relative-neighborhood style rule)."""
    if metric != "euclidean":
        raise IndexError_(f"unsupported metric {metric!r}")
    if tau < 0:
        raise IndexError_(f"tau must be >= 0, got {tau}")
    duv = distance(u, v)
    return distance(u, w) < duv and distance(v, w) < duv - 3.0 * tau


def default_tau(dset: VectorSet, rate: float = DEFAULT_TAU_RATE, sample: int = 1000, seed: int = 0) -> float:
    """tau as a fraction of the mean pairwise distance of a sample, so the
    parameter scales with the data units."""
    from scipy.spatial.distance import pdist

    n = dset.n
    if n < 2:
        return 0.0
    rng = np.random.default_rng(seed)
    take = min(n, sample)
    ids = np.sort(rng.choice(n, size=take, replace=False))
    return rate * float(pdist(dset.vectors[ids]).mean())


def _retain_neighbors(x, d, order, tau: float, cap: int) -> list[int]:
    """Nearest-first occlusion scan for one node.

    Candidates are screened in blocks against the neighbors kept so far
    (one vectorized pass), then survivors of a block are settled in order
    against any neighbors the same block just added."""
    from scipy.spatial.distance import cdist

    kept: list[int] = []
    kept_d: list[float] = []
    pos = 0
    chunk = 16  # doubles each round; early blocks retain most, late ones filter
    shrink = 3.0 * tau
    while pos < len(order) and len(kept) < cap:
        block = order[pos : pos + chunk]
        pos += chunk
        chunk = min(chunk * 2, 1024)
        settled = len(kept)
        if settled:
            duv = d[block][:, None]
            dvw = cdist(x[block], x[kept])
            occ = ((np.asarray(kept_d)[None, :] < duv) & (dvw < duv - shrink)).any(axis=1)
            survivors = block[~occ]
        else:
            survivors = block
        for v in survivors:
            if len(kept) >= cap:
                break
            duv_v = d[v]
            fresh = kept[settled:]
            if fresh:
                dvw_new = np.linalg.norm(x[fresh] - x[v], axis=1)
                occ_new = (np.asarray(kept_d[settled:]) < duv_v) & (dvw_new < duv_v - shrink)
                if bool(occ_new.any()):
                    continue
            kept.append(int(v))
            kept_d.append(float(duv_v))
    return kept


def build(dset: VectorSet, tau: float, max_degree: int | None = DEFAULT_MAX_DEGREE) -> TauMgIndex:
    """Exact construction: per node, scan all others nearest-first and keep
    every candidate no already-kept neighbor occludes, up to ``max_degree``.
    The entry point is the medoid; a repair pass then wires any node that is
    unreachable from it to its nearest reachable node."""
    from scipy.spatial.distance import cdist

    if dset.n < 1:
        raise IndexError_("cannot build an index over an empty vector set")
    if tau < 0:
        raise IndexError_(f"tau must be >= 0, got {tau}")
    x = dset.vectors
    n = dset.n
    cap = n if max_degree is None else max_degree

    adjacency: list[list[int]] = []
    dist_sums = np.zeros(n)
    block_rows = 64
    for b0 in range(0, n, block_rows):
        rows = cdist(x[b0 : b0 + block_rows], x)
        # stable argsort: ascending distance, ties by ascending id
        orders = np.argsort(rows, axis=1, kind="stable")
        for bi in range(rows.shape[0]):
            u = b0 + bi
            d = rows[bi]
            dist_sums[u] = d.sum()
            order = orders[bi]
            order = order[order != u]
            adjacency.append(_retain_neighbors(x, d, order, tau, cap))

    entry = int(np.argmin(dist_sums))
    index = TauMgIndex(tau=tau, entry_point=entry, adjacency=adjacency)
    _repair_reachability(index, dset)
    return index


def _reachable(index: TauMgIndex, start: int) -> set[int]:
    seen = {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v in index.adjacency[u]:
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return seen


def _repair_reachability(index: TauMgIndex, dset: VectorSet) -> None:
    x = dset.vectors
    reachable = _reachable(index, index.entry_point)
    while len(reachable) < index.n:
        target = min(set(range(index.n)) - reachable)
        srcs = np.fromiter(sorted(reachable), dtype=np.int64)
        d = np.linalg.norm(x[srcs] - x[target], axis=1)
        w = int(srcs[np.lexsort((srcs, d))[0]])
        index.adjacency[w].append(target)
        # repair edges sit after the construction prefix; audit skips them
        reachable |= _reachable(index, target)


def brute_force(dset: VectorSet, h: np.ndarray, k: int) -> list[AnnResult]:
    """Exact k-NN by full scan; ties broken by ascending id."""
    h = np.asarray(h, dtype=np.float64)
    if h.shape != (dset.dim,):
        raise DimensionMismatch(f"query has shape {h.shape}, data dim is {dset.dim}")
    if not 1 <= k <= dset.n:
        raise IndexError_(f"k must be in [1, {dset.n}], got {k}")
    d = np.linalg.norm(dset.vectors - h, axis=1)
    order = np.lexsort((np.arange(dset.n), d))[:k]
    return [AnnResult(int(i), float(d[i])) for i in order]


def greedy_search(
    dset: VectorSet,
    index: TauMgIndex,
    h: np.ndarray,
    beam: int = DEFAULT_BEAM,
    k: int = 1,
    stats: SearchStats | None = None,
) -> list[AnnResult]:
    """Best-first routing from the entry point with a bounded candidate pool.

    The pool holds the ``beam`` best vectors seen so far (the provisional
    results); the search stops once the nearest unexpanded candidate is
    farther than the worst pool member, i.e. it can no longer improve the
    result set.  Ties break toward smaller ids everywhere."""
    h = np.asarray(h, dtype=np.float64)
    if h.shape != (dset.dim,):
        raise DimensionMismatch(f"query has shape {h.shape}, data dim is {dset.dim}")
    if k < 1 or beam < k:
        raise IndexError_(f"need beam >= k >= 1, got beam={beam} k={k}")
    x = dset.vectors
    ep = index.entry_point
    d_ep = float(np.linalg.norm(x[ep] - h))
    visited = {ep}
    candidates: list[tuple[float, int]] = [(d_ep, ep)]  # min-heap, unexpanded
    pool: list[tuple[float, int]] = [(-d_ep, -ep)]  # max-heap of best seen
    path: list[int] = []
    evals = 1

    while candidates:
        d_c, c = heapq.heappop(candidates)
        if len(pool) >= beam:
            worst_d, worst_id = -pool[0][0], -pool[0][1]
            if (d_c, c) > (worst_d, worst_id):
                break
        path.append(c)
        neighbors = index.adjacency[c]
        for nb in neighbors:
            if nb in visited:
                continue
            visited.add(nb)
            d_nb = float(np.linalg.norm(x[nb] - h))
            evals += 1
            worst = (-pool[0][0], -int(pool[0][1]))
            if len(pool) < beam or (d_nb, nb) < worst:
                heapq.heappush(candidates, (d_nb, nb))
                heapq.heappush(pool, (-d_nb, -nb))
                if len(pool) > beam:
                    heapq.heappop(pool)

    if stats is not None:
        stats.hops = len(path)
        stats.distance_evals = evals
        stats.path = tuple(path)
    best = sorted((-d, -int(i)) for d, i in pool)[:k]
    return [AnnResult(int(i), float(d)) for d, i in best]


def audit_occlusion(dset: VectorSet, index: TauMgIndex) -> list[tuple[int, int, int]]:
    """Replay the construction rule over every kept edge.

    Returns (u, v, w) triples where an earlier-kept neighbor w of u occludes
    the kept edge (u, v) — an empty list means the scan was sound.  Repair
    edges are not part of the occlusion scan and are skipped."""
    x = dset.vectors
    violations = []
    for u, adj in enumerate(index.adjacency):
        limit = index.n_construction[u]
        if limit == 0:
            continue
        d_u = np.linalg.norm(x[adj[:limit]] - x[u], axis=1)
        for j in range(1, limit):
            v = adj[j]
            duv = d_u[j]
            earlier = adj[:j]
            dvw = np.linalg.norm(x[earlier] - x[v], axis=1)
            mask = (d_u[:j] < duv) & (dvw < duv - 3.0 * index.tau)
            for idx in np.flatnonzero(mask):
                violations.append((u, v, int(earlier[idx])))
    return violations
