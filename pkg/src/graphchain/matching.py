"""Node matching-based loss between API chains.

A binary matrix M pairs steps of a generated chain with steps of a reference
chain.  The loss is ``X + alpha * Y`` where X is the matching-induced edit
cost (substitutions, unmatched steps, order-breaking step pairs) and Y is a
quadratic penalty pushing M toward a one-to-one matching:

    Y = sum_i (1 - sum_k M[i,k])^2 + sum_k (1 - sum_i M[i,k])^2

``optimal_matching`` minimizes the loss over matchings: exhaustively for
short chains, via an assignment + local-search heuristic beyond that.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .chains import ApiChain
from .graphs import Graph

# Chains up to this length are minimized by full enumeration of partial
# injective matchings (7x7 is ~130k states).
EXACT_LIMIT = 7

# Unit edit costs: substitution of differing api ids, unmatched step on
# either side, and an order-breaking consecutive pair.
SUB_COST = 1.0
GAP_COST = 1.0
EDGE_COST = 1.0


class MatchingShapeError(ValueError):
    """Matrix dimensions do not match the two chain lengths."""


@dataclass(frozen=True, eq=False)
class MatchingMatrix:
    """Binary step-matching matrix; rows index the generated chain, columns
    the reference chain."""

    entries: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.entries, dtype=np.int8)
        if arr.ndim != 2:
            raise MatchingShapeError(f"matrix must be 2-d, got shape {arr.shape}")
        if not np.isin(arr, (0, 1)).all():
            raise ValueError("matching entries must be 0 or 1")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    def is_one_to_one(self) -> bool:
        return bool(
            (self.entries.sum(axis=1) <= 1).all() and (self.entries.sum(axis=0) <= 1).all()
        )

    def row_matches(self) -> list[int | None]:
        """Per-row matched column (requires a one-to-one matrix)."""
        if not self.is_one_to_one():
            raise ValueError("matrix is not one-to-one")
        out: list[int | None] = []
        for row in self.entries:
            js = np.flatnonzero(row)
            out.append(int(js[0]) if len(js) else None)
        return out

    def pairs(self) -> list[tuple[int, int]]:
        return [(int(i), int(j)) for i, j in zip(*np.nonzero(self.entries))]

    def __eq__(self, other):
        if not isinstance(other, MatchingMatrix):
            return NotImplemented
        return self.entries.shape == other.entries.shape and bool(
            (self.entries == other.entries).all()
        )

    def __hash__(self):
        return hash((self.entries.shape, self.entries.tobytes()))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "MatchingMatrix":
        return cls(np.zeros((rows, cols), dtype=np.int8))

    @classmethod
    def identity(cls, rows: int, cols: int) -> "MatchingMatrix":
        m = np.zeros((rows, cols), dtype=np.int8)
        for i in range(min(rows, cols)):
            m[i, i] = 1
        return cls(m)

    @classmethod
    def from_pairs(cls, rows: int, cols: int, pairs) -> "MatchingMatrix":
        m = np.zeros((rows, cols), dtype=np.int8)
        for i, j in pairs:
            m[i, j] = 1
        return cls(m)

    @classmethod
    def from_row_matches(cls, assign, cols: int) -> "MatchingMatrix":
        m = np.zeros((len(assign), cols), dtype=np.int8)
        for i, j in enumerate(assign):
            if j is not None:
                m[i, j] = 1
        return cls(m)


@dataclass(frozen=True)
class LossBreakdown:
    x: float
    y: float
    alpha: float
    total: float

    def __post_init__(self):
        if self.x < 0 or self.y < 0:
            raise ValueError("loss components must be non-negative")
        expected = self.x + self.alpha * self.y
        if abs(self.total - expected) > 1e-9:
            raise ValueError(f"inconsistent total {self.total} != {expected}")

    @classmethod
    def of(cls, x: float, y: float, alpha: float) -> "LossBreakdown":
        return cls(x=x, y=y, alpha=alpha, total=x + alpha * y)


def _check_dims(c: ApiChain, c_ref: ApiChain, m: MatchingMatrix) -> None:
    if m.rows != len(c) or m.cols != len(c_ref):
        raise MatchingShapeError(
            f"matrix is {m.rows}x{m.cols} but chains have lengths {len(c)} and {len(c_ref)}"
        )


def edit_cost(c: ApiChain, c_ref: ApiChain, m: MatchingMatrix) -> float:
    """Edit cost induced by M: substitutions on matched pairs, a unit per
    unmatched step on either side, and a unit per consecutive pair whose
    matched partners are not consecutive (pairs touching an unmatched step
    are charged through the unmatched units only)."""
    _check_dims(c, c_ref, m)
    e = m.entries
    ids_c, ids_r = c.api_ids, c_ref.api_ids

    cost = 0.0
    for i, j in zip(*np.nonzero(e)):
        if ids_c[i] != ids_r[j]:
            cost += SUB_COST
    cost += GAP_COST * int((e.sum(axis=1) == 0).sum())
    cost += GAP_COST * int((e.sum(axis=0) == 0).sum())

    # Order term, stated for general binary M: a consecutive pair is intact
    # if some pair of its matches is consecutive on the other side.
    for i in range(len(ids_c) - 1):
        js_a = np.flatnonzero(e[i])
        js_b = np.flatnonzero(e[i + 1])
        if len(js_a) and len(js_b) and not np.isin(js_a + 1, js_b).any():
            cost += EDGE_COST
    for j in range(len(ids_r) - 1):
        is_a = np.flatnonzero(e[:, j])
        is_b = np.flatnonzero(e[:, j + 1])
        if len(is_a) and len(is_b) and not np.isin(is_a + 1, is_b).any():
            cost += EDGE_COST
    return cost


def regularizer(c: ApiChain, c_ref: ApiChain, m: MatchingMatrix) -> float:
    """Quadratic one-to-one penalty over row and column sums of M."""
    _check_dims(c, c_ref, m)
    e = m.entries.astype(np.int64)
    return float(((1 - e.sum(axis=1)) ** 2).sum() + ((1 - e.sum(axis=0)) ** 2).sum())


def loss(c: ApiChain, c_ref: ApiChain, m: MatchingMatrix, alpha: float = 1.0) -> LossBreakdown:
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    return LossBreakdown.of(edit_cost(c, c_ref, m), regularizer(c, c_ref, m), alpha)


def _assignment_loss(ids_c, ids_r, assign, alpha: float) -> float:
    """Loss of a hard one-to-one matching given as a row->column map
    (None = unmatched).  Equivalent to loss() on the materialized matrix."""
    nc, nr = len(ids_c), len(ids_r)
    sub = 0.0
    matched_cols = [None] * nr
    unmatched_c = 0
    for i, j in enumerate(assign):
        if j is None:
            unmatched_c += 1
        else:
            matched_cols[j] = i
            if ids_c[i] != ids_r[j]:
                sub += SUB_COST
    unmatched_r = matched_cols.count(None)

    edge = 0.0
    for i in range(nc - 1):
        a, b = assign[i], assign[i + 1]
        if a is not None and b is not None and b != a + 1:
            edge += EDGE_COST
    for j in range(nr - 1):
        a, b = matched_cols[j], matched_cols[j + 1]
        if a is not None and b is not None and b != a + 1:
            edge += EDGE_COST

    gaps = unmatched_c + unmatched_r
    return sub + GAP_COST * gaps + edge + alpha * gaps


def _flatten(assign, cols: int) -> tuple[int, ...]:
    flat = []
    for j in assign:
        row = [0] * cols
        if j is not None:
            row[j] = 1
        flat.extend(row)
    return tuple(flat)


def _exhaustive_minimum(ids_c, ids_r, alpha: float):
    nc, nr = len(ids_c), len(ids_r)
    best_total = None
    best_assign = None
    best_flat = None
    assign: list[int | None] = [None] * nc
    used = [False] * nr

    def rec(i: int):
        nonlocal best_total, best_assign, best_flat
        if i == nc:
            total = _assignment_loss(ids_c, ids_r, assign, alpha)
            if best_total is None or total < best_total - 1e-12:
                best_total, best_assign, best_flat = total, list(assign), None
            elif abs(total - best_total) <= 1e-12:
                flat = _flatten(assign, nr)
                if best_flat is None:
                    best_flat = _flatten(best_assign, nr)
                if flat < best_flat:
                    best_assign, best_flat = list(assign), flat
            return
        assign[i] = None
        rec(i + 1)
        for j in range(nr):
            if not used[j]:
                used[j] = True
                assign[i] = j
                rec(i + 1)
                used[j] = False
        assign[i] = None

    rec(0)
    return best_assign, best_total


def _assignment_heuristic(ids_c, ids_r, alpha: float):
    """Optimal node-cost assignment (padded rectangular LAP), then local
    improvement on the full objective until a fixpoint: pairwise swaps of
    row assignments plus single-row reassignments (swaps alone cannot bring
    an unused column into play)."""
    nc, nr = len(ids_c), len(ids_r)
    if nc == 0 or nr == 0:
        return [None] * nc
    big = 1e9
    gap = GAP_COST + alpha  # an unmatched step pays the gap unit plus alpha*Y
    size = nc + nr
    cost = np.zeros((size, size))
    for i in range(nc):
        for j in range(nr):
            cost[i, j] = 0.0 if ids_c[i] == ids_r[j] else SUB_COST
    cost[:nc, nr:] = big
    cost[nc:, :nr] = big
    for i in range(nc):
        cost[i, nr + i] = gap
    for j in range(nr):
        cost[nc + j, j] = gap
    rows, cols = linear_sum_assignment(cost)
    lap_start: list[int | None] = [None] * nc
    for r, col in zip(rows, cols):
        if r < nc and col < nr:
            lap_start[r] = int(col)
    # Chains are sequences: shifted diagonals are strong extra seeds that
    # the node-cost assignment often misses when labels repeat.
    starts: list[list[int | None]] = [lap_start]
    if nc + nr <= 40:
        offsets = range(-(nc - 1), nr)
    else:
        offsets = sorted({0, nr - nc, -1, 1, nr - nc - 1, nr - nc + 1})
    for off in offsets:
        starts.append([i + off if 0 <= i + off < nr else None for i in range(nc)])

    best_assign, best_loss = None, None
    for start in starts:
        assign, current = _local_search(ids_c, ids_r, list(start), alpha)
        if best_loss is None or current < best_loss - 1e-12:
            best_assign, best_loss = assign, current
    return best_assign


def _local_search(ids_c, ids_r, assign, alpha: float):
    """Hill-climb the full objective: pairwise swaps of row assignments and
    single-row reassignments (to an unused column or to unmatched)."""
    nc, nr = len(ids_c), len(ids_r)
    current = _assignment_loss(ids_c, ids_r, assign, alpha)
    improved = True
    while improved:
        improved = False
        for i1 in range(nc - 1):
            for i2 in range(i1 + 1, nc):
                if assign[i1] == assign[i2]:
                    continue
                assign[i1], assign[i2] = assign[i2], assign[i1]
                trial = _assignment_loss(ids_c, ids_r, assign, alpha)
                if trial < current - 1e-12:
                    current = trial
                    improved = True
                else:
                    assign[i1], assign[i2] = assign[i2], assign[i1]
        used = {j for j in assign if j is not None}
        for i in range(nc):
            old = assign[i]
            options = [None] + [j for j in range(nr) if j not in used]
            for j in options:
                if j == old:
                    continue
                assign[i] = j
                trial = _assignment_loss(ids_c, ids_r, assign, alpha)
                if trial < current - 1e-12:
                    current = trial
                    improved = True
                    if old is not None:
                        used.discard(old)
                    if j is not None:
                        used.add(j)
                    old = j
                else:
                    assign[i] = old
    return assign, current


def optimal_matching(
    c: ApiChain,
    c_ref: ApiChain,
    alpha: float = 1.0,
    exact_limit: int = EXACT_LIMIT,
) -> tuple[MatchingMatrix, LossBreakdown]:
    """Minimize the loss over hard one-to-one matchings.

    Up to ``exact_limit`` steps per chain the minimum is exact (full
    enumeration, ties broken toward the lexicographically smallest matrix in
    row-major order); longer chains use the assignment + swap heuristic.
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    ids_c, ids_r = c.api_ids, c_ref.api_ids
    if max(len(ids_c), len(ids_r)) <= exact_limit:
        assign, _ = _exhaustive_minimum(ids_c, ids_r, alpha)
    else:
        assign = _assignment_heuristic(ids_c, ids_r, alpha)
    m = MatchingMatrix.from_row_matches(assign, len(ids_r))
    return m, loss(c, c_ref, m, alpha)


def chain_distance(c: ApiChain, c_ref: ApiChain, alpha: float = 1.0) -> float:
    """Total of the best matching; convenience for scoring loops."""
    return optimal_matching(c, c_ref, alpha)[1].total


# ---------------------------------------------------------------------------
# Labeled-graph edit distance, reusing the same unit-cost model.  Used by the
# similarity-search tool at small scale; depth-first search over injective
# node assignments with monotone cost pruning.
# ---------------------------------------------------------------------------


def graph_edit_distance(g1: Graph, g2: Graph) -> float:
    """Exact edit distance between two small labeled graphs (unit costs:
    relabel 1, node insert/delete 1, edge insert/delete 1)."""
    n1 = sorted(g1.nodes)
    n2 = sorted(g2.nodes)
    l1 = [n.label for n in n1]
    l2 = [n.label for n in n2]
    idx1 = {n.id: i for i, n in enumerate(n1)}
    idx2 = {n.id: i for i, n in enumerate(n2)}
    e1 = {frozenset((idx1[u], idx1[v])) for u, v, _ in g1.edges}
    e2 = {frozenset((idx2[u], idx2[v])) for u, v, _ in g2.edges}

    best = float(len(n1) + len(n2) + len(e1) + len(e2))  # delete/insert all
    assign: list[int | None] = [None] * len(n1)
    used = [False] * len(n2)

    def tail_cost() -> float:
        # Unmatched g2 nodes are insertions; e2 edges between two matched
        # nodes were already charged when the later endpoint was assigned,
        # so only edges touching an unmatched node remain.
        matched_cols = {j for j in assign if j is not None}
        unmatched2 = len(n2) - len(matched_cols)
        extra_edges = sum(
            1 for edge in e2 if not all(endpoint in matched_cols for endpoint in edge)
        )
        return unmatched2 + extra_edges

    def rec(i: int, cost: float):
        nonlocal best
        if cost >= best:
            return
        if i == len(n1):
            total = cost + tail_cost()
            if total < best:
                best = total
            return
        # delete node i: its edges to earlier nodes are deleted too
        extra = sum(1 for k in range(i) if frozenset((k, i)) in e1)
        rec(i + 1, cost + 1 + extra)
        for j in range(len(n2)):
            if used[j]:
                continue
            step = 0.0 if l1[i] == l2[j] else 1.0
            for k in range(i):
                jk = assign[k]
                has1 = frozenset((k, i)) in e1
                if jk is None:
                    step += 1 if has1 else 0
                else:
                    has2 = frozenset((jk, j)) in e2
                    if has1 != has2:
                        step += 1
            used[j] = True
            assign[i] = j
            rec(i + 1, cost + step)
            used[j] = False
            assign[i] = None

    rec(0, 0.0)
    return best


def graph_similarity(g1: Graph, g2: Graph, exact_size: int = 8) -> float:
    """Similarity in (0, 1]: 1/(1+GED) when both graphs are small enough for
    the exact distance, otherwise a label-multiset / edge-overlap Jaccard
    blend."""
    if g1.n_nodes <= exact_size and g2.n_nodes <= exact_size:
        return 1.0 / (1.0 + graph_edit_distance(g1, g2))

    def multiset_jaccard(a: list, b: list) -> float:
        if not a and not b:
            return 1.0
        ca, cb = Counter(a), Counter(b)
        inter = sum((ca & cb).values())
        union = sum((ca | cb).values())
        return inter / union if union else 1.0

    labels1 = [n.label for n in g1.nodes]
    labels2 = [n.label for n in g2.nodes]
    lab1 = g1.labels
    lab2 = g2.labels
    pairs1 = [tuple(sorted((lab1[u], lab1[v]))) for u, v, _ in g1.edges]
    pairs2 = [tuple(sorted((lab2[u], lab2[v]))) for u, v, _ in g2.edges]
    return 0.5 * multiset_jaccard(labels1, labels2) + 0.5 * multiset_jaccard(pairs1, pairs2)
