"""The node matching-based loss between two API chains: evaluate fixed
matchings, then minimize over matchings and read the breakdown."""

import numpy as np

from graphchain import MatchingMatrix, chain_of, edit_cost, loss, optimal_matching, regularizer

generated = chain_of("load_graph", "degree_stats", "report")
truth = chain_of("load_graph", "classify_graph", "degree_stats", "report")

print("generated:", generated.api_ids)
print("reference:", truth.api_ids)
print()

# A hand-picked matching: align the shared prefix and suffix
m = MatchingMatrix.from_pairs(3, 4, [(0, 0), (1, 2), (2, 3)])
print("hand matching pairs:", m.pairs())
print("  edit cost X =", edit_cost(generated, truth, m))
print("  regularizer Y =", regularizer(generated, truth, m))
print("  loss(alpha=1) =", loss(generated, truth, m, 1.0).total)
print()

# The all-zero matching pays for every unmatched step twice (X and alpha*Y)
zeros = MatchingMatrix.zeros(3, 4)
print("all-zero matching loss =", loss(generated, truth, zeros, 1.0).total)
print()

best_m, breakdown = optimal_matching(generated, truth, alpha=1.0)
print("optimal matching pairs:", best_m.pairs())
print(f"  X={breakdown.x} Y={breakdown.y} alpha={breakdown.alpha} total={breakdown.total}")
print()

# order matters: swapping two steps costs two broken edges
a, b = chain_of("x", "y"), chain_of("y", "x")
_, swapped = optimal_matching(a, b, alpha=1.0)
print("swapped pair total:", swapped.total)
