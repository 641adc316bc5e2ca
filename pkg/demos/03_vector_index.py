"""Build a tau-MG proximity graph, audit the occlusion rule, and compare
greedy beam routing against the brute-force oracle."""

import time

import numpy as np

from graphchain import VectorSet, brute_force, build, greedy_search, occluded
from graphchain.taumg import SearchStats, audit_occlusion, default_tau

rng = np.random.default_rng(0)

# the rule itself, on points you can check by hand
u, v, w = np.array([0.0, 0.0]), np.array([4.0, 0.0]), np.array([2.0, 0.0])
print("occluded((0,0)->(4,0) by (2,0), tau=0.1):", occluded(u, v, w, 0.1))
print("occluded((0,0)->(4,0) by (0,3), tau=0.1):", occluded(u, v, np.array([0.0, 3.0]), 0.1))
print()

dset = VectorSet(rng.random((1500, 16)))
tau = default_tau(dset)
t0 = time.time()
index = build(dset, tau)
print(f"built tau-MG: n={dset.n} tau={tau:.4f} edges={index.edge_count} "
      f"entry={index.entry_point} ({time.time() - t0:.2f}s)")

violations = audit_occlusion(dset, index)
print(f"occlusion audit: {len(violations)} violations, "
      f"{len(index.repair_edges())} repair edges")
print()

hits = 0
ratios = []
hops = []
for _ in range(100):
    q = rng.random(16)
    stats = SearchStats()
    got = greedy_search(dset, index, q, beam=32, k=1, stats=stats)[0]
    exact = brute_force(dset, q, 1)[0]
    hits += got.id == exact.id
    ratios.append(got.distance / exact.distance if exact.distance else 1.0)
    hops.append(stats.hops)
print(f"100 queries, beam=32: recall@1={hits / 100:.2f} "
      f"mean-dist-ratio={np.mean(ratios):.4f} mean-hops={np.mean(hops):.1f}")

# tau controls density: a larger tau occludes less, keeping more edges
for t in (0.0, tau, 2 * tau):
    idx = build(VectorSet(dset.vectors[:400]), t, max_degree=None)
    print(f"  tau={t:.4f}: edges={idx.edge_count}")
