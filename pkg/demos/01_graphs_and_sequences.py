"""Walk through the graph layer: parse a molecule, inspect neighborhoods,
cover it with paths, condense its motifs, and print both sequence levels."""

from graphchain import (
    PathCoverConfig,
    condense_motifs,
    enumerate_paths,
    khop_subgraph,
    parse_graph,
    path_cover,
    sequentialize,
    serialize_graph,
)

DOC = """\
graph aspirin_fragment
node 0 C
node 1 C
node 2 C
node 3 O
node 4 O
node 5 C
edge 0 1
edge 1 2
edge 0 2
edge 2 3
edge 3 4
edge 4 5
"""

g = parse_graph(DOC)
print(f"parsed '{g.name}': {g.n_nodes} nodes, {g.n_edges} edges")
print()

print("2-hop neighborhood of node 0:")
print(serialize_graph(khop_subgraph(g, 0, 2)))

print("simple paths from node 2, length <= 2:")
for p in enumerate_paths(g, 2, 2):
    print(" ", p.nodes)
print()

cfg = PathCoverConfig(l=2, minimize=True)
cover = path_cover(g, cfg)
print(f"minimized path cover at l=2: {len(cover)} paths")
origins = sorted({p.origin for p in cover})
print(f"  origins covered: {origins}")
print()

sg = condense_motifs(g)
print("motif condensation (triangles merge into super-nodes):")
for sn in sg.super_nodes:
    print(f"  super-node {sn.id}: members={sorted(sn.members)} label={sn.label}")
print(f"  super-edges: {list(sg.super_edges)}")
print()

bundle = sequentialize(g, cfg)
print("base-level sequences (first 6):")
for seq in bundle.base_sequences[:6]:
    print("  " + " ".join(seq))
print("super-level sequences:")
for seq in bundle.super_sequences:
    print("  " + " ".join(seq))
