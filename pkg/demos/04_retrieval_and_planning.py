"""Retrieve APIs for a question, pull reference chains from logged
exemplars, and plan a chain by rollout search."""

from importlib import resources

from graphchain import ExemplarStore, RolloutConfig, generate_chain, reference_chains
from graphchain.registry import builtin_registry

registry = builtin_registry()
question = "write a brief report for this graph"

print(f"question: {question!r}")
print()
print("top-5 retrieved apis:")
for spec, score in registry.retrieve(question, 5):
    print(f"  {score:6.3f}  {spec.id:22s} {spec.description}")
print()

log_text = resources.files("graphchain.data").joinpath("exemplars.log").read_text()
store = ExemplarStore.from_log_text(log_text, registry.embedder)
refs = reference_chains(registry.embed_text(question), store, 3)
print("reference chains from the 3 nearest logged questions:")
for chain, tag in zip(refs.chains, refs.provenance):
    print(f"  [{tag}] {' -> '.join(chain.api_ids)}")
print()

trace = []
cfg = RolloutConfig(r=16, max_len=5, seed=0)
chain = generate_chain(question, registry, refs, cfg, trace=trace)
print("per-step candidate scores (negated rollout loss, best first):")
for entry in trace:
    ranked = ", ".join(f"{api}={score:.2f}" for score, api in entry["scores"][:4])
    print(f"  step {entry['step']}: {ranked}")
print()
print("planned chain:", " -> ".join(chain.api_ids))
