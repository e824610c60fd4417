"""
Anatomy of one growth hop
=========================

A hand-sized graph makes every step of the growth procedure visible:
which parents get proposed, what their divergences are, which survive the
gate, and how provenance is recorded.
"""

import ontocohort as oc
from ontocohort.augment import FrontierMap
from ontocohort.data import PhenotypeVocabulary, VisitDataset, VisitRecord

# A small diamond: two parents over the seed, one child below it.
#
#        far   near
#           \  /
#           seed
#            |
#           leaf
#
# "near" shares the seed subtree's phenotype mix; "far" does not.
EDGES = [("far", "seed"), ("near", "seed"), ("seed", "leaf")]
MIX = {  # share of visits carrying (p1, p2) per code
    "seed": (0.5, 0.5),
    "leaf": (0.5, 0.5),
    "near": (0.6, 0.4),
    "far": (1.0, 0.0),
}

vocab = PhenotypeVocabulary(names=("p1", "p2"))
visits = {}
for code, (a, _) in MIX.items():
    for i in range(10):
        phen = "p1" if i < round(a * 10) else "p2"
        vid = f"{code}_{i}"
        visits[vid] = VisitRecord(
            visit_id=vid,
            patient_id="demo",
            codes=frozenset({code}),
            phenotypes=frozenset({phen}),
            features=(0.0,),
            labels={},
            duration_hours=1.0,
        )
dataset = VisitDataset(visits=visits, vocabulary=vocab, feature_dim=1)
graph = oc.build_graph(EDGES, dataset)

fg = oc.filter_graph(
    graph,
    oc.FilterSpec(
        selected_codes=frozenset({"seed"}),
        phenotypes_of_interest=frozenset({"p1", "p2"}),
    ),
    dataset,
)

# Step 1: the frontier maps each selected node to its descendants.
frontier = FrontierMap.from_codes(fg, ["seed"])
print("frontier:", {k: sorted(v) for k, v in frontier.entries.items()})

# Step 2: candidates are the parents of the node and of its descendants.
candidates = oc.candidate_parents(fg, frontier)
print("candidates:", {k: sorted(v) for k, v in candidates.items()})

# Step 3: each candidate's score is its minimum divergence against the
# frontier node's children ("leaf" here).  Lower means more similar.
scored = oc.score_candidates(fg, frontier, candidates)
for code, kl in sorted(scored.items()):
    print(f"  D(p_{code} || p_leaf) = {kl:.4f}")

# Step 4: the gate. 0.1 admits "near" and rejects "far".
gated = oc.score_candidates(fg, frontier, candidates, kl_threshold=0.1)
print("pass the 0.1 gate:", sorted(gated))

# Step 5: the full procedure stamps every member with how it got in.
result = oc.augment(
    fg,
    oc.AugmentSpec(
        seed_codes=frozenset({"seed"}),
        hops=1,
        kl_threshold=0.1,
        sampling_rate=1.0,
        rng_seed=0,
    ),
)
print("provenance:")
for record in result.provenance_records():
    kl = record["min_kl"]
    extra = "" if kl is None else f"  (min KL {kl:.4f})"
    print(f"  {record['code']:>5}: {record['origin']}{extra}")
