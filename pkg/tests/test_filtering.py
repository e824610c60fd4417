import numpy as np
import pytest

import ontocohort as oc
from ontocohort.data import PhenotypeVocabulary, VisitDataset, VisitRecord
from ontocohort.errors import UnknownSeedCode
from ontocohort.filtering import occurrence_count

VOCAB = PhenotypeVocabulary(names=("p1", "p2", "p3"))


def build_counted_graph(spec_counts, edges, phenotype="p1"):
    """Graph where each code gets exactly the requested number of visits.

    Every visit carries `phenotype`, so occurrence_count(code, phenotype)
    equals the visit count and both thresholds can be driven independently
    by min_visits vs. a phenotype not present at all.
    """
    visits = {}
    for code, count in spec_counts.items():
        for i in range(count):
            vid = f"{code}_{i}"
            visits[vid] = VisitRecord(
                visit_id=vid,
                patient_id="p",
                codes=frozenset({code}),
                phenotypes=frozenset({phenotype}),
                features=(0.0,),
                labels={},
                duration_hours=1.0,
            )
    dataset = VisitDataset(visits=visits, vocabulary=VOCAB, feature_dim=1)
    return oc.build_graph(edges, dataset), dataset


# --- brute-force oracle: predicates applied node-by-node, then BFS


def oracle_filter(edges, visit_counts, occurrence, seeds, phens, min_v, min_p):
    nodes = {c for e in edges for c in e}
    children = {}
    for p, c in edges:
        children.setdefault(p, set()).add(c)

    def desc(start):
        out, stack = set(), [start]
        while stack:
            for ch in children.get(stack.pop(), ()):
                if ch not in out:
                    out.add(ch)
                    stack.append(ch)
        return out

    qualifying = {
        n
        for n in nodes
        if visit_counts.get(n, 0) > min_v
        and any(occurrence.get((n, p), 0) > min_p for p in phens)
    }
    candidates = set(seeds) | qualifying
    for n in sorted(qualifying | set(seeds)):
        candidates |= desc(n)
    sub_edges = [(p, c) for p, c in edges if p in candidates and c in candidates]
    # BFS over undirected adjacency for components
    adj = {}
    for p, c in sub_edges:
        adj.setdefault(p, set()).add(c)
        adj.setdefault(c, set()).add(p)
    kept = set()
    for s in seeds:
        if s in kept:
            continue
        comp, stack = {s}, [s]
        while stack:
            for nb in adj.get(stack.pop(), ()):
                if nb not in comp:
                    comp.add(nb)
                    stack.append(nb)
        kept |= comp
    return kept & candidates, qualifying & kept


# --- spec'd examples


def test_noop_thresholds_keep_seed_components(tiny_graph, tiny_dataset):
    spec = oc.FilterSpec(
        selected_codes=frozenset({"B"}),
        phenotypes_of_interest=frozenset(tiny_dataset.vocabulary.names),
    )
    fg = oc.filter_graph(tiny_graph, spec, tiny_dataset)
    assert set(fg.graph.nodes) == set("ABCDEF")  # one connected component


def test_extreme_threshold_leaves_seeds_and_descendants(tiny_graph, tiny_dataset):
    max_count = max(n.visit_count for n in tiny_graph.nodes.values())
    spec = oc.FilterSpec(
        selected_codes=frozenset({"B"}),
        phenotypes_of_interest=frozenset(tiny_dataset.vocabulary.names),
        min_visits=max_count,
        min_phenotype_count=0,
    )
    fg = oc.filter_graph(tiny_graph, spec, tiny_dataset)
    assert set(fg.graph.nodes) == {"B", "D", "E"}  # seed + its descendants
    assert fg.qualifying_codes == frozenset()
    assert fg.warnings  # nothing qualified


def test_twelve_node_fixture_matches_bruteforce_oracle():
    edges = [
        ("A", "B"), ("A", "C"), ("B", "D"), ("B", "E"), ("C", "F"),
        ("C", "G"), ("D", "H"), ("E", "I"), ("F", "J"), ("G", "K"),
        ("H", "L"),
    ]
    counts = {
        "A": 150, "B": 90, "C": 120, "D": 101, "E": 7, "F": 99,
        "G": 104, "H": 3, "I": 110, "J": 102, "K": 95, "L": 2,
    }
    graph, dataset = build_counted_graph(counts, edges)
    spec = oc.FilterSpec(
        selected_codes=frozenset({"B"}),
        phenotypes_of_interest=frozenset({"p1"}),
        min_visits=100,
        min_phenotype_count=5,
    )
    fg = oc.filter_graph(graph, spec, dataset)
    occurrence = {(c, "p1"): n for c, n in counts.items()}
    want_nodes, want_qualifying = oracle_filter(
        edges, counts, occurrence, {"B"}, {"p1"}, 100, 5
    )
    assert set(fg.graph.nodes) == want_nodes
    assert fg.qualifying_codes == want_qualifying


def test_strict_thresholds():
    counts = {"A": 5, "B": 10}
    graph, dataset = build_counted_graph(counts, [("A", "B")])
    # min_visits equal to the count must disqualify (strict >)
    spec = oc.FilterSpec(
        selected_codes=frozenset({"A"}),
        phenotypes_of_interest=frozenset({"p1"}),
        min_visits=10,
    )
    fg = oc.filter_graph(graph, spec, dataset)
    assert fg.qualifying_codes == frozenset()
    spec = oc.FilterSpec(
        selected_codes=frozenset({"A"}),
        phenotypes_of_interest=frozenset({"p1"}),
        min_visits=9,
    )
    fg = oc.filter_graph(graph, spec, dataset)
    assert fg.qualifying_codes == frozenset({"B"})


def test_phenotype_threshold_counts_visits_not_shares():
    graph, dataset = build_counted_graph({"A": 1, "B": 7}, [("A", "B")])
    assert occurrence_count(graph, "B", "p1", dataset) == 7
    assert occurrence_count(graph, "B", "p2", dataset) == 0


def test_unknown_seed_code(tiny_graph, tiny_dataset):
    spec = oc.FilterSpec(
        selected_codes=frozenset({"nope"}),
        phenotypes_of_interest=frozenset({"Cardiac dysrhythmias"}),
    )
    with pytest.raises(UnknownSeedCode):
        oc.filter_graph(tiny_graph, spec, tiny_dataset)


def test_component_restriction_drops_unreachable_qualifiers():
    edges = [("A", "B"), ("C", "D")]  # two components
    counts = {"A": 50, "B": 60, "C": 70, "D": 80}
    graph, dataset = build_counted_graph(counts, edges)
    spec = oc.FilterSpec(
        selected_codes=frozenset({"A"}),
        phenotypes_of_interest=frozenset({"p1"}),
        min_visits=0,
        min_phenotype_count=0,
    )
    fg = oc.filter_graph(graph, spec, dataset)
    assert set(fg.graph.nodes) == {"A", "B"}  # C,D qualify but lack a seed


# --- invariants over randomized cases (small version; the acceptance suite
# runs the full 200-case battery)


def random_filter_case(rng):
    n = int(rng.integers(6, 26))
    order = [f"c{i:02d}" for i in range(n)]
    rng.shuffle(order)
    edges = [
        (order[i], order[j])
        for i in range(n)
        for j in range(i + 1, n)
        if rng.random() < 0.12
    ]
    if not edges:
        edges = [(order[0], order[1])]
    codes = sorted({c for e in edges for c in e})
    counts = {c: int(rng.integers(0, 12)) for c in codes}
    phens = ["p1", "p2", "p3"]
    visits = {}
    for code in codes:
        for i in range(counts[code]):
            vid = f"{code}_{i}"
            visits[vid] = VisitRecord(
                visit_id=vid,
                patient_id="p",
                codes=frozenset({code}),
                phenotypes=frozenset(
                    rng.choice(phens, size=int(rng.integers(0, 3)), replace=False)
                ),
                features=(0.0,),
                labels={},
                duration_hours=1.0,
            )
    dataset = VisitDataset(visits=visits, vocabulary=VOCAB, feature_dim=1)
    graph = oc.build_graph(edges, dataset)
    seeds = frozenset(
        rng.choice(sorted(graph.nodes), size=min(2, len(graph.nodes)), replace=False)
    )
    spec = oc.FilterSpec(
        selected_codes=seeds,
        phenotypes_of_interest=frozenset({"p1", "p2"}),
        min_visits=int(rng.integers(0, 6)),
        min_phenotype_count=int(rng.integers(0, 4)),
    )
    return graph, dataset, spec


def test_filter_invariants_randomized():
    rng = np.random.default_rng(424242)
    for _ in range(40):
        graph, dataset, spec = random_filter_case(rng)
        fg = oc.filter_graph(graph, spec, dataset)
        nodes = set(fg.graph.nodes)
        # descendant closure on qualifying codes
        for q in fg.qualifying_codes:
            assert graph.descendants(q) <= nodes
        # every component contains a seed
        for comp in fg.graph.weakly_connected_components():
            assert comp & spec.selected_codes
        # monotonicity: raising thresholds never adds qualifying codes
        import dataclasses
        tighter = dataclasses.replace(
            spec,
            min_visits=spec.min_visits + 1,
            min_phenotype_count=spec.min_phenotype_count + 1,
        )
        fg2 = oc.filter_graph(graph, tighter, dataset)
        assert fg2.qualifying_codes <= fg.qualifying_codes
        # idempotence on the surviving subgraph
        fg3 = oc.filter_graph(fg.graph, spec, dataset)
        assert set(fg3.graph.nodes) == nodes


# --- summary stats


def test_summary_empty_graph(tiny_graph, tiny_dataset):
    spec = oc.FilterSpec(
        selected_codes=frozenset({"E"}),
        phenotypes_of_interest=frozenset(tiny_dataset.vocabulary.names),
        min_visits=10**6,
    )
    fg = oc.filter_graph(tiny_graph, spec, tiny_dataset)
    stats = oc.filter_summary(fg, tiny_dataset)
    assert stats.node_count == 1  # the retained seed
    assert stats.total_visits == 1


def test_summary_pie_shares_hand_counted():
    visits = {}
    phen_sets = [("p1",), ("p1",), ("p1",), ("p2",), ("p2",)]
    for i, phens in enumerate(phen_sets):
        visits[f"v{i}"] = VisitRecord(
            visit_id=f"v{i}",
            patient_id="p",
            codes=frozenset({"B"}),
            phenotypes=frozenset(phens),
            features=(0.0,),
            labels={},
            duration_hours=1.0,
        )
    dataset = VisitDataset(visits=visits, vocabulary=VOCAB, feature_dim=1)
    graph = oc.build_graph([("A", "B")], dataset)
    spec = oc.FilterSpec(
        selected_codes=frozenset({"B"}),
        phenotypes_of_interest=frozenset({"p1", "p2"}),
    )
    fg = oc.filter_graph(graph, spec, dataset)
    stats = oc.filter_summary(fg, dataset)
    shares = dict(stats.phenotype_shares)
    assert shares["p1"] == pytest.approx(0.6)
    assert shares["p2"] == pytest.approx(0.4)
    assert stats.total_visits == 5
    assert stats.node_visit_counts[0] == ("B", 5)


def test_summary_matches_linear_scan(frozen_filtered, frozen_bundle):
    fg, _spec = frozen_filtered
    stats = oc.filter_summary(fg, frozen_bundle.dataset)
    distinct = set()
    for node in fg.graph.nodes.values():
        distinct |= set(node.visit_ids)
    assert stats.total_visits == len(distinct)
    assert stats.node_count == len(fg.graph)
    counts = sorted(
        ((c, len(n.visit_ids)) for c, n in fg.graph.nodes.items()),
        key=lambda x: (-x[1], x[0]),
    )
    assert list(stats.node_visit_counts) == counts
