"""Threshold-based reduction of the concept graph to the user's region of interest.

A node qualifies when it carries strictly more visits than the visit
threshold and at least one phenotype of interest strictly more often than the
phenotype threshold.  Qualifying nodes bring all their descendants; seed
codes are always retained together with their descendants; the result is cut
down to the weakly connected components that contain a seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .data import PhenotypeDistribution, VisitDataset, phenotype_distribution
from .errors import UnknownSeedCode
from .graph import ConceptGraph


@dataclass(frozen=True)
class FilterSpec:
    """User filter parameters: seed codes, phenotypes of interest, thresholds."""

    selected_codes: frozenset[str]
    phenotypes_of_interest: frozenset[str]
    min_visits: int = 0
    min_phenotype_count: int = 0

    def __post_init__(self):
        if not self.selected_codes:
            raise ValueError("selected_codes must be non-empty")
        if self.min_visits < 0 or self.min_phenotype_count < 0:
            raise ValueError("thresholds must be non-negative")

    @classmethod
    def from_dict(cls, obj: dict) -> "FilterSpec":
        return cls(
            selected_codes=frozenset(str(c) for c in obj["selected_codes"]),
            phenotypes_of_interest=frozenset(
                str(p) for p in obj["phenotypes_of_interest"]
            ),
            min_visits=int(obj.get("min_visits", 0)),
            min_phenotype_count=int(obj.get("min_phenotype_count", 0)),
        )

    def to_dict(self) -> dict:
        return {
            "selected_codes": sorted(self.selected_codes),
            "phenotypes_of_interest": sorted(self.phenotypes_of_interest),
            "min_visits": self.min_visits,
            "min_phenotype_count": self.min_phenotype_count,
        }


@dataclass
class FilteredGraph:
    """Induced subgraph that survived filtering, with membership bookkeeping.

    Node payloads (visits, distributions) carry over from the base graph
    unchanged.  Every weakly connected component contains at least one seed.
    """

    graph: ConceptGraph
    seed_codes: frozenset[str]
    qualifying_codes: frozenset[str]
    descendant_codes: frozenset[str]
    warnings: tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.graph)

    def distinct_visit_ids(self) -> set[str]:
        out: set[str] = set()
        for node in self.graph.nodes.values():
            out.update(node.visit_ids)
        return out


@dataclass(frozen=True)
class SummaryStats:
    """Chart-ready summary of a filtered graph."""

    node_count: int
    total_visits: int
    node_visit_counts: tuple[tuple[str, int], ...]  # descending, bar chart
    phenotype_shares: tuple[tuple[str, float], ...]  # vocabulary order, pie chart


def occurrence_count(graph: ConceptGraph, code: str, phenotype: str, dataset: VisitDataset) -> int:
    """Number of visits at ``code`` whose phenotype set contains ``phenotype``."""
    node = graph.node(code)
    return sum(
        1 for v in node.visit_ids if phenotype in dataset.visits[v].phenotypes
    )


def filter_graph(
    graph: ConceptGraph, spec: FilterSpec, dataset: VisitDataset
) -> FilteredGraph:
    """Apply the two qualification thresholds and cut to seed components.

    Both thresholds are strict: a node qualifies iff its visit count exceeds
    ``min_visits`` and some phenotype of interest occurs in strictly more
    than ``min_phenotype_count`` of its visits.  Descendants of qualifying
    nodes and of seed codes are included without re-checking thresholds.
    """
    missing = sorted(c for c in spec.selected_codes if c not in graph)
    if missing:
        raise UnknownSeedCode(f"seed codes not in graph: {missing}")

    qualifying: set[str] = set()
    for code in sorted(graph.nodes):
        node = graph.nodes[code]
        if node.visit_count <= spec.min_visits:
            continue
        for phenotype in spec.phenotypes_of_interest:
            if occurrence_count(graph, code, phenotype, dataset) > spec.min_phenotype_count:
                qualifying.add(code)
                break

    candidates: set[str] = set(qualifying) | set(spec.selected_codes)
    for code in sorted(qualifying | spec.selected_codes):
        candidates.update(graph.descendants(code))

    induced = graph.induced_subgraph(candidates)
    kept: set[str] = set()
    for component in induced.weakly_connected_components():
        if component & spec.selected_codes:
            kept.update(component)
    final = induced.induced_subgraph(kept)

    warnings: list[str] = []
    if not qualifying:
        warnings.append(
            "no nodes passed the thresholds; keeping seeds and their descendants only"
        )
    if not final.nodes:
        warnings.append("filter produced an empty graph")
    return FilteredGraph(
        graph=final,
        seed_codes=frozenset(spec.selected_codes),
        qualifying_codes=frozenset(qualifying & kept),
        descendant_codes=frozenset(kept - qualifying - spec.selected_codes),
        warnings=tuple(warnings),
    )


def filter_summary(fg: FilteredGraph, dataset: VisitDataset) -> SummaryStats:
    """Totals, per-node record counts and phenotype coverage shares."""
    visit_ids = fg.distinct_visit_ids()
    counts = sorted(
        ((code, node.visit_count) for code, node in fg.graph.nodes.items()),
        key=lambda item: (-item[1], item[0]),
    )
    dist: PhenotypeDistribution = phenotype_distribution(
        [dataset.visits[v] for v in sorted(visit_ids)], dataset.vocabulary
    )
    return SummaryStats(
        node_count=len(fg.graph),
        total_visits=len(visit_ids),
        node_visit_counts=tuple(counts),
        phenotype_shares=tuple(zip(dataset.vocabulary.names, dist.probs)),
    )
