"""Concept DAG construction and traversal.

The graph is built from an ontology edge list restricted to the codes that
matter for a loaded visit dataset: codes carried by at least one visit plus
their ancestors (kept so the DAG stays connected for traversal).  Nodes track
their visits and the empirical phenotype distribution over them.
"""

from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

from .data import (
    PhenotypeDistribution,
    VisitDataset,
    empty_distribution,
    phenotype_distribution,
)
from .errors import CycleDetected, ParseError, UnknownCode


@dataclass(frozen=True)
class ConceptNode:
    """One medical-concept node: code, visits, phenotype distribution."""

    code: str
    label: str
    visit_ids: frozenset[str]
    phenotype_dist: PhenotypeDistribution
    depth: int

    @property
    def visit_count(self) -> int:
        return len(self.visit_ids)


@dataclass
class BuildReport:
    """Warnings collected while building a graph from raw inputs."""

    unknown_code_occurrences: int = 0
    unknown_codes: set[str] = field(default_factory=set)
    dropped_ontology_codes: set[str] = field(default_factory=set)
    deduplicated_edges: int = 0

    def warnings(self) -> list[str]:
        out = []
        if self.unknown_code_occurrences:
            out.append(
                f"dropped {self.unknown_code_occurrences} visit code occurrences "
                f"({len(self.unknown_codes)} distinct unknown codes)"
            )
        if self.dropped_ontology_codes:
            out.append(
                f"{len(self.dropped_ontology_codes)} ontology codes carry no "
                "visits and sit below every visit-bearing code; dropped"
            )
        if self.deduplicated_edges:
            out.append(f"{self.deduplicated_edges} duplicate edges removed")
        return out


@dataclass
class ConceptGraph:
    """Immutable-after-build DAG of concept nodes with is-a edges.

    Multiple parents are allowed.  All query methods are read-only and safe
    to call from concurrent readers.
    """

    nodes: dict[str, ConceptNode]
    edges: frozenset[tuple[str, str]]
    _children: dict[str, tuple[str, ...]] = field(repr=False, default_factory=dict)
    _parents: dict[str, tuple[str, ...]] = field(repr=False, default_factory=dict)
    report: BuildReport = field(default_factory=BuildReport)

    def __len__(self) -> int:
        return len(self.nodes)

    def __contains__(self, code: str) -> bool:
        return code in self.nodes

    def node(self, code: str) -> ConceptNode:
        try:
            return self.nodes[code]
        except KeyError:
            raise UnknownCode(code) from None

    def parents(self, code: str) -> set[str]:
        """Codes p with an edge (p, code)."""
        self.node(code)
        return set(self._parents.get(code, ()))

    def children(self, code: str) -> set[str]:
        self.node(code)
        return set(self._children.get(code, ()))

    def descendants(self, code: str) -> set[str]:
        """Transitive closure of children, excluding ``code`` itself."""
        self.node(code)
        seen: set[str] = set()
        stack = list(self._children.get(code, ()))
        while stack:
            current = stack.pop()
            if current in seen:
                continue
            seen.add(current)
            stack.extend(self._children.get(current, ()))
        return seen

    def ancestors(self, code: str) -> set[str]:
        """Transitive closure of parents, excluding ``code`` itself."""
        self.node(code)
        seen: set[str] = set()
        stack = list(self._parents.get(code, ()))
        while stack:
            current = stack.pop()
            if current in seen:
                continue
            seen.add(current)
            stack.extend(self._parents.get(current, ()))
        return seen

    def weakly_connected_components(self) -> list[set[str]]:
        """Partition of nodes ignoring edge direction, sorted by smallest member."""
        undirected: dict[str, set[str]] = {code: set() for code in self.nodes}
        for parent, child in self.edges:
            undirected[parent].add(child)
            undirected[child].add(parent)
        components: list[set[str]] = []
        visited: set[str] = set()
        for code in sorted(self.nodes):
            if code in visited:
                continue
            component = {code}
            queue = deque([code])
            visited.add(code)
            while queue:
                current = queue.popleft()
                for neighbor in undirected[current]:
                    if neighbor not in visited:
                        visited.add(neighbor)
                        component.add(neighbor)
                        queue.append(neighbor)
            components.append(component)
        return sorted(components, key=min)

    def induced_subgraph(self, codes: set[str]) -> "ConceptGraph":
        """Subgraph on ``codes`` keeping node payloads and induced edges."""
        kept = {c: self.nodes[c] for c in sorted(codes) if c in self.nodes}
        edges = frozenset(
            (p, c) for p, c in self.edges if p in kept and c in kept
        )
        children: dict[str, tuple[str, ...]] = {c: () for c in kept}
        parents: dict[str, tuple[str, ...]] = {c: () for c in kept}
        for p, c in sorted(edges):
            children[p] = children[p] + (c,)
            parents[c] = parents[c] + (p,)
        return ConceptGraph(
            nodes=kept, edges=edges, _children=children, _parents=parents
        )


def _check_acyclic(codes: set[str], edges: set[tuple[str, str]]) -> None:
    """Kahn's algorithm; raises CycleDetected when some edge survives."""
    indegree = {c: 0 for c in codes}
    out: dict[str, list[str]] = {c: [] for c in codes}
    for parent, child in edges:
        if parent == child:
            raise CycleDetected(f"self-loop on code {parent!r}")
        out[parent].append(child)
        indegree[child] += 1
    queue = deque(c for c in codes if indegree[c] == 0)
    processed = 0
    while queue:
        current = queue.popleft()
        processed += 1
        for child in out[current]:
            indegree[child] -= 1
            if indegree[child] == 0:
                queue.append(child)
    if processed != len(codes):
        cyclic = sorted(c for c in codes if indegree[c] > 0)
        raise CycleDetected(f"edge list contains a directed cycle through {cyclic[:8]}")


def _longest_path_depths(
    codes: list[str], parents: dict[str, tuple[str, ...]], children: dict[str, tuple[str, ...]]
) -> dict[str, int]:
    """Depth = longest root-to-node path, via topological order."""
    indegree = {c: len(parents[c]) for c in codes}
    depth = {c: 0 for c in codes}
    queue = deque(sorted(c for c in codes if indegree[c] == 0))
    while queue:
        current = queue.popleft()
        for child in children[current]:
            depth[child] = max(depth[child], depth[current] + 1)
            indegree[child] -= 1
            if indegree[child] == 0:
                queue.append(child)
    return depth


def build_graph(
    ontology_edges,
    dataset: VisitDataset,
    labels: dict[str, str] | None = None,
) -> ConceptGraph:
    """Build the concept DAG for a dataset from a raw ontology edge list.

    Kept codes are those carried by at least one visit plus their ancestors;
    visit codes absent from the ontology are dropped (counted in the build
    report).  Duplicate edges are deduplicated silently; any directed cycle,
    including a self-loop, raises CycleDetected.
    """
    labels = labels or {}
    report = BuildReport()

    raw_edges: set[tuple[str, str]] = set()
    n_pairs = 0
    universe: set[str] = set()
    for parent, child in ontology_edges:
        parent, child = str(parent), str(child)
        n_pairs += 1
        raw_edges.add((parent, child))
        universe.add(parent)
        universe.add(child)
    report.deduplicated_edges = n_pairs - len(raw_edges)
    _check_acyclic(universe, raw_edges)

    children_all: dict[str, list[str]] = {c: [] for c in universe}
    parents_all: dict[str, list[str]] = {c: [] for c in universe}
    for parent, child in raw_edges:
        children_all[parent].append(child)
        parents_all[child].append(parent)

    # Attach visits to in-universe codes; count what falls outside.
    visits_by_code: dict[str, set[str]] = {}
    for visit in dataset.visits.values():
        for code in visit.codes:
            if code in universe:
                visits_by_code.setdefault(code, set()).add(visit.visit_id)
            else:
                report.unknown_code_occurrences += 1
                report.unknown_codes.add(code)

    # Keep visit-bearing codes and everything above them.
    kept: set[str] = set(visits_by_code)
    stack = list(visits_by_code)
    while stack:
        current = stack.pop()
        for parent in parents_all[current]:
            if parent not in kept:
                kept.add(parent)
                stack.append(parent)
    report.dropped_ontology_codes = universe - kept

    edges = frozenset((p, c) for p, c in raw_edges if p in kept and c in kept)
    children: dict[str, tuple[str, ...]] = {c: () for c in kept}
    parents: dict[str, tuple[str, ...]] = {c: () for c in kept}
    for p, c in sorted(edges):
        children[p] = children[p] + (c,)
        parents[c] = parents[c] + (p,)

    ordered = sorted(kept)
    depths = _longest_path_depths(ordered, parents, children)
    nodes: dict[str, ConceptNode] = {}
    for code in ordered:
        visit_ids = frozenset(visits_by_code.get(code, set()))
        if visit_ids:
            dist = phenotype_distribution(
                [dataset.visits[v] for v in sorted(visit_ids)], dataset.vocabulary
            )
        else:
            dist = empty_distribution(dataset.vocabulary)
        nodes[code] = ConceptNode(
            code=code,
            label=labels.get(code, ""),
            visit_ids=visit_ids,
            phenotype_dist=dist,
            depth=depths[code],
        )
    return ConceptGraph(
        nodes=nodes, edges=edges, _children=children, _parents=parents, report=report
    )


def load_edge_list(path: str | Path) -> list[tuple[str, str]]:
    """Read a ``parent_code,child_code`` CSV (header required)."""
    edges: list[tuple[str, str]] = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["parent_code", "child_code"]:
            raise ParseError("expected header 'parent_code,child_code'", 1)
        for line_no, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) < 2:
                raise ParseError("expected two columns", line_no)
            edges.append((row[0].strip(), row[1].strip()))
    return edges


def load_labels(path: str | Path) -> dict[str, str]:
    """Read a ``code,label`` CSV (header required)."""
    labels: dict[str, str] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["code", "label"]:
            raise ParseError("expected header 'code,label'", 1)
        for line_no, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) < 2:
                raise ParseError("expected two columns", line_no)
            labels[row[0].strip()] = row[1].strip()
    return labels


def write_edge_list(edges, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["parent_code", "child_code"])
        for parent, child in edges:
            writer.writerow([parent, child])


def write_labels(labels: dict[str, str], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["code", "label"])
        for code in sorted(labels):
            writer.writerow([code, labels[code]])
