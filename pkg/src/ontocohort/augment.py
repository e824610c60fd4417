"""KL-gated Monte-Carlo growth of a seed node set over the filtered graph.

Growth starts from the seed codes and their descendants.  Each hop proposes
the parents of the current frontier (a map from selected nodes to their
descendants), keeps candidates whose minimum KL divergence against the
frontier's children is strictly below the gate threshold, and accepts each
survivor independently with the sampling rate.  Accepted nodes and their
descendants join the result and become the next frontier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .data import PhenotypeDistribution
from .errors import SeedOutsideFilteredGraph, UnknownCode, VocabularyMismatch
from .filtering import FilteredGraph

KL_EPSILON = 1e-6

RNG_ALGORITHM = "numpy-pcg64"

ORIGIN_SEED = "seed"
ORIGIN_SEED_DESCENDANT = "seed_descendant"
ORIGIN_SAMPLED = "sampled"
ORIGIN_SAMPLED_DESCENDANT = "sampled_descendant"


def kl_divergence(
    p: PhenotypeDistribution,
    q: PhenotypeDistribution,
    epsilon: float = KL_EPSILON,
) -> float:
    """KL divergence D(p || q) in nats after additive smoothing.

    Both arguments get ``epsilon`` added to every coordinate and are
    renormalized before summation, so differing supports stay finite.
    Identical inputs give exactly 0.0.  If either distribution is the empty
    distribution the result is +inf (it can never pass a gate).
    """
    if len(p.probs) != len(q.probs):
        raise VocabularyMismatch(
            f"distributions have {len(p.probs)} vs {len(q.probs)} coordinates"
        )
    if p.is_empty or q.is_empty:
        return math.inf
    ps = p.as_array() + epsilon
    qs = q.as_array() + epsilon
    ps /= ps.sum()
    qs /= qs.sum()
    return float(np.sum(ps * np.log(ps / qs)))


@dataclass(frozen=True)
class AugmentSpec:
    """Growth parameters: hop count, KL gate, sampling rate, RNG seed."""

    seed_codes: frozenset[str]
    hops: int = 1
    kl_threshold: float = math.inf
    sampling_rate: float = 1.0
    rng_seed: int = 0
    epsilon: float = KL_EPSILON

    def __post_init__(self):
        if not self.seed_codes:
            raise ValueError("seed_codes must be non-empty")
        if self.hops < 1:
            raise ValueError("hops must be >= 1")
        if self.kl_threshold < 0:
            raise ValueError("kl_threshold must be >= 0")
        if not 0.0 <= self.sampling_rate <= 1.0:
            raise ValueError("sampling_rate must be in [0, 1]")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")

    @classmethod
    def from_dict(cls, obj: dict) -> "AugmentSpec":
        threshold = obj.get("kl_threshold", math.inf)
        if threshold is None or (isinstance(threshold, str) and threshold.lower() in ("inf", "infinity")):
            threshold = math.inf
        spec = cls(
            seed_codes=frozenset(str(c) for c in obj["seed_codes"]),
            hops=int(obj.get("hops", 1)),
            kl_threshold=float(threshold),
            sampling_rate=float(obj.get("sampling_rate", 1.0)),
            rng_seed=int(obj.get("rng_seed", 0)),
        )
        if "epsilon" in obj:
            spec = replace(spec, epsilon=float(obj["epsilon"]))
        return spec

    def to_dict(self) -> dict:
        return {
            "seed_codes": sorted(self.seed_codes),
            "hops": self.hops,
            "kl_threshold": "inf" if math.isinf(self.kl_threshold) else self.kl_threshold,
            "sampling_rate": self.sampling_rate,
            "rng_seed": self.rng_seed,
            "epsilon": self.epsilon,
        }


@dataclass(frozen=True)
class FrontierMap:
    """Map from each frontier node to its descendants in the filtered graph."""

    entries: dict[str, frozenset[str]]

    @classmethod
    def from_codes(cls, fg: FilteredGraph, codes) -> "FrontierMap":
        return cls(
            entries={code: frozenset(fg.graph.descendants(code)) for code in sorted(codes)}
        )

    def keys(self):
        return self.entries.keys()

    def __getitem__(self, code: str) -> frozenset[str]:
        return self.entries[code]


@dataclass(frozen=True)
class Provenance:
    """How a node entered the augmented set."""

    origin: str
    hop: int
    min_kl: float | None = None


@dataclass(frozen=True)
class AugmentResult:
    """The grown node set, per-node provenance and the extracted cohort."""

    node_set: frozenset[str]
    provenance: dict[str, Provenance]
    cohort_visit_ids: frozenset[str]
    spec_echo: AugmentSpec
    hops_executed: int
    terminated_early: bool

    def provenance_counts(self) -> dict[str, int]:
        counts = {
            ORIGIN_SEED: 0,
            ORIGIN_SEED_DESCENDANT: 0,
            ORIGIN_SAMPLED: 0,
            ORIGIN_SAMPLED_DESCENDANT: 0,
        }
        for entry in self.provenance.values():
            counts[entry.origin] += 1
        return counts

    def provenance_records(self) -> list[dict]:
        """Stable JSON form, one record per node in code order."""
        out = []
        for code in sorted(self.node_set):
            entry = self.provenance[code]
            out.append(
                {
                    "code": code,
                    "origin": entry.origin,
                    "hop": entry.hop,
                    "min_kl": entry.min_kl,
                }
            )
        return out


def candidate_parents(
    fg: FilteredGraph,
    frontier: FrontierMap,
    exclude: frozenset[str] | set[str] = frozenset(),
) -> dict[str, set[str]]:
    """Per frontier node, the parent candidates proposed for the next hop.

    Candidates are the node's parents plus the parents of each of its
    descendants, minus the node itself, its descendants, and ``exclude``
    (the accumulating result set, so nothing is re-proposed).
    """
    out: dict[str, set[str]] = {}
    for code in sorted(frontier.keys()):
        descendants = frontier[code]
        candidates = fg.graph.parents(code)
        for child in descendants:
            candidates |= fg.graph.parents(child)
        candidates -= {code}
        candidates -= descendants
        candidates -= set(exclude)
        out[code] = candidates
    return out


def score_candidates(
    fg: FilteredGraph,
    frontier: FrontierMap,
    candidates: dict[str, set[str]],
    kl_threshold: float = math.inf,
    epsilon: float = KL_EPSILON,
) -> dict[str, float]:
    """Minimum KL of each candidate against the frontier's children.

    For a candidate reachable from frontier node ``n`` the score is
    min over child in descendants(n) of D(p_candidate || p_child); when a
    frontier node has no descendants the comparison falls back to the node
    itself.  Candidates reachable from several frontier nodes keep the global
    minimum.  Only candidates with score strictly below ``kl_threshold``
    are returned.
    """
    best: dict[str, float] = {}
    for code in sorted(candidates):
        children = frontier[code]
        targets = sorted(children) if children else [code]
        target_dists = [fg.graph.node(t).phenotype_dist for t in targets]
        for candidate in sorted(candidates[code]):
            p_candidate = fg.graph.node(candidate).phenotype_dist
            min_kl = math.inf
            for dist in target_dists:
                min_kl = min(min_kl, kl_divergence(p_candidate, dist, epsilon))
            if candidate not in best or min_kl < best[candidate]:
                best[candidate] = min_kl
    return {code: kl for code, kl in best.items() if kl < kl_threshold}


def mc_sample(
    rng: np.random.Generator, sampling_rate: float, scored: dict[str, float]
) -> set[str]:
    """Accept each scored candidate independently with the sampling rate.

    Candidates are visited in ascending code order with one uniform draw
    each, so results replay exactly for a fixed generator state.
    """
    selected: set[str] = set()
    for code in sorted(scored):
        if rng.random() < sampling_rate:
            selected.add(code)
    return selected


def augment(fg: FilteredGraph, spec: AugmentSpec) -> AugmentResult:
    """Run the full growth procedure and extract the visit cohort.

    Deterministic for fixed inputs including the RNG seed (PCG64).  A hop
    that yields no gated candidates stops growth; remaining hops are no-ops.
    """
    graph = fg.graph
    missing = sorted(c for c in spec.seed_codes if c not in graph)
    if missing:
        raise SeedOutsideFilteredGraph(f"seed codes not in filtered graph: {missing}")

    provenance: dict[str, Provenance] = {}
    node_set: set[str] = set()
    for code in sorted(spec.seed_codes):
        provenance[code] = Provenance(origin=ORIGIN_SEED, hop=0)
        node_set.add(code)
    for code in sorted(spec.seed_codes):
        for desc in sorted(graph.descendants(code)):
            if desc not in node_set:
                provenance[desc] = Provenance(origin=ORIGIN_SEED_DESCENDANT, hop=0)
                node_set.add(desc)

    frontier = FrontierMap.from_codes(fg, spec.seed_codes)
    rng = np.random.default_rng(spec.rng_seed)
    hops_executed = 0
    terminated_early = False
    for hop in range(1, spec.hops + 1):
        candidates = candidate_parents(fg, frontier, exclude=node_set)
        scored = score_candidates(
            fg, frontier, candidates, spec.kl_threshold, spec.epsilon
        )
        if not scored:
            terminated_early = True
            break
        hops_executed = hop
        selected = mc_sample(rng, spec.sampling_rate, scored)
        for code in sorted(selected):
            provenance[code] = Provenance(
                origin=ORIGIN_SAMPLED, hop=hop, min_kl=scored[code]
            )
            node_set.add(code)
        for code in sorted(selected):
            for desc in sorted(graph.descendants(code)):
                if desc not in node_set:
                    provenance[desc] = Provenance(
                        origin=ORIGIN_SAMPLED_DESCENDANT, hop=hop
                    )
                    node_set.add(desc)
        frontier = FrontierMap.from_codes(fg, selected)

    cohort: set[str] = set()
    for code in node_set:
        cohort.update(graph.nodes[code].visit_ids)
    return AugmentResult(
        node_set=frozenset(node_set),
        provenance=provenance,
        cohort_visit_ids=frozenset(cohort),
        spec_echo=spec,
        hops_executed=hops_executed,
        terminated_early=terminated_early,
    )


def kl_matrix(fg: FilteredGraph, codes: list[str], epsilon: float = KL_EPSILON) -> np.ndarray:
    """Pairwise divergence matrix M[i][j] = D(p_i || p_j); diagonal is 0."""
    for code in codes:
        if code not in fg.graph:
            raise UnknownCode(code)
    dists = [fg.graph.node(code).phenotype_dist for code in codes]
    n = len(codes)
    matrix = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j:
                matrix[i, j] = kl_divergence(dists[i], dists[j], epsilon)
    return matrix
