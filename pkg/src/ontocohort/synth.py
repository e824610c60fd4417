"""Seeded synthetic stand-in for a real coded visit dataset plus its ontology.

Builds a concept DAG of disorder families under one root, gives every family
a distinct phenotype profile, and attaches visits whose phenotype draws
follow their node's profile.  With the locality knob on, one designated
family's visits get a task label driven by a linear signal in the feature
vector while all other visits get coin-flip labels, so cohorts confined to
that family are learnable and diluted cohorts are not.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .data import (
    PhenotypeVocabulary,
    VisitDataset,
    VisitRecord,
    write_visits_jsonl,
    write_vocabulary,
)
from .errors import InvalidConfig
from .graph import write_edge_list, write_labels

RNG_ALGORITHM = "numpy-pcg64"

# HCUP CCS condition categories, the usual phenotype vocabulary for ICU
# benchmark cohorts.
DEFAULT_PHENOTYPES = (
    "Congestive heart failure; nonhypertensive",
    "Cardiac dysrhythmias",
    "Essential hypertension",
    "Fluid and electrolyte disorders",
    "Hypertension with complications and secondary hypertension",
    "Acute myocardial infarction",
    "Other lower respiratory disease",
    "Other upper respiratory disease",
    "Respiratory failure; insufficiency; arrest (adult)",
)

FILE_NAMES = {
    "edges": "ontology.csv",
    "labels": "concept_labels.csv",
    "visits": "visits.jsonl",
    "vocabulary": "phenotypes.txt",
    "manifest": "manifest.json",
}


@dataclass(frozen=True)
class SynthConfig:
    """Knobs for the generator; defaults give the desk-scale fixture."""

    node_count: int = 200
    branch_count: int = 3
    visit_count: int = 5000
    feature_dim: int = 20
    phenotype_count: int = 9
    signal_locality: bool = True
    signal_branch: int = 0
    signal_feature_count: int | None = None  # defaults to min(4, feature_dim)
    signal_scale: float = 1.7
    background_positive_rate: float = 0.3
    label_name: str = "outcome"
    codes_per_visit_max: int = 3
    multi_parent_rate: float = 0.5
    root_visit_rate: float = 0.02
    profile_concentration: float = 26.0
    phenotype_names: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.branch_count < 1 or self.node_count < self.branch_count + 1:
            raise InvalidConfig("node_count must exceed branch_count")
        if self.visit_count < 0:
            raise InvalidConfig("visit_count must be non-negative")
        if self.feature_dim < 1:
            raise InvalidConfig("feature_dim must be positive")
        if self.phenotype_count < 2:
            raise InvalidConfig("need at least two phenotypes")
        if not 0 <= self.signal_branch < self.branch_count:
            raise InvalidConfig("signal_branch out of range")
        if self.signal_feature_count is None:
            object.__setattr__(self, "signal_feature_count", min(4, self.feature_dim))
        if not 1 <= self.signal_feature_count <= self.feature_dim:
            raise InvalidConfig("signal_feature_count out of range")
        if not 0.0 <= self.background_positive_rate <= 1.0:
            raise InvalidConfig("background_positive_rate must be in [0, 1]")
        if self.codes_per_visit_max < 1:
            raise InvalidConfig("codes_per_visit_max must be positive")
        for rate in (self.multi_parent_rate, self.root_visit_rate):
            if not 0.0 <= rate <= 1.0:
                raise InvalidConfig("rates must be in [0, 1]")
        if self.phenotype_names is not None and len(self.phenotype_names) != self.phenotype_count:
            raise InvalidConfig("phenotype_names length must equal phenotype_count")

    @classmethod
    def from_dict(cls, obj: dict) -> "SynthConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(obj) - known
        if unknown:
            raise InvalidConfig(f"unknown config keys: {sorted(unknown)}")
        if "phenotype_names" in obj and obj["phenotype_names"] is not None:
            obj = dict(obj, phenotype_names=tuple(obj["phenotype_names"]))
        return cls(**obj)


@dataclass
class SyntheticData:
    """Generator output: ontology edges, concept labels, dataset, manifest."""

    edges: list[tuple[str, str]]
    labels: dict[str, str]
    dataset: VisitDataset
    manifest: dict


def _vocabulary(config: SynthConfig) -> PhenotypeVocabulary:
    if config.phenotype_names is not None:
        return PhenotypeVocabulary(names=tuple(config.phenotype_names))
    if config.phenotype_count == len(DEFAULT_PHENOTYPES):
        return PhenotypeVocabulary(names=DEFAULT_PHENOTYPES)
    return PhenotypeVocabulary(
        names=tuple(f"phenotype_{i:02d}" for i in range(config.phenotype_count))
    )


def _branch_profiles(config: SynthConfig) -> np.ndarray:
    """One phenotype profile per branch, concentrated on a rotating pair."""
    n_phen = config.phenotype_count
    profiles = np.full((config.branch_count, n_phen), 0.03)
    for b in range(config.branch_count):
        profiles[b, (2 * b) % n_phen] += 0.55
        profiles[b, (2 * b + 1) % n_phen] += 0.30
    return profiles / profiles.sum(axis=1, keepdims=True)


def _sample_phenotypes(rng: np.random.Generator, profile: np.ndarray, count: int) -> list[int]:
    """Draw ``count`` distinct phenotype indices, renormalizing after each."""
    remaining = profile.copy()
    picked: list[int] = []
    for _ in range(min(count, len(profile))):
        remaining_sum = remaining.sum()
        if remaining_sum <= 0:
            break
        idx = int(rng.choice(len(remaining), p=remaining / remaining_sum))
        picked.append(idx)
        remaining[idx] = 0.0
    return picked


def generate_synthetic(config: SynthConfig, seed: int) -> SyntheticData:
    """Deterministically generate an ontology edge list and a visit dataset.

    The same (config, seed) pair always produces identical output, down to
    serialized bytes.  The manifest records the signal subtree and suggested
    seed codes for downstream runs.
    """
    seed_seq = np.random.SeedSequence(seed)
    rng_structure, rng_profiles, rng_visits = (
        np.random.default_rng(s) for s in seed_seq.spawn(3)
    )
    vocabulary = _vocabulary(config)

    # --- concept DAG ---------------------------------------------------
    root = "1000000"
    codes = [root]
    labels = {root: "clinical finding (root)"}
    branch_of = {root: -1}
    depth_of = {root: 0}
    edges: list[tuple[str, str]] = []
    branch_members: list[list[str]] = [[] for _ in range(config.branch_count)]

    def new_code() -> str:
        code = str(1000000 + len(codes))
        codes.append(code)
        return code

    for b in range(config.branch_count):
        code = new_code()
        labels[code] = f"disorder family {b}"
        branch_of[code] = b
        depth_of[code] = 1
        branch_members[b].append(code)
        edges.append((root, code))

    remaining = config.node_count - 1 - config.branch_count
    for i in range(remaining):
        b = i % config.branch_count
        members = list(branch_members[b])  # membership before this node joins
        # bias toward deeper parents so branches form real hierarchies
        # rather than flat stars under the family root
        pw = np.array([(1.0 + depth_of[c]) ** 2 for c in members])
        parent = members[int(rng_structure.choice(len(members), p=pw / pw.sum()))]
        code = new_code()
        labels[code] = f"disorder {len(codes) - 1} (family {b})"
        branch_of[code] = b
        depth_of[code] = depth_of[parent] + 1
        branch_members[b].append(code)
        edges.append((parent, code))
        # occasional second parent; new nodes are sinks so this stays acyclic
        if len(members) > 1 and rng_structure.random() < config.multi_parent_rate:
            other = members[int(rng_structure.integers(len(members)))]
            if other != parent:
                edges.append((other, code))
                depth_of[code] = max(depth_of[code], depth_of[other] + 1)

    # --- phenotype profiles ---------------------------------------------
    base_profiles = _branch_profiles(config)
    node_profile: dict[str, np.ndarray] = {
        root: base_profiles.mean(axis=0)
    }
    for code in codes[1:]:
        alpha = base_profiles[branch_of[code]] * config.profile_concentration
        node_profile[code] = rng_profiles.dirichlet(alpha)

    # --- signal geometry --------------------------------------------------
    m = config.signal_feature_count
    signal_weights = rng_profiles.standard_normal(m)
    signal_weights /= np.linalg.norm(signal_weights)
    mortality_weights = rng_profiles.standard_normal(config.feature_dim)
    mortality_weights /= np.linalg.norm(mortality_weights)
    # mean logit that hits the background rate given z ~ N(mu, scale^2)
    scale = config.signal_scale
    q = min(max(config.background_positive_rate, 1e-6), 1 - 1e-6)
    mu = math.log(q / (1 - q)) * math.sqrt(1 + math.pi * scale * scale / 8.0)

    # --- visits -----------------------------------------------------------
    node_weights: dict[str, np.ndarray] = {}
    for b in range(config.branch_count):
        w = np.array([1.0 + depth_of[c] for c in branch_members[b]])
        node_weights[f"branch_{b}"] = w / w.sum()

    patient_pool = max(1, int(0.85 * config.visit_count)) if config.visit_count else 1
    visits: dict[str, VisitRecord] = {}
    signal_visit_count = 0
    for i in range(config.visit_count):
        visit_id = f"V{i:06d}"
        patient_id = f"P{int(rng_visits.integers(patient_pool)):06d}"
        if rng_visits.random() < config.root_visit_rate:
            primary = root
            branch = -1
        else:
            branch = int(rng_visits.integers(config.branch_count))
            members = branch_members[branch]
            primary = members[
                int(rng_visits.choice(len(members), p=node_weights[f"branch_{branch}"]))
            ]
        visit_codes = {primary}
        if primary != root and rng_visits.random() < 0.35:
            # walk one step up: pick the recorded tree parent
            for parent, child in edges:
                if child == primary:
                    visit_codes.add(parent)
                    break
        if (
            branch >= 0
            and len(visit_codes) < config.codes_per_visit_max
            and rng_visits.random() < 0.15
        ):
            members = branch_members[branch]
            visit_codes.add(members[int(rng_visits.integers(len(members)))])

        n_phen = 1 + int(rng_visits.binomial(2, 0.45))
        phen_idx = _sample_phenotypes(rng_visits, node_profile[primary], n_phen)
        phenotypes = frozenset(vocabulary.names[j] for j in phen_idx)

        features = rng_visits.standard_normal(config.feature_dim)
        is_signal = config.signal_locality and branch == config.signal_branch
        if is_signal:
            z = mu + scale * float(signal_weights @ features[:m])
            outcome = int(rng_visits.random() < 1.0 / (1.0 + math.exp(-z)))
            signal_visit_count += 1
        else:
            outcome = int(rng_visits.random() < config.background_positive_rate)
        duration = float(rng_visits.uniform(12.0, 240.0))
        z_mort = -2.0 + 0.8 * float(mortality_weights @ features)
        mortality = int(rng_visits.random() < 1.0 / (1.0 + math.exp(-z_mort)))

        visits[visit_id] = VisitRecord(
            visit_id=visit_id,
            patient_id=patient_id,
            codes=frozenset(visit_codes),
            phenotypes=phenotypes,
            features=tuple(float(x) for x in features),
            labels={config.label_name: outcome, "mortality": mortality},
            duration_hours=duration,
        )

    dataset = VisitDataset(
        visits=visits, vocabulary=vocabulary, feature_dim=config.feature_dim
    )

    # --- manifest ---------------------------------------------------------
    signal_codes = sorted(branch_members[config.signal_branch]) if config.signal_locality else []
    direct_counts: dict[str, int] = {c: 0 for c in codes}
    for visit in visits.values():
        for code in visit.codes:
            direct_counts[code] += 1

    children_of: dict[str, list[str]] = {c: [] for c in codes}
    for parent, child in edges:
        children_of[parent].append(child)

    def subtree_size(start: str) -> int:
        seen = {start}
        stack = [start]
        while stack:
            for child in children_of[stack.pop()]:
                if child not in seen:
                    seen.add(child)
                    stack.append(child)
        return len(seen) - 1

    # Suggest specific concepts: deep enough to leave room for upward
    # growth, with small subtrees, breaking ties toward well-visited nodes.
    cap = max(2, len(signal_codes) // 5)
    candidates = [
        c for c in signal_codes if depth_of[c] >= 2 and subtree_size(c) <= cap
    ]
    if not candidates:
        candidates = [c for c in signal_codes if depth_of[c] >= 1]
    suggested = sorted(candidates, key=lambda c: (-direct_counts[c], c))[:2]

    config_dict = asdict(config)
    if config_dict["phenotype_names"] is not None:
        config_dict["phenotype_names"] = list(config_dict["phenotype_names"])
    manifest = {
        "config": config_dict,
        "seed": seed,
        "rng": RNG_ALGORITHM,
        "node_count": len(codes),
        "visit_count": len(visits),
        "signal_branch_root": branch_members[config.signal_branch][0]
        if config.signal_locality
        else None,
        "signal_codes": signal_codes,
        "signal_visit_count": signal_visit_count,
        "suggested_seed_codes": sorted(suggested),
        "task": config.label_name,
    }
    return SyntheticData(
        edges=sorted(edges), labels=labels, dataset=dataset, manifest=manifest
    )


def write_bundle(data: SyntheticData, out_dir: str | Path) -> Path:
    """Write the generated tree: edges, labels, visits, vocabulary, manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_edge_list(data.edges, out / FILE_NAMES["edges"])
    write_labels(data.labels, out / FILE_NAMES["labels"])
    write_visits_jsonl(
        (data.dataset.visits[v] for v in sorted(data.dataset.visits)),
        out / FILE_NAMES["visits"],
    )
    write_vocabulary(data.dataset.vocabulary, out / FILE_NAMES["vocabulary"])
    (out / FILE_NAMES["manifest"]).write_text(
        json.dumps(data.manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    return out
