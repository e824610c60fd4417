"""Visit-level observational data: loading, phenotype distributions, export.

A dataset is a collection of visit records, each carrying concept codes,
phenotype labels from a fixed vocabulary, a numeric feature vector and
binary task labels.  Per-node empirical phenotype distributions computed
here are the similarity currency of the augmentation step.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    DuplicateVisitId,
    FeatureDimMismatch,
    ParseError,
    UnknownPhenotype,
)

VISIT_KEYS = {
    "visit_id",
    "patient_id",
    "codes",
    "phenotypes",
    "features",
    "labels",
    "duration_hours",
}


@dataclass(frozen=True)
class PhenotypeVocabulary:
    """Ordered, fixed phenotype name list shared by every distribution."""

    names: tuple[str, ...]

    def __post_init__(self):
        if not self.names:
            raise ValueError("phenotype vocabulary must be non-empty")
        if len(set(self.names)) != len(self.names):
            raise ValueError("phenotype vocabulary contains duplicate names")

    def __len__(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        return self.names.index(name)


@dataclass(frozen=True)
class VisitRecord:
    """One ICU/hospital visit: codes, phenotypes, features, task labels."""

    visit_id: str
    patient_id: str
    codes: frozenset[str]
    phenotypes: frozenset[str]
    features: tuple[float, ...]
    labels: dict[str, int]
    duration_hours: float


@dataclass(frozen=True)
class PhenotypeDistribution:
    """Empirical distribution of phenotype occurrences over a visit set.

    ``support_count`` is the number of visits that contributed at least one
    phenotype occurrence.  A distribution with ``support_count == 0`` is the
    flagged *empty* distribution (all-zero probs); KL against it is +inf.
    """

    probs: tuple[float, ...]
    support_count: int

    @property
    def is_empty(self) -> bool:
        return self.support_count == 0

    def as_array(self) -> np.ndarray:
        return np.asarray(self.probs, dtype=float)


@dataclass
class VisitDataset:
    """Validated collection of visits plus the shared phenotype vocabulary."""

    visits: dict[str, VisitRecord]
    vocabulary: PhenotypeVocabulary
    feature_dim: int
    feature_names: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.feature_names:
            self.feature_names = [f"f{i}" for i in range(self.feature_dim)]

    def __len__(self) -> int:
        return len(self.visits)


def empty_distribution(vocabulary: PhenotypeVocabulary) -> PhenotypeDistribution:
    return PhenotypeDistribution(probs=(0.0,) * len(vocabulary), support_count=0)


def phenotype_distribution(
    visits: list[VisitRecord] | tuple[VisitRecord, ...],
    vocabulary: PhenotypeVocabulary,
) -> PhenotypeDistribution:
    """Empirical phenotype-occurrence distribution over ``visits``.

    Each visit contributes one occurrence per phenotype it carries, and
    probabilities are normalized by the total occurrence count, so the result
    sums to 1 whenever any occurrence exists.  Visits carrying no phenotype
    contribute nothing; if no visit contributes, the empty distribution is
    returned.
    """
    counts = [0] * len(vocabulary)
    index = {name: i for i, name in enumerate(vocabulary.names)}
    support = 0
    for visit in visits:
        contributed = False
        for name in visit.phenotypes:
            try:
                counts[index[name]] += 1
            except KeyError:
                raise UnknownPhenotype(
                    f"visit {visit.visit_id!r} carries unknown phenotype {name!r}"
                ) from None
            contributed = True
        if contributed:
            support += 1
    total = sum(counts)
    if total == 0:
        return empty_distribution(vocabulary)
    return PhenotypeDistribution(
        probs=tuple(c / total for c in counts), support_count=support
    )


def load_vocabulary(path: str | Path) -> PhenotypeVocabulary:
    """Read one phenotype name per line; order is significant."""
    names = []
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        name = raw.strip()
        if name:
            names.append(name)
    return PhenotypeVocabulary(names=tuple(names))


def _parse_visit(obj: dict, line: int) -> VisitRecord:
    missing = VISIT_KEYS - obj.keys()
    if missing:
        raise ParseError(f"visit object missing keys {sorted(missing)}", line)
    try:
        features = tuple(float(x) for x in obj["features"])
        labels = {str(k): int(v) for k, v in obj["labels"].items()}
        record = VisitRecord(
            visit_id=str(obj["visit_id"]),
            patient_id=str(obj["patient_id"]),
            codes=frozenset(str(c) for c in obj["codes"]),
            phenotypes=frozenset(str(p) for p in obj["phenotypes"]),
            features=features,
            labels=labels,
            duration_hours=float(obj["duration_hours"]),
        )
    except (TypeError, ValueError, AttributeError) as exc:
        raise ParseError(f"malformed visit object: {exc}", line) from exc
    if any(v not in (0, 1) for v in record.labels.values()):
        raise ParseError("label values must be 0 or 1", line)
    if record.duration_hours < 0 or not math.isfinite(record.duration_hours):
        raise ParseError("duration_hours must be a non-negative finite number", line)
    if any(not math.isfinite(x) for x in record.features):
        raise ParseError("features must be finite numbers", line)
    return record


def load_dataset(visits_path: str | Path, vocabulary_path: str | Path) -> VisitDataset:
    """Load and validate a JSON-Lines visit file against a vocabulary file.

    Raises ParseError (with line number), DuplicateVisitId, UnknownPhenotype
    or FeatureDimMismatch on bad input.  An empty visits file yields a valid
    zero-visit dataset.
    """
    vocabulary = load_vocabulary(vocabulary_path)
    known = set(vocabulary.names)
    visits: dict[str, VisitRecord] = {}
    feature_dim: int | None = None
    with open(visits_path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", line_no) from exc
            if not isinstance(obj, dict):
                raise ParseError("visit line is not a JSON object", line_no)
            record = _parse_visit(obj, line_no)
            if record.visit_id in visits:
                raise DuplicateVisitId(
                    f"visit_id {record.visit_id!r} appears more than once "
                    f"(line {line_no})"
                )
            unknown = record.phenotypes - known
            if unknown:
                raise UnknownPhenotype(
                    f"visit {record.visit_id!r} (line {line_no}) carries phenotypes "
                    f"not in the vocabulary: {sorted(unknown)}"
                )
            if feature_dim is None:
                feature_dim = len(record.features)
            elif len(record.features) != feature_dim:
                raise FeatureDimMismatch(
                    f"visit {record.visit_id!r} (line {line_no}) has "
                    f"{len(record.features)} features, expected {feature_dim}"
                )
            visits[record.visit_id] = record
    return VisitDataset(
        visits=visits,
        vocabulary=vocabulary,
        feature_dim=feature_dim if feature_dim is not None else 0,
    )


def visit_to_json_obj(visit: VisitRecord) -> dict:
    """Stable JSON form of one visit (sorted collections, plain floats)."""
    return {
        "visit_id": visit.visit_id,
        "patient_id": visit.patient_id,
        "codes": sorted(visit.codes),
        "phenotypes": sorted(visit.phenotypes),
        "features": list(visit.features),
        "labels": {k: visit.labels[k] for k in sorted(visit.labels)},
        "duration_hours": visit.duration_hours,
    }


def write_visits_jsonl(visits, path: str | Path) -> None:
    """Write visits as JSON Lines, one object per line, stable key order."""
    with open(path, "w", encoding="utf-8") as fh:
        for visit in visits:
            fh.write(json.dumps(visit_to_json_obj(visit), sort_keys=True))
            fh.write("\n")


def write_vocabulary(vocabulary: PhenotypeVocabulary, path: str | Path) -> None:
    Path(path).write_text(
        "".join(name + "\n" for name in vocabulary.names), encoding="utf-8"
    )


def export_cohort(
    visits,
    manifest: dict,
    path: str | Path,
    vocabulary: PhenotypeVocabulary | None = None,
) -> Path:
    """Write a cohort as JSON Lines plus a sidecar ``*.manifest.json``.

    ``manifest`` is augmented with the record count and written next to the
    visits file.  If a vocabulary is given it is written as a sidecar
    ``*.phenotypes.txt`` so the export is reloadable with ``load_dataset``.
    Returns the manifest path.
    """
    path = Path(path)
    if path.parent:
        path.parent.mkdir(parents=True, exist_ok=True)
    visits = list(visits)
    write_visits_jsonl(visits, path)
    manifest = dict(manifest)
    manifest.setdefault("visit_count", len(visits))
    manifest_path = path.with_suffix(".manifest.json")
    manifest_path.write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    if vocabulary is not None:
        write_vocabulary(vocabulary, path.with_suffix(".phenotypes.txt"))
    return manifest_path
