"""Cohort comparison harness: logistic regression, AUC, k-fold evaluation.

Reproduces the comparison protocol at desk scale: build target / random /
augmented cohorts, train a from-scratch logistic-regression classifier under
stratified cross-validation, and report mean and standard deviation of AUC
per cohort.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .data import VisitDataset
from .errors import SingleClass, SizeTooLarge, TooFewVisits
from .filtering import FilteredGraph, FilterSpec

GRAD_TOL = 1e-6


@dataclass(frozen=True)
class TaskSpec:
    """A binary prediction task over visit labels, with optional exclusion."""

    name: str
    label_key: str
    min_duration_hours: float | None = None

    @classmethod
    def from_dict(cls, obj: dict) -> "TaskSpec":
        raw = obj.get("min_duration_hours")
        return cls(
            name=str(obj["name"]),
            label_key=str(obj["label_key"]),
            min_duration_hours=None if raw is None else float(raw),
        )

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "label_key": self.label_key,
            "min_duration_hours": self.min_duration_hours,
        }


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    iterations: int = 500
    l2: float = 1e-3


@dataclass
class TrainResult:
    """Fitted weights (intercept first) plus convergence bookkeeping."""

    weights: np.ndarray
    converged: bool
    degenerate: bool
    losses: list[float] = field(default_factory=list)


@dataclass
class EvalReport:
    """Per-cohort cross-validation outcome: counts, mean AUC, per-fold AUCs."""

    cohort_name: str
    visit_count: int
    positive_count: int
    negative_count: int
    auc_mean: float
    auc_std: float
    fold_aucs: list[float]
    seed: int
    flagged_folds: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        def clean(x: float) -> float | None:
            return None if (x is None or math.isnan(x)) else x

        return {
            "cohort_name": self.cohort_name,
            "visit_count": self.visit_count,
            "positive_count": self.positive_count,
            "negative_count": self.negative_count,
            "auc_mean": clean(self.auc_mean),
            "auc_std": clean(self.auc_std),
            "fold_aucs": [clean(a) for a in self.fold_aucs],
            "seed": self.seed,
            "flagged_folds": self.flagged_folds,
        }


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    expz = np.exp(z[~pos])
    out[~pos] = expz / (1.0 + expz)
    return out


def logistic_loss_grad(
    weights: np.ndarray, features: np.ndarray, labels: np.ndarray, l2: float
) -> tuple[float, np.ndarray]:
    """Mean log-loss with L2 penalty (intercept unpenalized) and its gradient.

    ``weights[0]`` is the intercept; ``features`` has no intercept column.
    """
    design = np.hstack([np.ones((features.shape[0], 1)), features])
    z = design @ weights
    # log(1 + exp(z)) - y*z computed stably
    loss = float(np.mean(np.logaddexp(0.0, z) - labels * z))
    penalty_mask = np.ones_like(weights)
    penalty_mask[0] = 0.0
    loss += 0.5 * l2 * float(np.sum((weights * penalty_mask) ** 2))
    grad = design.T @ (_sigmoid(z) - labels) / features.shape[0]
    grad = grad + l2 * weights * penalty_mask
    return loss, grad


def train_logistic(
    features: np.ndarray, labels: np.ndarray, config: TrainConfig = TrainConfig()
) -> TrainResult:
    """Full-batch gradient descent on regularized log-loss, zero init.

    A single-class label vector is a degenerate fold: the result carries an
    empty weight vector and the ``degenerate`` flag instead of raising.
    """
    features = np.asarray(features, dtype=float)
    labels = np.asarray(labels, dtype=float)
    if features.shape[0] != labels.shape[0]:
        raise ValueError("features and labels disagree on row count")
    if np.isnan(features).any():
        raise ValueError("features contain NaN")
    if len(np.unique(labels)) < 2:
        return TrainResult(weights=np.zeros(0), converged=False, degenerate=True)

    weights = np.zeros(features.shape[1] + 1)
    losses: list[float] = []
    converged = False
    for _ in range(config.iterations):
        loss, grad = logistic_loss_grad(weights, features, labels, config.l2)
        losses.append(loss)
        if float(np.linalg.norm(grad)) < GRAD_TOL:
            converged = True
            break
        weights = weights - config.learning_rate * grad
    return TrainResult(weights=weights, converged=converged, degenerate=False, losses=losses)


def predict_scores(weights: np.ndarray, features: np.ndarray) -> np.ndarray:
    design = np.hstack([np.ones((features.shape[0], 1)), np.asarray(features, dtype=float)])
    return _sigmoid(design @ weights)


def auc(scores, labels) -> float:
    """Rank-based AUC: probability a random positive outscores a random
    negative, ties counted half (Mann-Whitney form)."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    n_pos = int(np.sum(labels == 1))
    n_neg = int(np.sum(labels == 0))
    if n_pos == 0 or n_neg == 0:
        raise SingleClass("AUC needs at least one positive and one negative")
    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty(len(scores), dtype=float)
    sorted_scores = scores[order]
    i = 0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        # average rank for the tie group, 1-based
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    rank_sum_pos = float(np.sum(ranks[np.asarray(labels) == 1]))
    return (rank_sum_pos - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def stratified_folds(
    visit_ids: list[str], labels: dict[str, int], k: int, seed: int
) -> list[list[str]]:
    """Deterministic stratified split: ids are sorted per class, shuffled
    with one PCG64 stream (positives first, then negatives), and dealt
    round-robin so class proportions survive in every fold."""
    rng = np.random.default_rng(seed)
    pos = sorted(v for v in visit_ids if labels[v] == 1)
    neg = sorted(v for v in visit_ids if labels[v] == 0)
    pos = [pos[i] for i in rng.permutation(len(pos))]
    neg = [neg[i] for i in rng.permutation(len(neg))]
    folds: list[list[str]] = [[] for _ in range(k)]
    for i, v in enumerate(pos):
        folds[i % k].append(v)
    for i, v in enumerate(neg):
        folds[i % k].append(v)
    return folds


def _standardize(train: np.ndarray, test: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = train.mean(axis=0)
    std = train.std(axis=0)
    std[std == 0] = 1.0
    return (train - mean) / std, (test - mean) / std


def cross_validate(
    dataset: VisitDataset,
    visit_ids,
    task: TaskSpec,
    k: int = 3,
    seed: int = 0,
    config: TrainConfig = TrainConfig(),
    cohort_name: str = "cohort",
) -> EvalReport:
    """Stratified k-fold evaluation of one cohort on one task.

    Applies the task's minimum-duration exclusion first.  Folds whose
    training slice is single-class (or whose test slice cannot score an AUC)
    are flagged and excluded from the mean.
    """
    usable = []
    for v in sorted(set(visit_ids)):
        visit = dataset.visits[v]
        if task.label_key not in visit.labels:
            continue
        if (
            task.min_duration_hours is not None
            and visit.duration_hours < task.min_duration_hours
        ):
            continue
        usable.append(v)
    if len(usable) < k:
        raise TooFewVisits(f"{len(usable)} usable visits for {k} folds")

    labels = {v: dataset.visits[v].labels[task.label_key] for v in usable}
    folds = stratified_folds(usable, labels, k, seed)

    fold_aucs: list[float] = []
    flagged: list[int] = []
    for i in range(k):
        test_ids = folds[i]
        train_ids = [v for j in range(k) if j != i for v in folds[j]]
        x_train = np.array([dataset.visits[v].features for v in train_ids], dtype=float)
        y_train = np.array([labels[v] for v in train_ids], dtype=float)
        x_test = np.array([dataset.visits[v].features for v in test_ids], dtype=float)
        y_test = np.array([labels[v] for v in test_ids], dtype=int)
        if len(np.unique(y_test)) < 2 or len(np.unique(y_train)) < 2:
            fold_aucs.append(float("nan"))
            flagged.append(i)
            continue
        x_train, x_test = _standardize(x_train, x_test)
        result = train_logistic(x_train, y_train, config)
        if result.degenerate:
            fold_aucs.append(float("nan"))
            flagged.append(i)
            continue
        scores = predict_scores(result.weights, x_test)
        fold_aucs.append(auc(scores, y_test))

    valid = [a for a in fold_aucs if not math.isnan(a)]
    positives = sum(labels[v] for v in usable)
    return EvalReport(
        cohort_name=cohort_name,
        visit_count=len(usable),
        positive_count=positives,
        negative_count=len(usable) - positives,
        auc_mean=float(np.mean(valid)) if valid else float("nan"),
        auc_std=float(np.std(valid)) if valid else float("nan"),
        fold_aucs=fold_aucs,
        seed=seed,
        flagged_folds=flagged,
    )


def build_baseline_cohorts(
    fg: FilteredGraph,
    spec: FilterSpec,
    dataset: VisitDataset,
    sizes,
    seed: int = 0,
) -> dict[str, list[str]]:
    """Target cohort plus seeded random-fill baselines of requested sizes.

    Target: visits attached to the seed codes that carry at least one
    phenotype of interest.  Each random baseline is the target united with a
    uniform without-replacement sample from the filtered graph's visits.
    """
    target: set[str] = set()
    for code in sorted(spec.selected_codes):
        if code not in fg.graph:
            continue
        for v in fg.graph.nodes[code].visit_ids:
            if dataset.visits[v].phenotypes & spec.phenotypes_of_interest:
                target.add(v)
    pool = fg.distinct_visit_ids()
    cohorts: dict[str, list[str]] = {"target": sorted(target)}
    rng = np.random.default_rng(seed)
    for size in sizes:
        if size > len(pool | target):
            raise SizeTooLarge(f"requested {size} visits, only {len(pool | target)} available")
        remaining = sorted(pool - target)
        fill_count = max(0, size - len(target))
        picked = rng.choice(len(remaining), size=fill_count, replace=False) if fill_count else []
        cohort = set(target)
        cohort.update(remaining[i] for i in picked)
        cohorts[f"random_{size}"] = sorted(cohort)
    return cohorts


def format_report_table(reports: list[EvalReport]) -> str:
    """Aligned plain-text comparison table, one row per cohort."""
    header = ("cohort", "visits (+/-)", "AUC mean(std)")
    rows = [header]
    for r in reports:
        desc = f"{r.visit_count} visits ({r.positive_count} +, {r.negative_count} -)"
        if math.isnan(r.auc_mean):
            auc_txt = "n/a"
        else:
            auc_txt = f"{r.auc_mean:.2f}({r.auc_std:.2f})"
        rows.append((r.cohort_name, desc, auc_txt))
    widths = [max(len(row[i]) for row in rows) for i in range(3)]
    lines = []
    for idx, row in enumerate(rows):
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())
        if idx == 0:
            lines.append("  ".join("-" * widths[i] for i in range(3)))
    return "\n".join(lines) + "\n"
