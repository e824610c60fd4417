"""Grow clinical cohorts along a concept hierarchy, then evaluate the result.

The pipeline: load visits and an is-a concept graph, filter it down to the
region around some seed diagnoses, expand the seed cohort hop by hop through
parents whose phenotype mix stays close (small KL divergence) to what is
already selected, Monte Carlo sampling admissions, and finally score the
grown cohort against size-matched random baselines with a simple
logistic-regression task.
"""

from .augment import (
    AugmentResult,
    AugmentSpec,
    FrontierMap,
    Provenance,
    augment,
    candidate_parents,
    kl_divergence,
    kl_matrix,
    mc_sample,
    score_candidates,
)
from .data import (
    PhenotypeDistribution,
    PhenotypeVocabulary,
    VisitDataset,
    VisitRecord,
    export_cohort,
    load_dataset,
    phenotype_distribution,
)
from .errors import OntocohortError
from .evaluate import (
    EvalReport,
    TaskSpec,
    TrainConfig,
    auc,
    build_baseline_cohorts,
    cross_validate,
    format_report_table,
    stratified_folds,
    train_logistic,
)
from .filtering import FilteredGraph, FilterSpec, filter_graph, filter_summary
from .graph import ConceptGraph, ConceptNode, build_graph, load_edge_list, load_labels
from .synth import SynthConfig, generate_synthetic, write_bundle

__version__ = "0.1.0"

__all__ = [
    "AugmentResult",
    "AugmentSpec",
    "ConceptGraph",
    "ConceptNode",
    "EvalReport",
    "FilterSpec",
    "FilteredGraph",
    "FrontierMap",
    "OntocohortError",
    "PhenotypeDistribution",
    "PhenotypeVocabulary",
    "Provenance",
    "SynthConfig",
    "TaskSpec",
    "TrainConfig",
    "VisitDataset",
    "VisitRecord",
    "auc",
    "augment",
    "build_baseline_cohorts",
    "build_graph",
    "candidate_parents",
    "cross_validate",
    "export_cohort",
    "filter_graph",
    "filter_summary",
    "format_report_table",
    "generate_synthetic",
    "kl_divergence",
    "kl_matrix",
    "load_dataset",
    "load_edge_list",
    "load_labels",
    "mc_sample",
    "phenotype_distribution",
    "score_candidates",
    "stratified_folds",
    "train_logistic",
    "write_bundle",
]
