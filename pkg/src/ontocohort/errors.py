"""Exception types shared across the package."""


class OntocohortError(Exception):
    """Base class for all errors raised by this package."""


class CycleDetected(OntocohortError):
    """The ontology edge list contains a directed cycle (self-loops included)."""


class UnknownCode(OntocohortError, KeyError):
    """A concept code was requested that is not present in the graph."""


class ParseError(OntocohortError):
    """A data file failed to parse; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DuplicateVisitId(OntocohortError):
    """Two visit records in one file share a visit_id."""


class UnknownPhenotype(OntocohortError):
    """A visit carries a phenotype name absent from the vocabulary."""


class FeatureDimMismatch(OntocohortError):
    """A visit's feature vector length disagrees with the dataset."""


class InvalidConfig(OntocohortError):
    """A synthetic-data or pipeline configuration is inconsistent."""


class UnknownSeedCode(OntocohortError):
    """A user-selected seed code is absent from the graph being filtered."""


class SeedOutsideFilteredGraph(OntocohortError):
    """An augmentation seed code is not part of the filtered graph."""


class VocabularyMismatch(OntocohortError):
    """Two phenotype distributions are not aligned to the same vocabulary."""


class SingleClass(OntocohortError):
    """AUC is undefined: the label vector contains only one class."""


class TooFewVisits(OntocohortError):
    """Cross-validation has fewer usable visits than folds."""


class SizeTooLarge(OntocohortError):
    """A requested random-baseline size exceeds the available visit pool."""
