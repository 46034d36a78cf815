"""Exception and warning hierarchy.

Domain errors all derive from :class:`LabelBalanceError` so callers (and
the CLI) can distinguish bad inputs from bugs.  Conditions that are legal
but suspicious are reported through :class:`LabelBalanceWarning`
subclasses and, where a result object exists, echoed into its
``warnings`` list.
"""


class LabelBalanceError(Exception):
    """Base class for all domain errors raised by this package."""


# --- ingestion -----------------------------------------------------------


class MalformedRow(LabelBalanceError):
    """A CSV row does not match the documented grammar."""


class DuplicateMid(LabelBalanceError):
    """A vocabulary file lists the same mid twice."""


class NonContiguousIndex(LabelBalanceError):
    """Vocabulary indices are not exactly 0..K-1 in file order."""


class UnknownMid(LabelBalanceError):
    """A segments row references a mid absent from the vocabulary."""


class EmptyFile(LabelBalanceError):
    """An input file contains no data rows."""


class DuplicateExample(LabelBalanceError):
    """The same (id, start, end) example appears more than once."""


class InfeasibleParams(LabelBalanceError):
    """Synthetic-dataset parameters cannot produce a valid dataset."""


# --- statistics ----------------------------------------------------------


class ZeroPriorClass(LabelBalanceError):
    """A class has zero examples, so the imbalance ratio is undefined."""


class AllZeroPriors(LabelBalanceError):
    """Every class has zero examples; inequality measures are undefined."""


class InvalidBeta(LabelBalanceError):
    """The oversampling exponent is outside its valid domain."""


class OverflowRisk(LabelBalanceError):
    """An expanded index list would exceed the configured size ceiling."""


# --- metrics -------------------------------------------------------------


class UndefinedMetric(LabelBalanceError):
    """AP/AUC need at least one positive and one negative example."""


class NoDefinedClasses(LabelBalanceError):
    """No class in the evaluation run has a defined metric."""


class DegenerateAuc(LabelBalanceError):
    """AUC outside (0, 1) cannot be converted to a sensitivity index."""


class VocabularyMismatch(LabelBalanceError):
    """Two reports or datasets do not share the same class vocabulary."""


class ExampleIdMismatch(LabelBalanceError):
    """Score rows and label examples do not cover the same id set."""


class InsufficientPoints(LabelBalanceError):
    """Fewer usable points than the regression needs."""


class ZeroVariance(LabelBalanceError):
    """The regressor values are all identical."""


# --- selection -----------------------------------------------------------


class TraceTooShort(LabelBalanceError):
    """A metric trace is shorter than the smoothing window."""


# --- warnings ------------------------------------------------------------


class LabelBalanceWarning(UserWarning):
    """Base class for all warnings emitted by this package."""


class UnlabeledExampleWarning(LabelBalanceWarning):
    """An example with an empty label set was given weight 1."""


class ExtendedBetaWarning(LabelBalanceWarning):
    """An oversampling exponent above 1 was accepted."""


class ZeroPriorWarning(LabelBalanceWarning):
    """Zero-count classes were excluded from the imbalance ratio."""


class ClampedValueWarning(LabelBalanceWarning):
    """A degenerate value was clamped to stay finite."""


class TraceSkippedWarning(LabelBalanceWarning):
    """A too-short trace was skipped during cross-run selection."""
