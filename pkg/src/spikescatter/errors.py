"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: precondition violations exit 2,
ambiguous recoveries exit 3, numerical failures exit 4.
"""


class SpikeScatterError(Exception):
    """Base class for all library errors."""


class PreconditionError(SpikeScatterError, ValueError):
    """An input violates a documented operation precondition."""


class GridTooCoarseError(PreconditionError):
    """The sampling step cannot resolve the requested wavelet."""


class StepMismatchError(PreconditionError):
    """Two sampled signals with different steps were combined."""


class SeparationViolationError(PreconditionError):
    """Knot separation is below the 2^(ell+1) sparsification bound."""


class QuadStepTooCoarseError(PreconditionError):
    """Quadrature step exceeds the allowed fraction of the window scale."""


class UnsupportedWindowError(PreconditionError):
    """The requested window has no closed-form measurement path."""


class InsufficientSamplesError(PreconditionError):
    """Too few sweep samples to estimate slopes."""


class InsufficientFrequenciesError(PreconditionError):
    """Fewer distinct frequencies than the recovery bound requires."""


class ConventionMismatchError(PreconditionError):
    """Measurement records use a different value convention than expected."""


class GridMismatchError(PreconditionError):
    """Two grid signals live on incompatible grids."""


class RejectionBudgetError(PreconditionError):
    """Rejection sampling exhausted its budget (infeasible parameters)."""


class HypothesisViolationError(PreconditionError):
    """Lemma-check parameters fall outside the lemma's hypotheses."""


class NumericalFailureError(SpikeScatterError):
    """A numerical procedure failed to reach its documented tolerance."""


class InconsistentMultisetError(NumericalFailureError):
    """A difference multiset admits no point-set explanation."""


class FitFailureError(NumericalFailureError):
    """A least-squares fit exceeded its residual tolerance."""


class InconsistentInvariantsError(NumericalFailureError):
    """Chained pair invariants contradict each other."""


class UnresolvableSignError(NumericalFailureError):
    """Both alternation candidates match the disambiguation jump.

    Measure-zero event for random frequencies; the caller should redraw.
    """


class AmbiguousRecoveryError(SpikeScatterError):
    """More than one non-equivalent support explains the measurements."""
