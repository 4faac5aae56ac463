"""Exception hierarchy for the maxface laboratory."""


class MaxfaceError(Exception):
    """Base class for all errors raised by this package."""


class NonZeroGrowthSum(MaxfaceError):
    """The logarithmic growths Q do not sum to zero, so neck sizes do not exist."""


class CoincidentNecks(MaxfaceError):
    """Two neck positions coincide within the same or an adjacent level."""


class NotAPole(MaxfaceError):
    """Requested residue at a point that is not a pole of the form."""


class NoConvergence(MaxfaceError):
    """An iterative solver failed to reach its tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class SingularJacobian(MaxfaceError):
    """The reduced Jacobian is rank-deficient beyond the gauge freedom."""


class RepeatedRoot(MaxfaceError):
    """The combined polynomial has a repeated root."""


class DisksOverlap(MaxfaceError):
    """Gluing disks are not disjoint for the requested (t, epsilon)."""


class PoleEvaluation(MaxfaceError):
    """Evaluation requested at (or too close to) a pole."""


class OutsideAnnulus(MaxfaceError):
    """Point lies outside the gluing annulus of the neck."""


class PathThroughPole(MaxfaceError):
    """An integration path passes through or too close to a pole."""


class UnreachablePoint(MaxfaceError):
    """No admissible integration path to the requested point was found."""


class GridTooCoarse(MaxfaceError):
    """The sampling grid cannot separate adjacent zeros."""


class NoMirror(MaxfaceError):
    """The symmetry evidence contains no vertical mirror."""


class SeamMismatch(MaxfaceError):
    """Chart disagreement across a gluing seam exceeds tolerance."""


class NoImprovement(MaxfaceError):
    """Parameter refinement could not reduce the defect norm."""


class ValidationError(MaxfaceError):
    """Input file or manifest failed validation."""
