"""Exception hierarchy shared by all modules.

``NumericalFailure`` subclasses map to CLI exit code 2; everything else that
escapes the CLI is treated as a usage error (exit code 1).
"""


class MatingError(Exception):
    pass


class NumericalFailure(MatingError):
    pass


# circle
class NotACycle(MatingError):
    pass


class NotRigidRotation(MatingError):
    pass


# parabolic
class NotParabolic(NumericalFailure):
    pass


class DegreeNotFound(NumericalFailure):
    pass


class NotConverged(NumericalFailure):
    pass


class LeftSector(NumericalFailure):
    pass


class Undecided(NumericalFailure):
    pass


class NoConvergence(NumericalFailure):
    pass


# maps
class LabelingUndecided(NumericalFailure):
    pass


class NotIrrational(MatingError):
    pass


# rays
class NewtonDiverged(NumericalFailure):
    pass


class FlowTrapped(NumericalFailure):
    pass


class Inconsistent(NumericalFailure):
    pass


# combinatorics
class RootDisk(MatingError):
    pass


class NotAdmissible(MatingError):
    pass


class OmegaUnavailable(MatingError):
    pass


class Unresolved(MatingError):
    """Raised when a decision needs more trusted bits of omega than are available."""


# shell
class SchemaMismatch(MatingError):
    pass
