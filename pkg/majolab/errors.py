"""Exception hierarchy shared by the majolab modules."""

from __future__ import annotations


class MajolabError(Exception):
    """Base class for every error raised by the laboratory."""


class InputError(MajolabError, ValueError):
    """The caller supplied an invalid request (maps to CLI exit code 2)."""


class ComputationError(MajolabError, RuntimeError):
    """A numerical routine failed on valid input (maps to CLI exit code 1)."""


class SettingsError(InputError):
    """Raised when the settings file cannot be loaded or validated."""


# Distributions and majorization
class EmptyInput(InputError):
    """A probability vector with no entries."""


class NegativeWeight(InputError):
    """An entry below -tol."""


class NotNormalized(InputError):
    """Weights do not sum to one within tol and normalization was not requested."""


class NotDoublyStochastic(InputError):
    """Matrix is negative somewhere or a row/column does not sum to one."""


class TooFewPoints(InputError):
    """A flow needs at least two points."""


class NonMonotoneParameter(InputError):
    """Flow parameters are not strictly monotone."""


# Special functions
class ModulusOutOfRange(InputError):
    """Elliptic modulus outside [0, 1)."""


class DomainError(InputError):
    """Argument outside the real branch of the function."""


# Chain spectra
class ModelInvariantViolation(InputError):
    """Chain parameters violate the model's domain."""


class ModeCountExceedsBlock(InputError):
    """More XX modes requested than the block has sites."""


class TooManyModes(InputError):
    """Assembling would materialize more than 2**20 eigenvalues; use per-mode analysis."""


class GridCrossesRegionBoundary(InputError):
    """A parameter grid leaves the region in which the dispersion branch is fixed."""


class StepLeavesRegion(InputError):
    """A finite-difference probe would step outside the model's region."""


# CFT towers
class BlockTooSmall(InputError):
    """Block length not above the UV cutoff."""


class QOutOfRange(InputError):
    """q outside [0, 1)."""


class HypothesisViolated(InputError):
    """q increases along the flow, so the parameter-flow theorem does not apply."""


class StepLeavesDomain(InputError):
    """A finite-difference probe would cross the UV cutoff."""


# Exact diagonalization
class SizeOutOfRange(InputError):
    """Chain length outside the supported 2..14 sites."""


class BadBlock(InputError):
    """Block empty, non-contiguous or not a proper subset of the chain."""


class NoConvergence(ComputationError):
    """An iterative solver (ARPACK or the AGM) did not converge."""


__all__ = (
    "MajolabError",
    "InputError",
    "ComputationError",
    "SettingsError",
    "EmptyInput",
    "NegativeWeight",
    "NotNormalized",
    "NotDoublyStochastic",
    "TooFewPoints",
    "NonMonotoneParameter",
    "ModulusOutOfRange",
    "DomainError",
    "ModelInvariantViolation",
    "ModeCountExceedsBlock",
    "TooManyModes",
    "GridCrossesRegionBoundary",
    "StepLeavesRegion",
    "BlockTooSmall",
    "QOutOfRange",
    "HypothesisViolated",
    "StepLeavesDomain",
    "SizeOutOfRange",
    "BadBlock",
    "NoConvergence",
)
