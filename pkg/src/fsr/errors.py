"""Exception types raised by the public API."""


class FsrError(Exception):
    """Base class for all package errors."""


class BadManifest(FsrError):
    """Stack manifest is missing, unparsable, or has invalid fields."""


class MissingSlices(FsrError):
    """Manifest references slice files that do not exist, or k < 2."""


class DimensionMismatch(FsrError):
    """Slices of one stack disagree in resolution or channel count."""


class AlignmentDiverged(FsrError, Warning):
    """Slice registration failed to improve correlation.

    Doubles as a warning category: align_stack keeps the original slice
    and warns instead of aborting the whole stack.
    """


class DegenerateDepths(FsrError):
    """Occlusion geometry queried with non-increasing depth ordering."""


class DegenerateScene(FsrError):
    """Synthetic scene cannot produce a meaningful stack (e.g. one layer,
    several slices, and no blur schedule)."""


class UnknownMeasure(FsrError):
    """Focus measure name not present in the registry."""


class EmptyVolumeSet(FsrError):
    """An operation over focus volumes received none."""


class NoUsableRegion(FsrError):
    """A focus label offers no calibration rectangle of the minimum size."""


class CalibrationImpossible(FsrError):
    """No focus label offers a usable calibration region."""


class VersionMismatch(FsrError):
    """Serialized container written by an incompatible format version."""


class CorruptContainer(FsrError):
    """Serialized container fails checksum or structural validation."""


class EmptyTargets(FsrError):
    """Refocus target specification selects no slices."""


class NonContiguousExtended(FsrError):
    """Extended refocus mode requires a contiguous range of slices."""


class InvalidTargets(FsrError):
    """Refocus target labels fall outside the stack's slice range."""
