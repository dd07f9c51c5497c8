"""Exception types shared across the package.

Every error raised by library code derives from :class:`DeckforgeError` so
callers can catch one base type at the boundary (CLI, service) and map it to
an exit code or HTTP status.
"""

from __future__ import annotations


class DeckforgeError(Exception):
    """Base class for all package errors."""


# ---------------------------------------------------------------------------
# structure files


class StructureError(DeckforgeError):
    pass


class EmptyStructureError(StructureError):
    """Input contained no atom records."""


class MalformedRecordError(StructureError):
    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class AtomCountMismatchError(StructureError):
    """Declared atom count disagrees with the number of atom lines."""


class BoxMissingError(StructureError):
    """Operation requires box vectors but the structure has none."""


# ---------------------------------------------------------------------------
# simulation specs


class SpecError(DeckforgeError):
    pass


class SpecParseError(SpecError):
    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class NormalizationError(SpecError):
    def __init__(self, field: str, value: str, accepted: list[str]):
        super().__init__(
            f"{field}: cannot interpret {value!r}; accepted values: "
            + ", ".join(accepted)
        )
        self.field = field
        self.value = value
        self.accepted = accepted


class InvalidSpecError(SpecError):
    """A spec with validation errors was passed where a clean one is required."""

    def __init__(self, findings):
        super().__init__(
            "; ".join(f"{f.field}: {f.message}" for f in findings) or "invalid spec"
        )
        self.findings = list(findings)


class UnknownStageError(SpecError):
    pass


class UnresolvedOverrideError(SpecError):
    def __init__(self, stage: str, key: str):
        super().__init__(f"stage {stage}: no parameter named {key!r} to override")
        self.stage = stage
        self.key = key


# ---------------------------------------------------------------------------
# deck rendering and bundles


class DeckError(DeckforgeError):
    pass


class DuplicateKeyError(DeckError):
    def __init__(self, key: str, line_number: int):
        super().__init__(f"line {line_number}: duplicate key {key!r}")
        self.key = key
        self.line_number = line_number


class MalformedLineError(DeckError):
    def __init__(self, line_number: int, text: str):
        super().__init__(f"line {line_number}: not a key = value line: {text!r}")
        self.line_number = line_number


class StructureUnreadableError(DeckError):
    pass


class BundleLayoutError(DeckError):
    """Bundle directory does not have the expected two-file shape."""


class ManifestMissingError(DeckError):
    pass


class ManifestVersionError(DeckError):
    def __init__(self, version: str):
        super().__init__(f"unsupported manifest version {version!r}")
        self.version = version


class HashMismatchError(DeckError):
    def __init__(self, filename: str, expected: str, actual: str):
        super().__init__(
            f"{filename}: content hash {actual[:12]}... does not match "
            f"recorded {expected[:12]}..."
        )
        self.filename = filename
        self.expected = expected
        self.actual = actual


# ---------------------------------------------------------------------------
# trajectories


class TrajectoryError(DeckforgeError):
    pass


class XtcFormatError(TrajectoryError):
    def __init__(self, offset: int, message: str):
        super().__init__(f"byte {offset}: {message}")
        self.offset = offset


class TruncatedFrameError(TrajectoryError):
    """Stream ended inside a frame.  Complete frames are kept on .frames."""

    def __init__(self, frames, offset: int):
        super().__init__(
            f"stream truncated at byte {offset} after {len(frames)} complete frame(s)"
        )
        self.frames = frames
        self.offset = offset


class AtomCountChangedError(TrajectoryError):
    def __init__(self, frame_index: int, expected: int, actual: int):
        super().__init__(
            f"frame {frame_index}: atom count changed from {expected} to {actual}"
        )
        self.frame_index = frame_index


class CoordinateOverflowError(TrajectoryError):
    """A coordinate does not fit the fixed-point integer range at this precision."""


class SelectionSyntaxError(TrajectoryError):
    pass


class EmptySelectionError(TrajectoryError):
    pass


# ---------------------------------------------------------------------------
# analysis


class AnalysisError(DeckforgeError):
    pass


class DegenerateGeometryError(AnalysisError):
    pass


class NoConvergenceError(AnalysisError):
    pass


class TooFewFramesError(AnalysisError):
    pass


class SelectionTooLargeError(AnalysisError):
    pass


class ZeroTotalMassError(AnalysisError):
    pass


class OutputUnwritableError(DeckforgeError):
    pass
