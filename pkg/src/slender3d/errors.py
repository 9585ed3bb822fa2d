"""Exception types raised across the library.

Every error that callers are expected to catch has its own class so the
failing condition is identifiable without string matching.
"""


class Slender3dError(Exception):
    """Base class for all library errors."""


# --- camera geometry ---------------------------------------------------------

class DegenerateBaseline(Slender3dError):
    """Relative translation between the two cameras is (near) zero."""


class DegenerateEpipolarLine(Slender3dError):
    """The epipolar line has no direction (the point sits on the epipole)."""


class BehindCamera(Slender3dError):
    """Projection requested for a point with non-positive camera depth."""


class TriangulationUnstable(Slender3dError):
    """The two viewing rays are too close to parallel to intersect reliably."""


# --- centerline extraction ---------------------------------------------------

class IoError(Slender3dError):
    """A file could not be read or written; the message names the path."""


class UnsupportedFormat(Slender3dError):
    """The file is not one of the supported raster formats."""


class EmptySkeleton(Slender3dError):
    """The skeleton image contains no foreground pixels."""


# --- topology ordering -------------------------------------------------------

class NoEndpoints(Slender3dError):
    """A view has no degree-1 skeleton pixels (closed curve)."""


class ZeroLengthStep(Slender3dError):
    """A direction vector between traversal points has (near) zero length."""


class DegenerateFit(Slender3dError):
    """The curvature window collapses to a point after rotation."""


class StartNotOnCenterline(Slender3dError):
    """Traversal was asked to start from a pixel not in the point set."""


# --- cross-view matching -----------------------------------------------------

class EmptySequence(Slender3dError):
    """An ordered sequence required to be non-empty is empty."""


class AllPairsDegenerate(Slender3dError):
    """No correspondence pair could be triangulated."""


class NoIntersections(Slender3dError):
    """Every epipolar line missed the other view's polyline."""


# --- synthetic scenes --------------------------------------------------------

class InvalidSpec(Slender3dError):
    """Curve generation parameters violate their constraints."""


class UnknownPreset(Slender3dError):
    """Rig preset name is not one of the known configurations."""


class OutOfFrame(Slender3dError):
    """A curve sample projects outside one of the images."""


class GapTooLarge(Slender3dError):
    """Requested occlusion gap would remove too much of the view."""


# --- pipeline orchestration ----------------------------------------------

class StageFailure(Slender3dError):
    """A pipeline stage failed; carries the stage name and original error."""

    def __init__(self, stage: str, original: BaseException):
        super().__init__(f"stage '{stage}': {original}")
        self.stage = stage
        self.original = original


# --- evaluation and file formats ---------------------------------------------

class EmptyCurve(Slender3dError):
    """Metric evaluation received an empty curve."""


class ParseError(Slender3dError):
    """A structured text file failed to parse; message carries the line."""
