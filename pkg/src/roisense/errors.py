"""Exception hierarchy shared across the package."""


class RoiSenseError(Exception):
    """Base class for all package errors."""


# scene
class PlacementFailure(RoiSenseError):
    pass


class DegenerateShape(RoiSenseError, ValueError):
    pass


class UnknownObject(RoiSenseError, KeyError):
    pass


class AlreadyRemoved(RoiSenseError):
    pass


class MalformedDocument(RoiSenseError, ValueError):
    pass


# sensing
class OriginInsideOccupied(RoiSenseError):
    pass


class InvalidViewpoint(RoiSenseError, ValueError):
    pass


class EmptyRoi(RoiSenseError, ValueError):
    pass


# language
class NoDirectionFound(RoiSenseError, ValueError):
    pass


class NoAnchorFound(RoiSenseError, ValueError):
    pass


class AnchorNotVisible(RoiSenseError):
    pass


# scorer
class GridTooSmall(RoiSenseError, ValueError):
    pass


class ShapeMismatch(RoiSenseError, ValueError):
    pass


class Divergence(RoiSenseError, ArithmeticError):
    pass


# planner / blocking
class EmptyViewpointSpace(RoiSenseError):
    pass


class NoElites(RoiSenseError, ValueError):
    pass


class DegenerateRay(RoiSenseError, ValueError):
    pass
