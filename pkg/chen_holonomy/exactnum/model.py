from __future__ import annotations


class RationalFormatError(Exception):
    """Raised when a serialized rational or polynomial cannot be read back exactly"""

    pass


class ShapeMismatchError(Exception):
    """Raised when two matrices or graded maps cannot be combined because their shapes disagree"""

    pass


class NonInvertibleError(Exception):
    """Raised when an exact inverse is requested for something that has none"""

    pass
