"""Exception and warning types raised across the package."""


class DexAnnoError(Exception):
    """Base class for all package errors."""


class InputError(DexAnnoError):
    """Malformed or inconsistent input data (CLI exit code 1)."""


class NumericalError(DexAnnoError):
    """A numerical procedure could not produce a result (CLI exit code 2)."""


class NonPositiveDepth(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class ProfileMismatch(InputError):
    pass


class EmptyContactSet(InputError):
    pass


class EmptyManifest(InputError):
    pass


class NegativeFriction(InputError):
    pass


class DegenerateGeometry(NumericalError):
    """Base for kinematic degeneracies; carries the finger/joint when known."""

    def __init__(self, message, finger=None, joint=None):
        self.base_message = message
        self.finger = finger
        self.joint = joint
        where = ""
        if finger is not None:
            where = f" [finger={finger}" + (f", joint={joint}" if joint is not None else "") + "]"
        super().__init__(message + where)

    def located(self, finger, joint=None):
        """Return a copy of this error annotated with a finger and joint."""
        return type(self)(self.base_message, finger=finger, joint=joint)


class DegeneratePalm(DegenerateGeometry):
    pass


class DegenerateSegment(DegenerateGeometry):
    pass


class DegenerateProjection(DegenerateGeometry):
    pass


class RankDeficient(NumericalError):
    pass


class ConditioningWarning(UserWarning):
    pass


class SmallCategoryWarning(UserWarning):
    pass
