"""Exception hierarchy shared by the solver modules and the CLI."""


class SupercritError(Exception):
    """Base class for all errors raised by :mod:`supercrit`."""


class PoleError(SupercritError, ValueError):
    """A special function was evaluated exactly at one of its poles."""


class RegionError(SupercritError, ValueError):
    """An operation was requested for a channel in the wrong region."""


class ResolutionError(SupercritError, ArithmeticError):
    """A requested level cannot be resolved in double precision.

    Raised instead of silently truncating a spectrum, e.g. when the level
    spacing near the accumulation point E -> m drops below machine epsilon.
    """
