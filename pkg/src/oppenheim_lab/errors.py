"""Exception types shared across the lab."""


class LabError(Exception):
    """Base class for all library errors."""


class ZeroDeterminant(LabError):
    """Coefficient matrix is singular (or numerically indistinguishable from it)."""


class WrongSignature(LabError):
    """Symmetric matrix does not have signature (2,1)."""


class BallEmpty(LabError):
    """Requested norm ball in SL(2,R) is empty (radius at or below sqrt(3))."""


class EmptySearch(LabError):
    """No integer vector satisfies the search constraints."""


class IllConditioned(LabError):
    """Lattice basis too ill-conditioned for reliable double-precision enumeration."""


class BadDelta(LabError):
    """Target thickness delta outside (0,1)."""


class BadBox(LabError):
    """Box leaves the closed positive octant, where the overlap formulas hold."""


class NotAdmissible(LabError):
    """Schedule fails the admissibility check; refusing to run it."""
