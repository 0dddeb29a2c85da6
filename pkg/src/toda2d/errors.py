"""Exception hierarchy shared by every toda2d module."""


class TodaError(Exception):
    """Base class for all toda2d errors."""


class PeriodMismatch(TodaError):
    """Two lattice objects with different periods were combined."""


class NonZeroMean(TodaError):
    """(Λ-1)^-1 was applied to a function outside the image of Λ-1."""


class TruncationViolation(TodaError):
    """A requested coefficient lies outside the exactly known degree window."""


class NonVanishingVComponent(TodaError):
    """A tensor that must map into U produced a nonzero V component."""


class StarConditionViolated(TodaError):
    """Im P_vu is not contained in Im P_vv, or Ker P_vv is not in Ker P_uv."""


class UnsupportedIndex(TodaError):
    """A coordinate index outside the u_i (i <= 0) / ubar_j (j >= -1) range."""


class DepthExceeded(TodaError):
    """A coordinate below the stored depth of a LaxState was referenced."""


class TangencyViolation(TodaError):
    """A Lax flow left the affine space of Lax pairs."""


class StepRejected(TodaError):
    """The integrator produced a non-finite state."""
