"""Exception types shared across the package.

Ambiguity errors are the load-bearing ones: they fire whenever certified
interval arithmetic cannot decide a floor, a comparison, or a neighborhood
membership at the configured precision.  Nothing in this package ever
resolves such a case silently.
"""


class SpecdynError(Exception):
    """Base class for all package errors."""


class AmbiguityError(SpecdynError):
    """A certified computation could not be decided at max precision."""


class FloorAmbiguous(AmbiguityError):
    """The interval for a value straddles an integer at max precision."""

    def __init__(self, lo, hi, max_digits):
        super().__init__(f"floor undecidable: value in [{lo}, {hi}] at {max_digits} digits")
        self.lo = lo
        self.hi = hi
        self.max_digits = max_digits


class CompareAmbiguous(AmbiguityError):
    """Two certified values overlap and cannot be ordered at max precision."""


class AmbiguousMembership(AmbiguityError):
    """An orbit point landed exactly on a neighborhood boundary."""

    def __init__(self, n, detail=""):
        msg = f"membership of iterate n={n} is a boundary hit"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
        self.n = n


class NotInvertible(SpecdynError):
    """A backward iterate was requested from a system without an inverse."""


class NoPreimage(SpecdynError):
    """A backward orbit ran into a point with no preimage."""


class SeqTooLong(SpecdynError):
    """A finite-sums request exceeds the supported generator length."""


class SearchSpaceTooLarge(SpecdynError):
    """A witness search was configured beyond its exhaustive-search bounds."""


class EpsilonOutOfRange(SpecdynError):
    """An epsilon parameter lies outside the legal range for the experiment."""


class SetFileError(SpecdynError):
    """A window-set file or inline set expression failed to parse."""


class ConfigError(SpecdynError):
    """An experiment config file is malformed or carries unknown keys."""


class RationalTieWarning(UserWarning):
    """Complementarity was requested for a rational slope; ties are possible."""
