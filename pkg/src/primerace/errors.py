"""Exception hierarchy shared by all modules."""


class PrimeRaceError(Exception):
    """Base class for every error raised by :mod:`primerace`."""


class InvalidModulusError(PrimeRaceError, ValueError):
    pass


class InvalidResidueError(PrimeRaceError, ValueError):
    pass


class InvalidRaceError(PrimeRaceError, ValueError):
    pass


class EmptyRangeError(PrimeRaceError, ValueError):
    pass


class InvalidParameterError(PrimeRaceError, ValueError):
    """Kernel or quadrature parameter outside its domain."""


class CheckpointFormatError(PrimeRaceError):
    pass


class ZeroDataError(PrimeRaceError, ValueError):
    """Malformed or inconsistent zero file."""


class MissingZeroDataError(PrimeRaceError, LookupError):
    def __init__(self, modulus, missing):
        self.modulus = modulus
        self.missing = list(missing)
        super().__init__(
            f"no zero data for modulus {modulus}, characters {self.missing}"
        )


class UnsupportedCharacterError(PrimeRaceError, ValueError):
    pass


class BudgetExhaustedError(PrimeRaceError, RuntimeError):
    pass
