class FinslerError(Exception):
    """Base class for every error raised by the engine."""

    exit_code = 1


class InvalidConfig(FinslerError):
    exit_code = 2

    def __init__(self, errors):
        # errors: list of (field, message) pairs
        if isinstance(errors, str):
            errors = [("config", errors)]
        self.errors = list(errors)
        detail = "; ".join(f"{field}: {message}" for field, message in self.errors)
        super().__init__(f"Invalid configuration: {detail}")


class PointOutsideDomain(FinslerError):
    pass


class ZeroVector(FinslerError):
    pass


class DegenerateTensor(FinslerError):
    pass


class DegenerateFlag(FinslerError):
    pass


class DegenerateSpan(FinslerError):
    pass


class UnsupportedModel(FinslerError):
    pass


class InadmissibleModel(FinslerError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class NoConvergence(FinslerError):
    exit_code = 3


class StepLimitExceeded(FinslerError):
    exit_code = 3


class DomainExit(FinslerError):
    exit_code = 3

    def __init__(self, message, path=None):
        super().__init__(message)
        self.path = path


class NumericalNoise(FinslerError):
    exit_code = 3


class OutputError(FinslerError):
    exit_code = 4
