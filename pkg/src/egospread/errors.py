"""Exception hierarchy shared by all modules."""


class EgoSpreadError(Exception):
    """Base class for every error raised by this package."""


class ParseError(EgoSpreadError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnsupportedSizeError(EgoSpreadError):
    pass


class EmptyCloudError(EgoSpreadError):
    pass


class OracleTooLargeError(EgoSpreadError):
    pass


class WrongTargetError(EgoSpreadError):
    pass


class RegionFormatError(EgoSpreadError):
    pass


class DegenerateParametersError(EgoSpreadError):
    pass


class SolverError(EgoSpreadError):
    pass


class CertificateRejectedError(EgoSpreadError):
    pass


class VerificationFailedError(EgoSpreadError):
    def __init__(self, message, witness=None):
        self.witness = witness
        super().__init__(message)
