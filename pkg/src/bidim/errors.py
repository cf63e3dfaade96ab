"""Exception types shared across the toolkit.

Every precondition failure raises a named error; verifiers never raise on
bad certificates, they return reports instead.
"""


class BidimError(Exception):
    pass


class UnknownVertex(BidimError):
    pass


class UnknownNode(BidimError):
    pass


class OrderTooLarge(BidimError):
    pass


class OrderTooSmall(BidimError):
    pass


class OrderMismatch(BidimError):
    pass


class NoMajority(BidimError):
    pass


class ParameterRange(BidimError):
    pass


class InvalidModel(BidimError):
    pass


class OutOfRange(BidimError):
    pass


class NotATransaction(BidimError):
    pass


class NotMonotone(BidimError):
    pass


class NotGrounded(BidimError):
    pass


class NotFlat(BidimError):
    pass


class NotExposed(BidimError):
    pass


class NotOrthogonal(BidimError):
    pass


class NotRed(BidimError):
    pass


class PreconditionRedMiss(BidimError):
    pass


class MissingRedWitness(BidimError):
    pass


class OracleFailure(BidimError):
    pass


class SizeBound(BidimError):
    pass


class DepthExceeded(BidimError):
    pass


class CapExceeded(BidimError):
    pass


class ParseError(BidimError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
