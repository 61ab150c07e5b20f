"""
Error taxonomy
Input problems subclass ValueError, solver failures subclass RuntimeError
"""


class TradeoffError(Exception):
    """Root of every error raised by this package"""


class InputError(TradeoffError, ValueError):
    """The caller handed over something malformed"""


class DimensionMismatch(InputError):
    pass


class NotPositiveSemidefinite(InputError):
    pass


class RankDeficientEqualities(InputError):
    pass


class NonPositiveObjective(InputError):
    pass


class ZeroWeightVector(InputError):
    pass


class InfeasibleInput(InputError):
    pass


class InvalidScheme(InputError):
    pass


class DocumentError(InputError):
    pass


class SolverError(TradeoffError, RuntimeError):
    """A solver could not certify an optimum"""

    def __init__(self, message: str, status: str = "Failed"):
        super().__init__(message)
        self.status = status


class ProgramInfeasible(SolverError):
    def __init__(self, message: str = "program has no strictly feasible point"):
        super().__init__(message, status="Infeasible")


class InstanceInfeasible(SolverError):
    def __init__(self, message: str):
        super().__init__(message, status="Infeasible")


class InternalInconsistency(SolverError):
    def __init__(self, message: str):
        super().__init__(message, status="InternalInconsistency")
