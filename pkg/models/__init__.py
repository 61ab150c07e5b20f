"""
Models Package
Forward problems, structured convex functions and trade-off scaling
"""

from .certificate import DualCertificate, KktResiduals
from .errors import (
    DimensionMismatch,
    InfeasibleInput,
    InputError,
    NonPositiveObjective,
    SolverError,
    TradeoffError,
    ZeroWeightVector,
)
from .functions import HingeSquared, Linear, Quadratic, evaluate, gradient
from .problem import ForwardProblem, LiftMap, WeightVector, epigraph_reformulate
from .scaling import ScalingScheme, SchemeKind, relative_scheme

__all__ = [
    'DualCertificate',
    'KktResiduals',
    'DimensionMismatch',
    'InfeasibleInput',
    'InputError',
    'NonPositiveObjective',
    'SolverError',
    'TradeoffError',
    'ZeroWeightVector',
    'HingeSquared',
    'Linear',
    'Quadratic',
    'evaluate',
    'gradient',
    'ForwardProblem',
    'LiftMap',
    'WeightVector',
    'epigraph_reformulate',
    'ScalingScheme',
    'SchemeKind',
    'relative_scheme',
]
