"""
Solvers Package
Convex kernel, simplex, forward and inverse solvers
"""

from .base_solver import BaseSolver
from .convex_kernel import ConvexKernel, KernelSolution, KernelStatus, SmoothProgram
from .linprog import LinearProgram, LpSolution, LpSolver, LpStatus
from .forward import ClassicalVerdict, ForwardSolver, Membership, ParetoSample
from .inverse import InverseResult, InverseSolver, Verdict
from .linear_inverse import LinearInverseSolver, LiopInstance, SlpTermination, SlpTrace
from .kes import KesConfig, KesResult, KesSolver, Normalization, Penalty

__all__ = [
    'BaseSolver',
    'ConvexKernel',
    'KernelSolution',
    'KernelStatus',
    'SmoothProgram',
    'LinearProgram',
    'LpSolution',
    'LpSolver',
    'LpStatus',
    'ClassicalVerdict',
    'ForwardSolver',
    'Membership',
    'ParetoSample',
    'InverseResult',
    'InverseSolver',
    'Verdict',
    'LinearInverseSolver',
    'LiopInstance',
    'SlpTermination',
    'SlpTrace',
    'KesConfig',
    'KesResult',
    'KesSolver',
    'Normalization',
    'Penalty',
]
