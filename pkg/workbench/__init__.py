"""
Workbench Package
Instance library, problem documents and reports
"""

from .documents import ProblemDocument, emit_document, parse_document
from .instances import EXAMPLE1_POINTS, PlanningInstance, builtin_example1, dvh_frame, gen_planning
from .reports import PERFECT_VARIANCE, TradeoffReport

__all__ = [
    'ProblemDocument',
    'emit_document',
    'parse_document',
    'EXAMPLE1_POINTS',
    'PlanningInstance',
    'builtin_example1',
    'dvh_frame',
    'gen_planning',
    'PERFECT_VARIANCE',
    'TradeoffReport',
]
