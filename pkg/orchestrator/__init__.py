"""Orchestrator package"""
from .orchestrator import INVERSE_MODELS, InverseOrchestrator

__all__ = ['InverseOrchestrator', 'INVERSE_MODELS']
