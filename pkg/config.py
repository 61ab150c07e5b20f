"""
Solver configuration
Typed option blocks with defaults, optionally overridden from a .env file
"""

import os
from dataclasses import asdict, dataclass, fields, replace
from typing import Dict

from dotenv import load_dotenv

# Load environment variables
load_dotenv()


def _env_float(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return float(raw.strip().strip('"').strip("'"))
    except ValueError:
        raise ValueError(f"{name} must be a number, got {raw!r}")


def _env_int(name: str, default: int) -> int:
    return int(_env_float(name, float(default)))


class _Options:
    """Shared helpers for option dataclasses"""

    def to_dict(self) -> Dict:
        return asdict(self)

    def with_overrides(self, **overrides):
        """Return a copy with non-None overrides applied"""
        known = {f.name for f in fields(self)}
        kept = {k: v for k, v in overrides.items() if v is not None and k in known}
        return replace(self, **kept)


@dataclass(frozen=True)
class KernelOptions(_Options):
    """Primal-dual interior point settings"""

    tol: float = 1e-8
    max_newton: int = 200
    mu: float = 10.0
    t0: float = 1.0
    armijo_alpha: float = 0.01
    armijo_beta: float = 0.5
    max_backtracks: int = 80
    boundary_fraction: float = 0.99
    phase_one_margin: float = 1e-6
    phase_one_depth: float = 1e-3
    phase_one_radius: float = 1e4
    phase_one_infeasible: float = -1e-9
    unbounded_threshold: float = -1e12

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.mu <= 1:
            raise ValueError("mu must exceed 1")
        if not 0 < self.armijo_alpha < 0.5 or not 0 < self.armijo_beta < 1:
            raise ValueError("Armijo constants must satisfy 0 < alpha < 0.5, 0 < beta < 1")
        if not 0 < self.boundary_fraction < 1:
            raise ValueError("boundary_fraction must lie in (0, 1)")
        if self.phase_one_depth < self.phase_one_margin or self.phase_one_radius <= 0:
            raise ValueError("phase one needs depth >= margin and a positive box radius")

    @classmethod
    def from_env(cls) -> "KernelOptions":
        return cls(
            tol=_env_float("TRADEOFF_KERNEL_TOL", cls.tol),
            max_newton=_env_int("TRADEOFF_KERNEL_MAX_NEWTON", cls.max_newton),
            mu=_env_float("TRADEOFF_KERNEL_MU", cls.mu),
        )


@dataclass(frozen=True)
class LpOptions(_Options):
    """Simplex settings"""

    pivot_tol: float = 1e-9
    infeasible_tol: float = 1e-9
    max_pivots: int = 50_000

    @classmethod
    def from_env(cls) -> "LpOptions":
        return cls(max_pivots=_env_int("TRADEOFF_LP_MAX_PIVOTS", cls.max_pivots))


@dataclass(frozen=True)
class SlpOptions(_Options):
    """Trust-region successive linear programming settings"""

    step_tol: float = 1e-3
    max_iterations: int = 100
    rho: float = 1e3
    eta1: float = 0.25
    eta2: float = 0.75
    shrink: float = 0.5
    expand: float = 2.0
    delta0_factor: float = 0.1
    min_decrease: float = 1e-12

    def __post_init__(self):
        if self.delta0_factor <= 0 or self.step_tol <= 0:
            raise ValueError("delta0_factor and step_tol must be positive")
        if not 0 < self.shrink < 1 < self.expand:
            raise ValueError("trust region factors must satisfy 0 < shrink < 1 < expand")
        if not 0 <= self.eta1 <= self.eta2 < 1:
            raise ValueError("ratio thresholds must satisfy 0 <= eta1 <= eta2 < 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")

    @classmethod
    def from_env(cls) -> "SlpOptions":
        return cls(
            step_tol=_env_float("TRADEOFF_SLP_STEP_TOL", cls.step_tol),
            max_iterations=_env_int("TRADEOFF_SLP_MAX_ITERATIONS", cls.max_iterations),
            rho=_env_float("TRADEOFF_SLP_RHO", cls.rho),
        )


@dataclass(frozen=True)
class InverseOptions(_Options):
    """Thresholds used when reading trade-off verdicts off a solution"""

    tight_tol: float = 1e-7
    weight_tol: float = 1e-7
    degeneracy_tol: float = 1e-3

    @classmethod
    def from_env(cls) -> "InverseOptions":
        return cls(tight_tol=_env_float("TRADEOFF_TIGHT_TOL", cls.tight_tol))


def log_level() -> str:
    return os.getenv("TRADEOFF_LOG_LEVEL", "WARNING").upper()
