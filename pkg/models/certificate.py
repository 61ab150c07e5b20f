"""Dual certificates and KKT residuals"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class KktResiduals:
    stationarity: float
    complementarity: float
    feasibility: float

    def worst(self) -> float:
        return max(self.stationarity, self.complementarity, self.feasibility)

    def within(self, tol: float) -> bool:
        return self.worst() <= tol

    def to_dict(self) -> dict:
        return {
            "stationarity": self.stationarity,
            "complementarity": self.complementarity,
            "feasibility": self.feasibility,
        }


@dataclass(frozen=True, eq=False)
class DualCertificate:
    """alpha: objective/epigraph multipliers, sigma: g_l multipliers, pi: equality multipliers"""

    alpha: np.ndarray
    sigma: np.ndarray
    pi: np.ndarray
    residuals: KktResiduals

    def to_dict(self) -> dict:
        return {
            "alpha": np.asarray(self.alpha).tolist(),
            "sigma": np.asarray(self.sigma).tolist(),
            "pi": np.asarray(self.pi).tolist(),
            "kkt_residuals": self.residuals.to_dict(),
        }
