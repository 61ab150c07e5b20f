"""
Trade-off Reports
Per-objective tables, cross-model distances and CSV / JSON emission
"""

import io
import json
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from solvers.forward import ParetoSample
from solvers.inverse import InverseResult

PERFECT_VARIANCE = 2.0 ** -14
CSV_COLUMNS = ["objective", "alpha", "f_xhat", "f_xstar", "ratio", "tight", "epsilon", "variance"]


def displayed_variance(variance: float) -> float:
    """Variances below the perfect-preservation threshold are shown as zero"""
    return 0.0 if variance < PERFECT_VARIANCE else float(variance)


@dataclass(frozen=True, eq=False)
class TradeoffReport:
    model: str
    objective_names: Tuple[str, ...]
    alpha: np.ndarray
    f_xhat: np.ndarray
    f_xstar: np.ndarray
    ratios: np.ndarray
    tight: np.ndarray
    epsilon: float
    ratio_variance: float
    x_star: np.ndarray
    seconds: float = 0.0
    iterations: Optional[int] = None
    verdict: Optional[str] = None
    epsilon_distance: Optional[float] = None
    alpha_distance: Optional[float] = None
    extra: Dict = field(default_factory=dict)

    @property
    def perfect_preservation(self) -> bool:
        return self.ratio_variance < PERFECT_VARIANCE

    @classmethod
    def from_result(cls, result: InverseResult, seconds: float = 0.0,
                    reference: Optional[InverseResult] = None) -> "TradeoffReport":
        report = cls(
            model=result.model,
            objective_names=result.objective_names,
            alpha=result.alpha_normalized,
            f_xhat=result.f_xhat,
            f_xstar=result.f_xstar,
            ratios=result.objective_ratios,
            tight=result.tight,
            epsilon=result.epsilon_star,
            ratio_variance=float(np.var(result.objective_ratios)),
            x_star=result.x_star,
            seconds=seconds,
            iterations=result.iterations,
            verdict=result.verdict.value,
            extra={
                "scheme": result.scheme.to_dict(),
                "scaled_deviations": result.ratios.tolist(),
                "degenerate": result.degenerate.tolist(),
                "trust_kappa": result.trust_kappa,
                "trust_binding": result.trust_binding,
                "multiplier_rule": result.multiplier_rule,
                "kkt_residuals": result.dual.residuals.to_dict(),
                "notes": list(result.notes),
            },
        )
        return report.against(reference) if reference is not None else report

    @classmethod
    def from_plan(cls, model: str, sample: ParetoSample, f_xhat: np.ndarray, names: Sequence[str],
                  seconds: float = 0.0, extra: Optional[Dict] = None) -> "TradeoffReport":
        """Report for a weight vector whose plan is the forward solution x(alpha)"""
        ratios = sample.f / f_xhat
        return cls(
            model=model,
            objective_names=tuple(names),
            alpha=sample.alpha.normalized,
            f_xhat=np.asarray(f_xhat, dtype=float),
            f_xstar=sample.f,
            ratios=ratios,
            tight=np.isclose(ratios, ratios.max(), rtol=1e-7, atol=0.0),
            epsilon=float(ratios.max()),
            ratio_variance=float(np.var(ratios)),
            x_star=sample.x,
            seconds=seconds,
            extra=dict(extra or {}),
        )

    def against(self, reference) -> "TradeoffReport":
        """Attach |eps_ref - eps| and ||alpha_ref - alpha||_2 against a reference model"""
        eps_ref = reference.epsilon_star if isinstance(reference, InverseResult) else reference.epsilon
        alpha_ref = reference.alpha_normalized if isinstance(reference, InverseResult) else reference.alpha
        return replace(
            self,
            epsilon_distance=abs(float(eps_ref) - self.epsilon),
            alpha_distance=float(np.linalg.norm(np.asarray(alpha_ref) - self.alpha)),
        )

    def frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "objective": list(self.objective_names),
            "alpha": self.alpha,
            "f_xhat": self.f_xhat,
            "f_xstar": self.f_xstar,
            "ratio": self.ratios,
            "tight": self.tight,
            "epsilon": self.epsilon,
            "variance": displayed_variance(self.ratio_variance),
        }, columns=CSV_COLUMNS)

    def to_dict(self) -> Dict:
        return {
            "model": self.model,
            "objectives": list(self.objective_names),
            "alpha": self.alpha.tolist(),
            "f_xhat": self.f_xhat.tolist(),
            "f_xstar": self.f_xstar.tolist(),
            "ratios": self.ratios.tolist(),
            "tight": [bool(t) for t in self.tight],
            "epsilon": self.epsilon,
            "ratio_variance": self.ratio_variance,
            "variance_displayed": displayed_variance(self.ratio_variance),
            "perfect_preservation": self.perfect_preservation,
            "x_star": self.x_star.tolist(),
            "seconds": self.seconds,
            "iterations": self.iterations,
            "verdict": self.verdict,
            "epsilon_distance": self.epsilon_distance,
            "alpha_distance": self.alpha_distance,
            **self.extra,
        }


def comparison_frame(reports: List[TradeoffReport]) -> pd.DataFrame:
    """One row per model: eps, variance, distances to the exact model, time and iterations"""
    return pd.DataFrame([{
        "model": r.model,
        "epsilon": r.epsilon,
        "variance": displayed_variance(r.ratio_variance),
        "epsilon_distance": r.epsilon_distance,
        "alpha_distance": r.alpha_distance,
        "seconds": r.seconds,
        "iterations": r.iterations,
        **{f"alpha_{name}": a for name, a in zip(r.objective_names, r.alpha)},
    } for r in reports])


def sweep_frame(samples: Sequence[ParetoSample], names: Sequence[str]) -> pd.DataFrame:
    """Pareto sweep rows ordered by the first weight"""
    rows = []
    for s in samples:
        row = {f"alpha_{k + 1}": a for k, a in enumerate(s.alpha.normalized)}
        row.update({name: value for name, value in zip(names, s.f)})
        row.update({f"x_{j + 1}": v for j, v in enumerate(s.x)})
        row["status"] = "Optimal" if s.ok else s.kernel_report.get("status", "Failed")
        rows.append(row)
    frame = pd.DataFrame(rows)
    return frame.sort_values("alpha_1", kind="mergesort").reset_index(drop=True)


def frame_to_csv(frame: pd.DataFrame) -> str:
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False, float_format="%.17g", lineterminator="\n")
    return buffer.getvalue()


def to_json(payload) -> str:
    return json.dumps(payload, sort_keys=True, indent=2, default=_json_default)


def _json_default(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    if hasattr(value, "to_dict"):
        return value.to_dict()
    raise TypeError(f"cannot serialize {type(value).__name__}")
