"""
Instance Library
The worked two-objective example, seeded synthetic families and planning instances
"""

from dataclasses import dataclass
from typing import Dict, NamedTuple, Optional, Tuple

import numpy as np
import pandas as pd

from models.errors import InstanceInfeasible
from models.functions import HingeSquared, Linear, Quadratic
from models.problem import ForwardProblem

ROOT2 = float(np.sqrt(2.0))

EXAMPLE1_POINTS: Dict[str, np.ndarray] = {
    "a": np.array([(4.0 - ROOT2) / 2.0, (4.0 - ROOT2) / 2.0]),
    "b": np.array([1.7, 1.3]),
    "c": np.array([1.0, 1.0]),
    "d": np.array([1.725, 1.121]),
    "e": np.array([1.789, 1.096]),
}

# the worked KES instance states its stationarity rows at half scale
EXAMPLE1_KES_DELTA_SCALE = 0.5

OAR_NAMES = ("bladder", "rectum", "femoral_head_left", "femoral_head_right", "ring")


def builtin_example1() -> ForwardProblem:
    """f1 = 4x1^2 + x2^2, f2 = x1^2 + 4x2^2 over the unit disk centered at (2, 2)"""
    return ForwardProblem(
        objectives=(Quadratic(np.diag([8.0, 2.0])), Quadratic(np.diag([2.0, 8.0]))),
        inequalities=(Quadratic(2.0 * np.eye(2), np.array([-4.0, -4.0]), 7.0),),
    )


def example1_point(label: str) -> np.ndarray:
    try:
        return EXAMPLE1_POINTS[label.lower()].copy()
    except KeyError:
        raise ValueError(f"unknown Example-1 point {label!r}; expected one of {sorted(EXAMPLE1_POINTS)}")


class SyntheticCase(NamedTuple):
    problem: ForwardProblem
    xhat: np.ndarray
    label: str


def disk_problem(Q1: np.ndarray, Q2: np.ndarray, center: np.ndarray, radius: float = 1.0) -> ForwardProblem:
    c = np.asarray(center, dtype=float)
    return ForwardProblem(
        objectives=(Quadratic(Q1), Quadratic(Q2)),
        inequalities=(Quadratic(2.0 * np.eye(2), -2.0 * c, float(c @ c - radius ** 2)),),
    )


def random_quadratic_case(seed: int, on_frontier_offset: Optional[float] = None) -> SyntheticCase:
    """Two diagonal quadratics over a jittered unit disk; xhat sits inside the disk facing the origin.

    With on_frontier_offset the point is instead taken on the lower-left arc
    and pulled that far toward the center.
    """
    rng = np.random.default_rng(seed)
    a = rng.uniform(6.0, 10.0, size=2)
    b = rng.uniform(1.0, 2.0, size=2)
    Q1 = np.diag([a[0], b[0]])
    Q2 = np.diag([b[1], a[1]])
    center = 2.0 + rng.uniform(-0.3, 0.3, size=2)
    theta = np.deg2rad(rng.uniform(215.0, 235.0))
    if on_frontier_offset is None:
        radius = rng.uniform(0.8, 0.95)
    else:
        radius = 1.0 - on_frontier_offset
    xhat = center + radius * np.array([np.cos(theta), np.sin(theta)])
    return SyntheticCase(disk_problem(Q1, Q2, center), xhat, f"quadratic-{seed}")


def random_linear_case(seed: int) -> SyntheticCase:
    """Two positive linear costs over the box [0, 3]^2 cut by x1 + x2 >= s; xhat interior"""
    rng = np.random.default_rng(seed)
    c1 = np.array([rng.uniform(1.5, 2.5), rng.uniform(0.3, 0.8)])
    c2 = np.array([rng.uniform(0.3, 0.8), rng.uniform(1.5, 2.5)])
    s = rng.uniform(1.0, 2.0)
    rows = (
        Linear(np.array([-1.0, 0.0])),
        Linear(np.array([0.0, -1.0])),
        Linear(np.array([-1.0, -1.0]), s),
        Linear(np.array([1.0, 0.0]), -3.0),
        Linear(np.array([0.0, 1.0]), -3.0),
    )
    xhat = rng.uniform(1.6, 2.6, size=2)
    problem = ForwardProblem(objectives=(Linear(c1), Linear(c2)), inequalities=rows)
    return SyntheticCase(problem, xhat, f"linear-{seed}")


# ---------------------------------------------------------------- planning


@dataclass(frozen=True, eq=False)
class PlanningInstance:
    """Synthetic fluence-map instance: one target and K organs at risk over n beamlets"""

    tumor_dose: np.ndarray
    oar_doses: Tuple[np.ndarray, ...]
    thresholds: np.ndarray
    oar_upper: np.ndarray
    tumor_lower: float
    tumor_upper: float
    beta: float
    names: Tuple[str, ...]
    seed: int

    @property
    def n_beamlets(self) -> int:
        return self.tumor_dose.shape[1]

    @property
    def structures(self) -> Tuple[str, ...]:
        return ("tumor",) + self.names

    def doses(self, x) -> Dict[str, np.ndarray]:
        x = np.asarray(x, dtype=float)
        out = {"tumor": self.tumor_dose @ x}
        for name, D in zip(self.names, self.oar_doses):
            out[name] = D @ x
        return out


def _oar_names(k: int) -> Tuple[str, ...]:
    return tuple(OAR_NAMES[i] if i < len(OAR_NAMES) else f"oar_{i + 1}" for i in range(k))


def gen_planning(seed: int, n: int = 20, m_per_structure: int = 50, k: int = 5,
                 beta: float = 2.0) -> Tuple[ForwardProblem, PlanningInstance]:
    """Seeded planning instance with hinge-squared overdose objectives.

    Objective k is (1/m)||(D_k x - theta_k)_+||^2. The target dose must stay in a
    band around its mean dose at uniform intensities, each organ stays below
    1.05 times its worst voxel dose there, and x_i <= beta * mean(x), x >= 0.
    """
    if n < 2 or m_per_structure < 1 or k < 2:
        raise ValueError("planning instances need n >= 2, m_per_structure >= 1 and k >= 2")
    rng = np.random.default_rng(seed)
    names = _oar_names(k)
    thresholds = np.array([30.0 if name.startswith("femoral") else 50.0 for name in names])
    tumor = rng.uniform(0.9, 1.1, size=(m_per_structure, n)) * 80.0 / n
    oars = tuple(rng.uniform(0.0, 1.0, size=(m_per_structure, n)) * 2.0 * 1.2 * theta / n
                 for theta in thresholds)

    uniform = np.ones(n)
    tumor_at_uniform = tumor @ uniform
    mean_dose = float(tumor_at_uniform.mean())
    width = 0.05
    for _ in range(10):
        lower, upper = (1.0 - width) * mean_dose, (1.0 + width) * mean_dose
        if np.all(tumor_at_uniform > lower) and np.all(tumor_at_uniform < upper):
            break
        width += 0.05
    else:
        raise InstanceInfeasible(f"no feasible target band found for seed {seed}")
    oar_upper = np.array([1.05 * float(np.max(D @ uniform)) for D in oars])

    scale = 1.0 / np.sqrt(m_per_structure)
    objectives = tuple(HingeSquared(D * scale, np.full(m_per_structure, theta) * scale)
                       for D, theta in zip(oars, thresholds))
    rows = [Linear(row, -upper) for row in tumor]
    rows += [Linear(-row, lower) for row in tumor]
    for D, bound in zip(oars, oar_upper):
        rows += [Linear(row, -bound) for row in D]
    eye = np.eye(n)
    rows += [Linear(eye[i] - beta / n) for i in range(n)]
    rows += [Linear(-eye[i]) for i in range(n)]
    problem = ForwardProblem(objectives=objectives, inequalities=tuple(rows), objective_names=names)
    instance = PlanningInstance(tumor, oars, thresholds, oar_upper, lower, upper, beta, names, seed)
    return problem, instance


def perturbed_plan(x: np.ndarray, seed: int, noise: float = 0.05) -> np.ndarray:
    """Scale each beamlet up by a uniform factor in [1, 1 + noise]"""
    rng = np.random.default_rng(seed)
    return np.asarray(x, dtype=float) * (1.0 + noise * rng.uniform(0.0, 1.0, size=np.size(x)))


def dvh_frame(instance: PlanningInstance, x, bins: int = 50) -> pd.DataFrame:
    """Cumulative dose-volume curves: fraction of each structure's voxels at or above each dose level"""
    doses = instance.doses(x)
    top = max(float(np.max(d)) for d in doses.values())
    levels = np.linspace(0.0, top, bins)
    frames = []
    for name in instance.structures:
        d = doses[name]
        frames.append(pd.DataFrame({
            "structure": name,
            "dose": levels,
            "volume_fraction": (d[None, :] >= levels[:, None]).mean(axis=1),
        }))
    return pd.concat(frames, ignore_index=True)
