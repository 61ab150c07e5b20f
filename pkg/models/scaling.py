"""
Trade-off scaling schemes
mu_k converts objective k's deviation into the units of a reference objective
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from models.errors import DimensionMismatch, InvalidScheme, NonPositiveObjective
from models.functions import frozen_array
from models.problem import ForwardProblem

POSITIVITY_TOL = 1e-12
IDENTITY_TOL = 1e-12


class SchemeKind(str, Enum):
    GENERAL = "general"
    RELATIVE = "relative"
    ABSOLUTE = "absolute"


@dataclass(frozen=True, eq=False)
class ScalingScheme:
    """Scaling factors mu with the reference objective's factor equal to one.

    For the relative scheme, f_ref holds f(xhat) so that models can state the
    constraint as eps * f_k(xhat) >= f_k(x).
    """

    kind: SchemeKind
    mu: np.ndarray
    reference: int = 0
    f_ref: np.ndarray = None

    def __post_init__(self):
        kind = SchemeKind(self.kind)
        mu = frozen_array(self.mu, 1, "mu")
        if np.any(mu < 0):
            raise InvalidScheme(f"scaling factors must be nonnegative, got {mu.tolist()}")
        if not 0 <= self.reference < mu.shape[0]:
            raise InvalidScheme(f"reference objective {self.reference} out of range 0..{mu.shape[0] - 1}")
        if kind is SchemeKind.ABSOLUTE and not np.all(mu == 1.0):
            raise InvalidScheme("absolute scheme requires mu = 1")
        if kind is SchemeKind.RELATIVE:
            if self.f_ref is None:
                raise InvalidScheme("relative scheme needs the objective values at xhat")
            f_ref = frozen_array(self.f_ref, 1, "f_ref")
            if f_ref.shape != mu.shape:
                raise DimensionMismatch("f_ref and mu must have the same length")
            object.__setattr__(self, "f_ref", f_ref)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "mu", mu)

    @property
    def size(self) -> int:
        return self.mu.shape[0]

    @property
    def has_zero(self) -> bool:
        return bool(np.any(self.mu == 0))

    def pairwise(self) -> np.ndarray:
        """u[k1, k2] = mu[k2] / mu[k1]"""
        if self.has_zero:
            raise InvalidScheme("pairwise factors are undefined when some mu_k = 0")
        return self.mu[None, :] / self.mu[:, None]

    def scaled(self, c: float) -> "ScalingScheme":
        """Multiply every factor by c > 0 (a general scheme results)"""
        if c <= 0:
            raise InvalidScheme("scale must be positive")
        return ScalingScheme(SchemeKind.GENERAL, self.mu * c, self.reference)

    def with_reference(self, k: int) -> "ScalingScheme":
        """Re-base on objective k; only the optimal epsilon rescales"""
        if self.mu[k] <= 0:
            raise InvalidScheme(f"objective {k} has mu = 0 and cannot be the reference")
        return ScalingScheme(self.kind, self.mu / self.mu[k], k, self.f_ref)

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "mu": self.mu.tolist(), "kref": self.reference + 1}

    @classmethod
    def absolute(cls, k: int) -> "ScalingScheme":
        return cls(SchemeKind.ABSOLUTE, np.ones(k))

    @classmethod
    def general(cls, mu, reference: int = 0) -> "ScalingScheme":
        return cls(SchemeKind.GENERAL, mu, reference)

    @classmethod
    def unit(cls, k: int, index: int) -> "ScalingScheme":
        """mu = e_index, the limiting scheme that pins every other objective"""
        mu = np.zeros(k)
        mu[index] = 1.0
        return cls(SchemeKind.GENERAL, mu, index)

    @classmethod
    def from_pairwise(cls, u, reference: int = 0) -> "ScalingScheme":
        """Build a general scheme from a full K x K matrix of pairwise factors"""
        u = np.asarray(u, dtype=float)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise DimensionMismatch(f"pairwise factors must be square, got shape {u.shape}")
        if np.any(u <= 0):
            raise InvalidScheme("pairwise factors must be positive")
        check_pairwise_identities(u)
        return cls(SchemeKind.GENERAL, u[reference], reference)


def check_pairwise_identities(u: np.ndarray, tol: float = IDENTITY_TOL) -> None:
    """u_kk = 1, u_ab u_ba = 1 and u_ab u_bc = u_ac, all relative to tol"""
    k = u.shape[0]
    if np.max(np.abs(np.diag(u) - 1.0)) > tol:
        raise InvalidScheme("pairwise factors need u_kk = 1")
    if np.max(np.abs(u * u.T - 1.0)) > tol:
        raise InvalidScheme("pairwise factors need u_ab * u_ba = 1")
    for b in range(k):
        chained = np.outer(u[:, b], u[b, :])
        if np.max(np.abs(chained - u) / np.maximum(1.0, np.abs(u))) > tol:
            raise InvalidScheme("pairwise factors need u_ab * u_bc = u_ac")


def relative_scheme(problem: ForwardProblem, xhat, reference: int = 0) -> ScalingScheme:
    """mu_k = f_k(xhat) / f_ref(xhat)"""
    values = problem.objective_values(xhat)
    bad = np.flatnonzero(values <= POSITIVITY_TOL)
    if bad.size:
        names = ", ".join(problem.objective_names[k] for k in bad)
        raise NonPositiveObjective(
            f"relative preservation needs f_k(xhat) > {POSITIVITY_TOL:g}; not so for {names}"
        )
    if not 0 <= reference < problem.n_objectives:
        raise InvalidScheme(f"reference objective {reference} out of range")
    return ScalingScheme(SchemeKind.RELATIVE, values / values[reference], reference, values)
