"""
Structured convex functions
Linear, quadratic and hinge-squared pieces with exact values and gradients
"""

from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import linalg

from models.errors import DimensionMismatch, NotPositiveSemidefinite

PSD_TOL = 1e-10


def frozen_array(values, ndim: int, name: str) -> np.ndarray:
    """Copy into a read-only float array of the given rank"""
    arr = np.array(values, dtype=float)
    if arr.ndim == 0 and ndim == 1:
        arr = arr.reshape(1)
    if arr.ndim != ndim:
        raise DimensionMismatch(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DimensionMismatch(f"{name} must be finite")
    arr.setflags(write=False)
    return arr


def as_point(x, n: int) -> np.ndarray:
    point = np.asarray(x, dtype=float)
    if point.ndim != 1 or point.shape[0] != n:
        raise DimensionMismatch(f"expected a point of dimension {n}, got shape {point.shape}")
    return point


@dataclass(frozen=True, eq=False)
class Linear:
    """c'x + d"""

    c: np.ndarray
    d: float = 0.0

    kind = "linear"

    def __post_init__(self):
        object.__setattr__(self, "c", frozen_array(self.c, 1, "c"))
        object.__setattr__(self, "d", float(self.d))

    @property
    def n(self) -> int:
        return self.c.shape[0]

    def value(self, x) -> float:
        return float(self.c @ as_point(x, self.n) + self.d)

    def gradient(self, x) -> np.ndarray:
        as_point(x, self.n)
        return np.array(self.c)

    def hessian(self) -> np.ndarray:
        return np.zeros((self.n, self.n))


@dataclass(frozen=True, eq=False)
class Quadratic:
    """0.5 x'Qx + q'x + d with Q symmetric positive semidefinite"""

    Q: np.ndarray
    q: np.ndarray = None
    d: float = 0.0

    kind = "quadratic"

    def __post_init__(self):
        Q = np.array(self.Q, dtype=float)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise DimensionMismatch(f"Q must be square, got shape {Q.shape}")
        Q = 0.5 * (Q + Q.T)
        n = Q.shape[0]
        if n and linalg.eigvalsh(Q)[0] < -PSD_TOL:
            raise NotPositiveSemidefinite(
                f"Q has eigenvalue {linalg.eigvalsh(Q)[0]:.3e} below -{PSD_TOL:g}"
            )
        q = np.zeros(n) if self.q is None else self.q
        object.__setattr__(self, "Q", frozen_array(Q, 2, "Q"))
        object.__setattr__(self, "q", frozen_array(q, 1, "q"))
        object.__setattr__(self, "d", float(self.d))
        if self.q.shape[0] != n:
            raise DimensionMismatch(f"q has length {self.q.shape[0]}, Q is {n}x{n}")

    @property
    def n(self) -> int:
        return self.Q.shape[0]

    def value(self, x) -> float:
        x = as_point(x, self.n)
        return float(0.5 * x @ self.Q @ x + self.q @ x + self.d)

    def gradient(self, x) -> np.ndarray:
        x = as_point(x, self.n)
        return self.Q @ x + self.q

    def hessian(self) -> np.ndarray:
        return np.array(self.Q)


@dataclass(frozen=True, eq=False)
class HingeSquared:
    """||(Mx - t)_+||^2, the squared overdose of each row above its threshold"""

    M: np.ndarray
    t: np.ndarray

    kind = "hinge_squared"

    def __post_init__(self):
        object.__setattr__(self, "M", frozen_array(self.M, 2, "M"))
        object.__setattr__(self, "t", frozen_array(self.t, 1, "t"))
        if self.t.shape[0] != self.M.shape[0]:
            raise DimensionMismatch(
                f"t has length {self.t.shape[0]}, M has {self.M.shape[0]} rows"
            )

    @property
    def n(self) -> int:
        return self.M.shape[1]

    @property
    def rows(self) -> int:
        return self.M.shape[0]

    def excess(self, x) -> np.ndarray:
        return np.maximum(self.M @ as_point(x, self.n) - self.t, 0.0)

    def value(self, x) -> float:
        excess = self.excess(x)
        return float(excess @ excess)

    def gradient(self, x) -> np.ndarray:
        return 2.0 * self.M.T @ self.excess(x)


ConvexFunction = Union[Linear, Quadratic, HingeSquared]
SmoothFunction = Union[Linear, Quadratic]


def evaluate(f: ConvexFunction, x) -> float:
    return f.value(x)


def gradient(f: ConvexFunction, x) -> np.ndarray:
    return f.gradient(x)


def pad(f: SmoothFunction, n_total: int, extra_linear=None) -> SmoothFunction:
    """Embed f into a larger variable space whose first f.n coordinates are f's own.

    extra_linear adds a linear term on the trailing coordinates.
    """
    tail = n_total - f.n
    if tail < 0:
        raise DimensionMismatch(f"cannot pad a function of dimension {f.n} into {n_total}")
    extra = np.zeros(tail) if extra_linear is None else np.asarray(extra_linear, dtype=float)
    if isinstance(f, Linear):
        return Linear(np.concatenate([f.c, extra]), f.d)
    if isinstance(f, Quadratic):
        Q = np.zeros((n_total, n_total))
        Q[: f.n, : f.n] = f.Q
        return Quadratic(Q, np.concatenate([f.q, extra]), f.d)
    raise TypeError(f"cannot pad {type(f).__name__}; lift hinge-squared terms first")


def combine(weights, functions, n: int) -> SmoothFunction:
    """Weighted sum of smooth functions, Linear when every piece is linear"""
    Q = np.zeros((n, n))
    q = np.zeros(n)
    d = 0.0
    quadratic = False
    for w, f in zip(weights, functions):
        if w == 0:
            continue
        if isinstance(f, Quadratic):
            Q += w * f.Q
            q += w * f.q
            quadratic = True
        elif isinstance(f, Linear):
            q += w * f.c
        else:
            raise TypeError(f"cannot combine {type(f).__name__}; lift hinge-squared terms first")
        d += w * f.d
    if quadratic:
        return Quadratic(Q, q, d)
    return Linear(q, d)
