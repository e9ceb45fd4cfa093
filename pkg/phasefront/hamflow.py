#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Hamiltonian flows on phase space R^{2d} = {(x, xi)}.

    x' = da/dxi,  xi' = -da/dx,  i.e.  z' = Omega grad a(z)

Quadratic forms a(z) = z^T A z / 2 flow exactly by the matrix exponential
of t*Omega*A. Other degree-2 homogeneous symbols are integrated with RK4.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple, Union

import numpy as np
from scipy.linalg import expm

from phasefront.config import settings
from phasefront.errors import ZeroCrossing, ZeroPoint

logger = logging.getLogger(__name__)

TimeFactor = Callable[[float], float]


def symplectic_form(d: int) -> np.ndarray:
    """Omega = [[0, I], [-I, 0]]."""
    eye = np.eye(d)
    zero = np.zeros((d, d))
    return np.block([[zero, eye], [-eye, zero]])


@dataclass(frozen=True)
class QuadraticHamiltonian:
    """a(z) = z^T A z / 2 with A symmetric of size 2d."""
    matrix: np.ndarray

    def __post_init__(self):
        A = np.array(self.matrix, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] % 2:
            raise ValueError(f"Hamiltonian matrix must be 2d x 2d, got shape {A.shape}")
        if np.max(np.abs(A - A.T)) > 1e-12:
            raise ValueError("Hamiltonian matrix must be symmetric")
        A.setflags(write=False)
        object.__setattr__(self, "matrix", A)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0] // 2

    @classmethod
    def harmonic_oscillator(cls, d: int = 1) -> "QuadraticHamiltonian":
        """a = (|x|^2 + |xi|^2) / 2."""
        return cls(np.eye(2 * d))

    @classmethod
    def free(cls, d: int = 1) -> "QuadraticHamiltonian":
        """a = |xi|^2 / 2."""
        return cls(np.diag(np.r_[np.zeros(d), np.ones(d)]))

    def __call__(self, z: np.ndarray) -> float:
        z = np.asarray(z, dtype=float)
        return 0.5 * float(z @ self.matrix @ z)


@dataclass(frozen=True)
class HamiltonianField:
    """
    Real symbol a(t, x, xi), positively homogeneous of degree 2 in z.

    evaluator takes (t, x, xi) with x, xi of length d. gradient, when
    given, takes (t, z) and returns the full 2d gradient; otherwise central
    differences with step FD_RELATIVE_STEP * |z| are used.
    """
    dimension: int
    evaluator: Callable[[float, np.ndarray, np.ndarray], float]
    gradient: Optional[Callable[[float, np.ndarray], np.ndarray]] = None
    time_interval: Tuple[float, float] = (0.0, math.inf)
    autonomous: bool = True
    name: str = "custom"

    @classmethod
    def from_quadratic(cls, q: QuadraticHamiltonian,
                       time_factor: Optional[TimeFactor] = None) -> "HamiltonianField":
        """f(t) * a(z), with f = 1 when no time factor is given."""
        factor = time_factor or (lambda t: 1.0)
        d = q.dimension
        A = q.matrix

        def evaluator(t, x, xi):
            return factor(t) * q(np.r_[x, xi])

        def gradient(t, z):
            return factor(t) * (A @ z)

        return cls(d, evaluator, gradient, autonomous=time_factor is None, name="quadratic")

    def value(self, t: float, z: np.ndarray) -> float:
        d = self.dimension
        return float(self.evaluator(t, z[:d], z[d:]))

    def grad(self, t: float, z: np.ndarray) -> np.ndarray:
        if self.gradient is not None:
            return np.asarray(self.gradient(t, z), dtype=float)
        step = settings.FD_RELATIVE_STEP * max(float(np.linalg.norm(z)), 1e-300)
        g = np.empty_like(z, dtype=float)
        for k in range(z.size):
            e = np.zeros_like(z, dtype=float)
            e[k] = step
            g[k] = (self.value(t, z + e) - self.value(t, z - e)) / (2.0 * step)
        return g

    def vector_field(self, t: float, z: np.ndarray) -> np.ndarray:
        return symplectic_form(self.dimension) @ self.grad(t, z)

    def check_homogeneity(self, seed: int = 0, samples: int = 8) -> float:
        """Largest relative defect |a(t, lam z) - lam^2 a(t, z)| over random (t, z), lam in {2, 3}."""
        rng = np.random.default_rng(seed)
        t_lo, t_hi = self.time_interval
        t_hi = t_lo + 1.0 if not math.isfinite(t_hi) else t_hi
        worst = 0.0
        for _ in range(samples):
            z = rng.standard_normal(2 * self.dimension)
            t = float(rng.uniform(t_lo, t_hi))
            base = self.value(t, z)
            for lam in (2.0, 3.0):
                scaled = self.value(t, lam * z)
                worst = max(worst, abs(scaled - lam ** 2 * base) / max(abs(lam ** 2 * base), 1e-300))
        return worst


@dataclass(frozen=True)
class FlowResult:
    endpoint: np.ndarray
    jacobian: Optional[np.ndarray] = None
    t: float = 0.0
    steps: int = 0
    meta: dict = field(default_factory=dict)


def flow_matrix(q: QuadraticHamiltonian, t: float) -> np.ndarray:
    """expm(t * Omega * A)."""
    return expm(t * symplectic_form(q.dimension) @ q.matrix)


def symplectic_defect(jacobian: np.ndarray) -> float:
    """max |J^T Omega J - Omega|."""
    omega = symplectic_form(jacobian.shape[0] // 2)
    return float(np.max(np.abs(jacobian.T @ omega @ jacobian - omega)))


def _check_point(z0: np.ndarray, d: int) -> np.ndarray:
    z0 = np.asarray(z0, dtype=float).ravel()
    if z0.size != 2 * d:
        raise ValueError(f"expected a point of R^{2 * d}, got {z0.size} coordinates")
    if not np.any(z0):
        raise ZeroPoint("the flow is undefined at the origin of phase space")
    return z0


def flow_quadratic(q: QuadraticHamiltonian, t: float, z0) -> FlowResult:
    """Exact flow of a quadratic Hamiltonian; the Jacobian is the flow matrix."""
    z0 = _check_point(z0, q.dimension)
    J = flow_matrix(q, t)
    return FlowResult(J @ z0, J, t)


def flow_quadratic_batch(q: QuadraticHamiltonian, t: float, points: np.ndarray) -> np.ndarray:
    """Rows of points carried by the exact flow."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if np.any(np.all(points == 0.0, axis=1)):
        raise ZeroPoint("the flow is undefined at the origin of phase space")
    return points @ flow_matrix(q, t).T


def flow_numeric(h: HamiltonianField, t0: float, t1: float, z0, dt: float) -> FlowResult:
    """
    Classical RK4 integration of z' = Omega grad a(t, z) from t0 to t1.

    The step is shrunk so an integer number of steps lands exactly on t1;
    t1 < t0 integrates backwards.

    Raises:
        ZeroPoint: z0 = 0.
        ZeroCrossing: the trajectory comes within 1e-8 |z0| of the origin.
    """
    z = _check_point(z0, h.dimension)
    span = t1 - t0
    if span == 0.0:
        return FlowResult(z.copy(), None, t1, 0)
    if not 0.0 < dt <= abs(span) / 16.0:
        raise ValueError(f"dt must lie in (0, |t1 - t0|/16] = (0, {abs(span) / 16.0:.6g}], got {dt}")

    steps = int(math.ceil(abs(span) / dt - 1e-12))
    step = span / steps
    floor = 1e-8 * float(np.linalg.norm(z))
    t = t0
    for n in range(steps):
        k1 = h.vector_field(t, z)
        k2 = h.vector_field(t + 0.5 * step, z + 0.5 * step * k1)
        k3 = h.vector_field(t + 0.5 * step, z + 0.5 * step * k2)
        k4 = h.vector_field(t + step, z + step * k3)
        z = z + step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t = t0 + (n + 1) * step
        if np.linalg.norm(z) < floor:
            raise ZeroCrossing(f"trajectory reached |z| = {np.linalg.norm(z):.3g} at t = {t:.6g}")
    logger.debug(f"RK4 {h.name}: {steps} steps of {step:.3g} from t={t0} to t={t1}")
    return FlowResult(z, None, t1, steps)


def direction_map(flow: Union[QuadraticHamiltonian, HamiltonianField], t: float, theta: float,
                  dt: Optional[float] = None) -> float:
    """
    Angle of chi_t(cos theta, sin theta) in [0, 2pi).

    Quadratic Hamiltonians use the exact flow; fields use RK4 from 0 to t
    with dt defaulting to |t|/256.
    """
    d = flow.dimension
    if d != 1:
        raise ValueError("directions are angles only in the phase plane (d = 1)")
    z0 = np.array([math.cos(theta), math.sin(theta)])
    if isinstance(flow, QuadraticHamiltonian):
        z = flow_quadratic(flow, t, z0).endpoint
    elif t == 0.0:
        z = z0
    else:
        z = flow_numeric(flow, 0.0, t, z0, dt or abs(t) / 256.0).endpoint
    return float(np.mod(math.atan2(z[1], z[0]), 2.0 * math.pi))
