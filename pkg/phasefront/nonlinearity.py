"""Smooth nonlinearities F(u) with their Wirtinger derivatives dF/dz and dF/dzbar."""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, Tuple

import numpy as np

from phasefront.config import settings

logger = logging.getLogger(__name__)

ComplexMap = Callable[[np.ndarray], np.ndarray]
RealParts = Callable[[np.ndarray, np.ndarray], Tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class Nonlinearity:
    name: str
    func: ComplexMap
    dz: ComplexMap
    dzbar: ComplexMap

    def __call__(self, u: np.ndarray) -> np.ndarray:
        return self.func(np.asarray(u, dtype=np.complex128))

    def check_vanishes_at_zero(self) -> None:
        value = complex(np.ravel(self(np.zeros(1)))[0])
        if abs(value) >= 1e-14:
            raise ValueError(f"nonlinearity {self.name} does not vanish at 0: F(0) = {value}")


def _zeros(u):
    return np.zeros_like(u, dtype=np.complex128)


def _ones(u):
    return np.ones_like(u, dtype=np.complex128)


ZERO = Nonlinearity("zero", _zeros, _zeros, _zeros)
IDENTITY = Nonlinearity("identity", lambda u: np.array(u, dtype=np.complex128), _ones, _zeros)
SQUARE = Nonlinearity("square", lambda u: u * u, lambda u: 2.0 * u, _zeros)
GAUGE = Nonlinearity(
    "gauge",
    lambda u: np.abs(u) ** 2 * u,
    lambda u: 2.0 * np.abs(u) ** 2 + 0j,
    lambda u: u * u,
)

BUILTINS: Dict[str, Nonlinearity] = {n.name: n for n in (ZERO, IDENTITY, SQUARE, GAUGE)}


def by_name(name: str) -> Nonlinearity:
    try:
        return BUILTINS[name]
    except KeyError:
        raise ValueError(f"unknown nonlinearity {name!r}; choose from {sorted(BUILTINS)}") from None


def power_series(coefficients: Dict[Tuple[int, int], complex], name: str = "power_series") -> Nonlinearity:
    """F(u) = sum c_{pq} u^p conj(u)^q over p + q >= 1."""
    terms = [(int(p), int(q), complex(c)) for (p, q), c in coefficients.items()]
    for p, q, _ in terms:
        if p < 0 or q < 0 or p + q < 1:
            raise ValueError(f"power series term u^{p} ubar^{q} must have p, q >= 0 and p + q >= 1")

    def func(u):
        ub = np.conj(u)
        return sum((c * u ** p * ub ** q for p, q, c in terms), _zeros(u))

    def dz(u):
        ub = np.conj(u)
        return sum((c * p * u ** (p - 1) * ub ** q for p, q, c in terms if p), _zeros(u))

    def dzbar(u):
        ub = np.conj(u)
        return sum((c * q * u ** p * ub ** (q - 1) for p, q, c in terms if q), _zeros(u))

    return Nonlinearity(name, func, dz, dzbar)


def from_real_parts(name: str, parts: RealParts) -> Nonlinearity:
    """
    F = P + iQ for real functions P(a, b), Q(a, b) of u = a + ib.

    parts must accept complex arguments (it is differentiated by the
    complex-step rule with step COMPLEX_STEP), and return real values for
    real input.
    """
    delta = settings.COMPLEX_STEP

    def func(u):
        P, Q = parts(u.real, u.imag)
        return np.asarray(P, dtype=float) + 1j * np.asarray(Q, dtype=float)

    def partials(u):
        a, b = u.real.astype(np.complex128), u.imag.astype(np.complex128)
        Pa, Qa = parts(a + 1j * delta, b)
        Pb, Qb = parts(a, b + 1j * delta)
        Fa = np.imag(Pa) / delta + 1j * np.imag(Qa) / delta
        Fb = np.imag(Pb) / delta + 1j * np.imag(Qb) / delta
        return Fa, Fb

    def dz(u):
        Fa, Fb = partials(u)
        return 0.5 * (Fa - 1j * Fb)

    def dzbar(u):
        Fa, Fb = partials(u)
        return 0.5 * (Fa + 1j * Fb)

    return Nonlinearity(name, func, dz, dzbar)
