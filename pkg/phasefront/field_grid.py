#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Uniform 1D grids, test signals and the centered Fourier transform.

Grid points are x_j = -L + j*h (h = 2L/N) and the dual grid carries
xi_m = -pi/h + m*pi/L. The transform approximates the integral
f^(xi) = int e^{-i x xi} f(x) dx by h * sum_j e^{-i x_j xi_m} f(x_j); for N a
multiple of four this is an FFT sandwiched between two (-1)^k sign flips.
"""

import logging
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy import fft as sp_fft

from phasefront.config import settings
from phasefront.errors import (
    DomainTagError,
    FileFormatError,
    NyquistViolation,
    SignalError,
)

logger = logging.getLogger(__name__)

DomainTag = Literal["space", "frequency"]
SignalKind = Literal[
    "constant", "chirp", "gaussian", "hermite", "delta_approx",
    "file", "plane_wave", "lacunary",
]

_SHORTHAND_RE = re.compile(r"^\s*([a-z_]+)\s*(?:\((.*)\))?\s*$")
_HEADER_RE = re.compile(r"L\s*=\s*([^,\s]+)\s*,\s*N\s*=\s*(\d+)")

# Positional parameter names accepted by the shorthand "kind(a, b)"
_SHORTHAND_PARAMS = {
    "constant": (),
    "chirp": ("lam",),
    "gaussian": ("sigma",),
    "hermite": ("n",),
    "delta_approx": ("sigma",),
    "plane_wave": ("eta",),
    "lacunary": ("r", "levels"),
    "file": ("path",),
}

_KIND_DEFAULTS = {
    "chirp": {"lam": 1.0},
    "gaussian": {"sigma": 1.0},
    "hermite": {"n": 0},
    "delta_approx": {"sigma": 0.05},
    "plane_wave": {"eta": 0.0},
    "lacunary": {"r": 1.0, "levels": 8},
}


class GridSpec1D(BaseModel):
    """Uniform grid on [-L, L) with N points (N a power of two, N >= 8)."""
    model_config = ConfigDict(frozen=True)

    L: float = Field(gt=0, allow_inf_nan=False)
    N: int

    @field_validator("N")
    @classmethod
    def _power_of_two(cls, value: int) -> int:
        if value < 8 or value & (value - 1):
            raise ValueError(f"N must be a power of two >= 8, got {value}")
        return value

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.N

    @property
    def nyquist(self) -> float:
        """Band limit pi/h."""
        return math.pi / self.h

    @property
    def dxi(self) -> float:
        """Dual grid spacing pi/L."""
        return math.pi / self.L

    @property
    def x(self) -> np.ndarray:
        return -self.L + self.h * np.arange(self.N)

    @property
    def xi(self) -> np.ndarray:
        return -self.nyquist + self.dxi * np.arange(self.N)


class SignalSpec(BaseModel):
    """A named test signal; also parses shorthands such as "chirp(1)"."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: SignalKind
    lam: Optional[float] = Field(default=None, allow_inf_nan=False)
    sigma: Optional[float] = None
    n: Optional[int] = None
    eta: Optional[float] = None
    r: Optional[float] = None
    levels: Optional[int] = None
    path: Optional[str] = None
    taper: Optional[Tuple[float, float]] = None

    @model_validator(mode="before")
    @classmethod
    def _expand(cls, data: Any) -> Any:
        if isinstance(data, str):
            data = _parse_shorthand(data)
        if isinstance(data, dict) and data.get("kind") in _KIND_DEFAULTS:
            data = {**_KIND_DEFAULTS[data["kind"]], **{k: v for k, v in data.items() if v is not None}}
        return data

    @model_validator(mode="after")
    def _check(self) -> "SignalSpec":
        if self.sigma is not None and not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.n is not None and self.n < 0:
            raise ValueError(f"hermite index must be nonnegative, got {self.n}")
        if self.kind == "lacunary" and (self.levels is None or self.levels < 1):
            raise ValueError("lacunary signals need levels >= 1")
        if self.kind == "file" and not self.path:
            raise ValueError("file signals need a path")
        if self.taper is not None:
            inner, outer = self.taper
            if not 0.0 <= inner < outer <= 1.0:
                raise ValueError(f"taper must satisfy 0 <= inner < outer <= 1, got {self.taper}")
        return self

    @property
    def label(self) -> str:
        params = [getattr(self, name) for name in _SHORTHAND_PARAMS[self.kind]]
        text = self.kind if not params else f"{self.kind}({', '.join(str(p) for p in params)})"
        if self.taper is not None:
            text += f" taper={self.taper[0]}-{self.taper[1]}"
        return text


def _parse_shorthand(text: str) -> dict:
    match = _SHORTHAND_RE.match(text)
    if not match or match.group(1) not in _SHORTHAND_PARAMS:
        raise ValueError(f"unrecognised signal shorthand: {text!r}")
    kind, arg_text = match.group(1), match.group(2)
    names = _SHORTHAND_PARAMS[kind]
    args = [a.strip() for a in arg_text.split(",")] if arg_text and arg_text.strip() else []
    if len(args) > len(names):
        raise ValueError(f"{kind} takes at most {len(names)} parameter(s), got {text!r}")
    data: dict = {"kind": kind}
    for name, arg in zip(names, args):
        if name == "path":
            data[name] = arg
        elif name in ("n", "levels"):
            data[name] = int(arg)
        else:
            data[name] = float(arg)
    return data


@dataclass(frozen=True)
class SampledField:
    """Complex samples of a function on a grid, in space or frequency."""
    grid: GridSpec1D
    values: np.ndarray
    domain_tag: DomainTag = "space"

    def __post_init__(self):
        values = np.array(self.values, dtype=np.complex128)
        if values.shape != (self.grid.N,):
            raise ValueError(f"expected {self.grid.N} samples, got shape {values.shape}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def replace(self, values: np.ndarray) -> "SampledField":
        return SampledField(self.grid, values, self.domain_tag)

    def l2_norm(self) -> float:
        """Discrete L2 norm with the quadrature weight of the domain."""
        weight = self.grid.h if self.domain_tag == "space" else self.grid.dxi / (2.0 * math.pi)
        return float(np.sqrt(weight * np.sum(np.abs(self.values) ** 2)))

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))


def _alternating(count: int) -> np.ndarray:
    return np.where(np.arange(count) % 2 == 0, 1.0, -1.0)


def forward_transform(f: SampledField) -> SampledField:
    """Samples of f^ on the dual grid, h * sum_j e^{-i x_j xi_m} f(x_j)."""
    if f.domain_tag != "space":
        raise DomainTagError("forward_transform expects a space-domain field")
    signs = _alternating(f.grid.N)
    values = f.grid.h * signs * sp_fft.fft(signs * f.values)
    return SampledField(f.grid, values, "frequency")


def inverse_transform(f_hat: SampledField) -> SampledField:
    """Exact discrete inverse of forward_transform."""
    if f_hat.domain_tag != "frequency":
        raise DomainTagError("inverse_transform expects a frequency-domain field")
    signs = _alternating(f_hat.grid.N)
    values = signs * sp_fft.ifft(signs * f_hat.values) / f_hat.grid.h
    return SampledField(f_hat.grid, values, "space")


def fourier_multiply(f: SampledField, multiplier: np.ndarray) -> SampledField:
    """Apply m(D) given the multiplier sampled on the dual grid."""
    f_hat = forward_transform(f)
    return inverse_transform(f_hat.replace(f_hat.values * multiplier))


def smooth_step(t: Union[float, np.ndarray]) -> np.ndarray:
    """C-infinity step g(t) = B(t) / (B(t) + B(1-t)), B(t) = exp(-1/t) for t > 0."""
    t = np.asarray(t, dtype=float)
    return _edge(t) / (_edge(t) + _edge(1.0 - t))


def _edge(t: np.ndarray) -> np.ndarray:
    safe = np.where(t > 0, t, 1.0)
    return np.where(t > 0, np.exp(-1.0 / safe), 0.0)


def plateau(x: np.ndarray, inner: float, outer: float) -> np.ndarray:
    """1 for |x| <= inner, 0 for |x| >= outer, smooth in between."""
    return smooth_step((outer - np.abs(x)) / (outer - inner))


def hermite_functions(x: np.ndarray, n_max: int) -> np.ndarray:
    """
    L2-normalized Hermite functions h_0..h_{n_max} sampled at x.

    Uses the three-term recurrence on mantissas with a per-point running
    exponent, so high orders stay accurate where exp(-x^2/2) underflows.

    Returns:
        Array of shape (n_max + 1, len(x)).
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((n_max + 1, x.size))
    log_scale = -0.5 * x ** 2
    prev = np.zeros_like(x)
    cur = np.full_like(x, math.pi ** -0.25)
    out[0] = cur * np.exp(log_scale)
    rescale = 1e100
    for n in range(n_max):
        nxt = math.sqrt(2.0 / (n + 1)) * x * cur - math.sqrt(n / (n + 1)) * prev
        prev, cur = cur, nxt
        big = np.abs(cur) > rescale
        if big.any():
            cur[big] /= rescale
            prev[big] /= rescale
            log_scale[big] += math.log(rescale)
        out[n + 1] = cur * np.exp(log_scale)
    return out


def synthesize(spec: SignalSpec, grid: GridSpec1D) -> SampledField:
    """
    Exact samples of a named signal on the grid.

    Raises:
        NyquistViolation: chirp, plane wave or lacunary content beyond
            CHIRP_NYQUIST_FRACTION of the band.
        SignalError: hermite index above N/4.
        FileFormatError: malformed or mismatched signal file.
    """
    x = grid.x
    limit = settings.CHIRP_NYQUIST_FRACTION * grid.nyquist
    kind = spec.kind

    if kind == "constant":
        values = np.ones(grid.N, dtype=np.complex128)
    elif kind == "chirp":
        top = abs(spec.lam) * grid.L
        if top > limit:
            raise NyquistViolation(
                f"chirp slope {spec.lam} reaches frequency {top:.3f} > {limit:.3f} on L={grid.L}, N={grid.N}"
            )
        values = np.exp(0.5j * spec.lam * x ** 2)
    elif kind == "gaussian":
        values = np.exp(-x ** 2 / (2.0 * spec.sigma ** 2)).astype(np.complex128)
    elif kind == "delta_approx":
        if spec.sigma < 2.0 * grid.h:
            logger.warning(f"delta_approx width {spec.sigma} is under two grid spacings (h={grid.h:.4g})")
        norm = 1.0 / (spec.sigma * math.sqrt(2.0 * math.pi))
        values = (norm * np.exp(-x ** 2 / (2.0 * spec.sigma ** 2))).astype(np.complex128)
    elif kind == "hermite":
        if spec.n > grid.N // 4:
            raise SignalError(f"hermite index {spec.n} exceeds N/4 = {grid.N // 4}")
        values = hermite_functions(x, spec.n)[spec.n].astype(np.complex128)
    elif kind == "plane_wave":
        if abs(spec.eta) > limit:
            raise NyquistViolation(f"plane wave frequency {spec.eta} exceeds {limit:.3f}")
        values = np.exp(1j * spec.eta * x)
    elif kind == "lacunary":
        if 2.0 ** spec.levels > limit:
            raise NyquistViolation(f"lacunary octave 2^{spec.levels} exceeds {limit:.3f}")
        octaves = np.arange(1, spec.levels + 1)
        terms = 2.0 ** (-spec.r * octaves)[:, None] * np.exp(1j * (2.0 ** octaves)[:, None] * x[None, :])
        values = terms.sum(axis=0) * np.exp(-0.5 * x ** 2)
    else:
        return read_signal_csv(Path(spec.path), grid)

    if spec.taper is not None:
        values = values * plateau(x, spec.taper[0] * grid.L, spec.taper[1] * grid.L)
    return SampledField(grid, values)


def read_signal_csv(path: Path, grid: GridSpec1D) -> SampledField:
    """Read a two-column (real, imag) CSV whose header names L and N."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            header = f.readline()
    except OSError as e:
        raise FileFormatError(f"cannot read signal file {path}: {e}") from e

    match = _HEADER_RE.search(header)
    if not match:
        raise FileFormatError(f"{path}: header must name L and N, got {header.strip()!r}")
    file_L, file_N = float(match.group(1)), int(match.group(2))
    if file_N != grid.N or not math.isclose(file_L, grid.L, rel_tol=1e-12):
        raise FileFormatError(
            f"{path}: file grid L={file_L}, N={file_N} does not match L={grid.L}, N={grid.N}"
        )

    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except ValueError as e:
        raise FileFormatError(f"{path}: {e}") from e
    if data.shape != (grid.N, 2):
        raise FileFormatError(f"{path}: expected {grid.N} rows of (real, imag), got shape {data.shape}")
    return SampledField(grid, data[:, 0] + 1j * data[:, 1])


def write_signal_csv(field: SampledField, path: Path) -> Path:
    """Write a space-domain field in the signal CSV format."""
    if field.domain_tag != "space":
        raise DomainTagError("only space-domain fields are written as signal CSV")
    path = Path(path)
    np.savetxt(
        path,
        np.column_stack([field.values.real, field.values.imag]),
        delimiter=",",
        header=f"L={field.grid.L!r},N={field.grid.N}",
        comments="",
        fmt="%.17g",
    )
    return path
