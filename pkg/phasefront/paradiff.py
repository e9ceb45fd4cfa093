#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Paradifferential rewriting of a nonlinearity.

With u_k = Phi_k(x, D)u and d_k = phi_{k+1}(x, D)u we have u_{k+1} = u_k + d_k,
so F(u_K) telescopes into

    F(u_0) + sum_{k<K} m_k d_k + mt_k conj(d_k),
    m_k  = int_0^1 dF/dz    (u_k + t d_k) dt,
    mt_k = int_0^1 dF/dzbar (u_k + t d_k) dt.

M(x, xi) = sum m_k(x) phi_{k+1}(x, xi) is then split by low-passing every
coefficient at 2^{k delta}: M = M_sharp + M_flat.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel

from phasefront.config import settings
from phasefront.errors import StencilOverrun
from phasefront.field_grid import GridSpec1D, SampledField, fourier_multiply
from phasefront.nonlinearity import Nonlinearity
from phasefront.qsobolev import DyadicPartition, GridSymbol, PhasePartition, kn_quantize_radial, qs_norm
from phasefront.wavefront import WavefrontParams, circular_distance, detect_wavefront

logger = logging.getLogger(__name__)


def telescope_levels(grid: GridSpec1D) -> int:
    """Largest K such that every phi_{k+1}, k < K, meets the band (2^k < pi/h)."""
    K = 0
    while 2.0 ** K < grid.nyquist:
        K += 1
    return K


@dataclass(frozen=True)
class TelescopeCoefficients:
    """Coefficient families m_k, mt_k (values on the x grid) and the pieces they act on."""
    grid: GridSpec1D
    levels: int
    base: SampledField
    truncated: SampledField
    pieces: List[SampledField]
    m: List[np.ndarray]
    mt: List[np.ndarray]

    def reconstruct(self, F: Nonlinearity) -> SampledField:
        """F(u_0) + sum m_k d_k + mt_k conj(d_k), which equals F(u_K) up to quadrature."""
        total = F(self.base.values).astype(np.complex128)
        for m_k, mt_k, d_k in zip(self.m, self.mt, self.pieces):
            total = total + m_k * d_k.values + mt_k * np.conj(d_k.values)
        return SampledField(self.grid, total)


def _gauss_legendre(nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    t, w = np.polynomial.legendre.leggauss(nodes)
    return 0.5 * (t + 1.0), 0.5 * w


def telescope_coeffs(u: SampledField, F: Nonlinearity, part: Optional[PhasePartition] = None,
                     K: Optional[int] = None, nodes: Optional[int] = None) -> TelescopeCoefficients:
    """
    m_k and mt_k for k < K by Gauss-Legendre quadrature in t.

    Args:
        u: Field to localize.
        F: Nonlinearity with Wirtinger derivatives.
        part: Phase-space partition (default PhasePartition(K + 1)).
        K: Truncation level (default telescope_levels(u.grid)).
        nodes: Quadrature nodes (default QUADRATURE_NODES).
    """
    K = telescope_levels(u.grid) if K is None else K
    if K < 1:
        raise ValueError(f"truncation level must be >= 1, got {K}")
    if K > telescope_levels(u.grid):
        logger.warning(f"truncation level {K} passes the band of L={u.grid.L}, N={u.grid.N}")
    part = part or PhasePartition(K + 1)
    t, w = _gauss_legendre(settings.QUADRATURE_NODES if nodes is None else nodes)

    profiles = [part.cumulative_profile(0)] + [part.profile(k + 1) for k in range(K)]
    localized = kn_quantize_radial(profiles, u)
    base, pieces = localized[0], localized[1:]

    m: List[np.ndarray] = []
    mt: List[np.ndarray] = []
    current = base.values
    for d_k in pieces:
        path = current[None, :] + t[:, None] * d_k.values[None, :]
        m.append(w @ F.dz(path))
        mt.append(w @ F.dzbar(path))
        current = current + d_k.values
    truncated = SampledField(u.grid, current)
    logger.debug(f"telescoped {F.name} over {K} levels with {len(t)} quadrature nodes")
    return TelescopeCoefficients(u.grid, K, base, truncated, pieces, m, mt)


def assemble_symbol(coeffs: TelescopeCoefficients, part: Optional[PhasePartition] = None,
                    K: Optional[int] = None, family: Optional[Sequence[np.ndarray]] = None) -> GridSymbol:
    """
    sum_{k<K} c_k(x) phi_{k+1}(x, xi) on the field grid, with c = coeffs.m
    unless another coefficient family is given.
    """
    K = coeffs.levels if K is None else min(K, coeffs.levels)
    part = part or PhasePartition(K + 1)
    family = coeffs.m if family is None else family
    grid = coeffs.grid
    X, XI = np.meshgrid(grid.x, grid.xi, indexing="ij")
    R = np.hypot(X, XI)
    values = np.zeros((grid.N, grid.N), dtype=np.complex128)
    for k in range(K):
        values += family[k][:, None] * part.profile(k + 1)(R)
    return GridSymbol(grid, values, {"origin": "paradiff", "levels": K})


def smooth_coefficients(family: Sequence[np.ndarray], grid: GridSpec1D, delta: float,
                        dyadic: Optional[DyadicPartition] = None) -> Tuple[List[np.ndarray], List[np.ndarray]]:
    """Split every c_k into psi_0(2^{-k delta} D) c_k and the remainder."""
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    dyadic = dyadic or DyadicPartition.for_grid(grid)
    sharp: List[np.ndarray] = []
    flat: List[np.ndarray] = []
    for k, c_k in enumerate(family):
        low = fourier_multiply(SampledField(grid, c_k), dyadic.lowpass(grid.xi, 2.0 ** (k * delta))).values
        sharp.append(low)
        flat.append(c_k - low)
    return sharp, flat


def symbol_split(coeffs: TelescopeCoefficients, part: Optional[PhasePartition] = None,
                 delta: float = 0.7, dyadic: Optional[DyadicPartition] = None) -> Tuple[GridSymbol, GridSymbol]:
    """(M_sharp, M_flat) with M_sharp + M_flat = M at every node; dyadic supplies the low-pass psi_0."""
    sharp, flat = smooth_coefficients(coeffs.m, coeffs.grid, delta, dyadic)
    M_sharp = assemble_symbol(coeffs, part, family=sharp)
    M_flat = assemble_symbol(coeffs, part, family=flat)
    M_sharp.meta["delta"] = delta
    M_flat.meta["delta"] = delta
    return M_sharp, M_flat


@dataclass(frozen=True)
class ParadiffDecomposition:
    """Telescoped coefficients plus their smoothing split at parameter delta."""
    coeffs: TelescopeCoefficients
    nonlinearity: Nonlinearity
    delta: float
    m_sharp: List[np.ndarray]
    m_flat: List[np.ndarray]
    mt_sharp: List[np.ndarray]
    mt_flat: List[np.ndarray]
    meta: Dict[str, object] = field(default_factory=dict)

    @property
    def levels(self) -> int:
        return self.coeffs.levels

    def apply(self, sharp: bool) -> SampledField:
        """M_sharp(x, D)u (plus its conj part) when sharp, else the flat counterpart."""
        m = self.m_sharp if sharp else self.m_flat
        mt = self.mt_sharp if sharp else self.mt_flat
        total = np.zeros(self.coeffs.grid.N, dtype=np.complex128)
        for m_k, mt_k, d_k in zip(m, mt, self.coeffs.pieces):
            total += m_k * d_k.values + mt_k * np.conj(d_k.values)
        return SampledField(self.coeffs.grid, total)

    def flat_norms(self) -> List[float]:
        return [float(np.max(np.abs(c))) for c in self.m_flat]

    def telescoping_residual(self, u: SampledField) -> float:
        """||F(u) - reconstruction||_{L2}."""
        Fu = u.replace(self.nonlinearity(u.values))
        rebuilt = self.coeffs.reconstruct(self.nonlinearity)
        return Fu.replace(Fu.values - rebuilt.values).l2_norm()

    def truncation_error(self, u: SampledField) -> float:
        """||F(u) - F(u_K)||_{L2}."""
        F = self.nonlinearity
        return u.replace(F(u.values) - F(self.coeffs.truncated.values)).l2_norm()

    def summary(self) -> Dict[str, object]:
        return {
            "levels": self.levels,
            "delta": self.delta,
            "nonlinearity": self.nonlinearity.name,
            "m_sup": [float(np.max(np.abs(c))) for c in self.coeffs.m],
            "m_sharp_sup": [float(np.max(np.abs(c))) for c in self.m_sharp],
            "m_flat_sup": self.flat_norms(),
            "flat_decay_slope": flat_decay_slope(self),
            **self.meta,
        }


def decompose(u: SampledField, F: Nonlinearity, part: Optional[PhasePartition] = None,
              K: Optional[int] = None, delta: float = 0.7,
              dyadic: Optional[DyadicPartition] = None) -> ParadiffDecomposition:
    """Telescope F at u and split both coefficient families at delta."""
    coeffs = telescope_coeffs(u, F, part, K)
    m_sharp, m_flat = smooth_coefficients(coeffs.m, coeffs.grid, delta, dyadic)
    mt_sharp, mt_flat = smooth_coefficients(coeffs.mt, coeffs.grid, delta, dyadic)
    return ParadiffDecomposition(coeffs, F, delta, m_sharp, m_flat, mt_sharp, mt_flat)


def flat_decay_slope(decomposition: ParadiffDecomposition, start: int = 1) -> Optional[float]:
    """Least-squares slope of log2 ||m_flat_k||_inf against k (zero levels left out)."""
    norms = decomposition.flat_norms()
    ks = [k for k in range(start, len(norms)) if norms[k] > 0.0]
    if len(ks) < 2:
        return None
    return float(np.polyfit(ks, np.log2([norms[k] for k in ks]), 1)[0])


# ---------------------------------------------------------------------------
# Probes
# ---------------------------------------------------------------------------

def _difference(values: np.ndarray, order: int, spacing: float, axis: int) -> np.ndarray:
    if order == 0:
        return values
    lo = [slice(None)] * 2
    mid = [slice(None)] * 2
    hi = [slice(None)] * 2
    lo[axis], mid[axis], hi[axis] = slice(None, -2), slice(1, -1), slice(2, None)
    if order == 1:
        return (values[tuple(hi)] - values[tuple(lo)]) / (2.0 * spacing)
    return (values[tuple(hi)] - 2.0 * values[tuple(mid)] + values[tuple(lo)]) / spacing ** 2


class SeminormProbe(BaseModel):
    """Weighted derivative sups per dyadic annulus in |z| and their growth fit."""
    alpha: int
    beta: int
    order: float
    annuli: List[Tuple[float, float]]
    sups: List[Optional[float]]
    slope: Optional[float]
    fit_levels: Optional[Tuple[int, int]] = None


def seminorm_probe(M: GridSymbol, alpha: int = 0, beta: int = 0,
                   m: float = 0.0, rho: float = 1.0, delta: float = 0.0,
                   fit_levels: Optional[Tuple[int, int]] = None) -> SeminormProbe:
    """
    sup |d_x^beta d_xi^alpha M| (1 + |x| + |xi|)^{-(m - rho alpha + delta beta)}
    over the unit ball and the annuli [2^j, 2^{j+1}), by central differences.

    Annuli without nodes report None; zero annuli report 0. Neither enters
    the log2 growth fit against j, which is further restricted to
    fit_levels = (j_lo, j_hi) inclusive when given.

    Raises:
        StencilOverrun: a derivative order above 2, or a grid too small for the stencil.
    """
    for name, order in (("alpha", alpha), ("beta", beta)):
        if order < 0 or order > 2:
            raise StencilOverrun(f"{name} = {order}: central stencils cover orders 0..2 only")
    grid = M.grid
    if grid.N < 5:
        raise StencilOverrun(f"grid with N={grid.N} is too small for a 3-point stencil")

    values = _difference(M.values, beta, grid.h, axis=0)
    values = _difference(values, alpha, grid.dxi, axis=1)
    x = grid.x[1:-1] if beta else grid.x
    xi = grid.xi[1:-1] if alpha else grid.xi
    X, XI = np.meshgrid(x, xi, indexing="ij")
    order = m - rho * alpha + delta * beta
    weighted = np.abs(values) * (1.0 + np.abs(X) + np.abs(XI)) ** (-order)
    R = np.hypot(X, XI)

    edges = [(0.0, 1.0)]
    j = 0
    while 2.0 ** j <= R.max():
        edges.append((2.0 ** j, 2.0 ** (j + 1)))
        j += 1
    sups: List[Optional[float]] = []
    fit_j: List[int] = []
    fit_v: List[float] = []
    for idx, (lo, hi) in enumerate(edges):
        mask = (R >= lo) & (R < hi)
        if not mask.any():
            sups.append(None)
            continue
        sup = float(weighted[mask].max())
        sups.append(sup)
        in_fit = fit_levels is None or fit_levels[0] <= idx - 1 <= fit_levels[1]
        if idx > 0 and sup > 0.0 and in_fit:
            fit_j.append(idx - 1)
            fit_v.append(math.log2(sup))
    slope = float(np.polyfit(fit_j, fit_v, 1)[0]) if len(fit_j) >= 2 else None
    return SeminormProbe(alpha=alpha, beta=beta, order=order, annuli=edges, sups=sups,
                         fit_levels=fit_levels, slope=slope)


def moser_ratio(u: SampledField, F: Nonlinearity, s: float) -> float:
    """||F(u)||_{Q^s} / ||u||_{Q^s}."""
    return qs_norm(u.replace(F(u.values)), s) / qs_norm(u, s)


def random_bandlimited(grid: GridSpec1D, rng: np.random.Generator, band: float = 8.0,
                       terms: int = 12) -> SampledField:
    """Random sum of plane waves with |frequency| <= band under a unit Gaussian window."""
    freqs = rng.uniform(-band, band, terms)
    amps = rng.standard_normal(terms) + 1j * rng.standard_normal(terms)
    waves = amps[:, None] * np.exp(1j * freqs[:, None] * grid.x[None, :])
    return SampledField(grid, waves.sum(axis=0) / math.sqrt(terms) * np.exp(-0.5 * grid.x ** 2))


def moser_family(grid: GridSpec1D, F: Nonlinearity, s: float, seed: int,
                 count: int = 8, band: float = 8.0) -> List[Dict[str, float]]:
    """moser_ratio and sup norm for a seeded family of random band-limited fields."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        u = random_bandlimited(grid, rng, band)
        out.append({"sup_norm": u.sup_norm(), "ratio": moser_ratio(u, F, s)})
    return out


def flat_operator_ratio(decomposition: ParadiffDecomposition, u: SampledField, s: float,
                        eps: float, r: float) -> float:
    """||M_flat(x, D)u||_{Q^s} / ||u||_{Q^{s + eps - delta r}}."""
    flat = decomposition.apply(sharp=False)
    return qs_norm(flat, s) / qs_norm(u, s + eps - decomposition.delta * r)


class CompositionReport(BaseModel):
    """Whether F preserves Q^sigma regularity of u at a direction."""
    direction: float
    s: float
    sigma: float
    nonlinearity: str
    in_theorem_range: bool
    u_qs_norm: float
    u_in_qs: bool
    precondition_met: bool
    u_regular: bool
    Fu_regular: bool
    preserved: bool
    consistent: bool
    u_singular: List[float]
    Fu_singular: List[float]
    anomalous_directions: List[float]


def in_composition_range(s: float, sigma: float, d: int = 1) -> bool:
    """d/2 < s <= sigma < 2s - d/2."""
    return d / 2.0 < s <= sigma < 2.0 * s - d / 2.0


def microlocal_composition_check(u: SampledField, F: Nonlinearity, sigma: float, theta: float,
                                 params: Optional[WavefrontParams] = None,
                                 s: Optional[float] = None) -> CompositionReport:
    """
    Detect wave fronts of u and F(u) with Q^s and Q^sigma scores enabled and
    compare them at theta.

    u counts as globally Q^s when no bin of u is Q^s-singular. The
    precondition is u regular at theta, u globally Q^s and (s, sigma) in
    range; consistent is False only when the precondition holds and F(u)
    still loses regularity at theta. Directions singular for F(u) and more
    than one bin away from every singular direction of u are anomalous.

    Args:
        s: Global order of u (default sigma).
    """
    s = sigma if s is None else s
    base = params or WavefrontParams()
    params = base.model_copy(update={"s_values": sorted({s, sigma})})
    sigma_key, s_key = f"{sigma:g}", f"{s:g}"
    report_u = detect_wavefront(u, params)
    report_Fu = detect_wavefront(u.replace(F(u.values)), params)
    index = params.bin_index(theta)

    def regular(report) -> bool:
        b = report.angular_bins[index]
        return not b.singular and not b.sobolev_singular.get(sigma_key, False)

    u_regular = regular(report_u)
    Fu_regular = regular(report_Fu)
    u_in_qs = not any(b.sobolev_singular.get(s_key, False) for b in report_u.angular_bins)
    in_range = in_composition_range(s, sigma)
    precondition = u_regular and u_in_qs and in_range
    preserved = (not u_regular) or Fu_regular
    u_dirs = np.asarray(report_u.singular_directions, dtype=float)
    tol = params.bin_width + 1e-9
    anomalous = [
        float(d) for d in report_Fu.singular_directions
        if u_dirs.size == 0 or circular_distance(u_dirs, d).min() > tol
    ]
    report = CompositionReport(
        direction=float(np.mod(theta, 2.0 * math.pi)),
        s=s,
        sigma=sigma,
        nonlinearity=F.name,
        in_theorem_range=in_range,
        u_qs_norm=qs_norm(u, s),
        u_in_qs=u_in_qs,
        precondition_met=precondition,
        u_regular=u_regular,
        Fu_regular=Fu_regular,
        preserved=preserved,
        consistent=(not precondition) or preserved,
        u_singular=report_u.singular_directions,
        Fu_singular=report_Fu.singular_directions,
        anomalous_directions=anomalous,
    )
    logger.info(
        f"Composition check at {theta:.4f} (s={s:g}, sigma={sigma:g}, in range={in_range}): "
        f"u regular={u_regular}, u in Q^s={u_in_qs}, F(u) regular={Fu_regular}, {len(anomalous)} anomalous bins"
    )
    return report
