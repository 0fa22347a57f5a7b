"""Exact sampling of fractional Brownian motion on uniform grids.

The covariance of fBm with Hurst index H is

    R_H(s, t) = (|s|^{2H} + |t|^{2H} - |t - s|^{2H}) / 2,

and its increments on a uniform grid form stationary fractional Gaussian
noise (fGN). Paths are drawn either by Davies-Harte circulant embedding of
the fGN covariance (O(n log n), exact in distribution) or by dense Cholesky
factorization (O(n^3), used as a small-n oracle and fallback).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import toeplitz

from .errors import CholeskyFailed, CirculantEmbeddingFailed, DomainError
from .seeding import make_rng

LABEL_FBM = "fbm"
LABEL_FOU = "fou"

METHOD_CIRCULANT = "circulant"
METHOD_CHOLESKY = "cholesky"

#: eigenvalues of the circulant embedding below -EIG_TOL * max(eig) are an
#: error; values in [-EIG_TOL * max(eig), 0) are clipped to zero.
EIG_TOL = 1e-9


def require_hurst(h: float) -> float:
    """Validate 0 < h < 1 and return h as float."""
    h = float(h)
    if not 0.0 < h < 1.0:
        raise DomainError(f"Hurst parameter must lie in (0, 1), got {h}")
    return h


def require_rough_hurst(h: float) -> float:
    """Validate 1/2 < h < 1 (long-memory regime) and return h as float."""
    h = require_hurst(h)
    if h <= 0.5:
        raise DomainError(f"operation requires 1/2 < h < 1, got {h}")
    return h


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_k = k * (t_max / n_steps), k = 0..n_steps."""

    t_max: float
    n_steps: int

    def __post_init__(self) -> None:
        if self.t_max <= 0:
            raise ValueError(f"t_max must be > 0, got {self.t_max}")
        if self.n_steps < 1:
            raise ValueError(f"n_steps must be >= 1, got {self.n_steps}")

    @property
    def delta(self) -> float:
        return self.t_max / self.n_steps

    def times(self) -> np.ndarray:
        """Grid points, starting exactly at 0."""
        return np.arange(self.n_steps + 1) * self.delta


@dataclass
class SamplePath:
    """Process values on a uniform grid.

    `hurst` and `seed` are optional provenance carried along by the samplers
    so downstream consumers can check preconditions (e.g. the Ito estimator
    only applies to paths simulated at h = 1/2).
    """

    grid: TimeGrid
    values: np.ndarray
    label: str
    hurst: float | None = None
    seed: int | None = None

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n_steps + 1,):
            raise ValueError(
                f"values must have length n_steps + 1 = {self.grid.n_steps + 1}, "
                f"got shape {self.values.shape}"
            )
        if self.label not in (LABEL_FBM, LABEL_FOU):
            raise ValueError(f"label must be '{LABEL_FBM}' or '{LABEL_FOU}', got {self.label!r}")


def fbm_covariance(s, t, h: float):
    """Covariance R_H(s, t) = (|s|^{2H} + |t|^{2H} - |t-s|^{2H}) / 2.

    Valid for all real s, t; accepts scalars or arrays broadcast together.
    """
    h = require_hurst(h)
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    two_h = 2.0 * h
    out = 0.5 * (np.abs(t) ** two_h + np.abs(s) ** two_h - np.abs(t - s) ** two_h)
    return out if out.ndim else float(out)


def fgn_autocovariance(lag_k: int, delta: float, h: float):
    """Autocovariance of unit-step fGN increments at lag k on spacing delta.

    Cov(B_{(k+1)d} - B_{kd}, B_d - B_0)
        = d^{2H} * (|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H}) / 2
    """
    h = require_hurst(h)
    if delta <= 0:
        raise ValueError(f"delta must be > 0, got {delta}")
    k = np.abs(np.asarray(lag_k, dtype=float))
    two_h = 2.0 * h
    out = 0.5 * delta**two_h * (
        np.abs(k + 1) ** two_h - 2.0 * k**two_h + np.abs(k - 1) ** two_h
    )
    return out if out.ndim else float(out)


def circulant_size(n_steps: int) -> int:
    """Smallest power of two >= 2 * n_steps."""
    return 1 << int(2 * n_steps - 1).bit_length()


@lru_cache(maxsize=32)
def _circulant_sqrt_eigenvalues(n_steps: int, delta: float, h: float) -> np.ndarray:
    """sqrt(M * eigenvalues) of the circulant embedding of the fGN covariance.

    The embedding of a length-M/2 fGN autocovariance sequence is nonnegative
    definite for every H in (0, 1); eigenvalues below -EIG_TOL * max indicate
    a bug and raise rather than being clipped silently.
    """
    m = circulant_size(n_steps)
    gamma = fgn_autocovariance(np.arange(m // 2 + 1), delta, h)
    row = np.concatenate([gamma, gamma[-2:0:-1]])
    eig = np.fft.fft(row).real
    eig_max = eig.max()
    tol = EIG_TOL * eig_max
    if eig.min() < -tol:
        raise CirculantEmbeddingFailed(
            f"circulant eigenvalue {eig.min():.3e} below -{tol:.3e} "
            f"(n_steps={n_steps}, delta={delta}, h={h})"
        )
    np.clip(eig, 0.0, None, out=eig)
    out = np.sqrt(m * eig)
    out.flags.writeable = False
    return out


def _fgn_circulant(n_steps: int, delta: float, h: float, rng: np.random.Generator) -> np.ndarray:
    """One exact fGN sample of length n_steps via circulant embedding.

    Draw order is fixed: a single standard-normal block z of length M feeds
    the Hermitian half-spectrum (z[0] and z[M/2] real, z[k] + i z[M/2+k]
    for the interior bins), so identical seeds give bit-identical output.
    """
    m = circulant_size(n_steps)
    sqrt_eig = _circulant_sqrt_eigenvalues(n_steps, delta, h)
    z = rng.standard_normal(m)
    half = m // 2
    spec = np.empty(half + 1, dtype=complex)
    spec[0] = sqrt_eig[0] * z[0]
    spec[half] = sqrt_eig[half] * z[half]
    interior = np.arange(1, half)
    spec[interior] = sqrt_eig[interior] / np.sqrt(2.0) * (z[interior] + 1j * z[half + interior])
    return np.fft.irfft(spec, n=m)[:n_steps]


def _fgn_cholesky(n_steps: int, delta: float, h: float, rng: np.random.Generator) -> np.ndarray:
    """One fGN sample via dense Cholesky of the Toeplitz increment covariance."""
    gamma = fgn_autocovariance(np.arange(n_steps), delta, h)
    cov = toeplitz(gamma)
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise CholeskyFailed(
            f"fGN covariance not numerically PSD (n_steps={n_steps}, delta={delta}, h={h})"
        ) from exc
    return chol @ rng.standard_normal(n_steps)


def generate_fbm(
    grid: TimeGrid,
    h: float,
    seed: int,
    method: str = METHOD_CIRCULANT,
) -> SamplePath:
    """Sample one fBm path on `grid` with B_0 = 0.

    The increments are a stationary Gaussian sequence with autocovariance
    exactly :func:`fgn_autocovariance` (up to floating error). Identical
    (seed, grid, h, method) inputs give bit-identical output.
    """
    h = require_hurst(h)
    rng = make_rng(seed)
    if method == METHOD_CIRCULANT:
        fgn = _fgn_circulant(grid.n_steps, grid.delta, h, rng)
    elif method == METHOD_CHOLESKY:
        fgn = _fgn_cholesky(grid.n_steps, grid.delta, h, rng)
    else:
        raise ValueError(f"unknown method {method!r}; use 'circulant' or 'cholesky'")
    values = np.empty(grid.n_steps + 1)
    values[0] = 0.0
    np.cumsum(fgn, out=values[1:])
    return SamplePath(grid=grid, values=values, label=LABEL_FBM, hurst=h, seed=seed)


def inner_product_h(
    phi: np.ndarray,
    psi: np.ndarray,
    grid: TimeGrid,
    h: float,
    tol: float = 1e-12,
) -> float:
    """Long-memory inner product of two step functions on `grid`.

    Computes a_H * int int phi_s psi_t |t-s|^{2H-2} ds dt with a_H = H(2H-1),
    for phi, psi piecewise constant on the grid cells (arrays of n_steps cell
    values). The weakly singular kernel is integrated in closed form on each
    cell pair,

        a_H * int_{[a,b]x[c,d]} |t-s|^{2H-2}
            = (|b-c|^{2H} + |a-d|^{2H} - |b-d|^{2H} - |a-c|^{2H}) / 2,

    so the result carries no quadrature error; `tol` is an upper bound on the
    error kept for interface stability.
    """
    h = require_rough_hurst(h)
    phi = np.asarray(phi, dtype=float)
    psi = np.asarray(psi, dtype=float)
    n = grid.n_steps
    if phi.shape != (n,) or psi.shape != (n,):
        raise ValueError(f"phi and psi must hold one value per grid cell ({n} cells)")
    edges = grid.times()
    two_h = 2.0 * h
    lo, hi = edges[:-1], edges[1:]
    pow_hi_lo = np.abs(hi[:, None] - lo[None, :]) ** two_h
    pow_lo_hi = np.abs(lo[:, None] - hi[None, :]) ** two_h
    pow_hi_hi = np.abs(hi[:, None] - hi[None, :]) ** two_h
    pow_lo_lo = np.abs(lo[:, None] - lo[None, :]) ** two_h
    weights = 0.5 * (pow_hi_lo + pow_lo_hi - pow_hi_hi - pow_lo_lo)
    return float(phi @ weights @ psi)


def indicator_cells(grid: TimeGrid, upto: float) -> np.ndarray:
    """Cell values of the indicator of [0, upto] for grid-aligned `upto`."""
    k = upto / grid.delta
    k_round = round(k)
    if abs(k - k_round) > 1e-9 or not 0 <= k_round <= grid.n_steps:
        raise ValueError(f"upto={upto} is not a grid point of {grid}")
    cells = np.zeros(grid.n_steps)
    cells[: int(k_round)] = 1.0
    return cells
