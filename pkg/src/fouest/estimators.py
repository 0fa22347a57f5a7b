"""Drift estimators computed from a simulated path.

Three quantities are observable from a path alone: the moment-inversion
estimator (`theta_tilde`), the pathwise ratio X_T^2 / (2 int X^2 dt)
(`theta_hat_prime`, which tends to zero, a useful negative control), and for
h = 1/2 the forward-sum least-squares estimator (`theta_hat_ito`). For
h > 1/2 the least-squares estimator involves a divergence-type integral that
cannot be reconstructed from one observed path, so it is provided in oracle
form (`theta_hat_oracle`): the correction term containing the true drift is
evaluated analytically, which is exactly what simulation studies need.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma as sp_gamma
from scipy.special import gammainc

from .errors import DegeneratePath, DomainError
from .fbm import SamplePath, require_rough_hurst
from .fou import integrated_square

ESTIMATOR_TILDE = "tilde"
ESTIMATOR_HAT_ORACLE = "hat_oracle"
ESTIMATOR_HAT_PRIME = "hat_prime"
ESTIMATOR_HAT_ITO = "hat_ito"

ALL_ESTIMATORS = (
    ESTIMATOR_TILDE,
    ESTIMATOR_HAT_ORACLE,
    ESTIMATOR_HAT_PRIME,
    ESTIMATOR_HAT_ITO,
)

#: integrated squares below this are treated as zero to avoid overflowing
#: the reciprocal.
DEGENERATE_IS = 1e-300


@dataclass(frozen=True)
class EstimationResult:
    estimator: str
    estimate: float
    t_max: float
    h: float | None
    inputs_digest: str


def _digest(path: SamplePath, *extra) -> str:
    ident = (
        path.label,
        path.seed,
        path.hurst,
        path.grid.t_max,
        path.grid.n_steps,
    ) + extra
    return hashlib.blake2b(repr(ident).encode(), digest_size=8).hexdigest()


def _checked_integrated_square(path: SamplePath) -> float:
    value = integrated_square(path)
    if value < DEGENERATE_IS:
        raise DegeneratePath(f"integrated square {value} is numerically zero")
    return value


def theta_tilde(path: SamplePath, sigma: float, h: float) -> EstimationResult:
    """Moment-inversion estimator ((int X^2 dt) / (sigma^2 H Gamma(2H) T))^{-1/(2H)}.

    Inverts the ergodic limit of (1/T) int X^2 dt; computable from the path
    alone given sigma and h. Requires h > 1/2.
    """
    h = require_rough_hurst(h)
    if sigma <= 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    t_max = path.grid.t_max
    mean_square = _checked_integrated_square(path) / t_max
    ratio = mean_square / (sigma**2 * h * float(sp_gamma(2.0 * h)))
    estimate = ratio ** (-1.0 / (2.0 * h))
    return EstimationResult(
        estimator=ESTIMATOR_TILDE,
        estimate=float(estimate),
        t_max=t_max,
        h=h,
        inputs_digest=_digest(path, ESTIMATOR_TILDE, sigma, h),
    )


def correction_integral(theta: float, h: float, t_max: float, tol: float = 1e-10) -> float:
    """a_H * int_0^T int_0^t xi^{2H-2} e^{-theta xi} dxi dt, a_H = H(2H-1).

    Fubini reduces the double integral to a_H * int_0^T (T - xi) xi^{2H-2}
    e^{-theta xi} dxi, which is evaluated through the regularized lower
    incomplete gamma function P:

        a_H * [T theta^{1-2H} Gamma(2H-1) P(2H-1, theta T)
               - theta^{-2H} Gamma(2H) P(2H, theta T)].

    This is exact up to floating error, well below any requested `tol`.
    """
    h = require_rough_hurst(h)
    if theta <= 0:
        raise ValueError(f"theta must be > 0, got {theta}")
    if t_max < 0:
        raise ValueError(f"t_max must be >= 0, got {t_max}")
    if t_max == 0.0:
        return 0.0
    alpha = h * (2.0 * h - 1.0)
    a = 2.0 * h - 1.0
    x = theta * t_max
    first = t_max * theta ** (-a) * float(sp_gamma(a)) * float(gammainc(a, x))
    second = theta ** (-a - 1.0) * float(sp_gamma(a + 1.0)) * float(gammainc(a + 1.0, x))
    return alpha * (first - second)


def theta_hat_oracle(
    path: SamplePath,
    sigma: float,
    h: float,
    theta_true: float,
) -> EstimationResult:
    """Least-squares estimator in oracle form, valid in simulation studies.

    Returns -X_T^2 / (2 I) + sigma^2 * correction_integral(theta_true, h, T) / I
    with I = int X^2 dt. The correction term carries the true drift, so this
    is a theoretical object usable only when theta_true is known.
    """
    h = require_rough_hurst(h)
    t_max = path.grid.t_max
    squared = _checked_integrated_square(path)
    x_end = float(path.values[-1])
    estimate = (
        -x_end**2 / (2.0 * squared)
        + sigma**2 * correction_integral(theta_true, h, t_max) / squared
    )
    return EstimationResult(
        estimator=ESTIMATOR_HAT_ORACLE,
        estimate=float(estimate),
        t_max=t_max,
        h=h,
        inputs_digest=_digest(path, ESTIMATOR_HAT_ORACLE, sigma, h, theta_true),
    )


def theta_hat_prime(path: SamplePath) -> EstimationResult:
    """Pathwise ratio X_T^2 / (2 int X^2 dt); converges to zero, not theta."""
    squared = _checked_integrated_square(path)
    x_end = float(path.values[-1])
    return EstimationResult(
        estimator=ESTIMATOR_HAT_PRIME,
        estimate=x_end**2 / (2.0 * squared),
        t_max=path.grid.t_max,
        h=path.hurst,
        inputs_digest=_digest(path, ESTIMATOR_HAT_PRIME),
    )


def theta_hat_ito(path: SamplePath, h: float | None = None) -> EstimationResult:
    """Forward-sum least-squares estimator -sum X_k (X_{k+1}-X_k) / int X^2 dt.

    Forward Riemann sums approximate the Ito integral, so this estimator is
    only meaningful for paths driven at h = 1/2; for h > 1/2 the sums do not
    converge to the divergence-type integral and the call is rejected.
    """
    h_eff = h if h is not None else path.hurst
    if h_eff is not None and h_eff != 0.5:
        raise DomainError(f"theta_hat_ito requires h = 1/2, got h = {h_eff}")
    squared = _checked_integrated_square(path)
    x = path.values
    forward_sum = float(x[:-1] @ np.diff(x))
    return EstimationResult(
        estimator=ESTIMATOR_HAT_ITO,
        estimate=-forward_sum / squared,
        t_max=path.grid.t_max,
        h=h_eff,
        inputs_digest=_digest(path, ESTIMATOR_HAT_ITO),
    )


def f_statistic(path: SamplePath, theta_hat: float, theta_true: float) -> float:
    """Realized value of the normalized fluctuation statistic.

    The estimation error satisfies theta_hat - theta = -sqrt(T) F_T / I with
    I = int X^2 dt, so F_T = -(theta_hat - theta) * I / sqrt(T).
    """
    squared = integrated_square(path)
    t_max = path.grid.t_max
    return -(theta_hat - theta_true) * squared / math.sqrt(t_max)
