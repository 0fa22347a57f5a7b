"""Fractional Ornstein-Uhlenbeck simulation, drift estimation, and verification.

The package samples fractional Brownian motion exactly (circulant embedding
or Cholesky), drives the mean-reverting process from those paths, computes
the drift estimators observable at each Hurst regime, evaluates every
closed-form asymptotic constant alongside an independent numerical oracle,
and orchestrates the Monte Carlo experiments that verify consistency and the
central limit behavior at desk scale. The `fou` console script exposes the
same functionality.
"""

from .asymptotics import (
    ConstantsTable,
    alpha_h,
    clt_variances,
    constants_table,
    correction_limit,
    d_h_closed,
    d_h_numeric,
    delta_h,
    f_h,
    finite_t_variance_bm,
    gamma_h,
    gamma_double_integral,
    sigma_h_squared,
)
from .errors import (
    CholeskyFailed,
    CirculantEmbeddingFailed,
    ConfigError,
    DegeneratePath,
    DomainError,
    FouestError,
    SchemeUnstable,
)
from .estimators import (
    EstimationResult,
    correction_integral,
    f_statistic,
    theta_hat_ito,
    theta_hat_oracle,
    theta_hat_prime,
    theta_tilde,
)
from .fbm import (
    SamplePath,
    TimeGrid,
    fbm_covariance,
    fgn_autocovariance,
    generate_fbm,
    indicator_cells,
    inner_product_h,
)
from .fou import (
    FouParams,
    fou_covariance,
    integrated_square,
    simulate_fou,
    stationary_second_moment,
)
from .harness import (
    ExperimentConfig,
    ExperimentReport,
    load_config,
    run_clt,
    run_consistency,
    run_ergodic,
    run_experiment,
    run_f_variance,
    write_report,
)
from .seeding import splitmix64, substream_seed

__version__ = "0.1.0"
