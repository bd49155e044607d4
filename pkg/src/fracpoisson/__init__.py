"""Numerical toolkit for time-fractional Poisson equations driven by subordinators."""

__version__ = "0.1.0"

from .bernstein import BernsteinSpec, ScalingWitness, verify_weak_scaling  # noqa: E402
from .errors import (AccuracyError, BracketError, DomainError, FracPoissonError,  # noqa: E402
                     InversionError, NotSpecialError, UnsupportedOperation)
from .estimates import (EnvelopeSpec, H_ge1_diff, H_ge1_jump, H_le1, RatioReport,  # noqa: E402
                        envelope_diff, envelope_jump, fit_line, n_solver, q_split_I1_I2,
                        ratio_sweep)
from .kernels import HeatKernelSpec, ScaleFunction, VolumeFunction, m_solver  # noqa: E402
from .montecarlo import (SamplerConfig, empirical_cdf_distance, sample_inverse,  # noqa: E402
                         sample_stable, sample_stable_increment)
from .solutions import (SolutionField, WeightFunction, caputo_w_derivative,  # noqa: E402
                        conjugate_identity_residual, cumulative_identity_residual,
                        duhamel_solve, graded_grid, integrated_conjugate_residual, mass_p,
                        mass_q, p_fourier, p_kernel, pde_residual, q_fourier, q_kernel)
from .special import (inverse_stable_density, mittag_leffler, stable_cdf,  # noqa: E402
                      stable_density_g)
from .subordinator import DensityEval, EnvelopeRegime  # noqa: E402
