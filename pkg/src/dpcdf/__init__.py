"""Differentially private CDF estimation by Legendre projection of the eCDF."""

from ._kernels import BACKEND
from .core import (
    MomentVector,
    RawDataset,
    RngSeed,
    ScaledDataset,
    empirical_cdf_eval,
    empirical_moments,
    scale_to_unit,
)
from .estimators import (
    AqParams,
    CdfEstimate,
    HqParams,
    aq_estimate,
    cdf_from_moments,
    hq_estimate,
    isotonic_project,
    postprocess_cdf,
    pp_estimate,
)
from .federation import MomentState, SiteContribution, aggregate, site_contribution, update
from .legendre import basis_eval, beta_coeff, eval_series, legendre_eval, projection_coeffs
from .mechanisms import (
    NoiseCalibration,
    PrivacyParams,
    calibrate_analytic_gaussian,
    classical_gaussian_sigma,
    gaussian_perturb,
    moment_sensitivity,
)
from .metrics import DistributionSpec, emd, energy_distance, ks_distance, true_cdf
from .sampling import BoxplotSummary, boxplot_stats, resample_from_cdf, sample_distribution

__version__ = "0.1.0"
