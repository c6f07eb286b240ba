"""
Exact output SINR/SNR distributions and high-SNR SER asymptotics for
dual-user macrodiversity MIMO with MMSE and ZF receivers.
"""
from .analysis.cdf_analytic import CdfEvaluator, mmse_cdf, outage_probability, zf_cdf
from .analysis.ser import asymptote, ser_mmse_laplace, ser_zf_laplace, theta_metric
from .core import db_to_linear, mpsk_params, validate_profile
from .schemas import PowerProfile, Receiver

__version__ = "0.1.0"

__all__ = [
    "CdfEvaluator",
    "PowerProfile",
    "Receiver",
    "asymptote",
    "db_to_linear",
    "mmse_cdf",
    "mpsk_params",
    "outage_probability",
    "ser_mmse_laplace",
    "ser_zf_laplace",
    "theta_metric",
    "validate_profile",
    "zf_cdf",
]
