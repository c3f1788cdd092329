"""Finner-inequality tests for correlations in networks with independent sources."""

from . import boxworld, cube, hribbon, quantum, tightness
from .distributions import JointDistribution, check_bilocal_factorization, make_family
from .finner import certify_topology, check_function_form, check_probability_form, scan_pq_region, scan_r_line
from .network import Network, enumerate_extreme_fis, is_fis, maximize_fis_objective, validate_network

__all__ = [
    "JointDistribution",
    "Network",
    "certify_topology",
    "check_bilocal_factorization",
    "check_function_form",
    "check_probability_form",
    "enumerate_extreme_fis",
    "is_fis",
    "make_family",
    "maximize_fis_objective",
    "scan_pq_region",
    "scan_r_line",
    "validate_network",
    "boxworld",
    "cube",
    "hribbon",
    "quantum",
    "tightness",
]

__version__ = "0.1.0"
