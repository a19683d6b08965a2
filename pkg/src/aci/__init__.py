"""Assisted common information and monotone regions."""
from .errors import ACIError
from .kernels import BACKEND
from .probdist import (
    AuxChannel,
    JointPMF,
    KTriple,
    builtin,
    extend,
    info_summary,
    k_triple,
    load_pmf,
    parse_dist_spec,
    tensor,
    triple_of,
)
from .gkops import gk_decompose, ww_monotones
from .auxopt import OptOptions, ScalarWeights, grid_oracle, minimize_scalarized, sweep
from .region import KRegionApprox, axis_intercepts, contains, region_for, slice_region, wyner_gap
from .cryptobound import is_trivial, k_bound, ww_bound
from .gaussianci import GaussianPair, gaussian_curve
from .protosim import load_protocol, monotonicity_suite, run_protocol, security_check

__all__ = [
    "ACIError", "BACKEND",
    "AuxChannel", "JointPMF", "KTriple", "builtin", "extend", "info_summary", "k_triple",
    "load_pmf", "parse_dist_spec", "tensor", "triple_of",
    "gk_decompose", "ww_monotones",
    "OptOptions", "ScalarWeights", "grid_oracle", "minimize_scalarized", "sweep",
    "KRegionApprox", "axis_intercepts", "contains", "region_for", "slice_region", "wyner_gap",
    "is_trivial", "k_bound", "ww_bound",
    "GaussianPair", "gaussian_curve",
    "load_protocol", "monotonicity_suite", "run_protocol", "security_check",
]
