"""Fermionic Gaussian backend: correlation matrices, purification maps,
determinant formulas, and cross-checks against the dense engine."""

from .bridge import (dense_majorana_correlation, gaussian_to_dense,
                     jordan_wigner_majoranas, random_majorana_correlation)
from .core import (MajoranaCorrelation, NumberCorrelation, antisym_canonical,
                   gaussian_log_trace_power, gaussian_lvp_observable,
                   gaussian_purity_overlap, mode_trace_distance,
                   purification_map)
from .fits import fit_exponential, fit_linear, fit_power_law
from .freefermion import free_fermion_correlation, manhattan_ball
from .tfi import (tfi_energy_quadratic_form, tfi_majorana_correlation,
                  tfi_ring_log_partition)

__all__ = [
    "MajoranaCorrelation", "NumberCorrelation", "antisym_canonical",
    "purification_map",
    "gaussian_purity_overlap", "gaussian_log_trace_power",
    "gaussian_lvp_observable", "mode_trace_distance",
    "gaussian_to_dense", "dense_majorana_correlation",
    "jordan_wigner_majoranas", "random_majorana_correlation",
    "tfi_majorana_correlation", "tfi_ring_log_partition",
    "tfi_energy_quadratic_form", "free_fermion_correlation",
    "manhattan_ball", "fit_power_law", "fit_exponential", "fit_linear",
]
