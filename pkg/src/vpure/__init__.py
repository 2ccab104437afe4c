"""Virtual purification toolkit for noisy quantum many-body states.

Two backends: exact dense density matrices for small spin systems and
fermionic Gaussian correlation matrices for large ones.  The `vpure`
command line runs named experiment recipes that write CSV tables.
"""

from .errors import (BackendMismatch, ConfigInvalid, DegenerateGroundState,
                     DenominatorEstimateZero, DimensionLimit,
                     DimensionMismatch, EmptyKeepSet, InvalidExtent,
                     InvalidRate, NegativeDeterminant, NegativeExponent,
                     NotAValidCorrelation, NotPure, NumericalOverflow,
                     QuadratureNotConverged, RankDeficient,
                     VanishingDenominator, VpureError)
from .lattice import (Lattice, RegionPartition, build_lattice, graph_distances,
                      partition_regions)
from .spin import (Hamiltonian, PauliString, Term, apply_pauli_left,
                   embed_operator, pauli_from_letters, pauli_operator,
                   tfi_hamiltonian)
from .dense import (DensityMatrix, SpectralDecomposition, expectation,
                    gibbs_state, ground_state_projector, matrix_power,
                    partial_trace, spectral_decomposition, state_metrics)
from .channels import NoiseModel, apply_channel
from .estimator import (EstimateReport, QuadratureSpec, derangement_check,
                        deviation_direct, deviation_pure,
                        deviation_quadrature, free_energy_density, fvp_value,
                        lvp_value, mse, predicted_cost_ratio, shot_simulate,
                        trace_pauli_power, trace_power, variance_and_cost)
from .gaussian import (MajoranaCorrelation, NumberCorrelation,
                       antisym_canonical, dense_majorana_correlation,
                       fit_exponential, fit_linear, fit_power_law,
                       free_fermion_correlation, gaussian_log_trace_power,
                       gaussian_lvp_observable, gaussian_purity_overlap,
                       gaussian_to_dense, jordan_wigner_majoranas,
                       manhattan_ball, mode_trace_distance, purification_map,
                       random_majorana_correlation, tfi_energy_quadratic_form,
                       tfi_majorana_correlation, tfi_ring_log_partition)
from .config import load_config, validate_config
from .recipes import run_experiment

__version__ = "0.1.0"
