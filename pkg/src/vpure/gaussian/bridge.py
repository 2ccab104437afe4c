"""Cross-checks between Gaussian correlation matrices and dense density matrices.

The Jordan-Wigner convention pairs site l with Majoranas
w_{2l} = (prod_{j<l} X_j) Z_l and w_{2l+1} = (prod_{j<l} X_j) Y_l, so that
X_l = i w_{2l} w_{2l+1} and Z_l Z_{l+1} = i w_{2l+1} w_{2l+2} on a chain.
"""

import numpy as np

from ..dense import DensityMatrix
from ..errors import DimensionLimit, NotAValidCorrelation
from ..spin import PauliString, pauli_operator
from .core import MajoranaCorrelation, antisym_canonical

DENSE_BRIDGE_LIMIT = 6


def jordan_wigner_majoranas(n_sites):
    """Dense 2^L x 2^L matrices for the 2L Majorana operators."""
    if n_sites > DENSE_BRIDGE_LIMIT:
        raise DimensionLimit(f"{n_sites} sites exceeds dense bridge limit {DENSE_BRIDGE_LIMIT}")
    mats = []
    for l in range(n_sites):
        prefix = "X" * l
        suffix = "I" * (n_sites - l - 1)
        for letter in ("Z", "Y"):
            mats.append(pauli_operator(PauliString(prefix + letter + suffix)))
    return mats


def dense_majorana_correlation(rho):
    """Measure M_ij = Tr[rho w_i w_j] - delta_ij from a dense state."""
    n = len(rho.sites)
    gammas = jordan_wigner_majoranas(n)
    m = np.zeros((2 * n, 2 * n), dtype=complex)
    for i in range(2 * n):
        rho_gi = rho.matrix @ gammas[i]
        for j in range(2 * n):
            if i == j:
                continue
            m[i, j] = np.einsum("ij,ji->", rho_gi, gammas[j])
    return MajoranaCorrelation(M=m, L=n)


def gaussian_to_dense(corr, dense_limit=DENSE_BRIDGE_LIMIT):
    """Reconstruct the dense Gaussian density matrix from its Majorana matrix.

    Brings -iM to canonical antisymmetric form, builds the rotated Majorana
    operators w'_k = sum_j O_jk w_j, and assembles
    rho = prod_b (I + c_b i w'_{2b} w'_{2b+1}) / 2 with c_b the mode
    eigenvalues. Intended for small L cross-checks.
    """
    if corr.L > dense_limit:
        raise DimensionLimit(f"L={corr.L} exceeds dense limit {dense_limit}")
    w = np.linalg.eigvalsh((corr.M + corr.M.conj().T) / 2)
    if w.min() < -1 - 1e-9 or w.max() > 1 + 1e-9:
        raise NotAValidCorrelation(f"spectrum [{w.min()}, {w.max()}] leaves [-1, 1]")
    k_mat = corr.M / 1j
    if np.max(np.abs(k_mat.imag)) > 1e-9:
        raise NotAValidCorrelation("M is not purely imaginary")
    kappa, o_mat, _ = antisym_canonical(k_mat.real)
    # with K = -iM in canonical blocks [[0, kappa], [-kappa, 0]], the mode
    # expectation <i w'_{2b} w'_{2b+1}> is -kappa_b
    gammas = jordan_wigner_majoranas(corr.L)
    dim = 2 ** corr.L
    rho = np.eye(dim, dtype=complex)
    for b in range(corr.L):
        g_even = sum(o_mat[j, 2 * b] * gammas[j] for j in range(2 * corr.L))
        g_odd = sum(o_mat[j, 2 * b + 1] * gammas[j] for j in range(2 * corr.L))
        x_mode = 1j * (g_even @ g_odd)
        rho = rho @ (np.eye(dim) - kappa[b] * x_mode) / 2.0
    rho = (rho + rho.conj().T) / 2
    rho /= np.trace(rho).real
    return DensityMatrix(matrix=rho, sites=tuple(range(corr.L)))


def random_majorana_correlation(n_modes, rng, pure=False):
    """Random valid Majorana correlation matrix on n_modes modes."""
    a = rng.standard_normal((2 * n_modes, 2 * n_modes))
    k = a - a.T
    eps, o_mat, _ = antisym_canonical(k)
    nu = rng.uniform(-1.0, 1.0, size=n_modes) if not pure \
        else rng.choice([-1.0, 1.0], size=n_modes)
    blocks = np.zeros((2 * n_modes, 2 * n_modes), dtype=complex)
    for b in range(n_modes):
        blocks[2 * b, 2 * b + 1] = 1j * nu[b]
        blocks[2 * b + 1, 2 * b] = -1j * nu[b]
    return MajoranaCorrelation(M=o_mat @ blocks @ o_mat.T, L=n_modes)
