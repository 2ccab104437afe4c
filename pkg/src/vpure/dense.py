"""Dense density-matrix core: Gibbs states, projectors, partial traces,
real matrix powers, expectation values, and state metrics.

All matrix functions go through a full Hermitian eigendecomposition (dimensions
stay at or below 2^14), re-Hermitizing (M + M^dag)/2 first. Natural logarithms
throughout.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from .errors import (DegenerateGroundState, DimensionMismatch, EmptyKeepSet,
                     NegativeExponent, NumericalOverflow)
from .spin import Hamiltonian, PauliString, pauli_action

EIG_FLOOR = 1e-14


@dataclass(frozen=True)
class DensityMatrix:
    """Dense density operator with the lattice sites its factors carry.

    `hamiltonian` and `beta` are filled in by gibbs_state so later consumers
    can reconstruct local Gibbs factors; they are None otherwise.
    """

    matrix: np.ndarray
    sites: tuple
    hamiltonian: Hamiltonian = None
    beta: float = None

    def __post_init__(self):
        dim = 1 << len(self.sites)
        if self.matrix.shape != (dim, dim):
            raise DimensionMismatch(
                f"matrix shape {self.matrix.shape} does not match {len(self.sites)} sites")

    @property
    def n_sites(self):
        return len(self.sites)

    def validate(self, tol=1e-10):
        """Assert Hermiticity, unit trace, and positive semidefiniteness."""
        m = self.matrix
        herm = np.max(np.abs(m - m.conj().T))
        if herm > tol:
            raise ValueError(f"not Hermitian: max asymmetry {herm:.2e}")
        tr = np.trace(m)
        if abs(tr - 1.0) > tol:
            raise ValueError(f"trace {tr} differs from 1")
        wmin = np.linalg.eigvalsh((m + m.conj().T) / 2).min()
        if wmin < -tol:
            raise ValueError(f"negative eigenvalue {wmin:.2e}")
        return self


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues (descending) and the unitary of eigenvectors (columns)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _as_matrix(x):
    if isinstance(x, DensityMatrix):
        return x.matrix
    if isinstance(x, Hamiltonian):
        return x.matrix
    return np.asarray(x)


def _eigh(mat):
    mat = np.asarray(mat)
    return np.linalg.eigh((mat + mat.conj().T) / 2)


def spectral_decomposition(mat):
    """Hermitian eigendecomposition with eigenvalues sorted descending."""
    w, u = _eigh(_as_matrix(mat))
    order = np.argsort(w)[::-1]
    return SpectralDecomposition(eigenvalues=w[order], eigenvectors=u[:, order])


def gibbs_state(hamiltonian, beta):
    """Gibbs state e^{-beta H} / Tr e^{-beta H}.

    Computed through the spectral decomposition of H with a max-eigenvalue
    shift, so the exponentials never overflow. beta = 0 returns the maximally
    mixed state. The result carries (hamiltonian, beta) for downstream use.
    """
    if beta < 0:
        raise ValueError("beta must be >= 0")
    w, u = _eigh(hamiltonian.matrix)
    x = np.exp(-beta * (w - w.min()))
    z = x.sum()
    if not np.isfinite(z) or z <= 0:
        raise NumericalOverflow(f"partition function not finite at beta={beta}")
    rho = (u * (x / z)) @ u.conj().T
    return DensityMatrix(matrix=rho, sites=tuple(range(hamiltonian.n_sites)),
                         hamiltonian=hamiltonian, beta=float(beta))


def ground_state_projector(hamiltonian, gap_tol=1e-8):
    """Rank-1 projector onto the ground state.

    Raises DegenerateGroundState when E_1 - E_0 < gap_tol.
    """
    if gap_tol <= 0:
        raise ValueError("gap_tol must be > 0")
    mat = hamiltonian.matrix
    dim = mat.shape[0]
    if dim <= 2048:
        w, u = _eigh(mat)
        e0, e1 = w[0], w[1]
        psi = u[:, 0]
    else:
        sp = scipy.sparse.csr_matrix(mat)
        v0 = np.ones(dim) / np.sqrt(dim)
        w, u = scipy.sparse.linalg.eigsh(sp, k=2, which="SA", v0=v0)
        order = np.argsort(w)
        e0, e1 = w[order[0]], w[order[1]]
        psi = u[:, order[0]]
    if e1 - e0 < gap_tol:
        raise DegenerateGroundState(f"gap {e1 - e0:.3e} below tolerance {gap_tol:.1e}")
    rho = np.outer(psi, psi.conj())
    return DensityMatrix(matrix=rho, sites=tuple(range(hamiltonian.n_sites)))


def partial_trace(rho, keep):
    """Reduced density matrix on the site labels `keep` (ascending order).

    Raises EmptyKeepSet when `keep` is empty.
    """
    keep = sorted(set(keep))
    if not keep:
        raise EmptyKeepSet("no sites to keep")
    if not set(keep) <= set(rho.sites):
        raise ValueError(f"keep {keep} not a subset of sites {rho.sites}")
    n = rho.n_sites
    pos = {s: i for i, s in enumerate(rho.sites)}
    kp = [pos[s] for s in keep]
    tp = [i for i in range(n) if i not in kp]
    dk, dt = 1 << len(kp), 1 << len(tp)
    tens = rho.matrix.reshape((2,) * (2 * n))
    tens = tens.transpose(kp + tp + [n + i for i in kp] + [n + i for i in tp])
    tens = tens.reshape(dk, dt, dk, dt)
    red = np.trace(tens, axis1=1, axis2=3)
    return DensityMatrix(matrix=np.ascontiguousarray(red), sites=tuple(keep))


def matrix_power(rho, t):
    """rho^t for real t >= 0.

    Integer exponents up to 4 use repeated multiplication; everything else goes
    through the eigendecomposition. For non-integer t the eigenvalues are
    clamped below at 1e-14 before powering (documented regularization for
    rank-deficient inputs).
    """
    if t < 0:
        raise NegativeExponent(f"exponent {t} < 0")
    mat = _as_matrix(rho)
    if abs(t - round(t)) < 1e-12:
        k = int(round(t))
        if k == 0:
            return np.eye(mat.shape[0], dtype=complex)
        if k <= 4:
            out = mat
            for _ in range(k - 1):
                out = out @ mat
            return out
        w, u = _eigh(mat)
        return (u * np.clip(w, 0.0, None) ** k) @ u.conj().T
    w, u = _eigh(mat)
    w = np.clip(w, EIG_FLOOR, None)
    return (u * w ** t) @ u.conj().T


def expectation(rho, obs):
    """Re Tr[rho O]; raises if the imaginary part exceeds 1e-9.

    `obs` may be a dense matrix, a PauliString (evaluated without building the
    matrix), or a Hamiltonian (sum over its terms).
    """
    mat = _as_matrix(rho)
    if isinstance(obs, PauliString):
        perm, phase = pauli_action(obs)
        if mat.shape[0] != perm.size:
            raise DimensionMismatch(f"state dim {mat.shape[0]} vs operator dim {perm.size}")
        val = np.sum(mat[np.arange(perm.size), perm] * phase)
    elif isinstance(obs, Hamiltonian):
        return sum(t.coeff * expectation(rho, t.pauli) for t in obs.terms)
    else:
        omat = np.asarray(obs)
        if omat.shape != mat.shape:
            raise DimensionMismatch(f"state shape {mat.shape} vs operator shape {omat.shape}")
        val = np.einsum("ij,ji->", mat, omat)
    if abs(val.imag) > 1e-9:
        raise ValueError(f"expectation has imaginary part {val.imag:.2e}")
    return float(val.real)


def state_metrics(rho, sigma=None):
    """Purity, von Neumann entropy (natural log), largest eigenvalue, and,
    when `sigma` is given, trace distance (1/2 convention) and
    Hilbert-Schmidt distance.
    """
    m = _as_matrix(rho)
    w = np.linalg.eigvalsh((m + m.conj().T) / 2)
    w = np.clip(w, 0.0, None)
    pos = w[w > 0]
    out = {
        "purity": float(np.sum(np.abs(m) ** 2)),
        "entropy": float(-np.sum(pos * np.log(pos))),
        "lambda_max": float(w.max()),
    }
    if sigma is not None:
        s = _as_matrix(sigma)
        if s.shape != m.shape:
            raise DimensionMismatch(f"shapes {m.shape} vs {s.shape}")
        diff = m - s
        ev = np.linalg.eigvalsh((diff + diff.conj().T) / 2)
        out["trace_distance"] = float(0.5 * np.sum(np.abs(ev)))
        out["hs_distance"] = float(np.linalg.norm(diff))
    return out
