"""Fermionic Gaussian correlation matrices and the closed-form purification.

Majorana picture: M is the 2L x 2L Hermitian matrix (1/2) Tr[rho [w_i, w_j]]
with spectrum in [-1, 1]; i*M is real antisymmetric, and rho is pure iff
M^2 = I. Number-conserving picture: Lambda is the L x L Hermitian matrix
<c^dag_r c_r'> with spectrum in [0, 1]. Purifying rho -> rho^n/Tr[rho^n] maps
eigenvalues by nu -> tanh(n artanh nu) and xi -> xi^n/(xi^n + (1-xi)^n).
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ..errors import DimensionMismatch, NegativeDeterminant, NotAValidCorrelation


@dataclass(frozen=True)
class MajoranaCorrelation:
    """Majorana two-point matrix M (2L x 2L, Hermitian, purely imaginary)."""

    M: np.ndarray
    L: int

    def __post_init__(self):
        if self.M.shape != (2 * self.L, 2 * self.L):
            raise DimensionMismatch(f"M shape {self.M.shape} vs L={self.L}")

    def validate(self, tol=1e-9):
        herm = np.max(np.abs(self.M - self.M.conj().T))
        antisym = np.max(np.abs(self.M + self.M.T))
        if herm > 1e-10 or antisym > 1e-8:
            raise NotAValidCorrelation(
                f"Hermiticity residual {herm:.2e}, antisymmetry residual {antisym:.2e}")
        w = np.linalg.eigvalsh(self.M)
        if w.min() < -1 - tol or w.max() > 1 + tol:
            raise NotAValidCorrelation(f"spectrum [{w.min()}, {w.max()}] leaves [-1, 1]")
        return self


@dataclass(frozen=True)
class NumberCorrelation:
    """Number-conserving two-point matrix Lambda (L x L, Hermitian)."""

    Lambda: np.ndarray
    L: int

    def __post_init__(self):
        if self.Lambda.shape != (self.L, self.L):
            raise DimensionMismatch(f"Lambda shape {self.Lambda.shape} vs L={self.L}")

    def validate(self, tol=1e-9):
        herm = np.max(np.abs(self.Lambda - self.Lambda.conj().T))
        if herm > 1e-10:
            raise NotAValidCorrelation(f"Hermiticity residual {herm:.2e}")
        w = np.linalg.eigvalsh(self.Lambda)
        if w.min() < -tol or w.max() > 1 + tol:
            raise NotAValidCorrelation(f"spectrum [{w.min()}, {w.max()}] leaves [0, 1]")
        return self


def antisym_canonical(K, tol=1e-10):
    """Canonical form of a real antisymmetric matrix.

    Returns (eps, O, det_sign) with K = O B O^T, B block diagonal with
    2 x 2 blocks [[0, eps_b], [-eps_b, 0]], eps_b >= 0, O real orthogonal,
    and det_sign = det(O) in {+1, -1}. Zero modes pair up with eps_b = 0.
    """
    K = np.real_if_close(K)
    t_mat, o_mat = scipy.linalg.schur(np.asarray(K, dtype=float), output="real")
    dim = K.shape[0]
    scale = max(np.max(np.abs(t_mat)), 1.0)
    # antisymmetry makes T strictly block diagonal; locate the 2x2 blocks
    pairs, singles = [], []
    i = 0
    while i < dim:
        if i + 1 < dim and abs(t_mat[i, i + 1]) > tol * scale:
            pairs.append((i, i + 1))
            i += 2
        else:
            singles.append(i)
            i += 1
    pairs += [(singles[k], singles[k + 1]) for k in range(0, len(singles) - 1, 2)]
    if len(singles) % 2:
        raise ValueError("odd number of zero modes in an even-dimensional form")
    order = []
    eps = np.empty(dim // 2)
    swaps = 0
    for b, (i, j) in enumerate(pairs):
        t = t_mat[i, j]
        if t < 0:
            i, j = j, i
            swaps += 1
            t = -t
        order += [i, j]
        eps[b] = t
    o_mat = o_mat[:, order]
    det_sign = int(round(np.linalg.det(o_mat)))
    return eps, o_mat, det_sign


def _majorana_eigmap(corr, fn):
    w, u = np.linalg.eigh((corr.M + corr.M.conj().T) / 2)
    out = (u * fn(w)) @ u.conj().T
    return MajoranaCorrelation(M=out, L=corr.L)


def purification_map(state, n):
    """Correlation matrix of rho^n / Tr[rho^n], same Gaussian family.

    Applied in the eigenbasis: nu -> tanh(n artanh nu) for Majorana input,
    xi -> xi^n / (xi^n + (1-xi)^n) for number-conserving input. n=1 is the
    identity; pure states are fixed points.
    """
    if n < 1 or abs(n - round(n)) > 1e-12:
        raise ValueError(f"copy count must be a positive integer, got {n}")
    n = int(round(n))
    if isinstance(state, MajoranaCorrelation):
        if n == 1:
            return state
        with np.errstate(divide="ignore"):
            return _majorana_eigmap(state,
                                    lambda w: np.tanh(n * np.arctanh(np.clip(w, -1, 1))))
    if isinstance(state, NumberCorrelation):
        if n == 1:
            return state
        w, u = np.linalg.eigh((state.Lambda + state.Lambda.conj().T) / 2)
        w = np.clip(w, 0.0, 1.0)
        mapped = np.empty_like(w)
        hi = w >= 0.5
        r_hi = ((1.0 - w[hi]) / w[hi]) ** n          # ratio <= 1, no overflow
        mapped[hi] = 1.0 / (1.0 + r_hi)
        r_lo = (w[~hi] / (1.0 - w[~hi])) ** n        # ratio < 1, no overflow
        mapped[~hi] = r_lo / (1.0 + r_lo)
        out = (u * mapped) @ u.conj().T
        return NumberCorrelation(Lambda=out, L=state.L)
    raise TypeError(f"unsupported state type {type(state).__name__}")


def gaussian_log_trace_power(corr, n):
    """log Tr[rho^n] for the Gaussian state with Majorana matrix M.

    Per mode pair with eigenvalue nu: Tr[rho_mode^n] =
    ((1+nu)/2)^n + ((1-nu)/2)^n; the product over modes is accumulated in the
    log domain so window purification denominators stay usable at large L.
    """
    if n < 1 or abs(n - round(n)) > 1e-12:
        raise ValueError(f"copy count must be a positive integer, got {n}")
    n = int(round(n))
    w = np.linalg.eigvalsh((corr.M + corr.M.conj().T) / 2)
    nu = np.sort(np.abs(w))[::2]  # spectrum comes in +/- pairs
    p = np.clip((1.0 + nu) / 2.0, 0.5, 1.0)
    q = 1.0 - p
    return float(np.sum(n * np.log(p) + np.log1p((q / p) ** n)))


def _log_half_det(vals):
    # sum of log((1 + v)/2) over a complex spectrum; -inf signals det = 0
    vals = np.asarray(vals, dtype=complex)
    factors = (1.0 + vals) / 2.0
    if np.any(np.abs(factors) < 1e-300):
        return None
    return np.sum(np.log(factors))


def gaussian_purity_overlap(m1, m2=None):
    """Purity sqrt(det[(1+M^2)/2]) and, given M2, the overlap
    Tr[rho_1 rho_2] = sqrt(det[(1+M_2 M_1)/2]) plus the Hilbert-Schmidt
    distance sqrt(P_1 + P_2 - 2 overlap).

    Determinants accumulate eigenvalue-by-eigenvalue in the log domain, so
    purities ~2^-L stay usable out to large L. Raises NegativeDeterminant if
    roundoff drives a determinant below -1e-12.
    """
    def purity(corr):
        w = np.linalg.eigvalsh((corr.M + corr.M.conj().T) / 2)
        return float(np.exp(0.5 * np.sum(np.log((1.0 + w ** 2) / 2.0))))

    out = {"purity": purity(m1)}
    if m2 is None:
        return out
    if m1.M.shape != m2.M.shape:
        raise DimensionMismatch(f"shapes {m1.M.shape} vs {m2.M.shape}")

    def overlap(a, b):
        s = _log_half_det(np.linalg.eigvals(b.M @ a.M))
        if s is None:
            return 0.0
        det = np.exp(s)
        if det.real < -1e-12:
            raise NegativeDeterminant(f"overlap determinant {det.real:.3e}")
        return float(np.sqrt(max(det.real, 0.0)))

    ov12, ov21 = overlap(m1, m2), overlap(m2, m1)
    if abs(ov12 - ov21) > 1e-9:
        raise ValueError(f"overlap asymmetry {abs(ov12 - ov21):.2e}")
    p2 = purity(m2)
    hs_sq = out["purity"] + p2 - 2.0 * ov12
    out["overlap"] = ov12
    out["hs_distance"] = float(np.sqrt(max(hs_sq, 0.0)))
    return out


def mode_trace_distance(l1, l2):
    """|m_1 - m_2| for single-mode number correlations (equals the
    Hilbert-Schmidt distance divided by sqrt(2) in this case)."""
    for l in (l1, l2):
        if l.Lambda.shape != (1, 1):
            raise DimensionMismatch(f"single-mode input required, got {l.Lambda.shape}")
    return float(abs(l1.Lambda[0, 0].real - l2.Lambda[0, 0].real))


def gaussian_lvp_observable(state, n, coeffs):
    """Quadratic-form expectation under the n-copy purified state.

    Majorana input: value = sum_jk Q_jk <w_j w_k> with <w_j w_k> =
    M^(n) + I. Number input: value = sum_rs Q_rs <c^dag_r c_s> = sum Q * Lambda^(n).
    n=1 reduces to a plain Wick contraction against the input matrix.
    """
    coeffs = np.asarray(coeffs)
    mapped = purification_map(state, n)
    if isinstance(state, MajoranaCorrelation):
        if coeffs.shape != mapped.M.shape:
            raise DimensionMismatch(f"coeffs {coeffs.shape} vs M {mapped.M.shape}")
        val = np.sum(coeffs * (mapped.M + np.eye(2 * state.L)))
    else:
        if coeffs.shape != mapped.Lambda.shape:
            raise DimensionMismatch(f"coeffs {coeffs.shape} vs Lambda {mapped.Lambda.shape}")
        val = np.sum(coeffs * mapped.Lambda)
    if abs(val.imag) > 1e-9:
        raise ValueError(f"observable value has imaginary part {val.imag:.2e}")
    return float(val.real)
