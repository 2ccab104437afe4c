"""FVP and LVP estimators: values, deviations (three routes), analytic
variance and measurement cost, free-energy cost prediction, shot-noise Monte
Carlo, and an explicit derangement-operator cross-check.

FVP evaluates Tr[rho^n O]/Tr[rho^n] on the full system; LVP applies the same
purification to the reduced state on A u B around each local term. Powers of
Pauli-observable traces avoid matrix products wherever n <= 2.
"""

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import logsumexp

from .dense import (DensityMatrix, EIG_FLOOR, _as_matrix, _eigh, matrix_power,
                    partial_trace)
from .errors import (DenominatorEstimateZero, DimensionLimit, NotPure,
                     RankDeficient, VanishingDenominator)
from .lattice import partition_regions
from .spin import (PauliString, apply_pauli_left, pauli_action, pauli_operator,
                   embed_operator)

DENOM_TINY = 1e-300


@dataclass(frozen=True)
class EstimateReport:
    """Shot-level estimate of a purified expectation value.

    variance is the per-single-shot delta-method value; mse equals
    bias^2 + variance/n_shot by construction.
    """

    value: float
    variance: float
    cost: float
    bias: float
    mse: float
    n_copies: int
    n_shot: int


@dataclass(frozen=True)
class QuadratureSpec:
    """Gauss-Legendre node counts for the (lambda, tau) double integral and
    the choice of the region-C reference factor."""

    nodes_lambda: int = 24
    nodes_tau: int = 24
    sigma_c_choice: str = "identity"

    def __post_init__(self):
        if self.nodes_lambda < 2 or self.nodes_tau < 2:
            raise ValueError("node counts must be >= 2")
        if self.sigma_c_choice not in ("identity", "gibbs_local"):
            raise ValueError(f"unknown sigma_c choice {self.sigma_c_choice!r}")


def _check_copies(n):
    if abs(n - round(n)) > 1e-12 or round(n) < 1:
        raise ValueError(f"copy count must be a positive integer, got {n}")
    return int(round(n))


def trace_power(rho, n):
    """Tr[rho^n] for integer n >= 1 (n=2 via the Frobenius norm)."""
    n = _check_copies(n)
    mat = _as_matrix(rho)
    if n == 1:
        return float(np.trace(mat).real)
    if n == 2:
        return float(np.sum(np.abs(mat) ** 2))
    return float(np.einsum("ij,ji->", matrix_power(mat, n - 1), mat).real)


def trace_pauli_power(rho, p, n):
    """Tr[P rho^n] for a PauliString P and integer n >= 1."""
    n = _check_copies(n)
    mat = _as_matrix(rho)
    if n == 1:
        perm, phase = pauli_action(p)
        return float(np.sum(mat[np.arange(perm.size), perm] * phase).real)
    left = mat if n == 2 else matrix_power(mat, n - 1)
    return float(np.einsum("ij,ji->", apply_pauli_left(p, left), mat).real)


def fvp_value(rho, obs, n):
    """Tr[rho^n O] / Tr[rho^n].

    `obs` may be a dense matrix, a PauliString, or anything with a `terms`
    attribute (summed term by term). Raises VanishingDenominator when
    Tr[rho^n] < 1e-300.
    """
    n = _check_copies(n)
    mat = _as_matrix(rho)
    t2 = trace_power(mat, n)
    if t2 < DENOM_TINY:
        raise VanishingDenominator(f"Tr[rho^{n}] = {t2}")
    if isinstance(obs, PauliString):
        t1 = trace_pauli_power(mat, obs, n)
    elif hasattr(obs, "terms"):
        t1 = sum(t.coeff * trace_pauli_power(mat, t.pauli, n) for t in obs.terms)
    else:
        rn = mat if n == 1 else matrix_power(mat, n)
        t1 = float(np.einsum("ij,ji->", rn, np.asarray(obs)).real)
    return t1 / t2


def lvp_value(rho, hamiltonian_terms, lattice, d, n):
    """Sum over local terms of the purified reduced expectation values.

    For each term with support A_i this builds the buffer-d partition, reduces
    rho to A_i u B_i, and evaluates Tr[(rho^(AB))^n o]/Tr[(rho^(AB))^n],
    weighted by the term coefficient.
    """
    n = _check_copies(n)
    total = 0.0
    reduced = {}          # keep-window cache; windows repeat across terms
    for t in hamiltonian_terms:
        part = partition_regions(lattice, t.support, d)
        keep = tuple(sorted(part.region_a | part.region_b))
        if keep not in reduced:
            reduced[keep] = partial_trace(rho, keep)
        total += t.coeff * fvp_value(reduced[keep], t.pauli.restrict(keep), n)
    return total


def deviation_direct(rho, o_a, partition, n):
    """LVP-term value minus FVP value for the observable o_a (support in A)."""
    if not o_a.support <= partition.region_a:
        raise ValueError("observable support must lie inside region A")
    keep = tuple(sorted(partition.region_a | partition.region_b))
    red = partial_trace(rho, keep)
    return fvp_value(red, o_a.restrict(keep), n) - fvp_value(rho, o_a, n)


def deviation_pure(psi, o_a, partition, n):
    """Closed-form deviation for pure inputs.

    Evaluates Tr_{A+C}[(rho^(A+C) - rho^(A) x rho^(C)) o_A x (rho^(C))^{n-1}]
    normalized by Tr[(rho^(C))^n]; agrees with deviation_direct to 1e-9 on the
    same inputs. Raises NotPure when purity < 1 - 1e-9.
    """
    n = _check_copies(n)
    purity = trace_power(psi, 2)
    if purity < 1 - 1e-9:
        raise NotPure(f"purity {purity} below 1 - 1e-9")
    if not o_a.support <= partition.region_a:
        raise ValueError("observable support must lie inside region A")
    a_sites = sorted(partition.region_a)
    c_sites = sorted(partition.region_c)
    if not c_sites:
        return 0.0
    union = sorted(a_sites + c_sites)
    rho_ac = partial_trace(psi, union).matrix
    rho_a = partial_trace(psi, a_sites).matrix
    rho_c = partial_trace(psi, c_sites)
    prod = embed_operator(np.kron(rho_a, rho_c.matrix), a_sites + c_sites, union)
    o_mat = pauli_operator(o_a.restrict(a_sites))
    weight = embed_operator(np.kron(o_mat, matrix_power(rho_c, n - 1)),
                            a_sites + c_sites, union)
    denom = trace_power(rho_c, n)
    if denom < DENOM_TINY:
        raise VanishingDenominator(f"Tr[(rho^C)^{n}] = {denom}")
    val = np.einsum("ij,ji->", rho_ac - prod, weight)
    return float(val.real) / denom


def _log_psd(mat, floor=EIG_FLOOR):
    w, u = _eigh(mat)
    return (u * np.log(np.clip(w, floor, None))) @ u.conj().T


def deviation_quadrature(rho, o_a, partition, n, spec=None):
    """Deviation via the generalized-correlation double integral.

    Interpolates H_lam = log rho^n + lam (X_n - Y_n) between the purified
    global state (lam=0) and the purified product of the A+B marginal with a
    region-C reference factor (lam=1), integrating the connected correlator
    Corr^tau_{rho_lam}(X_n - Y_n, o_A) over (lam, tau) in [0,1]^2 with
    Gauss-Legendre nodes. Converges to deviation_direct as nodes grow.

    Raises RankDeficient when flooring the eigenvalues of rho changes its
    trace by more than 1e-6.
    """
    n = _check_copies(n)
    if spec is None:
        spec = QuadratureSpec()
    if not o_a.support <= partition.region_a:
        raise ValueError("observable support must lie inside region A")
    mat = _as_matrix(rho)
    w, u = _eigh(mat)
    clamped = np.clip(w, EIG_FLOOR, None)
    if abs(w.sum() - clamped.sum()) > 1e-6:
        raise RankDeficient("eigenvalue floor changed the trace by more than 1e-6")
    y_n = n * ((u * np.log(clamped)) @ u.conj().T)

    ab_sites = sorted(partition.region_a | partition.region_b)
    c_sites = sorted(partition.region_c)
    all_sites = sorted(set(rho.sites))
    x_n = n * embed_operator(_log_psd(partial_trace(rho, ab_sites).matrix),
                             ab_sites, all_sites)
    if c_sites and spec.sigma_c_choice == "gibbs_local":
        if rho.hamiltonian is None or rho.beta is None:
            raise ValueError("gibbs_local sigma_C needs a Gibbs-tagged state")
        dim_c = 1 << len(c_sites)
        h_c = np.zeros((dim_c, dim_c), dtype=complex)
        for t in rho.hamiltonian.terms:
            if t.support <= set(c_sites):
                h_c += t.coeff * pauli_operator(t.pauli.restrict(c_sites))
        # sigma_C = e^{-beta H_C}; its log needs no normalization
        x_n += n * embed_operator(-rho.beta * h_c, c_sites, all_sites)

    delta = x_n - y_n
    o_mat = pauli_operator(o_a)
    lam_x, lam_w = leggauss(spec.nodes_lambda)
    tau_x, tau_w = leggauss(spec.nodes_tau)
    lam_x, lam_w = (lam_x + 1) / 2, lam_w / 2
    tau_x, tau_w = (tau_x + 1) / 2, tau_w / 2

    total = 0.0
    for lam, wl in zip(lam_x, lam_w):
        h_lam = y_n + lam * delta
        e, v = _eigh(h_lam)
        p = np.exp(e - e.max())
        p /= p.sum()
        d_t = v.conj().T @ delta @ v
        o_t = v.conj().T @ o_mat @ v
        disc = float(np.sum(p * np.diagonal(d_t).real) *
                     np.sum(p * np.diagonal(o_t).real))
        for tau, wt in zip(tau_x, tau_w):
            corr = np.einsum("i,ij,j,ji->", p ** tau, d_t, p ** (1 - tau), o_t)
            total += wl * wt * (corr.real - disc)
    return float(total)


def variance_and_cost(rho, p_a, n, mode="fvp", partition=None):
    """Delta-method variance and the 2/Tr[.]^2 measurement-cost bound.

    Var = (1 - T1^2)/T2^2 + T1^2 (1 - T2^2)/T2^4 with T1 = Tr[P rho^n] and
    T2 = Tr[rho^n]; in lvp mode both traces use the A u B reduced state.
    """
    n = _check_copies(n)
    if mode == "lvp":
        if partition is None:
            raise ValueError("lvp mode needs a partition")
        keep = sorted(partition.region_a | partition.region_b)
        rho = partial_trace(rho, keep)
        p_a = p_a.restrict(keep)
    elif mode != "fvp":
        raise ValueError(f"unknown mode {mode!r}")
    t1 = trace_pauli_power(rho, p_a, n)
    t2 = trace_power(rho, n)
    if t2 < DENOM_TINY:
        raise VanishingDenominator(f"Tr[rho^{n}] = {t2}")
    var = (1 - t1 ** 2) / t2 ** 2 + t1 ** 2 * (1 - t2 ** 2) / t2 ** 4
    return {"variance": float(var), "cost": float(2.0 / t2 ** 2)}


def free_energy_density(hamiltonian, beta, n_sites=None):
    """f_beta = -log Tr e^{-beta H} / (N beta)."""
    if beta <= 0:
        raise ValueError("beta must be > 0")
    if n_sites is None:
        n_sites = hamiltonian.n_sites
    w = np.linalg.eigvalsh((hamiltonian.matrix + hamiltonian.matrix.conj().T) / 2)
    return float(-logsumexp(-beta * w) / (n_sites * beta))


def predicted_cost_ratio(h_full, h_ab, beta, n, n_c):
    """exp[-2 n beta N_C (f_{n beta} - f_beta)] with f from the truncated
    Hamiltonian on A u B; approximates the LVP/FVP measurement-cost ratio
    (below 1 whenever localization reduces the shot budget)."""
    n = _check_copies(n)
    if n_c != h_full.n_sites - h_ab.n_sites:
        raise ValueError(
            f"N_C={n_c} inconsistent with {h_full.n_sites} - {h_ab.n_sites} sites")
    f_n = free_energy_density(h_ab, n * beta)
    f_1 = free_energy_density(h_ab, beta)
    return float(np.exp(-2.0 * n * beta * n_c * (f_n - f_1)))


def _sample_mean_var(rng, shots, e_true):
    prob = min(max((1.0 + e_true) / 2.0, 0.0), 1.0)
    k = rng.binomial(shots, prob)
    mean = 2.0 * k / shots - 1.0
    var = (1.0 - mean ** 2) * shots / (shots - 1) if shots > 1 else 0.0
    return mean, var


def shot_simulate(rho, p_a, n, mode="fvp", partition=None, n_shot=2 ** 14,
                  seed=0, reference=None):
    """Hadamard-test shot-noise simulation of the ratio estimator.

    The n_shot budget is split evenly between the numerator and denominator
    circuits (the two are estimated independently): each stream takes
    n_shot//2 +-1 Bernoulli shots with means Tr[P rho^n] and Tr[rho^n]
    (reduced-state analogs in lvp mode), seeded deterministically. The report
    carries the sampled ratio, the empirical per-shot delta-method variance,
    the plug-in cost, the bias against `reference` (0 when none is given),
    and the MSE bias^2 + variance/n_shot.

    Raises DenominatorEstimateZero when the sampled denominator mean is <= 0.
    """
    n = _check_copies(n)
    if n_shot < 2:
        raise ValueError("n_shot must be >= 2")
    if mode == "lvp":
        if partition is None:
            raise ValueError("lvp mode needs a partition")
        keep = sorted(partition.region_a | partition.region_b)
        rho = partial_trace(rho, keep)
        p_a = p_a.restrict(keep)
    elif mode != "fvp":
        raise ValueError(f"unknown mode {mode!r}")
    e_num = trace_pauli_power(rho, p_a, n)
    e_den = trace_power(rho, n)
    rng_num = np.random.Generator(np.random.PCG64(
        np.random.SeedSequence(seed, spawn_key=(0,))))
    rng_den = np.random.Generator(np.random.PCG64(
        np.random.SeedSequence(seed, spawn_key=(1,))))
    half = n_shot // 2
    mean_num, var_num = _sample_mean_var(rng_num, half, e_num)
    mean_den, var_den = _sample_mean_var(rng_den, half, e_den)
    if mean_den <= 0:
        raise DenominatorEstimateZero(f"sampled denominator mean {mean_den}")
    value = mean_num / mean_den
    variance = var_num / mean_den ** 2 + mean_num ** 2 * var_den / mean_den ** 4
    if e_den < DENOM_TINY:
        raise VanishingDenominator(f"Tr[rho^{n}] = {e_den}")
    bias = (e_num / e_den - reference) if reference is not None else 0.0
    return EstimateReport(value=float(value), variance=float(variance),
                          cost=float(2.0 / mean_den ** 2), bias=float(bias),
                          mse=float(bias ** 2 + variance / n_shot),
                          n_copies=n, n_shot=int(n_shot))


def _cyclic_shift_map(n_copies, n_sites, shift_bits):
    """Index map of the cyclic shift on the n-copy space, acting only on the
    qubit positions in `shift_bits` (site labels); other qubits stay put.

    Returns sigma with S|J> = |sigma[J]>, where new copy c takes copy c-1's
    shifted qubits (copy 0 takes copy n-1's).
    """
    total = n_copies * n_sites
    idx = np.arange(1 << total, dtype=np.int64)
    sigma = idx.copy()
    for q in shift_bits:
        bitpos = [(n_copies - 1 - c) * n_sites + (n_sites - 1 - q)
                  for c in range(n_copies)]
        bits = [(idx >> b) & 1 for b in bitpos]
        for c in range(n_copies):
            src = bits[(c - 1) % n_copies]
            sigma = (sigma & ~(np.int64(1) << bitpos[c])) | (src << bitpos[c])
    return sigma


def derangement_check(rho, p_a, n, mode="fvp", partition=None):
    """Residual of the derangement identity, built explicitly.

    Constructs rho^(x)n and the cyclic-shift operator S (full, or restricted
    to A u B in lvp mode) and returns
    |Tr[rho^(x)n S (P_a (x) I^(x)(n-1))] - Tr[rho^n P_a]| (with reduced-state
    right side in lvp mode). Must be <= 1e-10.
    """
    n = _check_copies(n)
    n_sites = rho.n_sites
    if n * n_sites > 12:
        raise DimensionLimit(f"2^({n}*{n_sites}) exceeds the 2^12 copy-space cap")
    if mode == "lvp":
        if partition is None:
            raise ValueError("lvp mode needs a partition")
        shift_sites = sorted(partition.region_a | partition.region_b)
        if not p_a.support <= partition.region_a:
            raise ValueError("observable support must lie inside region A")
    elif mode == "fvp":
        shift_sites = list(range(n_sites))
    else:
        raise ValueError(f"unknown mode {mode!r}")

    site_pos = {s: i for i, s in enumerate(rho.sites)}
    kron = rho.matrix
    for _ in range(n - 1):
        kron = np.kron(kron, rho.matrix)
    sigma = _cyclic_shift_map(n, n_sites, [site_pos[s] for s in shift_sites])
    # P_a acts on copy 0; identity on the rest
    perm, phase = pauli_action(p_a)
    dim_rest = 1 << ((n - 1) * n_sites)
    j = np.arange(1 << (n * n_sites))
    top = j >> ((n - 1) * n_sites)
    row = (perm[top] << ((n - 1) * n_sites)) | (j & (dim_rest - 1))
    lhs = np.sum(kron[j, sigma[row]] * phase[top])

    if mode == "fvp":
        rhs = trace_pauli_power(rho, p_a, n)
    else:
        red = partial_trace(rho, shift_sites)
        rhs = trace_pauli_power(red, p_a.restrict(shift_sites), n)
    return float(abs(lhs - rhs))


def mse(bias, variance, n_shot):
    """bias^2 + variance/n_shot."""
    if variance < 0:
        raise ValueError("variance must be >= 0")
    if n_shot < 1:
        raise ValueError("n_shot must be >= 1")
    return float(bias ** 2 + variance / n_shot)
