"""Number-conserving correlation matrices for free fermions on square and
cubic lattices.

Dispersion eps_k = -2 sum_i cos(k_i) (hopping t=1), chemical potential mu in
[-2, 0]. Entries are cosine-transform integrals of the Fermi factor over
k in [0, pi]^dim:

    Lambda_{r,r'} = (1/pi^dim) int prod_i cos(k_i dr_i) F_beta(eps_k - mu) d^dim k

with F the Fermi function (zero temperature: the filled-sea step). Finite
temperature uses a Gauss-Legendre tensor grid contracted one axis at a time;
the zero-temperature 2D case integrates the closed-form transverse slice with
a sin^2 substitution that absorbs the square-root edge at the Fermi surface.
Every build runs twice (node doubling) and must agree to 1e-10.
"""

import itertools
from functools import lru_cache

import numpy as np

from ..errors import QuadratureNotConverged
from .core import NumberCorrelation

_GATE_TOL = 1e-10


def manhattan_ball(dim, radius):
    """Sorted integer coordinates with sum_i |x_i| <= radius."""
    if radius < 0:
        raise ValueError(f"radius {radius} < 0")
    rng = range(-radius, radius + 1)
    pts = [p for p in itertools.product(*([rng] * dim))
           if sum(abs(c) for c in p) <= radius]
    return sorted(pts)


@lru_cache(maxsize=8)
def _gauss_nodes(nodes):
    x, w = np.polynomial.legendre.leggauss(nodes)
    return x, w


def _delta_table_finite(dim, mu, beta, max_delta, nodes):
    x, w = _gauss_nodes(nodes)
    k = np.pi / 2.0 * (x + 1.0)
    wk = np.pi / 2.0 * w
    shape = (nodes,) * dim
    table = np.zeros(shape)
    for ax in range(dim):
        view = [None] * dim
        view[ax] = slice(None)
        table += -2.0 * np.cos(k)[tuple(view)]
    # Fermi factor computed in place: one nodes^dim array alive at a time
    table -= mu
    table *= beta
    np.clip(table, -700.0, 700.0, out=table)
    np.exp(table, out=table)
    table += 1.0
    np.reciprocal(table, out=table)
    deltas = np.arange(max_delta + 1)
    cos_mat = (np.cos(np.outer(deltas, k)) * wk) / np.pi
    for _ in range(dim):
        # contract the leading momentum axis; result axes cycle to the back
        table = np.tensordot(cos_mat, table, axes=([1], [0])) if dim > 1 \
            else cos_mat @ table
        table = np.moveaxis(table, 0, -1)
    return table


def _transverse_slice(kappa, delta):
    """int_0^K cos(k d) dk with K = kappa: K for d=0, sin(K d)/d otherwise."""
    if delta == 0:
        return kappa
    return np.sin(kappa * delta) / delta


def _delta_table_zero_t_2d(mu, max_delta, nodes):
    u_edge = -mu / 2.0 - 1.0
    k_max = np.arccos(np.clip(u_edge, -1.0, 1.0))
    x, w = _gauss_nodes(nodes)
    theta = np.pi / 4.0 * (x + 1.0)
    wt = np.pi / 4.0 * w
    # kx = k_max sin^2(theta) regularizes the sqrt vanishing of K at k_max
    kx = k_max * np.sin(theta) ** 2
    jac = k_max * np.sin(2.0 * theta) * wt
    big_k = np.arccos(np.clip(-mu / 2.0 - np.cos(kx), -1.0, 1.0))
    slices = np.empty((max_delta + 1, nodes))
    for dy in range(max_delta + 1):
        slices[dy] = _transverse_slice(big_k, dy)
    cos_x = np.cos(np.outer(np.arange(max_delta + 1), kx)) * jac
    return cos_x @ slices.T / np.pi ** 2


def _zero_t_2d_any_filling(m, max_delta, nodes):
    """2D filled-sea table for effective chemical potential m in [-4, 4].

    m <= 0 integrates the pocket directly; m > 0 uses the particle-hole
    identity L(m) = delta_0 - (-1)^(dx+dy) L(-m) (complement sea under
    k -> pi - k), keeping every quadrature on the kink-free branch.
    """
    if m <= -4.0:
        return np.zeros((max_delta + 1, max_delta + 1))
    if m >= 4.0:
        out = np.zeros((max_delta + 1, max_delta + 1))
        out[0, 0] = 1.0
        return out
    if m <= 0.0:
        return _delta_table_zero_t_2d(m, max_delta, nodes)
    base = _delta_table_zero_t_2d(-m, max_delta, nodes)
    deltas = np.arange(max_delta + 1)
    signs = np.where((deltas[:, None] + deltas[None, :]) % 2, -1.0, 1.0)
    out = -signs * base
    out[0, 0] += 1.0
    return out


def _delta_table_zero_t_3d(mu, max_delta, nodes):
    """kz-slice reduction: each transverse plane is a 2D sea at effective
    potential mu + 2 cos(kz). The kz integral splits at the slice van Hove
    point cos(kz) = -mu/2 with quadratic node clustering into the kink."""
    kz_crit = np.arccos(np.clip(-mu / 2.0, -1.0, 1.0))
    x, w = _gauss_nodes(nodes)
    t = (x + 1.0) / 2.0
    wt = w / 2.0
    table = np.zeros((max_delta + 1,) * 3)
    deltas = np.arange(max_delta + 1)
    for lo, hi in ((0.0, kz_crit), (kz_crit, np.pi)):
        if hi - lo < 1e-14:
            continue
        # cluster toward the shared kink endpoint (hi for the lower piece,
        # lo for the upper piece)
        anchor, span = (hi, lo - hi) if lo == 0.0 else (lo, hi - lo)
        kz = anchor + span * t ** 2
        jac = np.abs(2.0 * span * t) * wt
        w2 = np.stack([
            _zero_t_2d_any_filling(mu + 2.0 * np.cos(k), max_delta, nodes)
            for k in kz])
        cos_z = np.cos(np.outer(kz, deltas)) * jac[:, None]
        table += np.einsum("zxy,zd->xyd", w2, cos_z) / np.pi
    return table


def _delta_table(dim, mu, beta, max_delta, nodes):
    if np.isinf(beta):
        if dim == 2:
            return _delta_table_zero_t_2d(mu, max_delta, nodes)
        return _delta_table_zero_t_3d(mu, max_delta, nodes)
    return _delta_table_finite(dim, mu, beta, max_delta, nodes)


def free_fermion_correlation(dim, mu, beta, region, nodes=256):
    """Correlation matrix <c^dag_r c_r'> over the listed lattice coordinates.

    dim is 2 or 3; beta=np.inf selects the ground state. Coordinates are
    integer tuples; entries depend only on the separation, computed once per
    distinct |delta| and gathered.
    """
    if dim not in (2, 3):
        raise ValueError(f"dim must be 2 or 3, got {dim}")
    if not -2.0 <= mu <= 0.0:
        raise ValueError(f"mu={mu} outside the [-2, 0] convention")
    if beta < 0:
        raise ValueError(f"beta must be nonnegative, got {beta}")
    region = [tuple(int(c) for c in r) for r in region]
    if any(len(r) != dim for r in region):
        raise ValueError("coordinate arity does not match dim")
    if len(set(region)) != len(region):
        raise ValueError("region coordinates must be distinct")
    coords = np.asarray(region)
    max_delta = int(np.max(np.abs(coords[:, None, :] - coords[None, :, :]))) \
        if len(region) > 1 else 0

    coarse = _delta_table(dim, mu, beta, max_delta, nodes)
    fine = _delta_table(dim, mu, beta, max_delta, 2 * nodes)
    drift = np.max(np.abs(fine - coarse))
    if drift > _GATE_TOL:
        raise QuadratureNotConverged(
            f"free-fermion table moved by {drift:.2e} under node doubling "
            f"({nodes} -> {2 * nodes})")

    diffs = np.abs(coords[:, None, :] - coords[None, :, :])
    lam = fine[tuple(diffs[..., ax] for ax in range(dim))]
    return NumberCorrelation(Lambda=lam.astype(complex), L=len(region))
