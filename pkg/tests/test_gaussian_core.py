import numpy as np
import pytest

from vpure import (MajoranaCorrelation, NumberCorrelation, antisym_canonical,
                   purification_map, gaussian_log_trace_power,
                   gaussian_purity_overlap, mode_trace_distance,
                   gaussian_to_dense, dense_majorana_correlation,
                   jordan_wigner_majoranas, random_majorana_correlation,
                   gaussian_lvp_observable, state_metrics, DensityMatrix,
                   partial_trace, matrix_power)
from vpure.errors import (DimensionLimit, DimensionMismatch,
                          NotAValidCorrelation)


def test_jordan_wigner_anticommutation():
    gammas = jordan_wigner_majoranas(3)
    assert len(gammas) == 6
    for i, gi in enumerate(gammas):
        np.testing.assert_allclose(gi @ gi, np.eye(8), atol=1e-12)
        for gj in gammas[i + 1:]:
            np.testing.assert_allclose(gi @ gj + gj @ gi, 0.0, atol=1e-12)


def test_antisym_canonical_reconstructs():
    rng = np.random.default_rng(2)
    for n_modes in (2, 3, 5):
        a = rng.normal(size=(2 * n_modes, 2 * n_modes))
        k = a - a.T
        eps, o, det_sign = antisym_canonical(k)
        assert eps.shape == (n_modes,)
        assert np.all(eps >= 0)
        np.testing.assert_allclose(o @ o.T, np.eye(2 * n_modes), atol=1e-10)
        assert det_sign in (1.0, -1.0, 1, -1)
        blocks = np.zeros_like(k)
        for b, e in enumerate(eps):
            blocks[2 * b, 2 * b + 1] = e
            blocks[2 * b + 1, 2 * b] = -e
        np.testing.assert_allclose(o @ blocks @ o.T, k, atol=1e-9)


def test_antisym_canonical_zero_modes():
    k = np.zeros((4, 4))
    k[0, 1], k[1, 0] = 3.0, -3.0
    eps, o, _ = antisym_canonical(k)
    assert sorted(np.round(eps, 10)) == [0.0, 3.0]


def test_correlation_validation():
    m = np.zeros((4, 4), dtype=complex)
    m[0, 1], m[1, 0] = 1j * 0.5, -1j * 0.5
    m[2, 3], m[3, 2] = 1j * 0.9, -1j * 0.9
    MajoranaCorrelation(M=m, L=2).validate()
    bad = m.copy()
    bad[0, 1] = 1j * 1.5   # eigenvalue above 1
    bad[1, 0] = -1j * 1.5
    with pytest.raises(NotAValidCorrelation):
        MajoranaCorrelation(M=bad, L=2).validate()


def test_purification_map_majorana_tanh():
    m = np.zeros((2, 2), dtype=complex)
    nu = 0.6
    m[0, 1], m[1, 0] = 1j * nu, -1j * nu
    corr = MajoranaCorrelation(M=m, L=1)
    out = purification_map(corr, 2)
    expect = np.tanh(2 * np.arctanh(nu))
    assert abs(out.M[0, 1].imag - expect) < 1e-12


def test_purification_map_fixes_pure_modes():
    m = np.zeros((2, 2), dtype=complex)
    m[0, 1], m[1, 0] = 1j, -1j
    corr = MajoranaCorrelation(M=m, L=1)
    for n in (1, 2, 5):
        out = purification_map(corr, n)
        assert abs(out.M[0, 1] - 1j) < 1e-12


def test_purification_map_identity_at_one_copy():
    rng = np.random.default_rng(8)
    corr = random_majorana_correlation(3, rng)
    out = purification_map(corr, 1)
    np.testing.assert_allclose(out.M, corr.M, atol=1e-10)


def test_purification_map_number_branch():
    for xi in (0.0, 0.2, 0.5, 0.8, 1.0):
        lam = NumberCorrelation(Lambda=np.array([[xi]], dtype=complex), L=1)
        out = purification_map(lam, 3)
        denom = xi ** 3 + (1 - xi) ** 3
        ref = 0.5 if denom == 0 else xi ** 3 / denom
        assert abs(out.Lambda[0, 0].real - ref) < 1e-12


def test_purification_commutes_with_rotation():
    # rotating the Majorana basis commutes with n-copy purification
    rng = np.random.default_rng(4)
    corr = random_majorana_correlation(3, rng)
    a = rng.normal(size=(6, 6))
    from scipy.linalg import expm
    o = expm(a - a.T)
    rotated = MajoranaCorrelation(M=o @ corr.M @ o.T, L=3)
    left = purification_map(rotated, 3).M
    right = o @ purification_map(corr, 3).M @ o.T
    np.testing.assert_allclose(left, right, atol=1e-9)


def test_log_trace_power_against_dense():
    rng = np.random.default_rng(9)
    for n_modes in (2, 3):
        corr = random_majorana_correlation(n_modes, rng)
        rho = gaussian_to_dense(corr)
        for n in (2, 3):
            mine = np.exp(gaussian_log_trace_power(corr, n))
            ref = np.trace(np.linalg.matrix_power(rho.matrix, n)).real
            assert abs(mine - ref) < 1e-10


def test_purity_overlap_hs_against_dense():
    rng = np.random.default_rng(10)
    c1 = random_majorana_correlation(3, rng)
    c2 = random_majorana_correlation(3, rng)
    r1 = gaussian_to_dense(c1)
    r2 = gaussian_to_dense(c2)
    out = gaussian_purity_overlap(c1, c2)
    assert abs(out["purity"] - np.sum(np.abs(r1.matrix) ** 2)) < 1e-10
    ref_overlap = np.trace(r1.matrix @ r2.matrix).real
    assert abs(out["overlap"] - ref_overlap) < 1e-10
    ref_hs = np.linalg.norm(r1.matrix - r2.matrix)
    assert abs(out["hs_distance"] - ref_hs) < 1e-10


def test_purity_overlap_self_consistency():
    rng = np.random.default_rng(12)
    c = random_majorana_correlation(4, rng)
    out = gaussian_purity_overlap(c, c)
    assert abs(out["overlap"] - out["purity"]) < 1e-10
    assert out["hs_distance"] < 1e-6


def test_pure_correlation_has_unit_purity():
    rng = np.random.default_rng(13)
    c = random_majorana_correlation(4, rng, pure=True)
    out = gaussian_purity_overlap(c)
    assert abs(out["purity"] - 1.0) < 1e-10


def test_mode_trace_distance():
    a = NumberCorrelation(Lambda=np.array([[0.8]], dtype=complex), L=1)
    b = NumberCorrelation(Lambda=np.array([[0.3]], dtype=complex), L=1)
    assert abs(mode_trace_distance(a, b) - 0.5) < 1e-12
    big = NumberCorrelation(Lambda=np.eye(2, dtype=complex) * 0.5, L=2)
    with pytest.raises(DimensionMismatch):
        mode_trace_distance(a, big)


def test_gaussian_to_dense_limit():
    rng = np.random.default_rng(14)
    c = random_majorana_correlation(7, rng)
    with pytest.raises(DimensionLimit):
        gaussian_to_dense(c)


def test_roundtrip_random_correlations():
    rng = np.random.default_rng(15)
    for _ in range(3):
        corr = random_majorana_correlation(4, rng)
        rho = gaussian_to_dense(corr)
        back = dense_majorana_correlation(rho)
        np.testing.assert_allclose(back.M, corr.M, atol=1e-8)


def test_gaussian_lvp_observable_vs_dense():
    rng = np.random.default_rng(16)
    corr = random_majorana_correlation(3, rng)
    rho = gaussian_to_dense(corr)
    gammas = jordan_wigner_majoranas(3)
    q = np.zeros((6, 6), dtype=complex)
    q[0, 1], q[2, 3] = -1j, -0.5j   # X-type single-mode terms
    for n in (1, 2, 3):
        mine = gaussian_lvp_observable(corr, n, q)
        mat = q[0, 1] * gammas[0] @ gammas[1] + q[2, 3] * gammas[2] @ gammas[3]
        mn = np.linalg.matrix_power(rho.matrix, n)
        ref = (np.trace(mat @ mn) / np.trace(mn)).real
        assert abs(mine - ref) < 1e-10
