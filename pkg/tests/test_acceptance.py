"""End-to-end acceptance checks, one test per release gate.

Each test exercises the toolkit the way the shipped recipes do and asserts
the quantitative targets the package promises: exact identities at tight
tolerances, decay shapes with fitted exponents or correlation lengths,
measurement-cost separations, Monte Carlo agreement, and deterministic
output. Shared heavyweight states are built once per module.
"""

import csv
import os
import time

import numpy as np
import pytest

from vpure.channels import NoiseModel, apply_channel
from vpure.config import validate_config
from vpure.dense import (DensityMatrix, expectation, gibbs_state,
                         ground_state_projector, matrix_power, partial_trace,
                         state_metrics)
from vpure.estimator import (QuadratureSpec, derangement_check,
                             deviation_direct, deviation_pure,
                             deviation_quadrature, fvp_value, lvp_value,
                             predicted_cost_ratio, shot_simulate, trace_power,
                             variance_and_cost)
from vpure.gaussian.bridge import (dense_majorana_correlation,
                                   gaussian_to_dense,
                                   random_majorana_correlation)
from vpure.gaussian.core import gaussian_lvp_observable, gaussian_purity_overlap
from vpure.gaussian.fits import fit_exponential, fit_linear
from vpure.gaussian.tfi import (tfi_energy_quadratic_form,
                                tfi_majorana_correlation)
from vpure.lattice import build_lattice, partition_regions
from vpure.recipes import run_cooling_mse, run_gaussian_decay, run_validate
from vpure.spin import Hamiltonian, pauli_from_letters, tfi_hamiltonian


def ring(n_sites, lam=2.0):
    lat = build_lattice("chain", [n_sites], periodic=True)
    return lat, tfi_hamiltonian(lat, lam)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture(scope="module")
def mitigation_data():
    """Noisy ground-state sweep on the 12-site ring at field amplitude 2.

    Returns per-noise-level deviation curves over buffer widths 1..4 and the
    full/windowed measurement costs, shared by the decay and cost tests.
    """
    lat, ham = ring(12)
    clean = ground_state_projector(ham)
    states = {0.0: clean}
    for p in (0.05, 0.1, 0.15, 0.2):
        states[p] = apply_channel(clean, NoiseModel("local_depolarizing", p))
    devs, costs = {}, {}
    for p, rho in states.items():
        full = fvp_value(rho, ham, 2)
        devs[p] = [abs(lvp_value(rho, ham.terms, lat, d, 2) - full)
                   for d in (1, 2, 3, 4)]
        cost_full = 2.0 / trace_power(rho, 2) ** 2
        cost_local = 0.0
        for support in ((0, 1), (0,)):
            part = partition_regions(lat, support, 2)
            red = partial_trace(rho, sorted(part.region_a | part.region_b))
            cost_local = max(cost_local, 2.0 / trace_power(red, 2) ** 2)
        costs[p] = (cost_full, cost_local)
    return {"devs": devs, "costs": costs}


@pytest.fixture(scope="module")
def decay_data(tmp_path_factory):
    """Full decay-study recipe at default settings, with wall-clock time."""
    out_dir = str(tmp_path_factory.mktemp("decay"))
    cfg = validate_config({"recipe": "gaussian-decay", "threads": 1})
    start = time.time()
    run_gaussian_decay(cfg, out_dir)
    elapsed = time.time() - start
    curves = read_csv(os.path.join(out_dir, "decay_curves.csv"))
    fits = read_csv(os.path.join(out_dir, "decay_fits.csv"))
    return {"curves": curves, "fits": fits, "elapsed": elapsed}


def test_purified_gibbs_matches_colder_gibbs():
    """n-copy purification of a thermal state reproduces the n-times-colder
    thermal expectation value exactly."""
    for n_sites in (4, 6, 8):
        for beta in (0.5, 1.0):
            for n in (2, 3):
                for lam in (1.0, 2.0):
                    lat, ham = ring(n_sites, lam)
                    purified = fvp_value(gibbs_state(ham, beta), ham, n)
                    cooled = expectation(gibbs_state(ham, n * beta), ham)
                    assert abs(purified - cooled) <= 1e-9, (
                        f"N={n_sites} beta={beta} n={n} lam={lam}: "
                        f"{abs(purified - cooled):.3e}")


def test_windowed_estimate_equals_full_when_buffer_covers_everything():
    """With the buffer wide enough that nothing is traced out, the windowed
    estimator degenerates to the full one."""
    cases = []
    lat, ham = ring(5)
    rho = gibbs_state(ham, 1.0)
    cases.append((abs(lvp_value(rho, ham.terms, lat, 5, 2)
                      - fvp_value(rho, ham, 2)), "N=5"))
    lat, ham = ring(6, 1.5)
    rho = gibbs_state(ham, 0.7)
    cases.append((abs(lvp_value(rho, ham.terms, lat, 3, 3)
                      - fvp_value(rho, ham, 3)), "N=6"))
    lat, ham = ring(8)
    rho = gibbs_state(ham, 0.5)
    cases.append((abs(lvp_value(rho, ham.terms, lat, 4, 2)
                      - fvp_value(rho, ham, 2)), "N=8"))
    for err, label in cases:
        assert err <= 1e-10, f"{label}: {err:.3e}"


def test_deviation_routes_agree():
    """The direct reduced-state route, the pure-state closed form, and the
    correlation-integral quadrature all compute the same deviation."""
    lat, ham = ring(8)
    psi = ground_state_projector(ham)
    part = partition_regions(lat, {3}, 1)
    obs = pauli_from_letters(8, {3: "X"})
    for n in (2, 3):
        gap = abs(deviation_direct(psi, obs, part, n)
                  - deviation_pure(psi, obs, part, n))
        assert gap <= 1e-9, f"N=8 n={n}: {gap:.3e}"
    lat, ham = ring(10)
    psi = ground_state_projector(ham)
    part = partition_regions(lat, {4}, 2)
    obs = pauli_from_letters(10, {4: "X"})
    gap = abs(deviation_direct(psi, obs, part, 2)
              - deviation_pure(psi, obs, part, 2))
    assert gap <= 1e-9, f"N=10: {gap:.3e}"

    lat, ham = ring(4)
    rho = gibbs_state(ham, 0.8)
    part = partition_regions(lat, {1}, 1)
    obs = pauli_from_letters(4, {1: "X"})
    direct = deviation_direct(rho, obs, part, 2)
    err_coarse = abs(deviation_quadrature(rho, obs, part, 2,
                                          QuadratureSpec(12, 12)) - direct)
    err_fine = abs(deviation_quadrature(rho, obs, part, 2,
                                        QuadratureSpec(24, 24)) - direct)
    assert err_fine <= 1e-4, f"N=4 quadrature error {err_fine:.3e}"
    assert err_coarse / err_fine >= 4.0, (
        f"node doubling shrank the error only {err_coarse / err_fine:.2f}x")
    lat, ham = ring(6, 1.2)
    rho = gibbs_state(ham, 0.6)
    part = partition_regions(lat, {2}, 1)
    obs = pauli_from_letters(6, {2: "X"})
    direct = deviation_direct(rho, obs, part, 2)
    err = abs(deviation_quadrature(rho, obs, part, 2,
                                   QuadratureSpec(24, 24)) - direct)
    assert err <= 1e-4, f"N=6 quadrature error {err:.3e}"


def test_copy_shift_operator_reproduces_trace_powers():
    """The explicitly built cyclic-shift operator on stacked copies gives the
    same traces as the matrix-power formulas, fully and on a window."""
    for n_sites in (4, 5):
        lat, ham = ring(n_sites)
        rho = gibbs_state(ham, 0.8)
        for letter in ("X", "Z"):
            obs = pauli_from_letters(n_sites, {1: letter})
            residual = derangement_check(rho, obs, 2)
            assert residual <= 1e-10, f"N={n_sites} {letter}: {residual:.3e}"
    lat, ham = ring(6)
    rho = gibbs_state(ham, 0.8)
    part = partition_regions(lat, {2}, 1)
    obs = pauli_from_letters(6, {2: "X"})
    residual = derangement_check(rho, obs, 2, mode="lvp", partition=part)
    assert residual <= 1e-10, f"windowed: {residual:.3e}"


def test_window_bias_decays_exponentially_with_buffer(mitigation_data):
    """On the noisy 12-site ground state the energy gap between windowed and
    full purification shrinks geometrically as the buffer widens."""
    for p, devs in sorted(mitigation_data["devs"].items()):
        ratios = [devs[i + 1] / devs[i] for i in range(3)]
        assert all(r < 0.7 for r in ratios), f"p={p} ratios {ratios}"
        fit = fit_linear([1, 2, 3, 4], np.log(devs))
        assert fit["r_squared"] >= 0.95, (
            f"p={p} log-linear R^2 {fit['r_squared']:.4f}")


def test_windowing_cuts_measurement_cost(mitigation_data):
    """Windowed purification needs far fewer shots than full purification on
    the noisy ground state, and the free-energy estimate predicts the
    thermal-state cost ratio to within a quarter in log scale."""
    cost_full, cost_local = mitigation_data["costs"][0.15]
    assert cost_full / cost_local >= 5.0, (
        f"cost ratio {cost_full / cost_local:.2f}")

    lat, ham = ring(10)
    rho = gibbs_state(ham, 1.0)
    part = partition_regions(lat, {4, 5}, 2)
    obs = pauli_from_letters(10, {4: "Z", 5: "Z"})
    cost_f = variance_and_cost(rho, obs, 2)["cost"]
    cost_l = variance_and_cost(rho, obs, 2, mode="lvp",
                               partition=part)["cost"]
    h_ab = tfi_hamiltonian(build_lattice("chain", [6]), 2.0)
    predicted = predicted_cost_ratio(ham, h_ab, 1.0, 2, 4)
    measured = cost_l / cost_f
    rel = abs(np.log(predicted) - np.log(measured)) / abs(np.log(measured))
    assert rel <= 0.25, f"log ratio mismatch {rel:.3f}"


def test_shot_noise_variance_matches_analytic_formula():
    """Monte Carlo scatter of the ratio estimator agrees with the
    delta-method variance on noisy-ground-state and thermal inputs."""
    lat, ham = ring(6)
    noisy = apply_channel(ground_state_projector(ham),
                          NoiseModel("local_depolarizing", 0.1))
    gibbs = gibbs_state(tfi_hamiltonian(lat, 1.0), 1.0)
    part = partition_regions(lat, {1}, 1)
    obs = pauli_from_letters(6, {1: "X"})
    n_shot, reps = 10 ** 5, 200
    for label, rho in (("noisy", noisy), ("thermal", gibbs)):
        for mode in ("fvp", "lvp"):
            kw = {"mode": mode,
                  "partition": part if mode == "lvp" else None}
            analytic = variance_and_cost(rho, obs, 2, **kw)["variance"]
            vals = [shot_simulate(rho, obs, 2, n_shot=n_shot, seed=(17, r),
                                  **kw).value for r in range(reps)]
            empirical = float(np.var(vals, ddof=1))
            predicted = analytic / (n_shot // 2)
            bound = 5.0 * predicted * np.sqrt(2.0 / (reps - 1))
            assert abs(empirical - predicted) <= bound, (
                f"{label}/{mode}: |{empirical:.3e} - {predicted:.3e}| "
                f"> {bound:.3e}")


def test_mse_scales_inversely_in_shots_and_linearly_in_size(tmp_path):
    """The error measure falls like one over the shot count at fixed size;
    across sizes the windowed error grows linearly while the full-system
    error grows exponentially."""
    start = time.time()
    shots = [2 ** k for k in range(8, 17)]
    chi_l, chi_f = [], []
    for n_shot in shots:
        cfg = validate_config({"recipe": "cooling-mse", "backend": "dense",
                               "threads": 1, "n_sites_list": [8],
                               "d_list": [2], "n_shot": n_shot})
        out_dir = str(tmp_path / f"shots{n_shot}")
        os.makedirs(out_dir)
        out = run_cooling_mse(cfg, out_dir)
        row = read_csv(out["csv"][0])[0]
        chi_l.append(float(row["chi_lvp"]))
        chi_f.append(float(row["chi_fvp"]))
    for label, chi in (("windowed", chi_l), ("full", chi_f)):
        slope = fit_linear(np.log(shots), np.log(chi))["slope"]
        assert abs(slope + 1.0) <= 0.05, f"{label} slope {slope:.4f}"

    sizes = [16, 24, 32, 48, 64, 96]
    cfg = validate_config({"recipe": "cooling-mse", "backend": "gaussian",
                           "threads": 1, "n_sites_list": sizes,
                           "d_list": [2]})
    out_dir = str(tmp_path / "sizes")
    os.makedirs(out_dir)
    out = run_cooling_mse(cfg, out_dir)
    rows = read_csv(out["csv"][0])
    chi_l = [float(r["chi_lvp"]) for r in rows]
    chi_f = [float(r["chi_fvp"]) for r in rows]
    linear = fit_linear(sizes, chi_l)
    assert linear["r_squared"] >= 0.95, (
        f"windowed growth R^2 {linear['r_squared']:.4f}")
    growth = (chi_l[-1] / chi_l[0]) / (sizes[-1] / sizes[0])
    assert growth <= 1.5, f"superlinear windowed growth factor {growth:.2f}"
    log_full = fit_linear(sizes, np.log(chi_f))
    assert log_full["r_squared"] >= 0.95, (
        f"full-system log growth R^2 {log_full['r_squared']:.4f}")
    assert log_full["slope"] > 0.0
    assert time.time() - start <= 1800.0


def test_uniform_noise_leaves_purified_values_unchanged():
    """Globally depolarized states purify back to the clean expectation
    values for every local term at system size 10."""
    lat, ham = ring(10)
    clean = ground_state_projector(ham)
    base = [fvp_value(clean, term.pauli, 2) for term in ham.terms]
    for p in (0.1, 0.2, 0.3):
        noisy = apply_channel(clean, NoiseModel("global_depolarizing", p))
        for term, reference in zip(ham.terms, base):
            shift = abs(fvp_value(noisy, term.pauli, 2) - reference)
            assert shift <= 1e-3, f"p={p} {term.pauli}: {shift:.3e}"


def test_correlation_backend_matches_dense_backend():
    """Purity, overlap, and purified observables computed from correlation
    matrices match the dense reconstruction; thermal chain energies match
    dense thermal states."""
    rng = np.random.default_rng(5)
    for n_modes in (2, 3, 4):
        for pure in (False, True):
            corr = random_majorana_correlation(n_modes, rng, pure=pure)
            rho = gaussian_to_dense(corr)
            purity_gap = abs(gaussian_purity_overlap(corr)["purity"]
                             - trace_power(rho, 2))
            assert purity_gap <= 1e-8, f"L={n_modes}: {purity_gap:.3e}"
            other = random_majorana_correlation(n_modes, rng)
            rho_other = gaussian_to_dense(other)
            overlap = gaussian_purity_overlap(corr, other)["overlap"]
            dense_overlap = float(np.einsum("ij,ji->", rho.matrix,
                                            rho_other.matrix).real)
            assert abs(overlap - dense_overlap) <= 1e-8
            squared = matrix_power(rho, 2) / trace_power(rho, 2)
            back = dense_majorana_correlation(
                DensityMatrix(matrix=squared, sites=rho.sites))
            quad = np.zeros((2 * n_modes, 2 * n_modes), dtype=complex)
            quad[0, 1] = 1j
            mapped = gaussian_lvp_observable(corr, 2, quad)
            assert abs(mapped - (1j * back.M[0, 1]).real) <= 1e-8

    for n_sites in (4, 6):
        lat, ham = ring(n_sites)
        dense_density = expectation(gibbs_state(ham, 1.0), ham) / n_sites
        corr = tfi_majorana_correlation(1.0, 2.0, n_sites, n_sites=n_sites)
        quad = tfi_energy_quadratic_form(2.0, n_sites, bonds="ring")
        gauss_density = gaussian_lvp_observable(corr, 1, quad) / n_sites
        assert abs(dense_density - gauss_density) <= 1e-6, (
            f"N={n_sites}: {abs(dense_density - gauss_density):.3e}")


def test_critical_chain_deviation_follows_three_halves_power(decay_data):
    """At the critical point the windowed-versus-exact subsystem distance
    falls off with separation to the power 3/2 for blocks of 2 and 4."""
    fits = [f for f in decay_data["fits"] if f["study"] == "1d-critical"]
    assert len(fits) == 2
    for fit in fits:
        exponent = float(fit["exponent"])
        assert abs(exponent - 1.5) <= 0.15, (
            f"block {fit['n_a']}: exponent {exponent:.4f}")


def test_lattice_deviation_decay_profiles(decay_data):
    """Square- and cubic-lattice deviation curves: thermal curves decay
    exponentially with a correlation length growing in inverse temperature;
    ground-state square-lattice curves follow the 3/2 power law."""
    assert decay_data["elapsed"] <= 900.0, (
        f"decay recipe took {decay_data['elapsed']:.0f}s")
    for study in ("2d-thermal", "3d-thermal"):
        xi_by_beta = {}
        for fit in decay_data["fits"]:
            if fit["study"] != study:
                continue
            r2 = float(fit["r_squared"])
            assert r2 >= 0.99, f"{study} beta={fit['beta']}: R^2 {r2:.4f}"
            xi_by_beta[float(fit["beta"])] = float(fit["xi"])
        betas = sorted(xi_by_beta)
        assert len(betas) >= 2
        for cold, hot in zip(betas[1:], betas[:-1]):
            assert xi_by_beta[cold] > xi_by_beta[hot], (
                f"{study}: xi({cold})={xi_by_beta[cold]:.2f} not above "
                f"xi({hot})={xi_by_beta[hot]:.2f}")
    zero_fits = [f for f in decay_data["fits"] if f["study"] == "2d-zero"]
    assert len(zero_fits) == 2
    for fit in zero_fits:
        exponent = float(fit["exponent"])
        assert abs(exponent - 1.5) <= 0.2, (
            f"mu={fit['mu']}: exponent {exponent:.4f}")


def test_thermal_perturbation_bound_holds():
    """Trace distance between thermal states of nearby Hamiltonians never
    exceeds twice the inverse temperature times the perturbation norm."""
    rng = np.random.default_rng(11)
    for _ in range(200):
        n_sites = int(rng.integers(2, 7))
        dim = 1 << n_sites
        beta = float(rng.uniform(0.1, 1.5))
        a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        h1 = (a + a.conj().T) / 2
        b = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        v = (b + b.conj().T) / 2
        v *= float(rng.uniform(0.01, 0.5)) / np.linalg.norm(v, 2)
        ham1 = Hamiltonian(matrix=h1, terms=(), n_sites=n_sites)
        ham2 = Hamiltonian(matrix=h1 + v, terms=(), n_sites=n_sites)
        dist = state_metrics(gibbs_state(ham1, beta),
                             gibbs_state(ham2, beta))["trace_distance"]
        bound = 2.0 * beta * np.linalg.norm(v, 2)
        assert dist <= bound, f"{dist:.4e} > {bound:.4e}"


def test_validation_recipe_is_deterministic(tmp_path):
    """Two runs of the validation recipe with the same seed produce
    byte-identical reports."""
    cfg = validate_config({"recipe": "validate", "threads": 1, "seed": 7})
    outputs = []
    for name in ("first", "second"):
        out_dir = str(tmp_path / name)
        os.makedirs(out_dir)
        run_validate(cfg, out_dir)
        with open(os.path.join(out_dir, "validate_report.csv"), "rb") as fh:
            outputs.append(fh.read())
    assert outputs[0] == outputs[1]
