"""Experiment recipes behind the command-line entry point.

Each recipe takes a validated config and an output directory, runs its sweep
(cells in parallel, rows sorted before writing), and returns a summary dict.
CSV output: header row, CRLF line endings, floats with 17 significant digits,
and a sidecar JSON with the effective config next to every file.
"""

import csv
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .channels import NoiseModel, apply_channel
from .config import resolve_backend, resolve_threads, write_sidecar
from .dense import expectation, gibbs_state, ground_state_projector, partial_trace
from .errors import BackendMismatch
from .estimator import (QuadratureSpec, derangement_check, deviation_direct,
                        deviation_pure, deviation_quadrature, fvp_value,
                        lvp_value, shot_simulate, trace_pauli_power,
                        trace_power, variance_and_cost)
from .gaussian.bridge import (dense_majorana_correlation, gaussian_to_dense,
                              random_majorana_correlation)
from .gaussian.core import (MajoranaCorrelation, NumberCorrelation,
                            gaussian_log_trace_power, gaussian_lvp_observable,
                            gaussian_purity_overlap, purification_map)
from .gaussian.fits import fit_exponential, fit_power_law
from .gaussian.freefermion import free_fermion_correlation, manhattan_ball
from .gaussian.tfi import tfi_majorana_correlation, tfi_ring_log_partition
from .lattice import build_lattice, partition_regions
from .spin import pauli_from_letters, tfi_hamiltonian


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return "%.17g" % float(value)


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return path


def _run_cells(fn, cells, threads):
    if threads <= 1 or len(cells) <= 1:
        return [fn(c) for c in cells]
    with ThreadPoolExecutor(max_workers=min(threads, len(cells))) as ex:
        return list(ex.map(fn, cells))


def _maybe_svg(cfg, out_dir, name, xlabel, ylabel, curves, logy=False):
    if not cfg.get("svg"):
        return None
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        return None
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for label, x, y in curves:
        ax.plot(x, y, marker="o", markersize=3, label=str(label))
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if logy:
        ax.set_yscale("log")
    if curves and curves[0][0] is not None:
        ax.legend(fontsize=7)
    fig.tight_layout()
    path = os.path.join(out_dir, name)
    fig.savefig(path)
    plt.close(fig)
    return path


def _shot_variance(t1, t2):
    return (1.0 - t1 ** 2) / t2 ** 2 + t1 ** 2 * (1.0 - t2 ** 2) / t2 ** 4


def _ring_terms(n_sites, lam):
    """Representative bond and site terms of the periodic TFI chain; each
    appears n_sites times by translation invariance."""
    bond = pauli_from_letters(n_sites, {0: "Z", 1: "Z"})
    site = pauli_from_letters(n_sites, {0: "X"})
    return ((-1.0, bond, (0, 1)), (-float(lam), site, (0,)))


def _cooling_cell_dense(n_sites, d, lam, beta, n, n_shot):
    lat = build_lattice("chain", [n_sites], periodic=True)
    ham = tfi_hamiltonian(lat, lam)
    rho = gibbs_state(ham, beta)
    t2_f = trace_power(rho, n)
    out = {"bias_lvp": 0.0, "var_lvp": 0.0, "var_fvp": 0.0}
    for coeff, pauli, support in _ring_terms(n_sites, lam):
        t1_f = trace_pauli_power(rho, pauli, n)
        fvp = t1_f / t2_f
        var_f = _shot_variance(t1_f, t2_f)
        part = partition_regions(lat, support, d)
        keep = sorted(part.region_a | part.region_b)
        red = partial_trace(rho, keep)
        t2_l = trace_power(red, n)
        t1_l = trace_pauli_power(red, pauli.restrict(keep), n)
        lvp = t1_l / t2_l
        var_l = _shot_variance(t1_l, t2_l)
        c2 = coeff ** 2
        out["bias_lvp"] += n_sites * coeff * (lvp - fvp)
        out["var_lvp"] += n_sites * c2 * var_l
        out["var_fvp"] += n_sites * c2 * var_f
    out["chi_lvp"] = out["bias_lvp"] ** 2 + out["var_lvp"] / n_shot
    out["chi_fvp"] = out["var_fvp"] / n_shot
    return out


def _cooling_cell_gaussian(n_sites, d, lam, beta, n, n_shot):
    if 2 * d + 2 >= n_sites:
        raise BackendMismatch(
            f"buffer d={d} wraps a ring of {n_sites} sites; the gaussian "
            "backend handles proper windows only")
    m_beta = tfi_majorana_correlation(beta, lam, n_sites, n_sites=n_sites).M
    m_cool = tfi_majorana_correlation(n * beta, lam, n_sites, n_sites=n_sites).M
    log_z1 = tfi_ring_log_partition(beta, lam, n_sites)
    log_zn = tfi_ring_log_partition(n * beta, lam, n_sites)
    t2_f = np.exp(log_zn - n * log_z1)
    # (coeff, window length, i<w_a w_b> index pair, exact cooled value)
    specs = ((-float(lam), 2 * d + 1, (2 * d, 2 * d + 1),
              (1j * m_cool[0, 1]).real),
             (-1.0, 2 * d + 2, (2 * d + 1, 2 * d + 2),
              (1j * m_cool[1, 2]).real))
    out = {"bias_lvp": 0.0, "var_lvp": 0.0, "var_fvp": 0.0}
    for coeff, win, (ia, ib), fvp in specs:
        t1_f = fvp * t2_f
        var_f = _shot_variance(t1_f, t2_f)
        corr = MajoranaCorrelation(M=m_beta[:2 * win, :2 * win].copy(), L=win)
        quad = np.zeros((2 * win, 2 * win), dtype=complex)
        quad[ia, ib] = 1j
        lvp = gaussian_lvp_observable(corr, n, quad)
        t2_l = np.exp(gaussian_log_trace_power(corr, n))
        t1_l = lvp * t2_l
        var_l = _shot_variance(t1_l, t2_l)
        c2 = coeff ** 2
        out["bias_lvp"] += n_sites * coeff * (lvp - fvp)
        out["var_lvp"] += n_sites * c2 * var_l
        out["var_fvp"] += n_sites * c2 * var_f
    out["chi_lvp"] = out["bias_lvp"] ** 2 + out["var_lvp"] / n_shot
    out["chi_fvp"] = out["var_fvp"] / n_shot
    return out


def run_cooling_mse(cfg, out_dir):
    lam, beta, n, n_shot = cfg["lam"], cfg["beta"], cfg["n_copies"], cfg["n_shot"]
    cells = [(n_sites, d) for n_sites in cfg["n_sites_list"] for d in cfg["d_list"]]

    def run(cell):
        n_sites, d = cell
        if resolve_backend(cfg, n_sites) == "dense":
            vals = _cooling_cell_dense(n_sites, d, lam, beta, n, n_shot)
        else:
            vals = _cooling_cell_gaussian(n_sites, d, lam, beta, n, n_shot)
        return (n_sites, d, vals["chi_lvp"], vals["chi_fvp"],
                vals["bias_lvp"], vals["var_lvp"], vals["var_fvp"])

    rows = sorted(_run_cells(run, cells, resolve_threads(cfg)))
    path = _write_csv(os.path.join(out_dir, "cooling_mse.csv"),
                      ["N", "d", "chi_lvp", "chi_fvp", "bias_lvp",
                       "var_lvp", "var_fvp"], rows)
    sidecar = write_sidecar(cfg, path)
    curves = []
    for d in cfg["d_list"]:
        sub = [r for r in rows if r[1] == d]
        curves.append((f"LVP d={d}", [r[0] for r in sub], [r[2] for r in sub]))
    sub = [r for r in rows if r[1] == cfg["d_list"][0]]
    curves.append(("FVP", [r[0] for r in sub], [r[3] for r in sub]))
    svg = _maybe_svg(cfg, out_dir, "cooling_mse.svg", "N", "MSE", curves, logy=True)
    return {"recipe": "cooling-mse", "csv": [path], "sidecar": [sidecar],
            "svg": [svg] if svg else [], "rows": len(rows)}


def run_mitigate(cfg, out_dir):
    n_sites, lam, n = cfg["n_sites"], cfg["lam"], cfg["n_copies"]
    lat = build_lattice("chain", [n_sites], periodic=True)
    ham = tfi_hamiltonian(lat, lam)
    clean = ground_state_projector(ham)
    exact0 = expectation(clean, ham)
    noisy = {p: apply_channel(clean, NoiseModel(cfg["noise_kind"], p))
             for p in cfg["p_list"]}
    cells = [(p, d) for p in cfg["p_list"] for d in cfg["d_list"]]

    def run(cell):
        p, d = cell
        rho = noisy[p]
        fvp = fvp_value(rho, ham, n)
        lvp = lvp_value(rho, ham.terms, lat, d, n)
        t2 = trace_power(rho, n)
        cost_f = 2.0 / t2 ** 2
        cost_l = 0.0
        for _, pauli, support in _ring_terms(n_sites, lam):
            part = partition_regions(lat, support, d)
            red = partial_trace(rho, sorted(part.region_a | part.region_b))
            cost_l = max(cost_l, 2.0 / trace_power(red, n) ** 2)
        return (n_sites, p, d, n, fvp, lvp, lvp - fvp, exact0, cost_f, cost_l)

    rows = sorted(_run_cells(run, cells, resolve_threads(cfg)))
    path = _write_csv(os.path.join(out_dir, "mitigate.csv"),
                      ["N", "p", "d", "n", "fvp_value", "lvp_value",
                       "deviation", "exact_noiseless", "cost_fvp", "cost_lvp"],
                      rows)
    sidecar = write_sidecar(cfg, path)
    curves = [(f"d={d}", [r[1] for r in rows if r[2] == d],
               [abs(r[6]) for r in rows if r[2] == d]) for d in cfg["d_list"]]
    svg = _maybe_svg(cfg, out_dir, "mitigate.svg", "p", "|LVP-FVP|",
                     curves, logy=True)
    return {"recipe": "mitigate", "csv": [path], "sidecar": [sidecar],
            "svg": [svg] if svg else [], "rows": len(rows)}


def run_unified(cfg, out_dir):
    n_sites, lam, beta, n = (cfg["n_sites"], cfg["lam"], cfg["beta"],
                             cfg["n_copies"])
    lat = build_lattice("chain", [n_sites], periodic=True)
    ham = tfi_hamiltonian(lat, lam)
    rho = gibbs_state(ham, beta)
    rho_noisy = apply_channel(rho, NoiseModel(cfg["noise_kind"], cfg["noise_p"]))
    fvp_noisy = fvp_value(rho_noisy, ham, n)
    fvp_clean = fvp_value(rho, ham, n)

    def run(d):
        lvp = lvp_value(rho_noisy, ham.terms, lat, d, n)
        return (n_sites, cfg["noise_p"], d, n, lvp, fvp_noisy, fvp_clean,
                abs(lvp - fvp_noisy))

    rows = sorted(_run_cells(run, list(cfg["d_list"]), resolve_threads(cfg)))
    path = _write_csv(os.path.join(out_dir, "unified.csv"),
                      ["N", "p", "d", "n", "lvp_value", "fvp_noisy",
                       "fvp_noiseless", "deviation_abs"], rows)
    sidecar = write_sidecar(cfg, path)
    svg = _maybe_svg(cfg, out_dir, "unified.svg", "d", "energy",
                     [("LVP", [r[2] for r in rows], [r[4] for r in rows]),
                      ("FVP noisy", [r[2] for r in rows], [r[5] for r in rows]),
                      ("FVP clean", [r[2] for r in rows], [r[6] for r in rows])])
    return {"recipe": "unified", "csv": [path], "sidecar": [sidecar],
            "svg": [svg] if svg else [], "rows": len(rows)}


def _decay_1d_critical(cfg):
    """Curves are reported against d = graph distance from the observable
    block to the traced-out environment; a buffer of radius r on each side
    puts the environment at d = r + 1."""
    rows, fits = [], []
    n = cfg["n_copies"]
    radii = list(range(1, cfg["d_max_1d"]))
    seps = [r + 1 for r in radii]
    for n_a in cfg["n_a_list"]:
        big = tfi_majorana_correlation(np.inf, 1.0, n_a + 2 * radii[-1],
                                       nodes=cfg["quad_nodes"]).M
        vals = []
        for r in radii:
            win = n_a + 2 * r
            corr = MajoranaCorrelation(M=big[:2 * win, :2 * win].copy(), L=win)
            pur = purification_map(corr, n)
            sl = slice(2 * r, 2 * (r + n_a))
            lvp_a = MajoranaCorrelation(M=pur.M[sl, sl].copy(), L=n_a)
            exact_a = MajoranaCorrelation(M=big[sl, sl].copy(), L=n_a)
            hs = gaussian_purity_overlap(lvp_a, exact_a)["hs_distance"]
            vals.append(hs)
            rows.append(("1d-critical", 1, None, None, n_a, r + 1, hs))
        fit = fit_power_law(seps, vals, drop=2)
        fits.append(("1d-critical", 1, None, None, n_a, "power",
                     fit["exponent"], None, fit["amplitude"], fit["r_squared"]))
    return rows, fits


def _ball_curve(dim, mu, beta, n, d_max, nodes):
    """Deviation |m_LVP - m_FVP| of the center-mode occupation on
    Manhattan-ball windows, indexed by the center-to-environment separation
    d = ball radius + 1, up to d_max."""
    ball = manhattan_ball(dim, d_max - 1)
    index = {pt: i for i, pt in enumerate(ball)}
    full = free_fermion_correlation(dim, mu, beta, ball, nodes=nodes).Lambda
    origin = (0,) * dim
    if np.isinf(beta):
        m_ref = full[index[origin], index[origin]].real
    else:
        cooled = free_fermion_correlation(dim, mu, n * beta, [origin],
                                          nodes=nodes)
        m_ref = cooled.Lambda[0, 0].real
    curve = []
    for r in range(1, d_max):
        sub = manhattan_ball(dim, r)
        idx = [index[pt] for pt in sub]
        lam_w = full[np.ix_(idx, idx)]
        pur = purification_map(NumberCorrelation(Lambda=lam_w, L=len(idx)), n)
        center = sub.index(origin)
        m_lvp = pur.Lambda[center, center].real
        curve.append((r + 1, abs(m_lvp - m_ref)))
    return curve


def _decay_2d_zero(cfg):
    rows, fits = [], []
    n = cfg["n_copies"]
    for mu in cfg["mu_list"]:
        curve = _ball_curve(2, mu, np.inf, n, cfg["d_max_2d"], cfg["quad_nodes"])
        rows += [("2d-zero", 2, mu, None, None, d, v) for d, v in curve]
        fit = fit_power_law([c[0] for c in curve], [c[1] for c in curve], drop=2)
        fits.append(("2d-zero", 2, mu, None, None, "power",
                     fit["exponent"], None, fit["amplitude"], fit["r_squared"]))
    return rows, fits


def _decay_thermal(cfg, dim, d_max):
    rows, fits = [], []
    n = cfg["n_copies"]
    study = f"{dim}d-thermal"
    mu = cfg["mu_thermal"]
    for beta in cfg["beta_list"]:
        curve = _ball_curve(dim, mu, beta, n, d_max, cfg["quad_nodes"])
        rows += [(study, dim, mu, beta, None, d, v) for d, v in curve]
        fit = fit_exponential([c[0] for c in curve], [c[1] for c in curve], drop=2)
        fits.append((study, dim, mu, beta, None, "exponential",
                     None, fit["xi"], fit["amplitude"], fit["r_squared"]))
    return rows, fits


def run_gaussian_decay(cfg, out_dir):
    study = cfg["study"]
    parts = []
    if study in ("all", "1d-critical"):
        parts.append(_decay_1d_critical(cfg))
    if study in ("all", "2d-zero"):
        parts.append(_decay_2d_zero(cfg))
    if study in ("all", "2d-thermal"):
        parts.append(_decay_thermal(cfg, 2, cfg["d_max_thermal"]))
    if study in ("all", "3d-thermal"):
        parts.append(_decay_thermal(cfg, 3, cfg["d_max_3d"]))
    def order(r):
        return (r[0], r[1],
                -10.0 if r[2] is None else r[2],
                -10.0 if r[3] is None else r[3],
                -1 if r[4] is None else r[4],
                r[5])

    rows = sorted((r for p in parts for r in p[0]), key=order)
    fit_rows = sorted((f for p in parts for f in p[1]), key=order)
    path = _write_csv(os.path.join(out_dir, "decay_curves.csv"),
                      ["study", "dim", "mu", "beta", "n_a", "d", "value"], rows)
    fit_path = _write_csv(os.path.join(out_dir, "decay_fits.csv"),
                          ["study", "dim", "mu", "beta", "n_a", "kind",
                           "exponent", "xi", "amplitude", "r_squared"], fit_rows)
    sidecars = [write_sidecar(cfg, path)]
    groups = {}
    for r in rows:
        key = f"{r[0]} mu={r[2]} beta={r[3]} n_a={r[4]}"
        groups.setdefault(key, []).append((r[5], r[6]))
    svg = _maybe_svg(cfg, out_dir, "decay_curves.svg", "d", "deviation",
                     [(k, [p[0] for p in v], [p[1] for p in v])
                      for k, v in sorted(groups.items())], logy=True)
    return {"recipe": "gaussian-decay", "csv": [path, fit_path],
            "sidecar": sidecars, "svg": [svg] if svg else [], "rows": len(rows)}


def _validate_checks(cfg):
    """Yield (check, instance, measured, bound, ok) tuples."""
    seed = cfg["seed"]

    for n_sites in (4, 6):
        for beta in (0.5, 1.0):
            for n in (2, 3):
                for lam in (1.0, 2.0):
                    lat = build_lattice("chain", [n_sites], periodic=True)
                    ham = tfi_hamiltonian(lat, lam)
                    rho = gibbs_state(ham, beta)
                    cooled = gibbs_state(ham, n * beta)
                    err = abs(fvp_value(rho, ham, n) - expectation(cooled, ham))
                    yield ("cooling-identity",
                           f"N={n_sites},beta={beta},n={n},lam={lam}",
                           err, 1e-9, err <= 1e-9)

    lat = build_lattice("chain", [5])
    ham = tfi_hamiltonian(lat, 2.0)
    rho = gibbs_state(ham, 1.0)
    full = fvp_value(rho, ham, 2)
    whole = lvp_value(rho, ham.terms, lat, 5, 2)
    err = abs(whole - full)
    yield ("lvp-whole-window", "N=5,d=N", err, 1e-10, err <= 1e-10)

    lat = build_lattice("chain", [6], periodic=True)
    ham = tfi_hamiltonian(lat, 2.0)
    psi = ground_state_projector(ham)
    obs = pauli_from_letters(6, {2: "X"})
    part = partition_regions(lat, {2}, 1)
    direct = deviation_direct(psi, obs, part, 2)
    pure = deviation_pure(psi, obs, part, 2)
    err = abs(direct - pure)
    yield ("route-pure", "N=6,d=1,GS", err, 1e-9, err <= 1e-9)

    lat = build_lattice("chain", [4], periodic=True)
    ham = tfi_hamiltonian(lat, 2.0)
    rho = gibbs_state(ham, 1.0)
    obs = pauli_from_letters(4, {1: "X"})
    part = partition_regions(lat, {1}, 1)
    direct = deviation_direct(rho, obs, part, 2)
    quad = deviation_quadrature(rho, obs, part, 2,
                                QuadratureSpec(nodes_lambda=16, nodes_tau=16))
    err = abs(direct - quad)
    yield ("route-quadrature", "N=4,d=1,Gibbs", err, 1e-4, err <= 1e-4)

    for n_sites, n, mode in ((4, 2, "fvp"), (5, 2, "lvp"), (3, 3, "fvp")):
        lat = build_lattice("chain", [n_sites], periodic=True)
        ham = tfi_hamiltonian(lat, 2.0)
        rho = gibbs_state(ham, 0.8)
        obs = pauli_from_letters(n_sites, {1: "Z"})
        part = partition_regions(lat, {1}, 1) if mode == "lvp" else None
        err = derangement_check(rho, obs, n, mode=mode, partition=part)
        yield ("derangement", f"N={n_sites},n={n},{mode}", err, 1e-10,
               err <= 1e-10)

    rng = np.random.default_rng(seed)
    corr = random_majorana_correlation(3, rng)
    rho = gaussian_to_dense(corr)
    back = dense_majorana_correlation(rho)
    err = float(np.max(np.abs(back.M - corr.M)))
    yield ("gaussian-roundtrip", "L=3", err, 1e-8, err <= 1e-8)
    pur = gaussian_purity_overlap(corr)["purity"]
    err = abs(pur - trace_power(rho, 2))
    yield ("gaussian-purity", "L=3", err, 1e-8, err <= 1e-8)

    n_sites, lam, beta = 8, 2.0, 1.0
    lat = build_lattice("chain", [n_sites], periodic=True)
    ham = tfi_hamiltonian(lat, lam)
    rho = gibbs_state(ham, beta)
    corr = tfi_majorana_correlation(beta, lam, 4, n_sites=n_sites)
    x0 = expectation(partial_trace(rho, [0, 1, 2, 3]),
                     pauli_from_letters(4, {0: "X"}))
    err = abs((1j * corr.M[0, 1]).real - x0)
    yield ("gaussian-vs-dense", "N=8,window=4,X", err, 1e-6, err <= 1e-6)

    lat = build_lattice("chain", [4], periodic=True)
    ham = tfi_hamiltonian(lat, 1.0)
    rho = gibbs_state(ham, 1.0)
    obs = pauli_from_letters(4, {0: "X"})
    vc = variance_and_cost(rho, obs, 2)
    n_shot, reps = 2000, 400
    vals = [shot_simulate(rho, obs, 2, n_shot=n_shot, seed=(seed, r)).value
            for r in range(reps)]
    emp = float(np.var(vals, ddof=1))
    pred = vc["variance"] / (n_shot // 2)
    bound = 5.0 * pred * np.sqrt(2.0 / (reps - 1))
    err = abs(emp - pred)
    yield ("variance-vs-mc", f"N=4,n_shot={n_shot},reps={reps}", err, bound,
           err <= bound)


def run_validate(cfg, out_dir):
    rows = []
    failures = 0
    for check, instance, measured, bound, ok in _validate_checks(cfg):
        rows.append((check, instance, measured, bound,
                     "pass" if ok else "fail"))
        failures += 0 if ok else 1
    path = _write_csv(os.path.join(out_dir, "validate_report.csv"),
                      ["check", "instance", "measured", "bound", "status"],
                      rows)
    sidecar = write_sidecar(cfg, path)
    return {"recipe": "validate", "csv": [path], "sidecar": [sidecar],
            "rows": len(rows), "failures": failures}


_RUNNERS = {
    "cooling-mse": run_cooling_mse,
    "mitigate": run_mitigate,
    "unified": run_unified,
    "gaussian-decay": run_gaussian_decay,
    "validate": run_validate,
}


def run_experiment(cfg, out_dir):
    """Run the configured recipe; returns a summary dict with output paths."""
    os.makedirs(out_dir, exist_ok=True)
    return _RUNNERS[cfg["recipe"]](cfg, out_dir)
