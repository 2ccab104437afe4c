"""Experiment configuration: JSON loading, defaults, validation, overrides.

A config is a flat JSON object. Unknown keys are rejected with the offending
field path; recipe-specific defaults fill whatever the file omits. The
effective (merged, validated) config is echoed next to each CSV as a sidecar
JSON with sorted keys so outputs carry their provenance.
"""

import json
import os

from .errors import BackendMismatch, ConfigInvalid

RECIPES = ("cooling-mse", "mitigate", "unified", "gaussian-decay", "validate")
BACKENDS = ("dense", "gaussian", "auto")
NOISE_KINDS = ("local_dephasing", "local_depolarizing", "global_depolarizing")
DENSE_MAX_SITES = 14
AUTO_DENSE_MAX = 12

# key -> (checker, description)
_SCHEMA = {
    "recipe": ("choice", RECIPES),
    "backend": ("choice", BACKENDS),
    "noise_kind": ("choice", NOISE_KINDS),
    "study": ("choice", ("all", "1d-critical", "2d-zero", "2d-thermal", "3d-thermal")),
    "n_sites": ("int", (3, 64)),
    "n_copies": ("int", (1, 6)),
    "n_shot": ("int", (2, 10 ** 9)),
    "seed": ("int", (0, 2 ** 63 - 1)),
    "threads": ("int", (1, 256)),
    "d_max_1d": ("int", (4, 200)),
    "d_max_2d": ("int", (4, 60)),
    "d_max_thermal": ("int", (4, 40)),
    "d_max_3d": ("int", (3, 12)),
    "quad_nodes": ("int", (8, 4096)),
    "lam": ("float", (0.0, 100.0)),
    "beta": ("float", (0.0, 1000.0)),
    "noise_p": ("float", (0.0, 1.0)),
    "mu_thermal": ("float", (-2.0, 0.0)),
    "n_sites_list": ("int_list", (3, 200)),
    "d_list": ("int_list", (0, 100)),
    "n_a_list": ("int_list", (1, 8)),
    "p_list": ("float_list", (0.0, 1.0)),
    "mu_list": ("float_list", (-2.0, 0.0)),
    "beta_list": ("float_list", (1e-6, 1000.0)),
    "svg": ("bool", None),
}

_DEFAULTS = {
    "cooling-mse": {
        "backend": "auto", "n_sites_list": [4, 6, 8, 10, 12, 16, 24, 32, 48,
                                            64, 96, 138],
        "d_list": [1, 2, 3], "lam": 2.0, "beta": 1.0, "n_copies": 2,
        "n_shot": 2 ** 14, "seed": 7, "svg": False,
    },
    "mitigate": {
        "backend": "auto", "n_sites": 10, "lam": 2.0, "n_copies": 2,
        "noise_kind": "local_depolarizing",
        "p_list": [0.0, 0.05, 0.1, 0.15, 0.2], "d_list": [1, 2, 3, 4],
        "n_shot": 2 ** 14, "seed": 7, "svg": False,
    },
    "unified": {
        "backend": "auto", "n_sites": 10, "lam": 2.0, "beta": 1.0,
        "n_copies": 2, "noise_kind": "local_depolarizing", "noise_p": 0.1,
        "d_list": [1, 2, 3, 4], "n_shot": 2 ** 14, "seed": 7, "svg": False,
    },
    "gaussian-decay": {
        "backend": "gaussian", "study": "all", "n_copies": 2,
        "n_a_list": [2, 4], "d_max_1d": 40,
        "mu_list": [-0.3, -1.0], "d_max_2d": 30,
        "beta_list": [0.5, 1.0], "mu_thermal": -0.3, "d_max_thermal": 20,
        "d_max_3d": 8, "quad_nodes": 256, "seed": 7, "svg": False,
    },
    "validate": {
        "backend": "auto", "seed": 7, "svg": False,
    },
}

_PER_RECIPE_KEYS = {r: set(d) | {"recipe", "threads"} for r, d in _DEFAULTS.items()}


def _check_scalar(path, value, kind, bounds):
    if kind == "bool":
        if not isinstance(value, bool):
            raise ConfigInvalid(f"{path}: expected boolean, got {value!r}")
        return value
    if kind == "choice":
        if value not in bounds:
            raise ConfigInvalid(f"{path}: {value!r} not one of {sorted(bounds)}")
        return value
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigInvalid(f"{path}: expected integer, got {value!r}")
        lo, hi = bounds
        if not lo <= value <= hi:
            raise ConfigInvalid(f"{path}: {value} outside [{lo}, {hi}]")
        return value
    if kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigInvalid(f"{path}: expected number, got {value!r}")
        lo, hi = bounds
        if not lo <= value <= hi:
            raise ConfigInvalid(f"{path}: {value} outside [{lo}, {hi}]")
        return float(value)
    raise AssertionError(kind)


def _check_value(key, value):
    kind, bounds = _SCHEMA[key]
    if kind.endswith("_list"):
        if not isinstance(value, list) or not value:
            raise ConfigInvalid(f"{key}: expected a non-empty list")
        base = kind[:-5]
        return [_check_scalar(f"{key}[{i}]", v, base, bounds)
                for i, v in enumerate(value)]
    return _check_scalar(key, value, kind, bounds)


def load_config(path):
    """Parse a JSON config file, raising ConfigInvalid on syntax errors."""
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigInvalid(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigInvalid("config root must be a JSON object")
    return cfg


def validate_config(cfg):
    """Apply recipe defaults, type-check every field, enforce backend rules.

    Returns the normalized effective config. Raises ConfigInvalid with the
    field path, or BackendMismatch when the backend cannot serve the recipe.
    """
    if "recipe" not in cfg:
        raise ConfigInvalid("recipe: required field missing")
    recipe = _check_value("recipe", cfg["recipe"])
    allowed = _PER_RECIPE_KEYS[recipe]
    out = dict(_DEFAULTS[recipe])
    out["recipe"] = recipe
    for key in sorted(cfg):
        if key == "recipe":
            continue
        if key not in _SCHEMA:
            raise ConfigInvalid(f"{key}: unknown field")
        if key not in allowed:
            raise ConfigInvalid(f"{key}: not a {recipe} field")
        out[key] = _check_value(key, cfg[key])

    backend = out.get("backend", "auto")
    sizes = []
    if "n_sites" in out:
        sizes.append(out["n_sites"])
    if "n_sites_list" in out:
        sizes.extend(out["n_sites_list"])
    if backend == "dense" and sizes and max(sizes) > DENSE_MAX_SITES:
        raise ConfigInvalid(
            f"n_sites: dense backend limited to {DENSE_MAX_SITES} sites, "
            f"got {max(sizes)}")
    if backend == "gaussian" and recipe in ("mitigate", "unified"):
        raise BackendMismatch(
            f"recipe {recipe} needs noise channels; the gaussian backend "
            "cannot supply them")
    if recipe in ("mitigate", "unified") and sizes and max(sizes) > DENSE_MAX_SITES:
        raise ConfigInvalid(
            f"n_sites: recipe {recipe} is dense-only, limited to "
            f"{DENSE_MAX_SITES} sites")
    return out


def resolve_backend(cfg, n_sites):
    """Pick dense or gaussian for one sweep cell under the auto policy."""
    backend = cfg.get("backend", "auto")
    if backend != "auto":
        return backend
    return "dense" if n_sites <= AUTO_DENSE_MAX else "gaussian"


def resolve_threads(cfg):
    if cfg.get("threads"):
        return cfg["threads"]
    env = os.environ.get("VPURE_THREADS", "")
    if env.isdigit() and int(env) > 0:
        return int(env)
    return min(os.cpu_count() or 1, 8)


def write_sidecar(cfg, csv_path):
    """Echo the effective config next to a CSV (sorted keys, no timestamps)."""
    sidecar = os.path.splitext(csv_path)[0] + ".config.json"
    with open(sidecar, "w", encoding="utf-8") as fh:
        json.dump(cfg, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return sidecar
