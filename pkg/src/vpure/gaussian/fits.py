"""Least-squares fits for decay curves.

Power laws fit log y against log x, exponentials fit log y against x, both
after dropping the first two points (short-distance transients). R^2 is
reported on the transformed data.
"""

import numpy as np


def _linear(u, v):
    slope, intercept = np.polyfit(u, v, 1)
    resid = v - (slope * u + intercept)
    ss_tot = float(np.sum((v - v.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def _prepare(x, y, drop):
    x = np.asarray(x, dtype=float)[drop:]
    y = np.asarray(y, dtype=float)[drop:]
    if len(x) < 3:
        raise ValueError(f"need at least 3 points after dropping {drop}")
    if np.any(y <= 0):
        raise ValueError("decay fit requires positive values")
    return x, y


def fit_power_law(x, y, drop=2):
    """Fit y ~ amplitude * x^(-exponent); returns exponent, amplitude,
    r_squared (R^2 of the log-log linear fit)."""
    x, y = _prepare(x, y, drop)
    if np.any(x <= 0):
        raise ValueError("power-law fit requires positive abscissae")
    slope, intercept, r2 = _linear(np.log(x), np.log(y))
    return {"exponent": -slope, "amplitude": float(np.exp(intercept)),
            "r_squared": r2}


def fit_exponential(x, y, drop=2):
    """Fit y ~ amplitude * exp(-x / xi); returns xi, amplitude, r_squared
    (R^2 of the log-linear fit)."""
    x, y = _prepare(x, y, drop)
    slope, intercept, r2 = _linear(x, np.log(y))
    if slope >= 0:
        xi = np.inf
    else:
        xi = -1.0 / slope
    return {"xi": float(xi), "amplitude": float(np.exp(intercept)),
            "r_squared": r2}


def fit_linear(x, y, drop=0):
    """Plain linear fit y ~ slope * x + intercept with R^2."""
    x = np.asarray(x, dtype=float)[drop:]
    y = np.asarray(y, dtype=float)[drop:]
    if len(x) < 2:
        raise ValueError("need at least 2 points")
    slope, intercept, r2 = _linear(x, y)
    return {"slope": slope, "intercept": intercept, "r_squared": r2}
