"""Grid moments, energy, error norms and convergence-order fits."""

import csv
import math

import numpy as np

from gyroua import fields as fl

CONVERGENCE_HEADER = ["dt", "epsilon", "scheme", "prep_order", "err_rho", "err_rho_over_eps", "err_rhov", "slope"]


def _blank(grid):
    return fl.FieldGrid(grid.nx1, grid.nx2, grid.k)


def moment_density(x, weights, grid, workers=1):
    """ρ(x) = Σ ω_k S(x - x_k) / cell area."""
    return fl.deposit(_blank(grid), x, weights, workers).copy()


def moment_energy_density(x, v, weights, grid, workers=1):
    """ρ_v(x) = Σ ω_k |v_k|² S(x - x_k) / cell area."""
    v = np.asarray(v, dtype=float)
    return fl.deposit(_blank(grid), x, np.asarray(weights) * (v[0] ** 2 + v[1] ** 2), workers).copy()


def kinetic_energy(v, weights):
    v = np.asarray(v, dtype=float)
    return 0.5 * math.fsum(np.ravel(np.asarray(weights) * (v[0] ** 2 + v[1] ** 2)))


def field_energy(grid):
    return 0.5 * math.fsum(np.ravel(grid.e_field[0] ** 2 + grid.e_field[1] ** 2)) * grid.cell_area


def total_energy(v, weights, grid):
    """H = ½ Σ ω|v|² + ½ Σ_cells |E|² ΔA, both sums exactly rounded."""
    return kinetic_energy(v, weights) + field_energy(grid)


def relative_linf_error(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    den = np.max(np.abs(b))
    if not den > 0:
        raise ZeroDivisionError("reference grid is identically zero")
    return float(np.max(np.abs(a - b)) / den)


def fit_order(errors, steps):
    """Least-squares slope of log(error) against log(step)."""
    e = np.asarray(errors, dtype=float)
    h = np.asarray(steps, dtype=float)
    if e.shape != h.shape or e.size < 2:
        raise ValueError("need at least two (error, step) pairs")
    if np.any(e <= 0) or np.any(h <= 0):
        raise ValueError("errors and steps must be positive")
    return float(np.polyfit(np.log(h), np.log(e), 1)[0])


def write_convergence_csv(path, rows):
    """``rows`` are dicts keyed by CONVERGENCE_HEADER."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CONVERGENCE_HEADER)
        for r in rows:
            w.writerow([_fmt(r[k]) for k in CONVERGENCE_HEADER])


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)
