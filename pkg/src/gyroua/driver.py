"""Simulation orchestration: quiet-start sampling, external-field runs and the
dynamically rescaled Vlasov-Poisson loop."""

import csv
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc

from gyroua import diagnostics as dg
from gyroua import fields as fl
from gyroua import integrators as it
from gyroua import reference as ref
from gyroua import spectral_tau as st
from gyroua import twoscale as ts


class NumericalError(RuntimeError):
    pass


@dataclass
class ParticleEnsemble:
    x: np.ndarray  # (2, N) positions (unwrapped)
    v: np.ndarray  # (2, N)
    weights: np.ndarray  # (N,)
    seed: int
    k: float
    eta: float

    @property
    def size(self):
        return self.weights.size

    @property
    def lengths(self):
        return 2.0 * np.pi / self.k, 2.0 * np.pi

    def subset(self, idx):
        return ParticleEnsemble(self.x[:, idx], self.v[:, idx], self.weights[idx], self.seed, self.k, self.eta)


def f0_mass(k=0.5):
    """∫ f0 over Ω × ℝ²: (1/4π)·|Ω|·4π = |Ω|."""
    return (2.0 * np.pi / k) * (2.0 * np.pi)


def _inverse_cdf_x2(u):
    # CDF of (1 + sin x)/(2π) on [0, 2π]; vectorised bisection
    target = 2.0 * np.pi * u
    lo = np.zeros_like(u)
    hi = np.full_like(u, 2.0 * np.pi)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        below = mid + 1.0 - np.cos(mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def init_particles(n_particles, seed, eta=0.05, k=0.5):
    """Quiet start for f0 = (1/4π)(1 + sin x2 + η cos kx1)(G(v1+2) + G(v1-2)) G(v2).

    Scrambled Halton points give x2 (inverse CDF of its marginal), a first
    x1 proposal, the mixture bit and both velocity components; rejected x1
    proposals are redrawn from a seeded generator.  The small region where
    the spatial factor is negative is clipped to zero.
    """
    if n_particles < 1:
        raise ValueError("need at least one particle")
    if not (k > 0 and 0 <= eta < 1):
        raise ValueError("require k > 0 and 0 <= eta < 1")
    u = qmc.Halton(d=5, scramble=True, seed=seed).random(n_particles)
    rng = np.random.default_rng(seed)
    L1 = 2.0 * np.pi / k
    x2 = _inverse_cdf_x2(u[:, 1])
    base = 1.0 + np.sin(x2)
    x1 = L1 * u[:, 0]
    pending = np.ones(n_particles, dtype=bool)
    proposal_u = np.clip(u[:, 2], 0.0, 1.0)
    while True:
        dens = np.maximum(0.0, base + eta * np.cos(k * x1))
        accept = proposal_u * (base + eta) <= dens
        pending &= ~accept
        if not pending.any():
            break
        m = int(pending.sum())
        x1[pending] = L1 * rng.random(m)
        proposal_u[pending] = rng.random(m)
    centre = np.where(u[:, 3] < 0.5, -2.0, 2.0)
    # reuse the remaining digits of the mixture coordinate for v1
    frac = np.mod(2.0 * u[:, 3], 1.0)
    v1 = centre + ndtri(np.clip(frac, 1e-16, 1 - 1e-16))
    v2 = ndtri(np.clip(u[:, 4], 1e-16, 1 - 1e-16))
    w = np.full(n_particles, f0_mass(k) / n_particles)
    return ParticleEnsemble(np.stack([x1, x2]), np.stack([v1, v2]), w, seed, k, eta)


@dataclass
class RunRecord:
    config: object
    rows: list = field(default_factory=list)  # (t, quantity, value)
    wall_times: list = field(default_factory=list)
    x: np.ndarray = None
    v: np.ndarray = None
    weights: np.ndarray = None
    rho: np.ndarray = None
    rho_v: np.ndarray = None
    grid: object = None
    confinement: float = 0.0
    extras: dict = field(default_factory=dict)

    def add(self, t, quantity, value):
        if self.rows and t < self.rows[-1][0]:
            raise ValueError("time stamps must be monotone")
        self.rows.append((float(t), quantity, float(value)))

    def series(self, quantity):
        pts = [(t, v) for t, q, v in self.rows if q == quantity]
        return np.array([p[0] for p in pts]), np.array([p[1] for p in pts])

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "quantity", "value"])
            for t, q, v in self.rows:
                w.writerow([repr(t), q, repr(v)])


def _resolve_fields(config, fields):
    if fields is not None:
        return fields
    return fl.FieldModel(*fl.builtin_fields(config.field_set))


def _grid(config):
    return fl.FieldGrid(config.nx1, config.nx2, config.k)


def _finalise(record, config, x, v, w):
    grid = _grid(config)
    record.x, record.v, record.weights = x, v, w
    record.rho = dg.moment_density(x, w, grid, config.workers)
    record.rho_v = dg.moment_energy_density(x, v, w, grid, config.workers)
    record.grid = grid
    return record


def _check_finite(Xc, Yc, n):
    bad = ~(np.all(np.isfinite(Xc), axis=(0, -1)) & np.all(np.isfinite(Yc), axis=(0, -1)))
    if bad.any():
        raise NumericalError(f"non-finite state for particle {int(np.flatnonzero(bad)[0])} at step {n}")


def run_external(config, ensemble=None, fields=None):
    """Given-field run: prepare, advance every particle N steps, read the diagonal."""
    if config.mode != "external":
        raise ValueError("run_external needs mode = external")
    fields = _resolve_fields(config, fields)
    ens = ensemble if ensemble is not None else init_particles(config.n_particles, config.seed, config.eta, config.k)
    eps, n_tau = config.eps, config.resolved_n_tau
    record = RunRecord(config)
    x0, v0 = ens.x, ens.v
    X, Y = ts.prepare(config.prep_order, x0, v0, fields, eps, n_tau, 0.0, config.resolved_y_order)
    bk = fields.magnetic.b(x0)
    ds = bk * config.dt
    ctx = it.RhsContext(bk, fields, 0.0, eps)
    coef = it.StepCoefficients.build(ds, eps, n_tau)
    kernel = it.get_stepper(config.scheme)
    Xc, Yc = it.to_half(X), it.to_half(Y)
    conf = np.max(np.abs(X.samples() - x0[..., None]))
    record.add(0.0, "kinetic_energy", dg.kinetic_energy(v0, ens.weights))
    for n in range(config.n_steps):
        tic = time.perf_counter()
        Xc, Yc = kernel(Xc, Yc, n * ds, ctx, coef)
        _check_finite(Xc, Yc, n + 1)
        conf = max(conf, float(np.max(np.abs(st.irfft_samples(Xc, n_tau) - x0[..., None]))))
        record.wall_times.append(time.perf_counter() - tic)
        if (n + 1) % config.record_every == 0 or n + 1 == config.n_steps:
            s = (n + 1) * ds
            v = st.rotation(s / eps, st.diagonal_half(Yc, s / eps))
            t = (n + 1) * config.dt
            record.add(t, "kinetic_energy", dg.kinetic_energy(v, ens.weights))
            record.add(t, "confinement", conf / eps)
    s = config.n_steps * ds
    x = st.diagonal_half(Xc, s / eps)
    v = st.rotation(s / eps, st.diagonal_half(Yc, s / eps))
    record.confinement = conf
    return _finalise(record, config, x, v, ens.weights)


def run_reference(config, ensemble=None, fields=None, dt_ref=None):
    """Stiff RK4 on the same ensemble; returns a RunRecord with the final moments."""
    fields = _resolve_fields(config, fields)
    ens = ensemble if ensemble is not None else init_particles(config.n_particles, config.seed, config.eta, config.k)
    dt_ref = dt_ref or config.resolved_dt_ref
    _, xs, vs = ref.rk4_characteristics(ens.x, ens.v, fields, config.eps, dt_ref, config.t_f)
    record = RunRecord(config)
    return _finalise(record, config, xs[-1], vs[-1], ens.weights)


def run_vlasov_poisson(config, ensemble=None):
    """Self-consistent run with per-step re-anchoring of the two-scale profiles."""
    if config.mode != "poisson":
        raise ValueError("run_vlasov_poisson needs mode = poisson")
    mag = fl.builtin_fields(config.field_set)[0]
    ens = ensemble if ensemble is not None else init_particles(config.n_particles, config.seed, config.eta, config.k)
    eps, n_tau, dt = config.eps, config.resolved_n_tau, config.dt
    kernel = it.get_stepper(config.scheme)
    record = RunRecord(config)
    grid = _grid(config)
    x, v, w = ens.x.copy(), ens.v.copy(), ens.weights
    conf = 0.0
    H0 = None
    for n in range(config.n_steps + 1):
        t_n = n * dt
        fl.deposit(grid, x, w, config.workers)
        try:
            fl.poisson_solve(grid)
        except Exception as exc:  # pragma: no cover - defensive
            raise NumericalError(f"Poisson solve failed at t = {t_n:g}: {exc}") from exc
        H = dg.total_energy(v, w, grid)
        H0 = H if H0 is None else H0
        if n % config.record_every == 0 or n == config.n_steps:
            record.add(t_n, "H", H)
            record.add(t_n, "rel_err", abs(H - H0) / abs(H0))
            record.add(t_n, "field_energy", dg.field_energy(grid))
        if n == config.n_steps:
            break
        tic = time.perf_counter()
        frozen = fl.FieldModel(mag, fl.GridElectric(grid))
        X, Y = ts.prepare(1, x, v, frozen, eps, n_tau, t_n)
        bk = mag.b(x)
        ds = bk * dt
        coef = it.StepCoefficients.build(ds, eps, n_tau)
        ctx = it.RhsContext(bk, frozen, t_n, eps)
        Xc, Yc = kernel(it.to_half(X), it.to_half(Y), 0.0 * ds, ctx, coef)
        _check_finite(Xc, Yc, n + 1)
        conf = max(conf, float(np.max(np.abs(st.irfft_samples(Xc, n_tau) - x[..., None]))))
        x = st.diagonal_half(Xc, ds / eps)
        v = st.rotation(ds / eps, st.diagonal_half(Yc, ds / eps))
        record.wall_times.append(time.perf_counter() - tic)
    record.confinement = conf
    record.extras["e_field"] = grid.e_field.copy()
    return _finalise(record, config, x, v, w)


def run(config, **kw):
    if config.mode == "external":
        return run_external(config, **kw)
    return run_vlasov_poisson(config, **kw)
