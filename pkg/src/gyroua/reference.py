"""Ground truth: stiff RK4 on the raw characteristics, and the averaged limit model."""

import csv
import warnings

import numpy as np

from gyroua.spectral_tau import apply_J


FULL_SCALE_DT_REF = 1e-6  # full-scale reference step for t_f = 1


class ReferenceStepWarning(UserWarning):
    pass


def _rk4(f, t, y, h):
    k1 = f(t, y)
    k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = f(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def default_dt_ref(eps):
    """Desk-scale reference step."""
    return min(1e-4, eps / 50.0)


def rk4_characteristics(x0, v0, fields, eps, dt_ref, t_f, n_out=1):
    """Classical RK4 for ẋ = v, v̇ = E(t, x) + (b(x)/ε) J v.

    Positions and velocities have shape ``(2, ...)``.  The step is shrunk so
    that ``n_out`` equally spaced outputs (the last one at ``t_f``) land on
    steps.  Returns ``(times, x, v)`` with ``x[m]`` the state at ``times[m]``;
    ``times[0] = 0``.
    """
    if not eps > 0 or not dt_ref > 0 or not t_f > 0:
        raise ValueError("eps, dt_ref and t_f must be positive")
    if dt_ref > eps / 10.0:
        warnings.warn(f"dt_ref = {dt_ref:g} exceeds eps/10 = {eps / 10:g}", ReferenceStepWarning, stacklevel=2)
    per_out = int(np.ceil(t_f / n_out / dt_ref - 1e-9))
    h = t_f / (n_out * per_out)
    mag, ele = fields.magnetic, fields.electric

    def f(t, y):
        x, v = y[:2], y[2:]
        acc = ele.e(t, x) + (mag.b(x) / eps) * apply_J(v)
        return np.concatenate([v, acc])

    y = np.concatenate([np.asarray(x0, dtype=float), np.asarray(v0, dtype=float)])
    out = [y.copy()]
    step = 0
    for _ in range(n_out):
        for _ in range(per_out):
            y = _rk4(f, step * h, y, h)
            step += 1
        if not np.all(np.isfinite(y)):
            raise FloatingPointError(f"non-finite reference state at t = {step * h:g}")
        out.append(y.copy())
    traj = np.stack(out)
    times = np.arange(n_out + 1) * (t_f / n_out)
    return times, traj[:, :2], traj[:, 2:]


def limit_rhs(s, Xb, Yb, fields, eps, b_k):
    """Right-hand side of the averaged model in the scaled time s = b_k t."""
    gb = fields.magnetic.grad_b(Xb)
    E = fields.electric.e(s / b_k, Xb)
    speed2 = Yb[0] ** 2 + Yb[1] ** 2
    dX = -(eps / (2.0 * b_k**3)) * apply_J(gb) * speed2 + (eps / b_k**2) * apply_J(E)
    dY = (fields.magnetic.b(Xb) - b_k) / (eps * b_k) * apply_J(Yb)
    return dX, dY


def limit_model_step(Xb, Yb, s, ds, fields, eps, b_k):
    """One RK4 step of the limit model."""

    def f(t, y):
        return np.concatenate(limit_rhs(t, y[:2], y[2:], fields, eps, b_k))

    y = _rk4(f, s, np.concatenate([Xb, Yb]), ds)
    return y[:2], y[2:]


def write_trajectory_csv(path, times, x, v):
    """Header ``t,x1,x2,v1,v2``; one row per output time (single particle)."""
    x = np.asarray(x).reshape(len(times), 2, -1)
    v = np.asarray(v).reshape(len(times), 2, -1)
    if x.shape[-1] != 1:
        raise ValueError("trajectory CSV holds a single particle")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "x1", "x2", "v1", "v2"])
        for m, t in enumerate(times):
            w.writerow([repr(float(a)) for a in (t, x[m, 0, 0], x[m, 1, 0], v[m, 0, 0], v[m, 1, 0])])
