"""Steppers for the two-scale transport system in scaled time s.

    ∂_s X + (1/ε) ∂_τ X = F1 = exp(τJ) Y / b_k
    ∂_s Y + (1/ε) ∂_τ Y = F2 = (b(X)/b_k - 1) J Y / ε + exp(-τJ) E(t, X) / b_k,
    t = t_anchor + s / b_k.

The stiff τ-transport is diagonal in Fourier space (multiplier -il/ε) and is
treated implicitly (IMEX1, IMEX2) or exactly (EI1, EI2).  The array
kernels act on the non-negative Fourier modes of the (real) profiles, shape
``(2, *batch, n_tau/2 + 1)``, with a per-particle step ``ds`` broadcasting
over the batch axes; the ``*_step`` wrappers take and return TauProfiles.
"""

from dataclasses import dataclass
from math import factorial
from types import SimpleNamespace

import numpy as np

from gyroua import spectral_tau as st

SCHEMES = ("imex1", "imex2", "ei1", "ei2")
SCHEME_ORDER = {"imex1": 1, "imex2": 2, "ei1": 1, "ei2": 2}

_TAYLOR_RADIUS = 0.5
_TAYLOR_TERMS = 24


def phi(k, w):
    """φ_k(w) = Σ_{m≥0} w^m/(m+k)!  for k = 1, 2 (complex, elementwise).

    Direct closed forms away from the origin, Taylor series inside
    ``|w| < 0.5`` where the closed forms cancel catastrophically.
    """
    w = np.asarray(w, dtype=complex)
    out = np.empty_like(w)
    small = np.abs(w) < _TAYLOR_RADIUS
    ws = w[small]
    acc = np.zeros_like(ws)
    for m in reversed(range(_TAYLOR_TERMS)):
        acc = acc * ws + 1.0 / factorial(m + k)
    out[small] = acc
    wb = w[~small]
    if k == 1:
        out[~small] = np.expm1(wb) / wb
    elif k == 2:
        out[~small] = (np.expm1(wb) - wb) / wb**2
    else:
        raise ValueError("only φ1 and φ2 are needed")
    return out


@dataclass(frozen=True)
class StepCoefficients:
    """Per-mode multipliers for a step ``ds`` (scalar or per particle)."""

    ds: np.ndarray
    eps: float
    p: np.ndarray
    p_half: np.ndarray
    cn_c: np.ndarray
    cn_ratio: np.ndarray
    phase: np.ndarray
    pE: np.ndarray
    qE: np.ndarray
    n_tau: int = 0
    h: SimpleNamespace = None  # the same tables restricted to modes 0 … n/2

    @classmethod
    def build(cls, ds, eps, n_tau):
        if not eps > 0:
            raise ValueError("eps must be positive")
        ds = np.asarray(ds, dtype=float)
        if np.any(ds <= 0):
            raise ValueError("step must be positive")
        l = st.modes(st.check_n_tau(n_tau))
        z = ds[..., None] * l / eps
        dsc = ds[..., None]
        w = -1j * z
        tables = dict(
            p=1.0 / (1.0 + 1j * z),
            p_half=1.0 / (1.0 + 0.5j * z),
            cn_c=1.0 / (1.0 + 0.5j * z),
            cn_ratio=(1.0 - 0.5j * z) / (1.0 + 0.5j * z),
            phase=np.exp(w),
            pE=dsc * phi(1, w),
            qE=dsc**2 * phi(2, w),
        )
        m = int(n_tau) // 2 + 1
        half = SimpleNamespace(**{k: v[..., :m] for k, v in tables.items()})
        return cls(ds=ds, eps=float(eps), n_tau=int(n_tau), h=half, **tables)


def pE_closed_form(l, ds, eps):
    """(iε/l)(exp(-ilΔs/ε) - 1), or Δs for l = 0."""
    if l == 0:
        return complex(ds)
    return 1j * eps / l * (np.exp(-1j * l * ds / eps) - 1.0)


def qE_closed_form(l, ds, eps):
    """(ε/l²)(ε - ε exp(-ilΔs/ε) - ilΔs), or Δs²/2 for l = 0."""
    if l == 0:
        return complex(0.5 * ds * ds)
    return eps / l**2 * (eps - eps * np.exp(-1j * l * ds / eps) - 1j * l * ds)


@dataclass(frozen=True)
class RhsContext:
    b_k: np.ndarray
    fields: object
    t_anchor: object
    eps: float

    def __post_init__(self):
        bk = np.asarray(self.b_k, dtype=float)
        if np.any(bk <= 0):
            raise ValueError("frozen frequency must be positive")
        object.__setattr__(self, "b_k", bk)

    def time(self, s):
        return np.asarray(self.t_anchor, dtype=float) + np.asarray(s, dtype=float) / self.b_k


# -- right-hand side --------------------------------------------------------------
#
# The kernels below work on the non-negative modes of real profiles
# (``rfft`` layout, shape ``(2, *batch, n/2 + 1)``) with the unpaired
# Nyquist entry held at zero.


def _f1_samples(Ys, ctx):
    return st.rotate_samples(Ys, 1) / ctx.b_k[..., None]


def _f2_samples(Xs, Ys, t, ctx, Xb=None):
    """Stiff-coupling plus forcing term; ``Xb`` (if given) is the argument of b."""
    bkc = ctx.b_k[..., None]
    tt = np.asarray(t)[..., None]
    if Xb is None:
        bX, E = ctx.fields.b_and_e(tt, Xs)
    else:
        bX = ctx.fields.magnetic.b(Xb)
        E = ctx.fields.electric.e(tt, Xs)
    return (bX / bkc - 1.0) / ctx.eps * st.apply_J(Ys) + st.rotate_samples(E, -1) / bkc


def _to_h(samples):
    return st.zero_nyquist_half(st.rfft_coeffs(samples))


def _rhs_half(Xh, Yh, s, ctx, n):
    Xs = st.irfft_samples(Xh, n)
    Ys = st.irfft_samples(Yh, n)
    return _to_h(_f1_samples(Ys, ctx)), _to_h(_f2_samples(Xs, Ys, ctx.time(s), ctx))


def rhs_F(X, Y, s, ctx):
    """(F1, F2) as profiles, evaluated pointwise on the τ grid."""
    Xs, Ys = X.samples(), Y.samples()
    F1 = st.zero_nyquist(st.fft_coeffs(_f1_samples(Ys, ctx)))
    F2 = st.zero_nyquist(st.fft_coeffs(_f2_samples(Xs, Ys, ctx.time(s), ctx)))
    return st.TauProfile(F1), st.TauProfile(F2)


# -- half-spectrum steppers ------------------------------------------------------------


def _dsc(coef):
    return coef.ds[..., None]


def imex1_arrays(Xh, Yh, s, ctx, coef):
    n = coef.n_tau
    ds = _dsc(coef)
    Xs = st.irfft_samples(Xh, n)
    Ys = st.irfft_samples(Yh, n)
    F2 = _to_h(_f2_samples(Xs, Ys, ctx.time(s), ctx))
    Yn = st.zero_nyquist_half(coef.h.p * (Yh + ds * F2))
    Xn = st.zero_nyquist_half(coef.h.p * (Xh + ds * st.rotate_half(Yn, 1) / ctx.b_k[..., None]))
    return Xn, Yn


def imex2_arrays(Xh, Yh, s, ctx, coef):
    n = coef.n_tau
    ds = _dsc(coef)
    h = coef.h
    bkc = ctx.b_k[..., None]
    Xs = st.irfft_samples(Xh, n)
    Ys = st.irfft_samples(Yh, n)
    t_half = ctx.time(s + 0.5 * coef.ds)
    # backward-Euler half step: X first, then Y with E at the predicted position
    Xm = st.zero_nyquist_half(h.p_half * (Xh + 0.5 * ds * st.rotate_half(Yh, 1) / bkc))
    G = _to_h(_f2_samples(st.irfft_samples(Xm, n), Ys, t_half, ctx, Xb=Xs))
    Ym = st.zero_nyquist_half(h.p_half * (Yh + 0.5 * ds * G))
    # Crank-Nicolson in τ
    Xn = st.zero_nyquist_half(h.cn_ratio * Xh + h.cn_c * ds * st.rotate_half(Ym, 1) / bkc)
    Xbar = 0.5 * (Xs + st.irfft_samples(Xn, n))
    H = _to_h(_f2_samples(Xbar, st.irfft_samples(Ym, n), t_half, ctx))
    Yn = st.zero_nyquist_half(h.cn_ratio * Yh + h.cn_c * ds * H)
    return Xn, Yn


def ei1_arrays(Xh, Yh, s, ctx, coef):
    h = coef.h
    F1, F2 = _rhs_half(Xh, Yh, s, ctx, coef.n_tau)
    Xn = st.zero_nyquist_half(h.phase * Xh + h.pE * F1)
    Yn = st.zero_nyquist_half(h.phase * Yh + h.pE * F2)
    return Xn, Yn


def ei2_arrays(Xh, Yh, s, ctx, coef):
    h = coef.h
    ds = _dsc(coef)
    F1, F2 = _rhs_half(Xh, Yh, s, ctx, coef.n_tau)
    Xp = st.zero_nyquist_half(h.phase * Xh + h.pE * F1)
    Yp = st.zero_nyquist_half(h.phase * Yh + h.pE * F2)
    G1, G2 = _rhs_half(Xp, Yp, s + coef.ds, ctx, coef.n_tau)
    corr = h.qE / ds
    Xn = st.zero_nyquist_half(Xp + corr * (G1 - F1))
    Yn = st.zero_nyquist_half(Yp + corr * (G2 - F2))
    return Xn, Yn


STEPPERS = {"imex1": imex1_arrays, "imex2": imex2_arrays, "ei1": ei1_arrays, "ei2": ei2_arrays}


def get_stepper(scheme):
    try:
        return STEPPERS[scheme]
    except KeyError:
        raise ValueError(f"unknown scheme {scheme!r}; choose from {', '.join(SCHEMES)}") from None


# -- profile-level API -----------------------------------------------------------------


def to_half(p):
    """Real-profile half spectrum of a TauProfile, Nyquist cleared."""
    return st.zero_nyquist_half(st.full_to_half(p.coeffs))


def from_half(half, n_tau):
    return st.TauProfile(st.half_to_full(half, n_tau))


def _profile_step(kernel, X, Y, s_n, ds, ctx, coef=None):
    if coef is None:
        coef = StepCoefficients.build(ds, ctx.eps, X.n_tau)
    Xn, Yn = kernel(to_half(X), to_half(Y), np.asarray(s_n, dtype=float), ctx, coef)
    return from_half(Xn, X.n_tau), from_half(Yn, X.n_tau)


def imex1_step(X, Y, s_n, ds, ctx, coef=None):
    return _profile_step(imex1_arrays, X, Y, s_n, ds, ctx, coef)


def imex2_step(X, Y, s_n, ds, ctx, coef=None):
    return _profile_step(imex2_arrays, X, Y, s_n, ds, ctx, coef)


def ei1_step(X, Y, s_n, ds, ctx, coef=None):
    return _profile_step(ei1_arrays, X, Y, s_n, ds, ctx, coef)


def ei2_step(X, Y, s_n, ds, ctx, coef=None):
    return _profile_step(ei2_arrays, X, Y, s_n, ds, ctx, coef)


def integrate(X, Y, ctx, ds, n_steps, scheme, s0=0.0, observer=None):
    """Advance ``n_steps`` fixed steps from profiles X, Y; returns the final profiles.

    ``observer(n, s_n, Xh, Yh)`` receives the half spectra after every step.
    """
    kernel = get_stepper(scheme)
    n = X.n_tau
    Xh, Yh = to_half(X), to_half(Y)
    coef = StepCoefficients.build(ds, ctx.eps, n)
    s0 = np.asarray(s0, dtype=float)
    for k in range(n_steps):
        Xh, Yh = kernel(Xh, Yh, s0 + k * coef.ds, ctx, coef)
        if not (np.all(np.isfinite(Xh)) and np.all(np.isfinite(Yh))):
            raise FloatingPointError(f"non-finite state after step {k + 1}")
        if observer is not None:
            observer(k + 1, s0 + (k + 1) * coef.ds, Xh, Yh)
    return from_half(Xh, n), from_half(Yh, n)
