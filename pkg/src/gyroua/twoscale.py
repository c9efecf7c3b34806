"""Well-prepared two-scale initial profiles (Chapman-Enskog type, orders 1 to 3).

Every particle gets a frozen frequency ``b_k = b(x0)`` and profiles
``X(τ), Y(τ)`` with ``X(0) = x0`` and ``Y(0) = v0``.  The construction is a
cascade of averages ``Π``, mean-free primitives ``A = L⁻¹(I - Π)`` and
pointwise compositions with the fields, all evaluated on the τ grid and
vectorised over a batch of particles.

Notation used below (``R = exp(τJ)``, ``B(X) = b(X)/b_k - 1``)::

    X1 = x0 - (ε/b_k) J (R - I) v0
    r1 = A[B(X1) J v0] + (ε/b_k) A[R⁻¹ E(t0, x0)]          Y1 = v0 + r1 - r1(0)
    h2 = (ε/b_k) A[R Y1] - (ε²/b_k) L⁻¹A[R Π(B(X1)/ε) J v0]  X2 = x0 + h2 - h2(0)
    r2 = A[B(X2) J Y1] + (ε/b_k) A[R⁻¹ E(t0, X1)] - ε L⁻¹ T2  Y2 = v0 + r2 - r2(0)
    h3 = (ε/b_k) A[R Y2] - ε L⁻¹ h̃2                          X3 = x0 + h3 - h3(0)
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from gyroua import spectral_tau as st


def _A(u):
    return st.ifft_samples(st.antiderivative_coeffs(st.fft_coeffs(u)))


# On the zero-mean quantities produced by the cascade L⁻¹ and A coincide.
_Linv = _A


def _Pi(u):
    return u.mean(axis=-1)


def _col(c):
    return c[..., None]


def _dot(g, h):
    return g[0] * h[0] + g[1] * h[1]


def _matvec(m, w):
    return np.stack([m[0, 0] * w[0] + m[0, 1] * w[1], m[1, 0] * w[0] + m[1, 1] * w[1]])


class PreparationCascade:
    """Lazily evaluated intermediate quantities of the preparation (batched).

    ``x0``, ``v0`` have shape ``(2, P)``; ``t0`` is a scalar or ``(P,)``.
    Sample arrays have shape ``(2, P, n_tau)``, constants ``(2, P)``.
    """

    def __init__(self, x0, v0, fields, eps, n_tau, t0=0.0):
        if not eps > 0:
            raise ValueError("eps must be positive")
        self.n = st.check_n_tau(n_tau)
        self.eps = float(eps)
        self.x0 = np.asarray(x0, dtype=float)
        self.v0 = np.asarray(v0, dtype=float)
        self.mag = fields.magnetic
        self.ele = fields.electric
        self.bk = self.mag.b(self.x0)
        self.bkc = _col(self.bk)
        self.t0 = np.broadcast_to(np.asarray(t0, dtype=float), self.bk.shape)
        self.t0c = _col(self.t0)
        self.tau = st.tau_grid(self.n)
        self.Jv0 = st.apply_J(self.v0)

    # -- small helpers ----------------------------------------------------
    def _full(self, c):
        return np.broadcast_to(_col(c), c.shape + (self.n,))

    def R(self, u, sign=1):
        if u.ndim == self.x0.ndim:
            u = self._full(u)
        return st.rotate_samples(u, sign)

    def B(self, X):
        return self.mag.b(X) / self.bkc - 1.0

    @staticmethod
    def at0(u):
        return u[..., :1]

    # -- order one ----------------------------------------------------------
    @cached_property
    def X1(self):
        Rv = self.R(self.v0)
        return _col(self.x0) - (self.eps / self.bkc) * st.apply_J(Rv - _col(self.v0))

    @cached_property
    def E_x0(self):
        return self.ele.e(self.t0, self.x0)

    @cached_property
    def r1(self):
        eps, bk = self.eps, self.bkc
        return _A(self.B(self.X1) * _col(self.Jv0)) + (eps / bk) * _A(self.R(self.E_x0, -1))

    @cached_property
    def Y1(self):
        return _col(self.v0) + self.r1 - self.at0(self.r1)

    # -- order two ------------------------------------------------------------
    @cached_property
    def beta(self):
        return _Pi(self.B(self.X1)) / self.eps

    @cached_property
    def Yt0(self):
        return self.beta * self.Jv0

    @cached_property
    def h2(self):
        eps, bk = self.eps, self.bkc
        return (eps / bk) * _A(self.R(self.Y1)) - (eps**2 / bk) * _Linv(_A(self.R(self.Yt0)))

    @cached_property
    def X2(self):
        return _col(self.x0) + self.h2 - self.at0(self.h2)

    @cached_property
    def T2(self):
        eps, bk = self.eps, self.bkc
        BX1 = self.B(self.X1)
        c = _Pi(BX1 * _col(self.Jv0))
        term1 = _A(BX1 * _col(st.apply_J(c))) / eps
        term2 = (eps / bk**2) * _A(self.R(self.ele.dt_e(self.t0, self.x0), -1))
        w = _col(_Pi(self.R(self.Y1))) + _A(self.R(c))
        term3 = _A(_dot(self.mag.grad_b(self.X1), w) * _col(self.Jv0)) / bk**2
        return term1 + term2 + term3

    @cached_property
    def r2(self):
        eps, bk = self.eps, self.bkc
        return (
            _A(self.B(self.X2) * st.apply_J(self.Y1))
            + (eps / bk) * _A(self.R(self.ele.e(self.t0c, self.X1), -1))
            - eps * _Linv(self.T2)
        )

    @cached_property
    def Y2(self):
        return _col(self.v0) + self.r2 - self.at0(self.r2)

    # -- order three ------------------------------------------------------------
    @cached_property
    def grad_b0(self):
        return self.mag.grad_b(self.x0)

    @cached_property
    def Xt1(self):
        return _Pi(self.R(self.r1)) / self.bk

    @cached_property
    def Ytt0(self):
        eps = self.eps
        return (_dot(self.grad_b0, self.Xt1) / (eps * self.bk)) * self.Jv0 + self.beta * st.apply_J(self.Yt0)

    @cached_property
    def htt1(self):
        return (self.eps / self.bkc) * _A(self.R(self.Ytt0))

    @cached_property
    def ht1(self):
        return (self.eps / self.bkc) * _A(self.R(self.Yt0))

    @cached_property
    def rt1(self):
        eps, bk = self.eps, self.bkc
        g0 = _col(self.grad_b0)
        return (
            _A(self.B(self.X1) * _col(st.apply_J(self.Yt0)))
            + _A(_dot(g0, self.ht1) * _col(self.Jv0)) / bk
            + (eps / bk**2) * _A(self.R(self.ele.dt_e(self.t0, self.x0), -1))
        )

    @cached_property
    def Xtt1(self):
        return _Pi(self.R(self.rt1)) / self.bk

    @cached_property
    def rtt1(self):
        bk = self.bkc
        g0 = _col(self.grad_b0)
        return (
            (2.0 / bk) * _A(_dot(g0, _col(self.Xt1) + self.ht1) * _col(st.apply_J(self.Yt0)))
            + _A(self.B(self.X1) * _col(st.apply_J(self.Ytt0)))
            + _A(_dot(g0, _col(self.Xtt1) + self.htt1) * _col(self.Jv0)) / bk
        )

    @cached_property
    def E_X1(self):
        return self.ele.e(self.t0c, self.X1)

    @cached_property
    def Yt1(self):
        return _Pi(self.B(self.X2) * st.apply_J(self.Y1) / self.eps + self.R(self.E_X1, -1) / self.bkc)

    @cached_property
    def Xt2(self):
        return _Pi(self.R(self.r2)) / self.bk

    @cached_property
    def ht2(self):
        eps, bk = self.eps, self.bkc
        return (eps / bk) * _A(self.R(_col(self.Yt1) + self.rt1)) - eps * _Linv(self.htt1)

    @cached_property
    def rt2(self):
        eps, bk = self.eps, self.bkc
        w = _col(self.Yt1) + self.rt1
        drift = _col(self.Xt1) + self.ht1
        src = self.ele.dt_e(self.t0c, self.X1) / bk + _matvec(self.ele.grad_e(self.t0c, self.X1), drift)
        return (
            _A(self.B(self.X2) * st.apply_J(w))
            + _A(_dot(self.mag.grad_b(self.X1), _col(self.Xt2) + self.ht2) * st.apply_J(self.Y1)) / bk
            + (eps / bk) * _A(self.R(src, -1))
            - eps * _Linv(self.rtt1)
        )

    @cached_property
    def h3(self):
        eps, bk = self.eps, self.bkc
        return (eps / bk) * _A(self.R(self.Y2)) - eps * _Linv(self.ht2)

    @cached_property
    def X3(self):
        return _col(self.x0) + self.h3 - self.at0(self.h3)

    @cached_property
    def r3(self):
        eps, bk = self.eps, self.bkc
        # J rather than the printed exp(τJ): the generator of r is B(X) J Y at every order
        return (
            _A(self.B(self.X3) * st.apply_J(self.Y2))
            + (eps / bk) * _A(self.R(self.ele.e(self.t0c, self.X2), -1))
            - eps * _Linv(self.rt2)
        )

    @cached_property
    def Y3(self):
        return _col(self.v0) + self.r3 - self.at0(self.r3)


def _batched(x0, v0):
    x0 = np.asarray(x0, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    if x0.shape[0] != 2 or v0.shape != x0.shape:
        raise ValueError("x0 and v0 must share a shape (2, ...)")
    return x0.reshape(2, -1), v0.reshape(2, -1), x0.shape[1:]


def _profiles(batch, n, *samples):
    return tuple(st.to_coeffs(s.reshape((2,) + batch + (n,))) for s in samples)


_X_OF = {1: "X1", 2: "X2", 3: "X3"}
_Y_OF = {1: "Y1", 2: "Y2", 3: "Y3"}
DEFAULT_Y_ORDER = {1: 1, 2: 1, 3: 2}


def prepare(order, x0, v0, fields, eps, n_tau, t0=0.0, y_order=None):
    """Prepared profiles ``(X, Y)`` at the given order.

    The default pairings are (X1, Y1), (X2, Y1) and (X3, Y2); ``y_order``
    overrides the Y profile (``y_order=3`` selects Y3).
    """
    if order not in _X_OF:
        raise ValueError(f"preparation order must be 1, 2 or 3, got {order!r}")
    y_order = DEFAULT_Y_ORDER[order] if y_order is None else y_order
    if y_order not in _Y_OF:
        raise ValueError(f"y_order must be 1, 2 or 3, got {y_order!r}")
    xb, vb, batch = _batched(x0, v0)
    c = PreparationCascade(xb, vb, fields, eps, n_tau, t0)
    return _profiles(batch, c.n, getattr(c, _X_OF[order]), getattr(c, _Y_OF[y_order]))


def prepare_first(x0, v0, fields, eps, n_tau, t0=0.0):
    return prepare(1, x0, v0, fields, eps, n_tau, t0)


def prepare_second(x0, v0, fields, eps, n_tau, t0=0.0):
    return prepare(2, x0, v0, fields, eps, n_tau, t0)


def prepare_second_y(x0, v0, fields, eps, n_tau, t0=0.0):
    return prepare(1, x0, v0, fields, eps, n_tau, t0, y_order=2)[1]


def prepare_third(x0, v0, fields, eps, n_tau, t0=0.0, with_y3=False):
    """(X3, Y2), or (X3, Y2, Y3) when ``with_y3`` is set."""
    xb, vb, batch = _batched(x0, v0)
    c = PreparationCascade(xb, vb, fields, eps, n_tau, t0)
    if with_y3:
        return _profiles(batch, c.n, c.X3, c.Y2, c.Y3)
    return _profiles(batch, c.n, c.X3, c.Y2)


@dataclass
class TwoScaleParticle:
    """Two-scale state of one macro-particle, or of a batch when arrays carry extra axes."""

    x0: np.ndarray
    v0: np.ndarray
    b_k: np.ndarray
    weight: np.ndarray
    X: st.TauProfile
    Y: st.TauProfile

    @classmethod
    def prepared(cls, x0, v0, fields, eps, n_tau, order=1, weight=1.0, t0=0.0):
        X, Y = prepare(order, x0, v0, fields, eps, n_tau, t0)
        x0 = np.asarray(x0, dtype=float)
        return cls(x0, np.asarray(v0, dtype=float), fields.magnetic.b(x0), np.asarray(weight, dtype=float), X, Y)

    def diagonal(self, s, eps):
        return st.eval_diagonal(self.X, s, eps), st.eval_diagonal(self.Y, s, eps)
