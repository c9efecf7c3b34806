"""Fourier toolkit for 2π-periodic functions of the fast variable τ.

Profiles are ℝ²-valued; arrays carry the vector component on axis 0 and the
τ-mode (or τ-node) on the last axis, with any batch axes in between:
``(2, *batch, n_tau)``.  Coefficients use numpy's FFT ordering
``l = 0, 1, …, n/2-1, -n/2, …, -1`` and the normalisation

    c_l = (1/n) Σ_j u(τ_j) exp(-i l τ_j),     τ_j = 2πj/n.
"""

from dataclasses import dataclass

import numpy as np


class NonZeroMeanError(ValueError):
    """Raised when the antiderivative is requested for a profile with non-zero mean."""


def check_n_tau(n_tau):
    if int(n_tau) != n_tau or n_tau < 4 or n_tau % 2:
        raise ValueError(f"n_tau must be an even integer >= 4, got {n_tau!r}")
    return int(n_tau)


def tau_grid(n_tau):
    n_tau = check_n_tau(n_tau)
    return 2.0 * np.pi * np.arange(n_tau) / n_tau


def modes(n_tau):
    """Integer wavenumbers in FFT order."""
    return np.fft.fftfreq(n_tau, 1.0 / n_tau)


# -- array-level primitives (used directly by the integrators) -------------


def fft_coeffs(samples):
    return np.fft.fft(samples, axis=-1) / samples.shape[-1]


def ifft_samples(coeffs):
    return np.fft.ifft(coeffs, axis=-1).real * coeffs.shape[-1]


def zero_nyquist(coeffs):
    coeffs[..., coeffs.shape[-1] // 2] = 0.0
    return coeffs


def antiderivative_coeffs(coeffs):
    """c_l -> c_l/(il), with the mean and the unpaired -n/2 mode set to zero."""
    n = coeffs.shape[-1]
    l = modes(n)
    inv = np.zeros(n, dtype=complex)
    inv[1:] = 1.0 / (1j * l[1:])
    inv[n // 2] = 0.0
    return coeffs * inv


def derivative_coeffs(coeffs):
    n = coeffs.shape[-1]
    d = 1j * modes(n)
    d[n // 2] = 0.0
    return coeffs * d


def _plus_minus(c, sign):
    c0, c1 = c[0], c[1]
    plus = np.stack([c0 + 1j * c1, c1 - 1j * c0])  # (I + iJ) c
    minus = np.stack([c0 - 1j * c1, c1 + 1j * c0])  # (I - iJ) c
    return (plus, minus) if sign > 0 else (minus, plus)


def rotate_coeffs(coeffs, sign=1):
    """Coefficients of τ -> exp(sign·τJ) u(τ), truncated to the band.

    For sign = +1, out_l = ½[(I + iJ) c_{l+1} + (I - iJ) c_{l-1}]; the roles
    swap for sign = -1.  The unpaired -n/2 input mode is split evenly
    between ±n/2 so that real profiles stay real; output modes with
    |l| >= n/2 are dropped.
    """
    n = coeffs.shape[-1]
    half = n // 2
    c = np.array(coeffs, dtype=complex)
    c[..., half] *= 0.5
    plus, minus = _plus_minus(c, sign)
    # FFT order is cyclic, so neighbours are rolls; only the band edge needs care
    out = 0.5 * (np.roll(plus, -1, axis=-1) + np.roll(minus, 1, axis=-1))
    out[..., half] = 0.0
    return out


# -- half-spectrum primitives for real profiles (modes 0 … n/2) ---------------


def rfft_coeffs(samples):
    return np.fft.rfft(samples, axis=-1) / samples.shape[-1]


def irfft_samples(half, n):
    return np.fft.irfft(half, n, axis=-1) * n


def zero_nyquist_half(half):
    half[..., -1] = 0.0
    return half


def rotate_half(half, sign=1):
    """rotate_coeffs on the non-negative modes of a real profile."""
    c = np.array(half, dtype=complex)
    c[..., -1] *= 0.5
    plus, minus = _plus_minus(c, sign)
    out = np.empty_like(c)
    out[..., 1:-1] = 0.5 * (plus[..., 2:] + minus[..., :-2])
    # c_{-1} = conj(c_1), so the mean mode is the real part of the l = 1 term
    out[..., 0] = plus[..., 1].real
    out[..., -1] = 0.0
    return out


def half_to_full(half, n):
    full = np.empty(half.shape[:-1] + (n,), dtype=complex)
    full[..., : n // 2 + 1] = half
    full[..., n // 2 + 1 :] = np.conj(half[..., 1 : n // 2][..., ::-1])
    return full


def full_to_half(coeffs):
    n = coeffs.shape[-1]
    half = np.array(coeffs[..., : n // 2 + 1], dtype=complex)
    return half


def diagonal_half(half, theta):
    """Real value Σ_l c_l exp(ilθ) from the non-negative modes."""
    m = half.shape[-1]
    n = 2 * (m - 1)
    theta = np.asarray(theta, dtype=float)[..., None]
    phase = np.exp(1j * np.arange(1, m - 1) * theta)
    inner = np.sum(half[..., 1:-1] * phase, axis=-1)
    return half[..., 0].real + 2.0 * inner.real + half[..., -1].real * np.cos(0.5 * n * theta[..., 0])


def rotate_samples(samples, sign=1):
    """Pointwise exp(sign·τ_j J) u(τ_j) on the τ grid."""
    tau = tau_grid(samples.shape[-1])
    c = np.cos(tau)
    s = sign * np.sin(tau)
    u1, u2 = samples[0], samples[1]
    return np.stack([c * u1 + s * u2, c * u2 - s * u1])


def apply_J(u):
    """J u with J = [[0, 1], [-1, 0]] acting on axis 0."""
    return np.stack([u[1], -u[0]])


def rotation(theta, u):
    """exp(θJ) u for vectors u with components on axis 0; θ broadcasts over the rest."""
    c = np.cos(theta)
    s = np.sin(theta)
    return np.stack([c * u[0] + s * u[1], c * u[1] - s * u[0]])


def diagonal_values(coeffs, theta):
    """Σ_l c_l exp(i l θ) with the -n/2 mode read as a cosine; θ broadcasts over batch axes.

    Returns the complex sum so callers can inspect the imaginary residual.
    """
    n = coeffs.shape[-1]
    l = modes(n)
    theta = np.asarray(theta, dtype=float)[..., None]
    phase = np.exp(1j * l * theta)
    phase[..., n // 2] = np.cos(0.5 * n * theta[..., 0])
    return np.sum(coeffs * phase, axis=-1)


# -- profile-level API ------------------------------------------------------


@dataclass(frozen=True)
class TauProfile:
    """Fourier coefficients of an ℝ²-valued 2π-periodic τ-function (batched)."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim < 2 or c.shape[0] != 2:
            raise ValueError("coefficients must have shape (2, ..., n_tau)")
        check_n_tau(c.shape[-1])
        object.__setattr__(self, "coeffs", c)

    @property
    def n_tau(self):
        return self.coeffs.shape[-1]

    @property
    def batch_shape(self):
        return self.coeffs.shape[1:-1]

    def samples(self):
        return to_samples(self)

    def __add__(self, other):
        if isinstance(other, TauProfile):
            return TauProfile(self.coeffs + other.coeffs)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, TauProfile):
            return TauProfile(self.coeffs - other.coeffs)
        return NotImplemented

    def __neg__(self):
        return TauProfile(-self.coeffs)

    def __mul__(self, scalar):
        return TauProfile(self.coeffs * np.asarray(scalar)[..., None])

    __rmul__ = __mul__


def to_coeffs(samples):
    """Build a profile from samples at τ_j = 2πj/n (shape ``(2, *batch, n)``)."""
    samples = np.asarray(samples, dtype=float)
    if samples.ndim < 2 or samples.shape[0] != 2:
        raise ValueError("samples must have shape (2, ..., n_tau)")
    check_n_tau(samples.shape[-1])
    return TauProfile(fft_coeffs(samples))


def to_samples(p):
    return ifft_samples(p.coeffs)


def constant_profile(v, n_tau):
    v = np.asarray(v, dtype=float)
    return to_coeffs(np.repeat(v[..., None], check_n_tau(n_tau), axis=-1))


def average_pi(p, tol=1e-12):
    """Mean over 𝕋 (the real part of c_0)."""
    c0 = p.coeffs[..., 0]
    scale = max(1.0, float(np.max(np.abs(p.coeffs), initial=0.0)))
    if np.max(np.abs(c0.imag), initial=0.0) > tol * scale:
        raise ValueError("profile mean has a non-negligible imaginary part")
    return c0.real


def antiderivative(p, tol=1e-10):
    """Mean-free primitive L⁻¹p of a zero-mean profile."""
    scale = max(1.0, float(np.max(np.abs(p.coeffs), initial=0.0)))
    if np.max(np.abs(p.coeffs[..., 0]), initial=0.0) > tol * scale:
        raise NonZeroMeanError("antiderivative requires a zero-mean profile")
    return TauProfile(antiderivative_coeffs(p.coeffs))


def op_A(p):
    """A p = L⁻¹(I - Π) p."""
    return TauProfile(antiderivative_coeffs(p.coeffs))


def derivative(p):
    return TauProfile(derivative_coeffs(p.coeffs))


def rotate(p, sign=1):
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return TauProfile(rotate_coeffs(p.coeffs, sign))


def eval_diagonal(p, s, eps, tol=1e-10):
    """Value of the profile at τ = s/ε (real part; imaginary residual checked)."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    z = diagonal_values(p.coeffs, np.asarray(s, dtype=float) / eps)
    scale = np.maximum(1.0, np.sum(np.abs(p.coeffs), axis=-1))
    if np.any(np.abs(z.imag) > tol * scale):
        raise ValueError("diagonal value has a non-negligible imaginary part")
    return z.real
