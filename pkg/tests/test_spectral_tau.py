import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hs

from gyroua import spectral_tau as st


def band_limited(rng, n, batch=(), lmax=None, mean=True):
    """Random real profile with modes |l| <= lmax, sampled on the n-point grid."""
    lmax = n // 2 - 2 if lmax is None else lmax
    tau = st.tau_grid(n)
    out = np.zeros((2,) + batch + (n,))
    for l in range(0 if mean else 1, lmax + 1):
        a = rng.normal(size=(2,) + batch + (1,))
        b = rng.normal(size=(2,) + batch + (1,))
        out += a * np.cos(l * tau) + b * np.sin(l * tau)
    return out


def test_constant_samples():
    p = st.to_coeffs(np.stack([np.ones(8), np.zeros(8)]))
    expected = np.zeros((2, 8))
    expected[0, 0] = 1.0
    assert np.allclose(p.coeffs, expected, atol=1e-15)


def test_cosine_single_mode():
    tau = st.tau_grid(8)
    p = st.to_coeffs(np.stack([np.cos(tau), np.zeros(8)]))
    assert p.coeffs[0, 1] == pytest.approx(0.5)
    assert p.coeffs[0, -1] == pytest.approx(0.5)
    rest = np.delete(p.coeffs[0], [1, 7])
    assert np.max(np.abs(rest)) < 1e-15


def test_round_trip_exact_band():
    tau = st.tau_grid(16)
    u = np.stack([np.sin(3 * tau), np.cos(tau)])
    assert np.max(np.abs(st.to_samples(st.to_coeffs(u)) - u)) <= 1e-13


@pytest.mark.parametrize("n", [0, 3, 7, 2])
def test_rejects_bad_n_tau(n):
    with pytest.raises(ValueError):
        st.to_coeffs(np.zeros((2, n)))


def test_conjugate_symmetry():
    rng = np.random.default_rng(1)
    c = st.to_coeffs(rng.normal(size=(2, 16))).coeffs
    l = st.modes(16).astype(int)
    for j, lj in enumerate(l):
        if lj == -8:
            continue
        assert abs(c[0, j] - np.conj(c[0, (-lj) % 16])) <= 1e-12 * np.max(np.abs(c))


def test_average_pi_examples():
    tau = st.tau_grid(16)
    v = np.array([0.3, -1.2])
    rot = st.rotation(tau, v[:, None])
    assert np.allclose(st.average_pi(st.to_coeffs(rot)), 0.0, atol=1e-15)
    assert np.allclose(st.average_pi(st.constant_profile([2.0, 3.0], 8)), [2.0, 3.0])
    p = st.to_coeffs(np.stack([2 + np.cos(tau), np.sin(tau)]))
    assert np.allclose(st.average_pi(p), [2.0, 0.0], atol=1e-15)


def test_antiderivative_examples():
    tau = st.tau_grid(16)
    zero = np.zeros(16)
    a = st.antiderivative(st.to_coeffs(np.stack([np.cos(tau), zero]))).samples()
    assert np.allclose(a, np.stack([np.sin(tau), zero]), atol=1e-14)
    b = st.antiderivative(st.to_coeffs(np.stack([np.sin(tau), zero]))).samples()
    assert np.allclose(b, np.stack([-np.cos(tau), zero]), atol=1e-14)


def test_antiderivative_rejects_mean():
    with pytest.raises(st.NonZeroMeanError):
        st.antiderivative(st.constant_profile([1.0, 0.0], 8))


def test_derivative_inverts_antiderivative():
    rng = np.random.default_rng(2)
    p = st.to_coeffs(band_limited(rng, 32, mean=False))
    back = st.derivative(st.antiderivative(p))
    assert np.max(np.abs(back.coeffs - p.coeffs)) <= 1e-12


def test_op_A_on_rotation_against_quadrature():
    # A(e^{τJ}v) = -J e^{τJ}v; oracle: cumulative trapezoid on a fine grid, then mean removal
    v = np.array([0.7, -0.4])
    n = 16
    got = st.op_A(st.to_coeffs(st.rotation(st.tau_grid(n), v[:, None]))).samples()
    closed = -st.apply_J(st.rotation(st.tau_grid(n), v[:, None]))
    assert np.allclose(got, closed, atol=1e-14)
    fine = np.linspace(0, 2 * np.pi, 2**14 + 1)
    f = st.rotation(fine, v[:, None])
    prim = np.concatenate([np.zeros((2, 1)), np.cumsum(0.5 * (f[:, 1:] + f[:, :-1]) * np.diff(fine), axis=1)], axis=1)
    prim -= np.trapezoid(prim, fine, axis=1)[:, None] / (2 * np.pi)
    step = 2**14 // n
    assert np.allclose(got, prim[:, :-1:step], atol=1e-7)


def test_op_A_kills_constants():
    assert np.allclose(st.op_A(st.constant_profile([1.0, 2.0], 8)).coeffs, 0.0)


def test_rotate_constant_gives_first_modes():
    v = np.array([1.0, 2.0])
    r = st.rotate(st.constant_profile(v, 16), 1)
    assert np.allclose(r.samples(), st.rotation(st.tau_grid(16), v[:, None]), atol=1e-14)
    mask = np.ones(16, dtype=bool)
    mask[[1, 15]] = False
    assert np.max(np.abs(r.coeffs[:, mask])) < 1e-15


def test_rotate_pointwise_and_inverse():
    rng = np.random.default_rng(3)
    u = band_limited(rng, 32, batch=(5,))
    p = st.to_coeffs(u)
    for sign in (1, -1):
        got = st.rotate(p, sign).samples()
        assert np.max(np.abs(got - st.rotate_samples(u, sign))) <= 1e-12
    back = st.rotate(st.rotate(p, 1), -1)
    assert np.max(np.abs(back.coeffs - p.coeffs)) <= 1e-13


def test_rotate_rejects_bad_sign():
    with pytest.raises(ValueError):
        st.rotate(st.constant_profile([1.0, 0.0], 8), 2)


def test_eval_diagonal_examples():
    rng = np.random.default_rng(4)
    u = band_limited(rng, 16)
    p = st.to_coeffs(u)
    assert np.allclose(st.eval_diagonal(p, 0.0, 0.1), u[:, 0], atol=1e-13)
    c = st.constant_profile([3.0, -1.0], 8)
    assert np.allclose(st.eval_diagonal(c, 0.37, 1e-3), [3.0, -1.0])
    v = np.array([0.5, 2.0])
    r = st.to_coeffs(st.rotation(st.tau_grid(16), v[:, None]))
    eps = 0.01
    assert np.allclose(st.eval_diagonal(r, eps * np.pi / 2, eps), [v[1], -v[0]], atol=1e-14)


def test_eval_diagonal_off_grid_matches_trig_interpolant():
    rng = np.random.default_rng(5)
    lmax = 5
    a = rng.normal(size=(2, lmax + 1))
    b = rng.normal(size=(2, lmax + 1))

    def f(t):
        return sum(a[:, l] * np.cos(l * t) + b[:, l] * np.sin(l * t) for l in range(lmax + 1))

    p = st.to_coeffs(np.stack([f(t) for t in st.tau_grid(16)], axis=-1))
    for theta in (0.3, 2.1, 5.9):
        assert np.allclose(st.eval_diagonal(p, theta * 0.2, 0.2), f(theta), atol=1e-13)


def test_eval_diagonal_rejects_eps():
    with pytest.raises(ValueError):
        st.eval_diagonal(st.constant_profile([1.0, 0.0], 8), 0.0, 0.0)


@settings(max_examples=40, deadline=None)
@given(seed=hs.integers(0, 2**32 - 1), half=hs.integers(2, 16))
def test_operator_identities(seed, half):
    n = 2 * half
    rng = np.random.default_rng(seed)
    u = band_limited(rng, n, lmax=max(0, half - 2))
    p = st.to_coeffs(u)
    scale = max(1.0, np.max(np.abs(u)))
    assert np.max(np.abs(st.average_pi(st.op_A(p)))) <= 1e-12 * scale
    zero_mean = p - st.constant_profile(st.average_pi(p), n)
    d = st.derivative(st.antiderivative(zero_mean))
    assert np.max(np.abs(d.coeffs - zero_mean.coeffs)) <= 1e-12 * scale
    assert np.max(np.abs(st.rotate(st.rotate(p, -1), 1).coeffs - p.coeffs)) <= 1e-12 * scale
    parseval = np.sum(u**2) / n - np.sum(np.abs(p.coeffs) ** 2)
    assert abs(parseval) <= 1e-12 * np.sum(u**2) / n
    rt = st.to_samples(p)
    assert np.max(np.abs(rt - u)) <= 1e-12 * scale
