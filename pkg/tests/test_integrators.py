import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hs
from scipy.integrate import quad

from gyroua import diagnostics as dg
from gyroua import fields as fl
from gyroua import integrators as it
from gyroua import spectral_tau as st
from gyroua import twoscale as ts

FIELDS = fl.paper_field_model()
X0 = np.array([1.0, 2.0])
V0 = np.array([1.0, 0.5])
STEPS = {"imex1": it.imex1_step, "imex2": it.imex2_step, "ei1": it.ei1_step, "ei2": it.ei2_step}


def duhamel_quadrature(l, ds, eps, weight_power):
    """∫₀^Δs e^{-il(Δs-θ)/ε} θ^m dθ by QUADPACK's oscillatory rule (u = Δs - θ)."""
    om = l / eps

    def g(u):
        return (ds - u) ** weight_power

    if om == 0:
        return complex(quad(g, 0, ds, epsabs=0, epsrel=1e-13)[0])
    re = quad(g, 0, ds, weight="cos", wvar=om, epsabs=0, epsrel=1e-13, limlst=200)[0]
    im = quad(g, 0, ds, weight="sin", wvar=om, epsabs=0, epsrel=1e-13, limlst=200)[0]
    return complex(re, -im)


def ctx_for(fields, x0, eps, t0=0.0):
    return it.RhsContext(fields.magnetic.b(x0), fields, t0, eps)


def sup_gap(a, b):
    return max(np.max(np.abs(a[0].samples() - b[0].samples())), np.max(np.abs(a[1].samples() - b[1].samples())))


# -- coefficient tables -------------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(log_ds=hs.floats(-6, 0), log_eps=hs.floats(-4, 0), half=hs.integers(2, 32))
def test_coefficient_bounds(log_ds, log_eps, half):
    ds, eps, n = 10.0**log_ds, 10.0**log_eps, 2 * half
    c = it.StepCoefficients.build(ds, eps, n)
    l = st.modes(n)
    nz = l != 0
    tol = 1 + 1e-12
    assert np.all(np.abs(c.p) <= tol)
    assert np.all(ds * np.abs(c.p[nz]) <= eps * tol)
    assert np.all(np.abs(c.pE) <= np.minimum(ds, np.where(nz, 2 * eps / np.where(nz, np.abs(l), 1), np.inf)) * tol)
    assert c.pE[0] == pytest.approx(ds, rel=1e-14)
    assert c.qE[0] == pytest.approx(0.5 * ds * ds, rel=1e-14)
    # free part is never amplified
    assert np.allclose(np.abs(c.phase), 1.0, atol=1e-14)
    assert np.allclose(np.abs(c.cn_ratio), 1.0, atol=1e-14)
    assert np.all(np.abs(c.p_half) <= tol)


def test_coefficient_limits():
    ds = 0.3
    c = it.StepCoefficients.build(ds, ds / 1e-8, 32)
    assert np.allclose(c.p, 1.0, rtol=0, atol=1e-6)
    assert np.allclose(c.pE, ds, rtol=1e-6)
    assert np.allclose(c.qE, 0.5 * ds * ds, rtol=1e-6)


def test_half_tables_are_leading_modes():
    c = it.StepCoefficients.build(np.array([0.01, 0.02]), 0.1, 16)
    assert c.h.pE.shape == (2, 9)
    assert np.array_equal(c.h.qE, c.qE[..., :9])


# QUADPACK flags round-off near its tolerance floor; the assertion is the check
@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
@pytest.mark.parametrize("ratio", [1e-6, 1e-2, 1.0, 37.0, 1e3])
@pytest.mark.parametrize("l", [-7, -1, 0, 1, 4, 15])
def test_coefficients_match_quadrature(ratio, l):
    eps = 0.05
    ds = ratio * eps
    n = 32
    c = it.StepCoefficients.build(ds, eps, n)
    j = l % n
    p_ref = duhamel_quadrature(l, ds, eps, 0)
    q_ref = duhamel_quadrature(l, ds, eps, 1)
    assert abs(c.pE[j] - p_ref) <= 1e-12 * abs(p_ref)
    assert abs(c.qE[j] - q_ref) <= 1e-12 * abs(q_ref)


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
@pytest.mark.parametrize("ratio", [1e-1, 1.0, 1e3])
def test_printed_closed_forms_where_well_conditioned(ratio):
    eps = 0.2
    ds = ratio * eps
    for l in (-3, 0, 2, 9):
        assert abs(it.pE_closed_form(l, ds, eps) - duhamel_quadrature(l, ds, eps, 0)) <= 1e-12 * ds
        q_ref = duhamel_quadrature(l, ds, eps, 1)
        assert abs(it.qE_closed_form(l, ds, eps) - q_ref) <= 1e-12 * max(abs(q_ref), ds * eps)


def test_phi_taylor_and_closed_branches_meet():
    w = np.array([0.4999999, 0.5000001]) * np.exp(0.3j)
    for k in (1, 2):
        v = it.phi(k, w)
        assert abs(v[0] - v[1]) <= 1e-6
    with pytest.raises(ValueError):
        it.phi(3, w)


def test_bad_coefficient_inputs():
    with pytest.raises(ValueError):
        it.StepCoefficients.build(0.0, 0.1, 16)
    with pytest.raises(ValueError):
        it.StepCoefficients.build(0.1, -1.0, 16)
    with pytest.raises(ValueError):
        it.RhsContext(np.array([0.0]), FIELDS, 0.0, 0.1)
    with pytest.raises(ValueError):
        it.get_stepper("rk45")


# -- right-hand side -------------------------------------------------------------------


def test_rhs_constant_b_has_no_stiff_term():
    fields = fl.FieldModel(fl.ConstantMagnetic(1.3), fl.ConstantElectric())
    X, Y = ts.prepare(1, X0, V0, FIELDS, 1e-3, 16)
    F1, F2 = it.rhs_F(X, Y, 0.0, ctx_for(fields, X0, 1e-6))
    assert np.max(np.abs(F2.coeffs)) == 0.0


def test_rhs_constant_y_has_first_modes_only():
    n = 16
    X = st.constant_profile(X0, n)
    Y = st.constant_profile(V0, n)
    F1, _ = it.rhs_F(X, Y, 0.0, ctx_for(FIELDS, X0, 0.1))
    mask = np.ones(n, dtype=bool)
    mask[[1, n - 1]] = False
    assert np.max(np.abs(F1.coeffs[:, mask])) <= 1e-15
    assert np.max(np.abs(F1.coeffs[:, ~mask])) > 0.1


def test_rhs_bounded_uniformly_in_eps():
    norms = []
    for eps in np.logspace(-4, -1, 7):
        X, Y = ts.prepare(1, X0, V0, FIELDS, eps, 32)
        F1, F2 = it.rhs_F(X, Y, 0.0, ctx_for(FIELDS, X0, eps))
        norms.append(np.max(np.abs(F2.samples())))
    assert max(norms) <= 3.0 * min(norms)


# -- scheme examples ---------------------------------------------------------------------


@pytest.mark.parametrize("scheme", sorted(STEPS))
def test_free_gyration_keeps_y_constant(scheme):
    fields = fl.FieldModel(fl.ConstantMagnetic(2.0), fl.ConstantElectric())
    eps, n = 0.01, 16
    X, Y = ts.prepare(1, X0, V0, fields, eps, n)
    ctx = ctx_for(fields, X0, eps)
    Xn, Yn = STEPS[scheme](X, Y, 0.0, 0.037, ctx)
    assert np.max(np.abs(Yn.samples() - V0[:, None])) <= 1e-14


@pytest.mark.parametrize("scheme", sorted(STEPS))
def test_small_step_consistency(scheme):
    eps, n = 0.1, 32
    X, Y = ts.prepare(2, X0, V0, FIELDS, eps, n)
    ctx = ctx_for(FIELDS, X0, eps)
    devs = []
    for ds in (1e-3, 5e-4, 2.5e-4):
        devs.append(sup_gap(STEPS[scheme](X, Y, 0.0, ds, ctx), (X, Y)))
    # the τ-transport alone moves profiles by O(Δs/ε)
    assert devs[-1] <= 20 * 2.5e-4 / eps
    assert dg.fit_order(devs, [1e-3, 5e-4, 2.5e-4]) == pytest.approx(1.0, abs=0.1)


def test_ei1_free_part_is_phase_rotation():
    fields = fl.FieldModel(fl.ConstantMagnetic(1.0), fl.ConstantElectric())
    rng = np.random.default_rng(1)
    X = st.to_coeffs(rng.normal(size=(2, 16)))
    Y = st.constant_profile([0.0, 0.0], 16)
    c = it.StepCoefficients.build(0.03, 0.01, 16)
    Xn, Yn = it.ei1_step(X, Y, 0.0, 0.03, ctx_for(fields, X0, 0.01))
    expect = st.zero_nyquist(c.phase * X.coeffs)
    assert np.allclose(Xn.coeffs, expect, atol=1e-15)
    assert np.allclose(np.abs(Xn.coeffs[:, :8]), np.abs(X.coeffs[:, :8]), atol=1e-15)


def test_ei1_mean_mode_is_forward_euler():
    eps, n, ds = 0.05, 16, 0.02
    X, Y = ts.prepare(1, X0, V0, FIELDS, eps, n)
    ctx = ctx_for(FIELDS, X0, eps)
    F1, F2 = it.rhs_F(X, Y, 0.0, ctx)
    Xn, Yn = it.ei1_step(X, Y, 0.0, ds, ctx)
    assert np.allclose(Xn.coeffs[:, 0], X.coeffs[:, 0] + ds * F1.coeffs[:, 0], atol=1e-15)
    assert np.allclose(Yn.coeffs[:, 0], Y.coeffs[:, 0] + ds * F2.coeffs[:, 0], atol=1e-15)


def test_ei2_equals_ei1_for_frozen_forcing():
    fields = fl.FieldModel(fl.ConstantMagnetic(1.5), fl.ConstantElectric((0.4, -0.2)))
    eps, n, ds = 0.02, 16, 0.05
    X, Y = ts.prepare(1, X0, V0, fields, eps, n)
    ctx = ctx_for(fields, X0, eps)
    _, Y1 = it.ei1_step(X, Y, 0.0, ds, ctx)
    _, Y2 = it.ei2_step(X, Y, 0.0, ds, ctx)
    assert np.max(np.abs(Y1.coeffs - Y2.coeffs)) <= 1e-15


def fine_oracle(X, Y, ds, ctx, m=200):
    return it.integrate(X, Y, ctx, ds / m, m, "ei2")


@pytest.mark.parametrize("scheme,order", [("imex1", 1), ("ei1", 1), ("imex2", 2), ("ei2", 2)])
def test_local_order_against_fine_oracle(scheme, order):
    eps, n = 0.5, 32
    X, Y = ts.prepare(3, X0, V0, FIELDS, eps, n)
    ctx = ctx_for(FIELDS, X0, eps)
    hs_ = [0.04, 0.02, 0.01]
    errs = [sup_gap(STEPS[scheme](X, Y, 0.0, h, ctx), fine_oracle(X, Y, h, ctx)) for h in hs_]
    assert dg.fit_order(errs, hs_) == pytest.approx(order + 1, abs=0.2)


def test_imex2_global_second_order_eps_one():
    eps, n, s_f = 1.0, 64, 0.5
    X, Y = ts.prepare(3, X0, V0, FIELDS, eps, n)
    ctx = ctx_for(FIELDS, X0, eps)
    runs = {h: it.integrate(X, Y, ctx, h, int(round(s_f / h)), "imex2") for h in (0.05, 0.025, 0.0125, 0.00625)}
    hs_ = [0.05, 0.025, 0.0125]
    errs = [sup_gap(runs[h], runs[h / 2]) for h in hs_]
    assert dg.fit_order(errs, hs_) == pytest.approx(2.0, abs=0.2)


def test_ei2_stable_far_beyond_cfl():
    eps, dt = 1e-3, 1e-2
    rng = np.random.default_rng(5)
    x0 = rng.uniform(0, 6, size=(2, 16))
    v0 = rng.normal(size=(2, 16))
    X, Y = ts.prepare(1, x0, v0, FIELDS, eps, 16)
    bk = FIELDS.magnetic.b(x0)
    ctx = it.RhsContext(bk, FIELDS, 0.0, eps)
    Xn, Yn = it.integrate(X, Y, ctx, bk * dt, 100, "ei2")
    assert np.max(np.abs(Xn.samples() - x0[..., None])) <= 0.1
    assert np.max(np.abs(Yn.samples())) <= 3 * np.max(np.abs(v0)) + 3


def test_integrate_observer_and_half_round_trip():
    X, Y = ts.prepare(2, X0, V0, FIELDS, 0.1, 16)
    assert np.allclose(it.from_half(it.to_half(X), 16).coeffs, st.zero_nyquist(X.coeffs.copy()), atol=1e-16)
    seen = []
    it.integrate(X, Y, ctx_for(FIELDS, X0, 0.1), 0.01, 3, "imex1", observer=lambda k, s, xh, yh: seen.append((k, float(s))))
    assert [k for k, _ in seen] == [1, 2, 3]
    assert seen[-1][1] == pytest.approx(0.03)
