import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from epsense import model, scattering as sc
from epsense.errors import InvalidParameter, NonPositiveFrequency, SingularAtFrequency
from epsense.model import PassiveParams
from epsense.numerics import central_diff

from conftest import fig2


def test_input_field():
    f = sc.InputField(alpha=1000.0, bandwidth=200.0)
    assert f.amplitude(0.0) == pytest.approx(-200j)
    assert f.power(3.0) == pytest.approx(abs(f.amplitude(3.0)) ** 2)
    with pytest.raises(InvalidParameter):
        sc.InputField(alpha=1.0, bandwidth=0.0)
    with pytest.raises(InvalidParameter):
        sc.InputField(alpha=1.0, bandwidth=1.0, inv_temperature=0.0)


def test_thermal_occupation():
    assert sc.thermal_occupation(-3.0, math.inf) == 0.0
    assert sc.thermal_occupation(math.log(2), 1.0) == pytest.approx(1.0)
    assert sc.thermal_occupation(0.1, 1.0) == pytest.approx(9.5083, abs=1e-4)
    with pytest.raises(NonPositiveFrequency):
        sc.thermal_occupation(0.0, 2.0)


def test_free_propagator():
    p = PassiveParams(gamma_a=1.0, gamma_b=2.0, nu_b=0.5)
    assert sc.free_propagator_b(0.5, p) == pytest.approx(-1j)
    assert sc.free_propagator_b(1.5, p) == pytest.approx((1 - 1j) / 2)
    assert sc.free_propagator_b(1e8, p) == pytest.approx(1e-8, rel=1e-6)


def test_dressed_propagator():
    p = fig2(g=0.0)
    assert sc.dressed_propagator_a(0.7, p) == pytest.approx(1 / complex(0.7, 2.55))
    assert sc.dressed_propagator_a(0.0, fig2(g=1.025)) == pytest.approx(-0.214996j, abs=1e-6)
    assert sc.scattering_amplitude(0.0, fig2(g=1.025)) == pytest.approx(-0.0214996j, abs=1e-7)
    assert sc.scattering_amplitude(0.3, fig2(g=1.0).__class__(gamma_a=5.0, g=1.0)) == 0


def test_output_moments():
    p = fig2(g=1.025)
    zero = sc.InputField(alpha=0.0, bandwidth=1.0, inv_temperature=2.0)
    m = sc.output_moments(0.4, p, zero)
    assert np.allclose(m.mean, 0) and np.allclose(m.cov, (sc.thermal_occupation(0.4, 2.0) + 0.5) * np.eye(2))
    f = sc.InputField(alpha=1000.0, bandwidth=200.0)
    m = sc.output_moments(0.5, PassiveParams(gamma_a=5.0, g=1.0), f)
    a = f.amplitude(0.5)
    assert np.allclose(m.mean, math.sqrt(2) * np.array([a.real, a.imag]))
    assert np.allclose(m.cov, 0.5 * np.eye(2))
    m = sc.output_moments(0.0, p, f)
    out = -200j * (1 - 1j * (-0.0214996j))
    assert m.mean == pytest.approx(math.sqrt(2) * np.array([out.real, out.imag]), abs=1e-3)


def test_passivity_bound():
    p = fig2(g=1.5)
    nus = np.linspace(-30, 30, 601)
    bound = 1 + p.gamma_ex * max(abs(sc.dressed_propagator_a(n, p)) for n in nus)
    assert all(abs(1 - 1j * sc.scattering_amplitude(n, p)) <= bound for n in nus)
    assert all(abs(1 - 1j * sc.scattering_amplitude(n, p)) <= 1 + 1e-12 for n in nus)


def test_ds_deps_single_cavity():
    p = fig2(g=0.0)
    ga = sc.dressed_propagator_a(0.3, p)
    assert sc.dS_deps_analytic(0.3, p) == pytest.approx(p.gamma_ex * ga * ga * 0.5)


@pytest.mark.parametrize("conv", model.EPS_CONVENTIONS)
def test_ds_deps_vs_central_diff(conv):
    rng = np.random.default_rng(5)
    for _ in range(100):
        p = PassiveParams(gamma_a=rng.uniform(0.5, 6), gamma_b=1.0, gamma_ex=rng.uniform(0.01, 1),
                          g=rng.uniform(0, 3), nu_a=rng.uniform(-1, 1), nu_b=rng.uniform(-1, 1))
        nu = rng.uniform(-6, 6)
        fd = central_diff(lambda e: sc.scattering_amplitude(nu, p.with_detuning(e, conv)), p.epsilon, 1e-4)
        assert sc.dS_deps_analytic(nu, p, conv) == pytest.approx(fd, rel=1e-7, abs=1e-13)


def test_ds_deps_even_in_detuning():
    for nu in np.linspace(-3, 3, 13):
        for eps in (0.05, 0.4, 1.3):
            p = fig2(g=1.2)
            plus = abs(sc.dS_deps_analytic(nu, p.with_detuning(eps)))
            minus = abs(sc.dS_deps_analytic(-nu, p.with_detuning(-eps)))
            assert plus == pytest.approx(minus, rel=1e-10)


def _product_slope(p, eps, conv, nu=0.4):
    def prod(e):
        nu_p, nu_m = model.eigenvalues(p.with_detuning(e, conv))
        return (nu - nu_p) * (nu - nu_m)
    return central_diff(prod, eps, 1e-3)


def test_product_linear_in_detuning():
    # moving cavity a alone, (nu - nu_+)(nu - nu_-) is linear in eps on both sides of the EP
    for g in (1.025, 1.3, 0.7):
        p = fig2(g=g)
        ref = _product_slope(p, 0.0, model.CAVITY_A_ONLY)
        for eps in (-0.5, -0.01, 0.2, 1.0):
            assert abs(_product_slope(p, eps, model.CAVITY_A_ONLY) - ref) <= 1e-8 * abs(ref)


def test_product_quadratic_symmetric_convention():
    # with nu_bar fixed both cavities move, adding -eps^2/4
    p = fig2(g=1.025)
    for eps in (-0.5, 0.2, 1.0):
        slope = _product_slope(p, eps, model.SYMMETRIC)
        assert slope == pytest.approx(_product_slope(p, 0.0, model.SYMMETRIC) - eps / 2, abs=1e-9)


def test_generic_scattering():
    m = model.coefficient_matrix(fig2(g=1.7))
    row = sc.generic_scattering(0.2, m, sc.PortCouplings((0.0, 0.0)))
    assert row[0, 0] == 1 and np.allclose(row[0, 1:], 0)
    p = fig2(g=1.7)
    row = sc.generic_scattering(0.2, m, sc.PortCouplings((p.gamma_ex, 0.0)))
    assert row[0, 0] == pytest.approx(1 - 1j * sc.scattering_amplitude(0.2, p), abs=1e-12)
    with pytest.raises(InvalidParameter):
        sc.generic_scattering(0.2, m, sc.PortCouplings((1.0,)))
    with pytest.raises(SingularAtFrequency):
        sc.generic_scattering(1.0, np.diag([1.0, 2.0]), sc.PortCouplings((1.0, 0.0)))
    with pytest.raises(InvalidParameter):
        sc.PortCouplings((-1.0,))


@settings(max_examples=200, deadline=None)
@given(st.floats(0.1, 6), st.floats(0, 3), st.floats(0, 1), st.floats(-1, 1), st.floats(-20, 20))
def test_rational_identity(gamma_a, g, gamma_ex, eps, nu):
    p = PassiveParams(gamma_a=gamma_a, gamma_ex=gamma_ex, g=g).with_detuning(eps)
    nu_p, nu_m = model.eigenvalues(p)
    lhs = sc.dressed_propagator_a(nu, p) * (nu - nu_p) * (nu - nu_m)
    rhs = complex(nu - p.nu_b, 0.5 * p.gamma_b)
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(rhs))
    assert sc.dressed_propagator_a_rational(nu, p) == pytest.approx(sc.dressed_propagator_a(nu, p), rel=1e-9, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.1, 6), st.floats(0, 3), st.floats(0.01, 1), st.floats(-1, 1), st.floats(-10, 10))
def test_generic_matches_passive_pipeline(gamma_a, g, gamma_ex, eps, nu):
    p = PassiveParams(gamma_a=gamma_a, gamma_ex=gamma_ex, g=g).with_detuning(eps)
    row = sc.generic_scattering(nu, model.coefficient_matrix(p), sc.PortCouplings((gamma_ex, 0.0)))
    assert abs(row[0, 0] - (1 - 1j * sc.scattering_amplitude(nu, p))) <= 1e-10
    assert abs(row[0, 1] - sc.dressed_propagator_a(nu, p) * math.sqrt(gamma_ex)) <= 1e-10 * max(1, abs(row[0, 1]))
