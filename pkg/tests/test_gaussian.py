import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from epsense import gaussian as gs
from epsense.checks import ThermalFamily
from epsense.errors import (NonPhysicalCovariance, PurityDerivativeSingularity, StepTooLarge,
                            TruncationTooSmall)

GM = gs.GaussianMode


def test_purity():
    assert gs.purity(GM([0, 0], 0.5 * np.eye(2))) == 1.0
    assert gs.purity(GM.displaced_thermal(0.3, 1.0)) == pytest.approx(1 / 3)
    assert gs.purity(GM.displaced_thermal(0.0, 0.5)) == pytest.approx(0.5)
    with pytest.raises(NonPhysicalCovariance):
        gs.purity(GM([0, 0], 0.2 * np.eye(2)))
    with pytest.raises(NonPhysicalCovariance):
        gs.purity(GM([0, 0], [[1, 0.2], [0.3, 1]]))


def test_fidelity_examples():
    m = GM.displaced_thermal(0.4 - 0.2j, 0.7)
    assert gs.fidelity(m, m) == pytest.approx(1.0, abs=1e-14)
    a1, a2 = 0.3 + 0.1j, -0.5 + 0.6j
    f = gs.fidelity(GM.displaced_thermal(a1, 0), GM.displaced_thermal(a2, 0))
    assert f == pytest.approx(math.exp(-abs(a1 - a2) ** 2), rel=1e-12)
    t = GM.displaced_thermal(0, 1.0)
    assert gs.fidelity(t, t) == pytest.approx(1.0)


def test_fidelity_thermal_pair_vs_closed_form():
    # two thermal states: F = 1 / (sqrt((n1+1)(n2+1)) - sqrt(n1 n2))^2
    n1, n2 = 0.3, 1.7
    f = gs.fidelity(GM.displaced_thermal(0, n1), GM.displaced_thermal(0, n2))
    assert f == pytest.approx(1 / (math.sqrt((n1 + 1) * (n2 + 1)) - math.sqrt(n1 * n2)) ** 2, rel=1e-12)


def test_bures_distance():
    m = GM.displaced_thermal(1.0, 0.2)
    assert gs.bures_distance(m, m) == pytest.approx(0.0, abs=1e-7)
    far = GM.displaced_thermal(100.0, 0.2)
    assert gs.bures_distance(m, far) == pytest.approx(math.sqrt(2))
    d = math.sqrt(math.log(4))
    b = gs.bures_distance(GM.displaced_thermal(0, 0), GM.displaced_thermal(d, 0))
    assert b == pytest.approx(math.sqrt(2 - 2 * math.sqrt(0.25)), rel=1e-12)


def test_qfi_analytic_examples():
    m = GM.displaced_thermal(0.5, 0.3)
    assert gs.qfi_analytic(m, gs.ModeDerivative([0, 0], np.zeros((2, 2)))) == 0.0
    da = 0.7 - 0.4j
    dm = gs.ModeDerivative(math.sqrt(2) * np.array([da.real, da.imag]), np.zeros((2, 2)))
    assert gs.qfi_analytic(GM.displaced_thermal(0.5, 0), dm) == pytest.approx(4 * abs(da) ** 2)
    n, dn = 0.8, 0.3
    f = gs.qfi_analytic(GM.displaced_thermal(0, n), gs.ModeDerivative([0, 0], dn * np.eye(2)))
    assert f == pytest.approx(dn ** 2 / (n * (n + 1)), rel=1e-12)
    with pytest.raises(PurityDerivativeSingularity):
        gs.qfi_analytic(GM.displaced_thermal(0, 0), gs.ModeDerivative([0, 0], 0.1 * np.eye(2)))


def test_fd_oracle():
    assert gs.qfi_fd_oracle(lambda e: GM.displaced_thermal(0.4, 0.2), 0.0) == 0.0
    assert gs.qfi_fd_oracle(lambda e: GM.displaced_thermal(e, 0), 0.3) == pytest.approx(4.0, rel=1e-6)
    with pytest.raises(StepTooLarge):
        gs.qfi_fd_oracle(lambda e: GM.displaced_thermal(0, 0.01 + abs(e) ** 0.5), 0.0, h=0.5)


def test_fock_density():
    vac = gs.fock_density(0, 0, nmax=10)
    assert vac.matrix[0, 0] == pytest.approx(1) and np.isclose(np.trace(vac.matrix), 1)
    coh = gs.fock_density(1.0, 0)
    k = np.arange(8)
    pois = np.exp(-1) / np.array([float(math.factorial(int(i))) for i in k])
    assert np.allclose(np.diag(coh.matrix)[:8].real, pois, atol=1e-12)
    th = gs.fock_density(0, 0.5)
    d = np.diag(th.matrix).real
    assert np.allclose(d[1:6] / d[:5], 1 / 3)
    rho = gs.fock_density(1.5 - 0.5j, 0.8).matrix
    assert np.allclose(rho, rho.conj().T, atol=1e-12)
    assert np.linalg.eigvalsh(rho).min() >= -1e-10
    with pytest.raises(TruncationTooSmall):
        gs.fock_density(2.0, 1.0, nmax=10)


def test_eigenbasis_oracle():
    rho = gs.fock_density(0.5, 0.2)
    assert gs.qfi_eigenbasis_oracle(rho, np.zeros_like(rho.matrix)) == 0.0
    coh = lambda e: gs.fock_density(e, 0)
    assert gs.qfi_eigenbasis_oracle(coh(0.5), gs.fock_derivative(coh, 0.5)) == pytest.approx(4.0, abs=1e-4)
    th = lambda e: gs.fock_density(e, 0.5)
    assert gs.qfi_eigenbasis_oracle(th(0.3), gs.fock_derivative(th, 0.3)) == pytest.approx(2.0, rel=1e-3)




def _physical_cov(t):
    # thermal-squeezed: (nu/2) R diag(e^2r, e^-2r) R^T with nu >= 1
    nu, r, th = t
    rot = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
    return 0.5 * nu * rot @ np.diag([math.exp(2 * r), math.exp(-2 * r)]) @ rot.T


covs = st.tuples(st.floats(1.05, 4), st.floats(-0.6, 0.6), st.floats(0, math.pi)).map(_physical_cov)
means = st.tuples(st.floats(-3, 3), st.floats(-3, 3)).map(np.array)


@settings(max_examples=300, deadline=None)
@given(means, covs, means, covs)
def test_fidelity_symmetric_and_bounded(x1, c1, x2, c2):
    m1, m2 = GM(x1, c1), GM(x2, c2)
    f12, f21 = gs.fidelity(m1, m2), gs.fidelity(m2, m1)
    assert abs(f12 - f21) <= 1e-12
    assert 0.0 <= f12 <= 1.0
    assert 0.0 <= gs.bures_distance(m1, m2) <= math.sqrt(2)


@settings(max_examples=200, deadline=None)
@given(means, covs, means, st.floats(-1, 1), st.floats(0, 2 * math.pi))
def test_qfi_rotation_invariant(x, c, dx, dc, theta):
    r = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
    dcov = dc * np.array([[1.0, 0.3], [0.3, -0.5]])
    f = gs.qfi_analytic(GM(x, c), gs.ModeDerivative(dx, dcov))
    g = gs.qfi_analytic(GM(r @ x, r @ c @ r.T), gs.ModeDerivative(r @ dx, r @ dcov @ r.T))
    assert g == pytest.approx(f, rel=1e-9, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.1, 1.3), st.floats(0, 2 * math.pi), st.floats(-0.5, 0.5), st.floats(-1, 1),
       st.floats(0.05, 1.0), st.floats(-0.5, 0.5))
def test_oracle_triangle_property(a0, phi, r, k, n0, m):
    fam = ThermalFamily(a0, phi, r, k, n0, m * n0)
    exact = gs.qfi_analytic(fam.mode(0.0), fam.derivative())
    fd = gs.qfi_fd_oracle(fam.mode, 0.0, h=1e-3)
    assert fd == pytest.approx(exact, rel=1e-5)
