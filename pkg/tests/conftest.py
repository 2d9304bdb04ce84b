import pytest

from epsense.active import ActiveSystem, GainParams
from epsense.model import PassiveParams
from epsense.scattering import InputField


def fig2(g=2.4, **kw):
    return PassiveParams(gamma_a=5.0, gamma_b=1.0, gamma_ex=0.1, g=g, **kw)


def fig4(s_z=0.0, g=2.4, kappa=100.0, **kw):
    return ActiveSystem(fig2(g=g, **kw), GainParams(n_total=2e12, g_gain=1e-5, kappa=kappa,
                                                    s_z=s_z, gamma_1=0.01))


@pytest.fixture
def probe():
    return InputField(alpha=1000.0, bandwidth=200.0)


def pytest_terminal_summary(terminalreporter):
    import test_acceptance
    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for num in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(test_acceptance.RESULTS[num])
