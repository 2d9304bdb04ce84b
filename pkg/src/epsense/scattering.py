"""Frequency-domain input-output relations for the waveguide-probed cavities."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameter, NonPositiveFrequency, Singular, SingularAtFrequency
from .gaussian import GaussianMode, ModeDerivative
from .model import SYMMETRIC, PassiveParams, detuning_rates, eigenvalues
from .numerics import as_matrix, det, inverse

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class InputField:
    """Coherent probe with Lorentzian spectrum on a thermal background.

    ``alpha_nu = alpha sqrt(2 Gamma) / (nu - center + i Gamma/2)``;
    ``inv_temperature = inf`` means zero temperature.
    """
    alpha: float
    bandwidth: float
    center: float = 0.0
    inv_temperature: float = math.inf

    def __post_init__(self):
        if not math.isfinite(self.alpha) or not math.isfinite(self.center):
            raise InvalidParameter("alpha and center must be finite")
        if not self.bandwidth > 0 or not math.isfinite(self.bandwidth):
            raise InvalidParameter("bandwidth must be > 0")
        if not self.inv_temperature > 0:
            raise InvalidParameter("inv_temperature must be > 0 (inf for zero temperature)")

    def amplitude(self, nu: float) -> complex:
        return (self.alpha * math.sqrt(2 * self.bandwidth)
                / complex(nu - self.center, 0.5 * self.bandwidth))

    def power(self, nu: float) -> float:
        """``|alpha_nu|^2``."""
        x = nu - self.center
        return self.alpha ** 2 * 2 * self.bandwidth / (x * x + 0.25 * self.bandwidth ** 2)


@dataclass(frozen=True)
class PortCouplings:
    rates: tuple

    def __post_init__(self):
        rates = tuple(float(r) for r in self.rates)
        if any(r < 0 or not math.isfinite(r) for r in rates):
            raise InvalidParameter("port coupling rates must be finite and >= 0")
        object.__setattr__(self, "rates", rates)


def thermal_occupation(nu: float, beta: float) -> float:
    """Bose occupation ``1/(e^(beta nu) - 1)``; zero at ``beta = inf``."""
    if math.isinf(beta):
        return 0.0
    if nu <= 0:
        raise NonPositiveFrequency(f"thermal occupation needs nu > 0 at finite beta (nu={nu!r})")
    return 1.0 / math.expm1(beta * nu)


def free_propagator_b(nu: float, p: PassiveParams) -> complex:
    return 1.0 / complex(nu - p.nu_b, 0.5 * p.gamma_b)


def dressed_propagator_a(nu: float, p: PassiveParams) -> complex:
    gb = free_propagator_b(nu, p)
    return 1.0 / (complex(nu - p.nu_a, 0.5 * p.gamma_a_total) - p.g * p.g * gb)


def dressed_propagator_a_rational(nu: float, p: PassiveParams) -> complex:
    """Same propagator written as ``(nu - nu_b + i gamma_b/2) / ((nu - nu_+)(nu - nu_-))``."""
    nu_p, nu_m = eigenvalues(p)
    return complex(nu - p.nu_b, 0.5 * p.gamma_b) / ((nu - nu_p) * (nu - nu_m))


def scattering_amplitude(nu: float, p: PassiveParams) -> complex:
    return p.gamma_ex * dressed_propagator_a(nu, p)


def dS_deps_analytic(nu: float, p: PassiveParams, convention: str = SYMMETRIC) -> complex:
    """``dS/d eps`` at fixed probe frequency.

    ``S = gamma_ex / D`` with ``D = nu - nu_a + i gamma_a'/2 - g^2 G_b0``, so
    ``dS/deps = gamma_ex G_a^2 (da + g^2 G_b0^2 db)`` where ``da``, ``db`` are
    the cavity frequency rates of the convention.
    """
    da, db = detuning_rates(convention)
    gb = free_propagator_b(nu, p)
    ga = 1.0 / (complex(nu - p.nu_a, 0.5 * p.gamma_a_total) - p.g * p.g * gb)
    return p.gamma_ex * ga * ga * (da + p.g * p.g * gb * gb * db)


def output_moments(nu: float, p: PassiveParams, field: InputField) -> GaussianMode:
    """Waveguide output quadrature means and covariance at frequency ``nu``."""
    nbar = thermal_occupation(nu, field.inv_temperature)
    out = field.amplitude(nu) * (1 - 1j * scattering_amplitude(nu, p))
    return GaussianMode(SQRT2 * np.array([out.real, out.imag]), (nbar + 0.5) * np.eye(2))


def output_moments_derivative(nu: float, p: PassiveParams, field: InputField,
                              convention: str = SYMMETRIC) -> ModeDerivative:
    d_out = field.amplitude(nu) * (-1j) * dS_deps_analytic(nu, p, convention)
    return ModeDerivative(SQRT2 * np.array([d_out.real, d_out.imag]), np.zeros((2, 2)))


def generic_scattering(nu: float, m, ports: PortCouplings) -> np.ndarray:
    """Single-channel scattering map of an n-mode linear system.

    Returns a ``1 x (n+1)`` complex row: entry 0 multiplies ``c_in``, entry
    ``l+1`` multiplies ``o_l^in / sqrt(2 pi)``::

        c_out = [1 - i sum_lj sqrt(k_l) (M_nu^-1)_lj sqrt(k_j)] c_in
                + sum_l [sum_j (M_nu^-1)_lj sqrt(k_j)] o_l^in / sqrt(2 pi)

    with ``M_nu = nu I - M`` and ``k`` the port coupling rates.
    """
    a = as_matrix(m)
    n = a.shape[0]
    if len(ports.rates) != n:
        raise InvalidParameter(f"{len(ports.rates)} port rates for a {n}-mode system")
    m_nu = nu * np.eye(n) - a
    scale = max(1.0, np.abs(m_nu).max()) ** n
    if abs(det(m_nu)) <= 1e-14 * scale:
        raise SingularAtFrequency(f"nu I - M is singular at nu={nu!r} (lasing condition)")
    try:
        inv = inverse(m_nu)
    except Singular as exc:
        raise SingularAtFrequency(str(exc)) from exc
    root_k = np.sqrt(np.array(ports.rates))
    drive = inv @ root_k
    row = np.empty((1, n + 1), dtype=complex)
    row[0, 0] = 1 - 1j * (root_k @ drive)
    row[0, 1:] = drive
    return row
