"""Oracle-agreement checks behind ``epsense check``.

Each check returns ``(name, passed, worst_relative_error)``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import active, gaussian, model, scattering, sensing


def rel_err(a, b) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


@dataclass(frozen=True)
class ThermalFamily:
    """``alpha(e) = a0 (1 + r e) e^(i(phi + k e))``, ``nbar(e) = n0 + m e``."""
    a0: float
    phi: float
    r: float
    k: float
    n0: float
    m: float

    def alpha(self, e: float) -> complex:
        return self.a0 * (1 + self.r * e) * cmath.exp(1j * (self.phi + self.k * e))

    def nbar(self, e: float) -> float:
        return self.n0 + self.m * e

    def mode(self, e: float) -> gaussian.GaussianMode:
        return gaussian.GaussianMode.displaced_thermal(self.alpha(e), self.nbar(e))

    def derivative(self) -> gaussian.ModeDerivative:
        d = self.a0 * cmath.exp(1j * self.phi) * complex(self.r, self.k)
        return gaussian.ModeDerivative(math.sqrt(2) * np.array([d.real, d.imag]),
                                       self.m * np.eye(2))

    def fock(self, e: float) -> gaussian.FockState:
        return gaussian.fock_density(self.alpha(e), self.nbar(e))


def random_family(rng, max_alpha=2.0, max_nbar=1.0) -> ThermalFamily:
    n0 = rng.uniform(0.05, max_nbar)
    return ThermalFamily(a0=rng.uniform(0.1, max_alpha / 1.5), phi=rng.uniform(0, 2 * math.pi),
                         r=rng.uniform(-0.5, 0.5), k=rng.uniform(-1, 1),
                         n0=n0, m=rng.uniform(-0.5, 0.5) * n0)


def family_errors(fam: ThermalFamily) -> tuple[float, float]:
    exact = gaussian.qfi_analytic(fam.mode(0.0), fam.derivative())
    fd = gaussian.qfi_fd_oracle(fam.mode, 0.0, h=1e-3)
    rho = fam.fock(0.0)
    fock = gaussian.qfi_eigenbasis_oracle(rho, gaussian.fock_derivative(fam.fock, 0.0))
    return rel_err(exact, fd), rel_err(exact, fock)


def check_qfi_oracles(n_families: int = 10, seed: int = 7):
    rng = np.random.default_rng(seed)
    errs = [family_errors(random_family(rng)) for _ in range(n_families)]
    fd = max(e[0] for e in errs)
    fock = max(e[1] for e in errs)
    return [("gaussian qfi vs Bures finite difference", fd <= 1e-5, fd),
            ("gaussian qfi vs truncated Fock spectrum", fock <= 1e-3, fock)]


def two_route_error(p: model.PassiveParams, field: scattering.InputField, nu: float) -> float:
    """Per-mode QFI from the closed form vs the Gaussian formula on the output moments."""
    direct = sensing.qfi_density(nu, p, field)
    via = gaussian.qfi_analytic(scattering.output_moments(nu, p, field),
                                scattering.output_moments_derivative(nu, p, field))
    return rel_err(direct, via)


def check_two_route(n: int = 20, seed: int = 11):
    rng = np.random.default_rng(seed)
    field = scattering.InputField(alpha=1000.0, bandwidth=200.0)
    worst = 0.0
    for i in range(n):
        g = 1.025 if i == 0 else rng.uniform(0.5, 2.5)
        p = model.PassiveParams(gamma_a=5.0, gamma_b=1.0, gamma_ex=0.1, g=g)
        worst = max(worst, two_route_error(p, field, rng.uniform(-10, 10)))
    return [("per-mode qfi: closed form vs output moments", worst <= 1e-8, worst)]


def check_threshold():
    p = model.PassiveParams(gamma_a=5.0, gamma_b=1.0, gamma_ex=0.1, g=2.4)
    a = active.ActiveSystem(p, active.GainParams(n_total=2e12, g_gain=1e-5, kappa=100.0,
                                                 s_z=0.0, gamma_1=0.01))
    closed = active.lasing_threshold(a)
    scan = active.singularity_scan(a)
    err = rel_err(closed, scan)
    return [("lasing threshold: closed form vs eigenvalue crossing", err <= 1e-6, err)]


def check_generic_scattering(n: int = 20, seed: int = 3):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        p = model.PassiveParams(gamma_a=rng.uniform(0.5, 6), gamma_b=1.0,
                                gamma_ex=rng.uniform(0.01, 1), g=rng.uniform(0, 3),
                                nu_a=rng.uniform(-1, 1))
        nu = rng.uniform(-5, 5)
        # the waveguide couples to cavity a only; its loss is already in gamma_a'
        row = scattering.generic_scattering(nu, model.coefficient_matrix(p),
                                            scattering.PortCouplings((p.gamma_ex, 0.0)))
        expect = 1 - 1j * scattering.scattering_amplitude(nu, p)
        worst = max(worst, abs(row[0, 0] - expect) / max(1.0, abs(expect)))
    return [("generic scattering vs cavity propagators", worst <= 1e-10, worst)]


ALL_CHECKS = (check_qfi_oracles, check_two_route, check_threshold, check_generic_scattering)


def run_all():
    results = []
    for fn in ALL_CHECKS:
        results.extend(fn())
    return results
