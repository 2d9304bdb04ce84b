"""Frequency-integrated QFI of the passive sensor and its splitting decomposition."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import model
from .errors import InvalidParameter, PoorFit, ZeroInformation
from .model import SYMMETRIC, PassiveParams, detuning_rates
from .numerics import QuadratureSpec, integrate
from .scattering import InputField, dS_deps_analytic, thermal_occupation

TWO_PI = 2.0 * math.pi


def default_quadrature(p: PassiveParams, field: InputField, rel_tol: float = 1e-8,
                       max_depth: int = 50) -> QuadratureSpec:
    """Window centred on ``nu_b`` with half-width ``max(10 Gamma, 50 gamma_b)``."""
    return QuadratureSpec(center=p.nu_b, half_width=max(10 * field.bandwidth, 50 * p.gamma_b),
                          rel_tol=rel_tol, max_depth=max_depth)


def signal_weight(nu: float, field: InputField) -> float:
    """``|alpha_nu|^2 / (2 nbar_nu + 1)``."""
    return field.power(nu) / (2 * thermal_occupation(nu, field.inv_temperature) + 1)


def qfi_density(nu: float, p: PassiveParams, field: InputField,
                convention: str = SYMMETRIC) -> float:
    """Per-mode QFI ``F_nu = 4 |alpha_nu|^2 / (2 nbar + 1) |dS/deps|^2``."""
    ds = dS_deps_analytic(nu, p, convention)
    return 4.0 * signal_weight(nu, field) * (ds.real ** 2 + ds.imag ** 2)


def qfi_total(p: PassiveParams, field: InputField, q: QuadratureSpec | None = None,
              convention: str = SYMMETRIC) -> float:
    """``F_eps = int dnu/2pi F_nu`` over the quadrature window."""
    if q is None:
        q = default_quadrature(p, field)
    if field.alpha == 0 or p.gamma_ex == 0:
        return 0.0
    return integrate(lambda nu: qfi_density(nu, p, field, convention), q).value / TWO_PI


def spectral_norm(field: InputField, q: QuadratureSpec) -> float:
    """``int dnu/2pi |alpha_nu|^2`` over the window (2 alpha^2 on the full line)."""
    return integrate(field.power, q).value / TWO_PI


@dataclass(frozen=True)
class SplittingDerivatives:
    """Pieces of ``dS/deps`` at one frequency.

    ``d_delta`` is ``dS/dDelta``; ``splitting`` is ``dS/dDelta * dDelta/deps``
    (finite even at the EP); ``center`` is the rest of ``dS/deps``, coming from
    the mean-frequency shift and, for the symmetric convention, the shift of
    ``nu_b`` in the propagator numerator.
    """
    d_delta: complex
    splitting: complex
    center: complex


def splitting_derivatives(nu: float, p: PassiveParams,
                          convention: str = SYMMETRIC) -> SplittingDerivatives:
    # S = gamma_ex N / Pi,  N = nu - nu_b + i gamma_b/2,  Pi = (nu - c)^2 - Delta^2/4
    da, db = detuning_rates(convention)
    dnubar = 0.5 * (da + db)
    c = complex(p.nu_bar, -0.5 * p.gamma_bar)
    s = model.half_splitting(p)
    num = complex(nu - p.nu_b, 0.5 * p.gamma_b)
    pi = (nu - c) ** 2 - s * s
    ge = p.gamma_ex
    d_delta = ge * num * s / (pi * pi)
    # (Delta/2) * chi == eps/2 - i gamma/2
    split = ge * num * complex(0.5 * p.epsilon, -0.5 * p.gamma) / (pi * pi)
    center = (2.0 * ge * num * (nu - c) / (pi * pi)) * dnubar - (ge / pi) * db
    return SplittingDerivatives(d_delta, split, center)


@dataclass(frozen=True)
class QfiBreakdown:
    """Terms of ``F_eps = |chi|^2 F_delta + cross + F_center``.

    ``splitting_term`` is the first term computed directly, so it stays finite
    at the EP where ``chi_sq`` is infinite and ``f_delta`` vanishes.
    """
    f_eps: float
    f_delta: float
    cross_term: float
    f_nubar: float
    chi_sq: float
    splitting_term: float

    @property
    def reconstructed(self) -> float:
        return self.splitting_term + self.cross_term + self.f_nubar


def _term(p, field, q, convention, fn) -> float:
    def integrand(nu):
        return 4.0 * signal_weight(nu, field) * fn(splitting_derivatives(nu, p, convention))
    return integrate(integrand, q).value / TWO_PI


def qfi_delta(p: PassiveParams, field: InputField, q: QuadratureSpec | None = None,
              convention: str = SYMMETRIC) -> float:
    """``F^Delta``: information carried by the splitting alone."""
    if q is None:
        q = default_quadrature(p, field)
    return _term(p, field, q, convention, lambda d: abs(d.d_delta) ** 2)


def qfi_splitting(p: PassiveParams, field: InputField, q: QuadratureSpec | None = None,
                  convention: str = SYMMETRIC) -> QfiBreakdown:
    if q is None:
        q = default_quadrature(p, field)

    def term(fn):
        return _term(p, field, q, convention, fn)

    f_delta = term(lambda d: abs(d.d_delta) ** 2)
    split = term(lambda d: abs(d.splitting) ** 2)
    cross = term(lambda d: 2.0 * (d.splitting * d.center.conjugate()).real)
    center = term(lambda d: abs(d.center) ** 2)
    f_eps = qfi_total(p, field, q, convention)
    try:
        chi_sq = abs(model.susceptibility_exact(p)) ** 2
    except model.DivergentAtEP:
        chi_sq = math.inf
    return QfiBreakdown(f_eps=f_eps, f_delta=f_delta, cross_term=cross, f_nubar=center,
                        chi_sq=chi_sq, splitting_term=split)


def sensitivity_bound(f_eps: float, reps_per_time: float = 1.0) -> float:
    """Quantum Cramer-Rao limit ``eta = 1/sqrt(F n/T)``."""
    if not reps_per_time > 0:
        raise InvalidParameter("reps_per_time must be > 0")
    if not f_eps > 0:
        raise ZeroInformation("no Fisher information: sensitivity is unbounded")
    return 1.0 / math.sqrt(f_eps * reps_per_time)


@dataclass(frozen=True)
class ScalingFit:
    exponent: float
    r_squared: float
    x: np.ndarray
    y: np.ndarray
    rms_residual: float = 0.0


SCALING_QUANTITIES = ("chi_sq", "f_delta", "overlap_deficit", "chi_sq_f_delta")


def loglog_fit(x, y) -> ScalingFit:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise InvalidParameter("log-log fit needs positive data")
    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return ScalingFit(float(slope), r2, x, y, float(np.sqrt(np.mean(resid ** 2))))


def scaling_analysis(p: PassiveParams, quantity: str, field: InputField | None = None,
                     distances=None, against: str = "delta", side: float = 1.0,
                     q: QuadratureSpec | None = None,
                     convention: str = SYMMETRIC) -> ScalingFit:
    """Log-log fit of ``quantity`` approaching the EP along ``g`` at zero detuning.

    ``against`` picks the abscissa: ``"delta"`` for ``|Delta|`` or
    ``"distance"`` for ``|g - g_ep|``. Raises ``PoorFit`` when ``r^2 < 0.99``,
    unless the data is flat to within 1% in log space (there ``r^2`` has no
    variance to explain and says nothing about the fit).
    """
    if quantity not in SCALING_QUANTITIES:
        raise InvalidParameter(f"unknown scaling quantity {quantity!r}")
    if against not in ("delta", "distance"):
        raise InvalidParameter("against must be 'delta' or 'distance'")
    if distances is None:
        distances = np.logspace(-4, -2, 9)
    base = p.with_detuning(0.0)
    g_ep, _ = model.ep_location(base)
    xs, ys = [], []
    for d in distances:
        pg = PassiveParams(**{**base.__dict__, "g": g_ep + math.copysign(d, side)})
        if quantity == "chi_sq":
            val = abs(model.susceptibility_exact(pg)) ** 2
        elif quantity == "overlap_deficit":
            val = 1.0 - model.overlap(pg)
        else:
            if field is None:
                raise InvalidParameter(f"{quantity} needs an input field")
            qq = q or default_quadrature(pg, field)
            br = qfi_splitting(pg, field, qq, convention)
            val = br.f_delta if quantity == "f_delta" else br.f_delta * br.chi_sq
        xs.append(abs(model.splitting(pg)) if against == "delta" else d)
        ys.append(val)
    fit = loglog_fit(xs, ys)
    if fit.r_squared < 0.99 and fit.rms_residual > 0.01:
        raise PoorFit(fit.exponent, fit.r_squared)
    return fit
