"""Passive-passive coupled-cavity model.

Two cavities ``a`` and ``b`` with frequencies ``nu_a``, ``nu_b``, free-space
decay rates ``gamma_a``, ``gamma_b`` and photon-hopping coupling ``g``. A
waveguide attached to cavity ``a`` adds ``gamma_ex`` to its loss, so the
coefficient matrix is built with ``gamma_a' = gamma_a + gamma_ex``. All rates
and frequencies are in units of ``gamma_b``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DivergentAtEP, InvalidParameter, NearDefective
from .numerics import DEFECTIVENESS_LIMIT, EigenSystem

SYMMETRIC = "symmetric"
CAVITY_A_ONLY = "cavity_a_only"
EPS_CONVENTIONS = (SYMMETRIC, CAVITY_A_ONLY)


def detuning_rates(convention: str) -> tuple[float, float]:
    """``(d nu_a / d eps, d nu_b / d eps)`` for a detuning convention.

    ``symmetric`` holds the mean frequency fixed; ``cavity_a_only`` holds
    ``nu_b`` fixed and moves cavity ``a`` alone.
    """
    if convention == SYMMETRIC:
        return 0.5, -0.5
    if convention == CAVITY_A_ONLY:
        return 1.0, 0.0
    raise InvalidParameter(f"unknown detuning convention {convention!r}")


@dataclass(frozen=True)
class PassiveParams:
    gamma_a: float
    gamma_b: float = 1.0
    gamma_ex: float = 0.0
    g: float = 0.0
    nu_a: float = 0.0
    nu_b: float = 0.0

    def __post_init__(self):
        for name in ("gamma_a", "gamma_b", "gamma_ex", "g", "nu_a", "nu_b"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidParameter(f"{name} must be finite")
        if not self.gamma_b > 0:
            raise InvalidParameter("gamma_b must be > 0")
        if not self.gamma_a > 0:
            raise InvalidParameter("gamma_a must be > 0")
        if self.gamma_ex < 0:
            raise InvalidParameter("gamma_ex must be >= 0")
        if self.g < 0:
            raise InvalidParameter("g must be >= 0")

    @property
    def epsilon(self) -> float:
        return self.nu_a - self.nu_b

    @property
    def nu_bar(self) -> float:
        return 0.5 * (self.nu_a + self.nu_b)

    @property
    def gamma_a_total(self) -> float:
        return self.gamma_a + self.gamma_ex

    @property
    def gamma_bar(self) -> float:
        return 0.5 * (self.gamma_a_total + self.gamma_b)

    @property
    def gamma(self) -> float:
        """Half the loss difference, with the waveguide loss included."""
        return 0.5 * (self.gamma_a_total - self.gamma_b)

    def with_detuning(self, eps: float, convention: str = SYMMETRIC) -> "PassiveParams":
        """Copy with ``nu_a - nu_b = eps``, moving frequencies per ``convention``."""
        if convention == SYMMETRIC:
            c = self.nu_bar
            return replace(self, nu_a=c + 0.5 * eps, nu_b=c - 0.5 * eps)
        if convention == CAVITY_A_ONLY:
            return replace(self, nu_a=self.nu_b + eps)
        raise InvalidParameter(f"unknown detuning convention {convention!r}")

    def shifted(self, d_eps: float, convention: str = SYMMETRIC) -> "PassiveParams":
        return self.with_detuning(self.epsilon + d_eps, convention)


@dataclass(frozen=True)
class EpDiagnostics:
    delta: complex
    chi: complex
    overlap: float
    ep_g: float
    ep_distance: float
    ep_g_bare: float


def _half_detuning(p: PassiveParams) -> complex:
    # eps/2 - i gamma/2
    return complex(0.5 * p.epsilon, -0.5 * p.gamma)


def radicand(p: PassiveParams) -> complex:
    """``g^2 + (eps/2 - i gamma/2)^2`` with a +0 imaginary part on the real axis."""
    re = p.g * p.g + 0.25 * p.epsilon ** 2 - 0.25 * p.gamma ** 2
    im = -0.5 * p.gamma * p.epsilon + 0.0
    return complex(re, im)


def half_splitting(p: PassiveParams) -> complex:
    return cmath.sqrt(radicand(p))


def coefficient_matrix(p: PassiveParams) -> np.ndarray:
    center = complex(p.nu_bar, -0.5 * p.gamma_bar)
    c = _half_detuning(p)
    return np.array([[center + c, p.g],
                     [p.g, center - c]], dtype=complex)


def eigenvalues(p: PassiveParams) -> tuple[complex, complex]:
    center = complex(p.nu_bar, -0.5 * p.gamma_bar)
    s = half_splitting(p)
    return center + s, center - s


def _mode_vector(c: complex, g: float, lam: complex) -> np.ndarray | None:
    # null vector of [[c - lam, g], [g, -c - lam]]: [c + lam, g] or [g, lam - c]
    v1 = np.array([c + lam, g], dtype=complex)
    v2 = np.array([g, lam - c], dtype=complex)
    n1, n2 = np.linalg.norm(v1), np.linalg.norm(v2)
    if max(n1, n2) < 1e-300:
        return None
    return v1 / n1 if n1 >= n2 else v2 / n2


def mode_vectors(p: PassiveParams) -> tuple[np.ndarray, np.ndarray]:
    """Unit-norm right eigenvectors for the ``+`` and ``-`` roots."""
    c = _half_detuning(p)
    s = half_splitting(p)
    vp, vm = _mode_vector(c, p.g, s), _mode_vector(c, p.g, -s)
    if vp is None or vm is None:
        vp = np.array([1, 0], dtype=complex)
        vm = np.array([0, 1], dtype=complex)
    return vp, vm


def eigenmodes(p: PassiveParams) -> EigenSystem:
    """Closed-form eigenvalues and biorthogonal eigenvectors.

    Raises ``NearDefective`` at (or numerically at) the exceptional point.
    """
    nu_p, nu_m = eigenvalues(p)
    vp, vm = mode_vectors(p)
    vals = np.array([nu_p, nu_m])
    right = np.column_stack([vp, vm])
    order = np.lexsort((-vals.imag, -vals.real))
    vals, right = vals[order], right[:, order]
    with np.errstate(all="ignore"):
        cond = float(np.linalg.cond(right))
    if not math.isfinite(cond) or cond >= DEFECTIVENESS_LIMIT:
        raise NearDefective(cond)
    return EigenSystem(vals, right, np.linalg.inv(right), cond)


def splitting(p: PassiveParams) -> complex:
    """Complex eigenvalue splitting ``nu_+ - nu_-`` (principal branch)."""
    return 2 * half_splitting(p)


def susceptibility_exact(p: PassiveParams) -> complex:
    """Exact ``d splitting / d eps``."""
    s = half_splitting(p)
    if abs(2 * s) < 1e-12:
        raise DivergentAtEP("splitting susceptibility diverges at the exceptional point")
    return _half_detuning(p) / s


def susceptibility_approx(p: PassiveParams) -> complex:
    """Leading near-EP form ``(-i gamma/2) / sqrt(|gamma|(g - |gamma|/2) - i gamma eps/2)``."""
    gam = p.gamma
    inner = complex(abs(gam) * (p.g - 0.5 * abs(gam)), -0.5 * gam * p.epsilon + 0.0)
    root = cmath.sqrt(inner)
    if root == 0:
        raise DivergentAtEP("splitting susceptibility diverges at the exceptional point")
    return complex(0, -0.5 * gam) / root


def overlap(p: PassiveParams) -> float:
    """``|psi_+^dagger psi_-|`` of the unit-norm right eigenvectors.

    Returns the coalescence limit 1.0 exactly at the exceptional point.
    """
    if radicand(p) == 0:
        return 1.0
    vp, vm = mode_vectors(p)
    return min(1.0, float(abs(np.vdot(vp, vm))))


def overlap_approx(p: PassiveParams) -> float:
    gam = abs(p.gamma)
    if gam == 0:
        raise InvalidParameter("overlap approximant needs unequal losses")
    return 1.0 - 2.0 / gam * math.hypot(p.g - 0.5 * gam, 0.5 * p.epsilon)


def ep_location(p: PassiveParams) -> tuple[float, float]:
    """``(g_ep, eps_ep)`` with the waveguide loss folded into cavity ``a``."""
    return 0.5 * abs(p.gamma), 0.0


def ep_location_bare(p: PassiveParams) -> tuple[float, float]:
    """EP location if the waveguide loss is left out of ``gamma``."""
    return 0.25 * abs(p.gamma_a - p.gamma_b), 0.0


def ep_diagnostics(p: PassiveParams) -> EpDiagnostics:
    delta = splitting(p)
    try:
        chi = susceptibility_exact(p)
    except DivergentAtEP:
        chi = complex(math.inf, math.inf)
    g_ep, _ = ep_location(p)
    return EpDiagnostics(delta=delta, chi=chi, overlap=overlap(p), ep_g=g_ep,
                         ep_distance=abs(p.g - g_ep), ep_g_bare=ep_location_bare(p)[0])
