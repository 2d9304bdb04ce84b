"""Single-mode Gaussian states: purity, fidelity, Bures distance and QFI.

Quadratures follow ``X1 = (c + c^dag)/sqrt(2)``, ``X2 = (c - c^dag)/(i sqrt(2))``
so the vacuum covariance is ``I/2`` and a coherent amplitude ``alpha`` has mean
``sqrt(2) (Re alpha, Im alpha)``.

Besides the closed-form QFI there are two independent oracles: a
finite-difference Bures-distance estimate and a truncated-Fock spectral sum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import (InvalidParameter, NonPhysicalCovariance, PurityDerivativeSingularity,
                     StepTooLarge, TruncationTooSmall)
from .numerics import central_diff, matrix_exp

_SYMPLECTIC = np.array([[0.0, 1.0], [-1.0, 0.0]])


@dataclass(frozen=True)
class GaussianMode:
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).reshape(2)
        cov = np.asarray(self.cov, dtype=float).reshape(2, 2)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @classmethod
    def displaced_thermal(cls, alpha: complex, nbar: float) -> "GaussianMode":
        alpha = complex(alpha)
        return cls(math.sqrt(2) * np.array([alpha.real, alpha.imag]),
                   (nbar + 0.5) * np.eye(2))


@dataclass(frozen=True)
class ModeDerivative:
    """Parameter derivatives of a ``GaussianMode``'s mean and covariance."""
    d_mean: np.ndarray
    d_cov: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "d_mean", np.asarray(self.d_mean, dtype=float).reshape(2))
        object.__setattr__(self, "d_cov", np.asarray(self.d_cov, dtype=float).reshape(2, 2))


def check_physical(cov, atol=1e-12):
    cov = np.asarray(cov, dtype=float)
    if not np.all(np.isfinite(cov)):
        raise NonPhysicalCovariance("covariance has non-finite entries")
    if abs(cov[0, 1] - cov[1, 0]) > atol * max(1.0, np.abs(cov).max()):
        raise NonPhysicalCovariance("covariance is not symmetric")
    # uncertainty relation: cov + (i/2) Omega must be positive semidefinite
    herm = cov + 0.5j * _SYMPLECTIC
    if np.linalg.eigvalsh(herm).min() < -atol * max(1.0, np.abs(cov).max()):
        raise NonPhysicalCovariance("covariance violates the uncertainty relation")


def purity(m: GaussianMode) -> float:
    """``det(2 C)^(-1/2)``."""
    check_physical(m.cov)
    d = np.linalg.det(2 * m.cov)
    if not d > 0:
        raise NonPhysicalCovariance("covariance is not positive definite")
    return float(min(1.0, d ** -0.5))


def _fidelity_parts(m1: GaussianMode, m2: GaussianMode):
    """``(ratio, 1 - ratio, x)`` with ``F = ratio * exp(-x)``.

    ``ratio = 2 / (sqrt(b + a) - sqrt(a))``, ``b = det(2(C1 + C2))``,
    ``a = (d1 - 1)(d2 - 1)``, ``d_i = det(2 C_i)``. The numerator of
    ``1 - ratio`` vanishes for equal covariances, so it is rebuilt from
    manifestly nonnegative pieces to keep nearby states resolvable.
    """
    check_physical(m1.cov)
    check_physical(m2.cov)
    x1, x2 = 2 * m1.cov, 2 * m2.cov
    d1, d2 = np.linalg.det(x1), np.linalg.det(x2)
    u, v = math.sqrt(max(0.0, d1 - 1.0)), math.sqrt(max(0.0, d2 - 1.0))
    a = (u * v) ** 2
    b = np.linalg.det(x1 + x2)
    # b - 4 - 4uv = (u-v)^2 (1 + 2/(sqrt(d1 d2) + 1 + uv)) + d1 (sqrt(l1) - sqrt(l2))^2
    # with l1, l2 the eigenvalues of X1^-1 X2
    du = (d1 - d2) / (u + v) if u + v > 0 else 0.0
    k = np.linalg.solve(x1, x2)
    disc = max(0.0, (k[0, 0] - k[1, 1]) ** 2 + 4 * k[0, 1] * k[1, 0])
    root_sum_sq = float(np.trace(k)) + 2 * math.sqrt(max(0.0, np.linalg.det(k)))
    shape = d1 * disc / root_sum_sq if root_sum_sq > 0 else 0.0
    excess = du * du * (1 + 2 / (math.sqrt(d1 * d2) + 1 + u * v)) + shape
    denom = math.sqrt(b + a) - math.sqrt(a)
    ratio = 2.0 / denom
    one_minus_ratio = excess / (math.sqrt(b + a) + math.sqrt(a) + 2) / denom
    dx = m2.mean - m1.mean
    cbar = 0.5 * (m1.cov + m2.cov)
    x = 0.25 * float(dx @ np.linalg.solve(cbar, dx))
    return ratio, one_minus_ratio, x


def fidelity(m1: GaussianMode, m2: GaussianMode) -> float:
    """Uhlmann fidelity ``(Tr sqrt(sqrt(rho1) rho2 sqrt(rho1)))^2`` of two modes."""
    ratio, _, x = _fidelity_parts(m1, m2)
    return float(min(1.0, max(0.0, ratio * math.exp(-x))))


def bures_distance_sq(m1: GaussianMode, m2: GaussianMode) -> float:
    """``2 - 2 sqrt(F)``, evaluated so small distances keep their precision."""
    ratio, omr, x = _fidelity_parts(m1, m2)
    # 1 - F = (1 - ratio) + ratio (1 - e^-x)
    one_minus_f = omr - ratio * math.expm1(-x)
    f = 1.0 - one_minus_f
    if f <= 0:
        return 2.0
    return float(max(0.0, 2.0 * one_minus_f / (1.0 + math.sqrt(f))))


def bures_distance(m1: GaussianMode, m2: GaussianMode) -> float:
    return math.sqrt(min(2.0, bures_distance_sq(m1, m2)))


def qfi_analytic(m: GaussianMode, dm: ModeDerivative, pure_tol: float = 1e-12) -> float:
    """Closed-form single-mode Gaussian QFI.

    ``Tr[(C^-1 dC)^2] / (2(1+P^2)) + 2 dP^2 / (1-P^4) + dX^T C^-1 dX`` with
    ``P = det(2C)^(-1/2)``. For a pure state with ``dP = 0`` the middle term
    takes its limiting value 0.
    """
    p = purity(m)
    cinv = np.linalg.inv(m.cov)
    k = cinv @ dm.d_cov
    dp = -0.5 * p * float(np.trace(k))
    f = float(np.trace(k @ k)) / (2.0 * (1.0 + p * p))
    if 1.0 - p <= pure_tol:
        if abs(dp) > pure_tol:
            raise PurityDerivativeSingularity("pure state with changing purity")
    else:
        f += 2.0 * dp * dp / (1.0 - p ** 4)
    f += float(dm.d_mean @ cinv @ dm.d_mean)
    return max(0.0, f)


def qfi_fd_oracle(state_of: Callable[[float], GaussianMode], eps: float, h: float = 1e-3) -> float:
    """QFI as ``4 d_B^2(eps, eps+h) / h^2`` with one Richardson step over ``h, h/2``.

    Raises ``StepTooLarge`` when the two raw estimates differ by more than 10%.
    """
    if not h > 0:
        raise InvalidParameter("step h must be > 0")
    m0 = state_of(eps)
    q_h = 4.0 * bures_distance_sq(m0, state_of(eps + h)) / h ** 2
    q_h2 = 4.0 * bures_distance_sq(m0, state_of(eps + h / 2)) / (h / 2) ** 2
    scale = max(abs(q_h), abs(q_h2))
    if scale > 0 and abs(q_h - q_h2) > 0.1 * scale:
        raise StepTooLarge(f"estimates {q_h:.6g} and {q_h2:.6g} disagree; reduce h")
    return max(0.0, 2.0 * q_h2 - q_h)


@dataclass(frozen=True)
class FockState:
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def default_nmax(alpha: complex, nbar: float) -> int:
    """Levels needed for a ~1e-13 tail: thermal geometric decay plus the displacement spread."""
    a = abs(alpha)
    thermal = math.log(1e-13) / math.log(nbar / (nbar + 1.0)) if nbar > 0 else 0.0
    return int(math.ceil(a * a + 10 * a * math.sqrt(1 + 2 * nbar) + thermal)) + 20


def annihilation(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)


def fock_density(alpha: complex, nbar: float, nmax: int | None = None,
                 tail_tol: float = 1e-10) -> FockState:
    """Displaced thermal state ``D(alpha) rho_T D(alpha)^dag`` in a truncated Fock basis.

    The displacement is exponentiated in a padded space and then projected
    onto the first ``nmax`` levels; the trace deficit is the truncation tail.
    """
    if nbar < 0:
        raise InvalidParameter("nbar must be >= 0")
    if nmax is None:
        nmax = default_nmax(alpha, nbar)
    pad = min(nmax + 40, 256)
    if pad <= nmax:
        raise TruncationTooSmall(f"nmax={nmax} leaves no room to pad below 256 levels")
    a = annihilation(pad)
    disp = matrix_exp(alpha * a.conj().T - np.conj(alpha) * a)
    if nbar == 0:
        pops = np.zeros(pad)
        pops[0] = 1.0
    else:
        q = nbar / (nbar + 1.0)
        pops = (1.0 - q) * q ** np.arange(pad)
    rho = (disp * pops) @ disp.conj().T
    rho = rho[:nmax, :nmax]
    rho = 0.5 * (rho + rho.conj().T)
    tail = 1.0 - float(np.trace(rho).real)
    if tail > tail_tol:
        raise TruncationTooSmall(f"truncation tail {tail:.3g} exceeds {tail_tol:g} at nmax={nmax}")
    return FockState(rho)


def fock_derivative(family: Callable[[float], FockState], eps: float, h: float = 1e-4) -> np.ndarray:
    """``d rho / d eps`` of a Fock-space family by Richardson central difference."""
    return central_diff(lambda x: family(x).matrix, eps, h)


def qfi_eigenbasis_oracle(rho: FockState, drho, cutoff: float = 1e-12) -> float:
    """``2 sum |<mu_a| d rho |mu_b>|^2 / (p_a + p_b)`` over the spectrum of ``rho``."""
    drho = np.asarray(getattr(drho, "matrix", drho))
    p, u = np.linalg.eigh(rho.matrix)
    d = u.conj().T @ drho @ u
    denom = p[:, None] + p[None, :]
    keep = denom >= cutoff
    return float(2.0 * np.sum(np.abs(d[keep]) ** 2 / denom[keep]))
