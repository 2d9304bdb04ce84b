"""Active-passive sensor: cavity ``b`` holds an inverted two-level gain medium.

The medium is an ensemble of ``n_total`` emitters with inversion ``s_z``,
cavity coupling ``g_gain`` and polarization decay ``kappa``. It enters either
as a third bosonic mode (``full3``) or, after adiabatic elimination, as a
reduced decay rate ``gamma_b' = gamma_b - 4 s_z g_gain^2 / kappa`` of cavity
``b`` (``adiabatic``). ``main_text`` is the adiabatic response with the
shorter noise formula that uses the bare ``gamma_b`` propagator; it is kept
for comparison only.

The inversion is an input here: nothing solves for it self-consistently.
Everything is linear theory, so the lasing phase is refused with
``AboveThreshold``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import AboveThreshold, InvalidParameter
from .model import SYMMETRIC, PassiveParams, detuning_rates
from .numerics import QuadratureSpec, integrate, sorted_eigenvalues
from .scattering import InputField, thermal_occupation
from .sensing import TWO_PI, default_quadrature, qfi_total

FULL3 = "full3"
ADIABATIC = "adiabatic"
MAIN_TEXT = "main_text"
MODES = (FULL3, ADIABATIC, MAIN_TEXT)


@dataclass(frozen=True)
class GainParams:
    n_total: float
    g_gain: float
    kappa: float
    s_z: float
    gamma_1: float = 0.0

    def __post_init__(self):
        for name in ("n_total", "g_gain", "kappa", "s_z", "gamma_1"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidParameter(f"{name} must be finite")
        if not self.kappa > 0:
            raise InvalidParameter("kappa must be > 0")
        if not self.g_gain > 0:
            raise InvalidParameter("g_gain must be > 0")
        if self.s_z < 0:
            raise InvalidParameter("s_z must be >= 0 (only inverted media are modelled)")
        if self.s_z > self.n_total:
            raise InvalidParameter("s_z cannot exceed n_total")
        if self.gamma_1 < 0:
            raise InvalidParameter("gamma_1 must be >= 0")

    @property
    def n_excited(self) -> float:
        return 0.5 * (self.n_total + self.s_z)

    @property
    def n_ground(self) -> float:
        return 0.5 * (self.n_total - self.s_z)

    @property
    def nbar_gain(self) -> float:
        """Thermal-like occupation ``N_g / S_z`` of the medium's noise."""
        return self.n_ground / self.s_z if self.s_z > 0 else math.inf

    @property
    def gain_rate(self) -> float:
        return 4.0 * self.s_z * self.g_gain ** 2 / self.kappa


@dataclass(frozen=True)
class ActiveSystem:
    passive: PassiveParams
    gain: GainParams

    def with_s_z(self, s_z: float) -> "ActiveSystem":
        return replace(self, gain=replace(self.gain, s_z=s_z))

    def with_passive(self, **changes) -> "ActiveSystem":
        return replace(self, passive=replace(self.passive, **changes))

    @property
    def below_threshold(self) -> bool:
        """All three-mode eigenvalues decay."""
        return max_growth_rate(self, FULL3) < 0


def _check_mode(mode):
    if mode not in MODES:
        raise InvalidParameter(f"unknown gain mode {mode!r}; expected one of {MODES}")


def effective_gamma_b(a: ActiveSystem) -> float:
    return a.passive.gamma_b - a.gain.gain_rate


def inversion_scale(a: ActiveSystem) -> float:
    """``kappa / (4 g_gain^2)``: inversion per unit of decay-rate reduction."""
    return a.gain.kappa / (4.0 * a.gain.g_gain ** 2)


def lasing_threshold(a: ActiveSystem) -> float:
    """Closed-form inversion ``S_c`` at which the effective two-mode system lases.

    Valid for resonant cavities; the branch ``g >= gamma_a'/2`` includes the seam.
    """
    p = a.passive
    if p.epsilon != 0:
        raise InvalidParameter("closed-form threshold assumes resonant cavities (nu_a == nu_b)")
    ga = p.gamma_a_total
    if p.g < 0.5 * ga:
        needed = 4.0 * p.g ** 2 / ga + p.gamma_b
    else:
        needed = ga + p.gamma_b
    return inversion_scale(a) * needed


def ep_inversion(a: ActiveSystem) -> float:
    """Inversion where the effective matrix has its EP, ``g = (gamma_a' - gamma_b')/4``.

    Negative when the EP is not reachable with gain.
    """
    p = a.passive
    return inversion_scale(a) * (p.gamma_b - p.gamma_a_total + 4.0 * p.g)


def _matrix3(p: PassiveParams, g: GainParams, s_z: float) -> np.ndarray:
    h = math.sqrt(s_z) * g.g_gain
    return np.array([
        [complex(p.nu_a, -0.5 * p.gamma_a_total), p.g, 0],
        [p.g, complex(p.nu_b, -0.5 * p.gamma_b), h],
        [0, -h, complex(p.nu_b, -0.5 * g.kappa)],
    ], dtype=complex)


def _matrix_eff(p: PassiveParams, g: GainParams, s_z: float) -> np.ndarray:
    gamma_b_eff = p.gamma_b - 4.0 * s_z * g.g_gain ** 2 / g.kappa
    return np.array([
        [complex(p.nu_a, -0.5 * p.gamma_a_total), p.g],
        [p.g, complex(p.nu_b, -0.5 * gamma_b_eff)],
    ], dtype=complex)


def coefficient_matrix_3mode(a: ActiveSystem) -> np.ndarray:
    """Cavity ``a``, cavity ``b`` and the gain polarization mode.

    The gain coupling enters antisymmetrically (``+h`` above, ``-h`` below the
    diagonal) because the medium's mode is an inverted (creation-type) boson.
    """
    return _matrix3(a.passive, a.gain, a.gain.s_z)


def effective_matrix_2mode(a: ActiveSystem) -> np.ndarray:
    rates = max(a.passive.gamma_a_total, a.passive.gamma_b)
    if a.gain.kappa < 10 * rates:
        warnings.warn(f"kappa={a.gain.kappa:g} is not >> cavity rates ({rates:g}); "
                      "adiabatic elimination is unreliable", RuntimeWarning, stacklevel=2)
    return _matrix_eff(a.passive, a.gain, a.gain.s_z)


def system_matrix(a: ActiveSystem, mode: str = FULL3) -> np.ndarray:
    _check_mode(mode)
    if mode == FULL3:
        return coefficient_matrix_3mode(a)
    return _matrix_eff(a.passive, a.gain, a.gain.s_z)


def eigenvalues(a: ActiveSystem, mode: str = FULL3) -> np.ndarray:
    return sorted_eigenvalues(system_matrix(a, mode))


def max_growth_rate(a: ActiveSystem, mode: str = FULL3) -> float:
    """Largest imaginary part among the eigenvalues; >= 0 means lasing."""
    return float(np.max(eigenvalues(a, mode).imag))


def check_below_threshold(a: ActiveSystem, mode: str = FULL3):
    rate = max_growth_rate(a, mode)
    if rate >= 0:
        raise AboveThreshold(f"s_z={a.gain.s_z:.6g} is at or above the lasing threshold "
                             f"(max Im nu = {rate:.3g})")


@dataclass(frozen=True)
class Response:
    """Scattering amplitude, modified occupation and their eps-derivatives at one frequency."""
    s_nu: complex
    ds: complex
    nbar: float
    dnbar: float


def response(nu: float, a: ActiveSystem, field: InputField, mode: str = FULL3,
             convention: str = SYMMETRIC) -> Response:
    """Closed-form response; no threshold check (callers do that once)."""
    p, gp = a.passive, a.gain
    da, db = detuning_rates(convention)
    nth = thermal_occupation(nu, field.inv_temperature)
    # gain-noise strength per |g|^2: (n_th + N_e/S_z) * S_z
    noise = gp.s_z * nth + gp.n_excited
    ge = p.gamma_ex
    ca = complex(nu - p.nu_a, 0.5 * p.gamma_a_total)
    dca = -da
    if mode == FULL3:
        cb = complex(nu - p.nu_b, 0.5 * p.gamma_b)
        cd = complex(nu - p.nu_b, 0.5 * gp.kappa)
        dcb = dcd = -db
        h2 = gp.s_z * gp.g_gain ** 2
        cof = cb * cd + h2
        dcof = dcb * cd + cb * dcd
        det = ca * cof - p.g ** 2 * cd
        ddet = dca * cof + ca * dcof - p.g ** 2 * dcd
        s_nu = ge * cof / det
        ds = ge * (dcof * det - cof * ddet) / (det * det)
        k = ge * gp.kappa * p.g ** 2 * gp.g_gain ** 2 * noise
        abs2 = det.real ** 2 + det.imag ** 2
        nbar = nth + k / abs2
        dnbar = -k * 2.0 * (det.conjugate() * ddet).real / (abs2 * abs2)
        return Response(s_nu, ds, nbar, dnbar)

    _check_mode(mode)
    gamma_b_eff = p.gamma_b - gp.gain_rate
    cb = complex(nu - p.nu_b, 0.5 * gamma_b_eff)
    dcb = -db
    det = ca * cb - p.g ** 2
    ddet = dca * cb + ca * dcb
    s_nu = ge * cb / det
    ds = ge * (dcb * det - cb * ddet) / (det * det)
    abs2 = det.real ** 2 + det.imag ** 2
    d_abs2 = 2.0 * (det.conjugate() * ddet).real
    k = ge * p.g ** 2 * (4.0 * gp.g_gain ** 2 / gp.kappa) * noise
    if mode == ADIABATIC:
        nbar = nth + k / abs2
        dnbar = -k * d_abs2 / (abs2 * abs2)
        return Response(s_nu, ds, nbar, dnbar)
    # main_text: |g G_a G_b0|^2 with the bare gamma_b free propagator
    cb0 = complex(nu - p.nu_b, 0.5 * p.gamma_b)
    x = cb.real ** 2 + cb.imag ** 2
    dx = 2.0 * (cb.conjugate() * dcb).real
    b0 = cb0.real ** 2 + cb0.imag ** 2
    db0 = 2.0 * (cb0.conjugate() * (-db)).real
    y = abs2 * b0
    dy = d_abs2 * b0 + abs2 * db0
    nbar = nth + k * x / y
    dnbar = k * (dx * y - x * dy) / (y * y)
    return Response(s_nu, ds, nbar, dnbar)


def modified_occupation(nu: float, a: ActiveSystem, field: InputField, mode: str = FULL3) -> float:
    """Output photon number ``nbar'_nu`` including amplified gain-medium noise."""
    check_below_threshold(a, mode)
    return response(nu, a, field, mode).nbar


def scattering_amplitude_active(nu: float, a: ActiveSystem, mode: str = FULL3) -> complex:
    check_below_threshold(a, mode)
    # the amplitude does not depend on the probe; a dummy cold field suffices
    return response(nu, a, _COLD, mode).s_nu


_COLD = InputField(alpha=0.0, bandwidth=1.0)


def qfi_density_active(nu: float, a: ActiveSystem, field: InputField, mode: str = FULL3,
                       convention: str = SYMMETRIC) -> float:
    """Per-mode QFI: coherent term plus the occupation-change term."""
    r = response(nu, a, field, mode, convention)
    f = 4.0 * field.power(nu) / (2.0 * r.nbar + 1.0) * (r.ds.real ** 2 + r.ds.imag ** 2)
    if r.nbar > 0:
        f += r.dnbar ** 2 / (r.nbar * (r.nbar + 1.0))
    elif r.dnbar != 0:
        return math.inf
    return f


def qfi_active(a: ActiveSystem, field: InputField, q: QuadratureSpec | None = None,
               mode: str = FULL3, convention: str = SYMMETRIC) -> float:
    check_below_threshold(a, mode)
    if q is None:
        q = default_quadrature(a.passive, field)
    return integrate(lambda nu: qfi_density_active(nu, a, field, mode, convention), q).value / TWO_PI


def qfi_passive_limit(a: ActiveSystem, field: InputField, q: QuadratureSpec | None = None,
                      convention: str = SYMMETRIC) -> float:
    """QFI of the same cavities with the gain medium removed."""
    return qfi_total(a.passive, field, q, convention)


def singularity_scan(system, s_z_range=None, mode: str = FULL3, n_grid: int = 64,
                     rtol: float = 1e-13):
    """Smallest inversion at which ``det(nu I - M)`` acquires a real-frequency zero.

    Equivalent to an eigenvalue crossing the real axis. The range is scanned
    on a grid for the first sign change of the largest growth rate, which is
    then bisected. Returns ``None`` for a passive system or when no crossing
    lies in the range.
    """
    if isinstance(system, PassiveParams):
        return None
    _check_mode(mode)
    p, gp = system.passive, system.gain
    build = _matrix3 if mode == FULL3 else _matrix_eff

    def growth(s):
        return float(np.max(sorted_eigenvalues(build(p, gp, s)).imag))

    if s_z_range is None:
        bound = inversion_scale(system) * (p.gamma_a_total + p.gamma_b + 4 * p.g ** 2 / p.gamma_a_total)
        s_z_range = (0.0, 4.0 * bound)
    lo, hi = map(float, s_z_range)
    if not 0 <= lo < hi:
        raise InvalidParameter("s_z_range must satisfy 0 <= lo < hi")
    grid = np.linspace(lo, hi, n_grid + 1)
    prev = grid[0]
    if growth(prev) >= 0:
        return prev
    for s in grid[1:]:
        if growth(s) >= 0:
            lo_b, hi_b = prev, s
            break
        prev = s
    else:
        return None
    while hi_b - lo_b > rtol * hi_b:
        mid = 0.5 * (lo_b + hi_b)
        if growth(mid) >= 0:
            hi_b = mid
        else:
            lo_b = mid
    return 0.5 * (lo_b + hi_b)
