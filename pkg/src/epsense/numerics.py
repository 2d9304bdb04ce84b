"""Small dense complex linear algebra, adaptive quadrature and derivative helpers.

Matrices are plain ``numpy`` complex arrays. The core routines target the
small (n <= 8) coefficient matrices of coupled-mode models; ``matrix_exp`` is
the one large-matrix path and is only used to build truncated Fock-space
operators.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg

from .errors import DepthExceeded, InvalidParameter, NearDefective, NonConvergence, Singular

MAX_DIM = 8
MAX_EXP_DIM = 256
DEFECTIVENESS_LIMIT = 1e6


def as_matrix(m, max_dim=MAX_DIM) -> np.ndarray:
    """Validate and copy ``m`` into a square complex128 array."""
    a = np.array(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidParameter(f"expected a square matrix, got shape {a.shape}")
    if not 1 <= a.shape[0] <= max_dim:
        raise InvalidParameter(f"matrix dimension {a.shape[0]} outside 1..{max_dim}")
    if not np.all(np.isfinite(a)):
        raise InvalidParameter("matrix has non-finite entries")
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues with biorthogonal right (columns) and left (rows) vectors.

    Right vectors have unit Euclidean norm; ``left @ right`` is the identity.
    ``defectiveness`` is the 2-norm condition number of the right-vector
    matrix.
    """
    eigenvalues: np.ndarray
    right: np.ndarray
    left: np.ndarray
    defectiveness: float

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)


@dataclass(frozen=True)
class QuadratureSpec:
    """Integration window ``center +/- half_width`` and stopping rule."""
    center: float
    half_width: float
    rel_tol: float = 1e-8
    max_depth: int = 50

    def __post_init__(self):
        if not (math.isfinite(self.center) and math.isfinite(self.half_width)):
            raise InvalidParameter("quadrature window must be finite")
        if not self.half_width > 0:
            raise InvalidParameter("half_width must be > 0")
        if not 0 < self.rel_tol < 1:
            raise InvalidParameter("rel_tol must lie in (0, 1)")
        if int(self.max_depth) != self.max_depth or self.max_depth < 4:
            raise InvalidParameter("max_depth must be an integer >= 4")


def _sort_order(values) -> np.ndarray:
    # descending real part, ties by descending imaginary part; real parts within
    # rounding noise of each other count as ties so the order is reproducible
    values = np.asarray(values)
    scale = max(1.0, float(np.abs(values).max())) if values.size else 1.0
    re = np.round(np.real(values) / (1e-9 * scale))
    return np.lexsort((-np.imag(values), -re))


def sort_eigenvalues(values) -> np.ndarray:
    values = np.asarray(values, dtype=complex)
    return values[_sort_order(values)]


def sorted_eigenvalues(m) -> np.ndarray:
    """Eigenvalues only, in the package's canonical order (no defectiveness check)."""
    a = as_matrix(m)
    if a.shape[0] == 2:
        vals = np.array(_eig2_values(a))
    else:
        try:
            vals = np.linalg.eigvals(a)
        except np.linalg.LinAlgError as exc:
            raise NonConvergence(str(exc)) from exc
    return vals[_sort_order(vals)]


def _eig2_values(a):
    half_tr = 0.5 * (a[0, 0] + a[1, 1])
    half_diff = 0.5 * (a[0, 0] - a[1, 1])
    root = cmath.sqrt(half_diff * half_diff + a[0, 1] * a[1, 0])
    return half_tr + root, half_tr - root


def _eig2_vector(a, lam):
    # two candidate null vectors of (a - lam I); keep the better-scaled one
    v1 = np.array([a[0, 1], lam - a[0, 0]])
    v2 = np.array([lam - a[1, 1], a[1, 0]])
    n1, n2 = np.linalg.norm(v1), np.linalg.norm(v2)
    scale = max(1.0, np.abs(a).max())
    if max(n1, n2) <= 1e-14 * scale:
        return None
    return v1 / n1 if n1 >= n2 else v2 / n2


def eig(m) -> EigenSystem:
    """Biorthogonal eigendecomposition of a small complex matrix.

    2x2 matrices use the closed-form quadratic roots; larger ones go through
    LAPACK's Hessenberg-QR iteration.

    Raises
    ------
    NearDefective
        When the right-vector matrix has condition number >= 1e6, as at an
        exceptional point.
    NonConvergence
        When the iterative eigensolver fails.
    """
    a = as_matrix(m)
    n = a.shape[0]
    if n == 1:
        vals = a[0].copy()
        right = np.ones((1, 1), dtype=complex)
    elif n == 2:
        vals = np.array(_eig2_values(a))
        cols = [_eig2_vector(a, lam) for lam in vals]
        if cols[0] is None or cols[1] is None:
            # a is a multiple of the identity: every vector is an eigenvector
            right = np.eye(2, dtype=complex)
        else:
            right = np.column_stack(cols)
    else:
        try:
            vals, right = np.linalg.eig(a)
        except np.linalg.LinAlgError as exc:
            raise NonConvergence(str(exc)) from exc
        right = right / np.linalg.norm(right, axis=0)

    order = _sort_order(vals)
    vals, right = vals[order], right[:, order]
    with np.errstate(all="ignore"):
        cond = float(np.linalg.cond(right))
    if not math.isfinite(cond) or cond >= DEFECTIVENESS_LIMIT:
        raise NearDefective(cond)
    left = np.linalg.inv(right)

    norm = max(np.linalg.norm(a, 2), 1e-300)
    resid_r = np.linalg.norm(a @ right - right * vals, 2)
    resid_l = np.linalg.norm(left @ a - vals[:, None] * left, 2)
    if max(resid_r, resid_l) > 1e-10 * norm * max(1.0, cond):
        raise NonConvergence(f"eigen-residual {max(resid_r, resid_l):.3g} too large")
    return EigenSystem(vals, right, left, cond)


def det(m) -> complex:
    """Determinant: cofactor expansion for n <= 3, LU elimination above."""
    a = as_matrix(m)
    n = a.shape[0]
    if n == 1:
        return complex(a[0, 0])
    if n == 2:
        return complex(a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0])
    if n == 3:
        return complex(a[0, 0] * (a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1])
                       - a[0, 1] * (a[1, 0] * a[2, 2] - a[1, 2] * a[2, 0])
                       + a[0, 2] * (a[1, 0] * a[2, 1] - a[1, 1] * a[2, 0]))
    return complex(np.linalg.det(a))


def inverse(m) -> np.ndarray:
    a = as_matrix(m)
    if abs(det(a)) <= 1e-300:
        raise Singular("matrix is singular")
    try:
        return np.linalg.inv(a)
    except np.linalg.LinAlgError as exc:
        raise Singular(str(exc)) from exc


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float
    n_evals: int


def integrate(f: Callable[[float], float], spec: QuadratureSpec,
              min_depth: int = 4) -> QuadResult:
    """Adaptive Simpson quadrature of ``f`` over the window of ``spec``.

    The window is first split into ``2**min_depth`` panels, each then bisected
    until its Richardson error estimate ``|S2 - S1| / 15`` falls below either
    ``rel_tol`` times the panel's own magnitude or ``rel_tol`` times the
    global magnitude prorated by width. Each accepted panel contributes the
    extrapolated value ``S2 + (S2 - S1) / 15``. Panels are summed left to
    right, so the result is bit-reproducible.
    """
    a = spec.center - spec.half_width
    b = spec.center + spec.half_width
    width = b - a
    rel_tol = spec.rel_tol
    max_depth = int(spec.max_depth)
    min_depth = min(min_depth, max_depth)
    n_evals = 0

    def call(x):
        nonlocal n_evals
        n_evals += 1
        y = float(f(x))
        if not math.isfinite(y):
            raise InvalidParameter(f"integrand not finite at x={x!r}")
        return y

    n_panels = 2 ** min_depth
    xs = [a + width * k / (2 * n_panels) for k in range(2 * n_panels + 1)]
    xs[-1] = b
    ys = [call(x) for x in xs]
    panels = []
    global_abs = 0.0
    for k in range(n_panels):
        x0, x2 = xs[2 * k], xs[2 * k + 2]
        f0, f1, f2 = ys[2 * k], ys[2 * k + 1], ys[2 * k + 2]
        h = x2 - x0
        panels.append((x0, x2, f0, f1, f2, h / 6.0 * (f0 + 4 * f1 + f2)))
        global_abs += h / 6.0 * (abs(f0) + 4 * abs(f1) + abs(f2))

    exceeded = False
    total_err = 0.0

    def refine(x0, x2, f0, f1, f2, whole, depth):
        nonlocal exceeded, total_err
        x1 = 0.5 * (x0 + x2)
        xl, xr = 0.5 * (x0 + x1), 0.5 * (x1 + x2)
        fl, fr = call(xl), call(xr)
        h = x2 - x0
        left = h / 12.0 * (f0 + 4 * fl + f1)
        right = h / 12.0 * (f1 + 4 * fr + f2)
        both = left + right
        err = (both - whole) / 15.0
        local_abs = h / 12.0 * (abs(f0) + 4 * abs(fl) + 2 * abs(f1) + 4 * abs(fr) + abs(f2))
        tol = rel_tol * max(local_abs, global_abs * h / width)
        if abs(err) <= tol:
            total_err += abs(err)
            return both + err
        if depth >= max_depth:
            exceeded = True
            total_err += abs(err)
            return both + err
        return (refine(x0, x1, f0, fl, f1, left, depth + 1)
                + refine(x1, x2, f1, fr, f2, right, depth + 1))

    total = 0.0
    for x0, x2, f0, f1, f2, whole in panels:
        total += refine(x0, x2, f0, f1, f2, whole, min_depth + 1)
    if exceeded:
        raise DepthExceeded(total, total_err)
    return QuadResult(total, total_err, n_evals)


def adaptive_integrate(f: Callable[[float], float], spec: QuadratureSpec) -> float:
    """Integral of ``f`` over the window (no 1/2pi factor applied)."""
    return integrate(f, spec).value


def central_diff(f: Callable[[float], complex], x: float, h: float):
    """Central difference with one Richardson step over steps ``h`` and ``h/2``."""
    if not h > 0:
        raise InvalidParameter("step h must be > 0")
    d_h = (f(x + h) - f(x - h)) / (2 * h)
    d_h2 = (f(x + h / 2) - f(x - h / 2)) / h
    return (4 * d_h2 - d_h) / 3


def matrix_exp(m) -> np.ndarray:
    """Matrix exponential via scaling and squaring with a Pade kernel.

    Separate large-matrix path (dim <= 256) for truncated Fock-space operators.
    """
    a = as_matrix(m, max_dim=MAX_EXP_DIM)
    out = scipy.linalg.expm(a)
    if not np.all(np.isfinite(out)):
        raise NonConvergence("matrix exponential overflowed")
    return out
