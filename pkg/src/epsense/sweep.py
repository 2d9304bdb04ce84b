"""Parameter sweeps and their CSV / JSON emission."""
from __future__ import annotations

import io
import json
import math
import re
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import partial

import numpy as np

from . import active, model, sensing
from .config import SweepConfig
from .errors import DepthExceeded, DivergentAtEP, EpsenseError, IoError
from .numerics import integrate, sort_eigenvalues as sorted_order
from .scattering import scattering_amplitude

OK = "ok"


@dataclass
class SweepResult:
    columns: list
    rows: list
    metadata: dict

    def to_dict(self) -> dict:
        return {"metadata": self.metadata, "rows": self.rows}


def status_name(exc: Exception) -> str:
    """``AboveThreshold`` -> ``above_threshold``."""
    return re.sub(r"(?<=[a-z])(?=[A-Z])", "_", type(exc).__name__).lower()


def _pair(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def threshold_of(cfg: SweepConfig) -> float:
    return active.lasing_threshold(active.ActiveSystem(cfg.passive, cfg.gain))


def point_system(cfg: SweepConfig, x: float, s_c: float | None = None):
    """Passive parameters (or active system) and probe frequency at sweep value ``x``."""
    p = cfg.passive
    nu = cfg.probe_nu
    gain = cfg.gain
    if cfg.sweep_var == "g":
        p = replace(p, g=x)
    elif cfg.sweep_var == "epsilon":
        p = p.with_detuning(x, cfg.eps_convention)
    elif cfg.sweep_var == "nu":
        nu = x
    elif cfg.sweep_var == "s_z":
        s_z = x * s_c if cfg.units == "threshold" else x
        gain = replace(gain, s_z=s_z)
    if nu is None:
        nu = p.nu_b
    if cfg.system == "active":
        return active.ActiveSystem(p, gain), p, nu
    return None, p, nu


def evaluate_point(cfg: SweepConfig, x: float, s_c: float | None = None) -> dict:
    """One sweep row: requested outputs plus a status; failed outputs are ``None``.

    In a ``nu`` sweep ``f_eps`` and ``f_delta`` are per-frequency densities
    (the integrand before ``int dnu/2pi``).
    """
    row = {cfg.column: x}
    status = OK
    quad_error = 0.0
    a, p, nu = point_system(cfg, x, s_c)
    q = cfg.quadrature
    if cfg.auto_center:
        q = replace(q, center=p.nu_b)
    conv = cfg.eps_convention
    per_mode = cfg.sweep_var == "nu"
    f_eps = None

    def note(exc):
        nonlocal status
        if status == OK:
            status = status_name(exc)

    def compute_f_eps():
        nonlocal quad_error
        if a is not None:
            active.check_below_threshold(a, cfg.gain_mode)
            density = partial(active.qfi_density_active, a=a, field=cfg.field,
                              mode=cfg.gain_mode, convention=conv)
        else:
            density = partial(sensing.qfi_density, p=p, field=cfg.field, convention=conv)
        if per_mode:
            return density(nu)
        if a is None and (cfg.field.alpha == 0 or p.gamma_ex == 0):
            return 0.0
        res = integrate(lambda v: density(v), q)
        quad_error = res.error / sensing.TWO_PI
        return res.value / sensing.TWO_PI

    for out in cfg.outputs:
        try:
            if out == "f_eps" or out == "eta":
                if f_eps is None:
                    f_eps = compute_f_eps()
                val = f_eps if out == "f_eps" else sensing.sensitivity_bound(f_eps)
            elif out == "f_delta":
                if per_mode:
                    d = sensing.splitting_derivatives(nu, p, conv)
                    val = 4.0 * sensing.signal_weight(nu, cfg.field) * abs(d.d_delta) ** 2
                else:
                    val = sensing.qfi_delta(p, cfg.field, q, conv)
            elif out == "chi_sq":
                val = abs(model.susceptibility_exact(p)) ** 2
            elif out == "overlap":
                val = model.overlap(p)
            elif out == "eigenvalues":
                if a is not None:
                    ev = active.eigenvalues(a, cfg.gain_mode)
                else:
                    # closed form stays defined at the EP, unlike the eigenvectors
                    ev = sorted_order(np.array(model.eigenvalues(p)))
                val = [_pair(z) for z in ev]
            elif out == "s_nu":
                if a is not None:
                    val = _pair(active.scattering_amplitude_active(nu, a, cfg.gain_mode))
                else:
                    val = _pair(scattering_amplitude(nu, p))
            else:  # validated upstream
                raise AssertionError(out)
        except DepthExceeded as exc:
            note(exc)
            val = exc.estimate / sensing.TWO_PI if out == "f_eps" else None
        except (EpsenseError, ZeroDivisionError) as exc:
            note(exc)
            val = None
        if isinstance(val, float) and not math.isfinite(val):
            note(DivergentAtEP())
            val = None
        row[out] = val
    row["status"] = status
    row["_quad_error"] = quad_error
    return row


def run_sweep(cfg: SweepConfig, jobs: int | None = None) -> SweepResult:
    """Evaluate every sweep point; rows come back in sweep order whatever ``jobs`` is."""
    jobs = cfg.parallel if jobs is None else jobs
    t0 = time.perf_counter()
    s_c = threshold_of(cfg) if cfg.sweep_var == "s_z" and cfg.units == "threshold" else None
    xs = cfg.values()
    work = partial(evaluate_point, cfg, s_c=s_c)
    if jobs <= 1:
        rows = [work(x) for x in xs]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(work, xs, chunksize=max(1, len(xs) // (4 * jobs))))
    quad_errors = [r.pop("_quad_error") for r in rows]
    from . import __version__
    meta = {
        "version": __version__,
        "config": cfg.raw,
        "sweep_var": cfg.column,
        "outputs": list(cfg.outputs),
        "n_points": len(rows),
        "wall_time_s": time.perf_counter() - t0,
        "quad_error_bounds": quad_errors,
    }
    if s_c is not None:
        meta["s_c"] = s_c
    return SweepResult([cfg.column, *cfg.outputs, "status"], rows, meta)


def _fmt_complex(pair) -> str:
    re_s, im_s = repr(float(pair[0])), repr(float(pair[1]))
    if not im_s.startswith("-"):
        im_s = "+" + im_s
    return f"{re_s}{im_s}j"


def _fmt_cell(val) -> str:
    if val is None:
        return ""
    if isinstance(val, str):
        return val
    if isinstance(val, list):
        if val and isinstance(val[0], list):
            return ";".join(_fmt_complex(z) for z in val)
        return _fmt_complex(val)
    return repr(float(val))


def to_csv(result: SweepResult) -> str:
    buf = io.StringIO()
    buf.write(",".join(result.columns) + "\n")
    for row in result.rows:
        buf.write(",".join(_fmt_cell(row[c]) for c in result.columns) + "\n")
    return buf.getvalue()


def to_json(result: SweepResult) -> str:
    return json.dumps(result.to_dict(), allow_nan=False, indent=1) + "\n"


def parse_json(text: str) -> SweepResult:
    data = json.loads(text)
    meta = data["metadata"]
    cols = [meta["sweep_var"], *meta["outputs"], "status"]
    return SweepResult(cols, data["rows"], meta)


def emit(result: SweepResult, fmt: str = "csv", path=None) -> None:
    """Write ``result`` as CSV or JSON to ``path`` (stdout when ``None``)."""
    if fmt == "csv":
        text = to_csv(result)
    elif fmt == "json":
        text = to_json(result)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
