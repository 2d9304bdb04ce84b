"""Sweep configuration: JSON ingestion, defaults and validation."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from . import active, model
from .errors import ConfigError, EpsenseError
from .numerics import QuadratureSpec
from .scattering import InputField

SYSTEMS = ("passive", "active")
SWEEP_VARS = ("g", "s_z", "epsilon", "nu")
OUTPUTS = ("f_eps", "f_delta", "chi_sq", "overlap", "eigenvalues", "s_nu", "eta")
PASSIVE_ONLY = ("f_delta", "chi_sq", "overlap")
UNITS = ("absolute", "threshold")

_PASSIVE_KEYS = {"gamma_a", "gamma_b", "gamma_ex", "g", "nu_a", "nu_b"}
_GAIN_KEYS = {"n_total", "g_gain", "kappa", "s_z", "gamma_1", "mode"}
_INPUT_KEYS = {"alpha", "bandwidth", "center", "inv_temperature"}
_SWEEP_KEYS = {"var", "start", "stop", "n_points", "units", "probe_nu"}
_QUAD_KEYS = {"rel_tol", "half_width", "center", "max_depth"}
_SECTIONS = {"passive": _PASSIVE_KEYS, "gain": _GAIN_KEYS, "input": _INPUT_KEYS,
             "sweep": _SWEEP_KEYS, "quadrature": _QUAD_KEYS}
_TOP_KEYS = {"system", "outputs", "eps_convention", "parallel"}


@dataclass(frozen=True)
class SweepConfig:
    system: str
    sweep_var: str
    start: float
    stop: float
    n_points: int
    passive: model.PassiveParams
    field: InputField
    quadrature: QuadratureSpec
    outputs: tuple
    gain: active.GainParams | None = None
    gain_mode: str = active.FULL3
    units: str = "absolute"
    probe_nu: float | None = None
    eps_convention: str = model.SYMMETRIC
    parallel: int = 1
    auto_center: bool = True
    raw: dict = field(default_factory=dict, compare=False)

    @property
    def column(self) -> str:
        if self.sweep_var == "s_z" and self.units == "threshold":
            return "s_z_over_s_c"
        return self.sweep_var

    def values(self) -> list[float]:
        n = self.n_points
        step = (self.stop - self.start) / (n - 1)
        # endpoints exact, interior by index so every run agrees bit for bit
        return [self.start if i == 0 else self.stop if i == n - 1 else self.start + i * step
                for i in range(n)]


def _parse_inf(v):
    if v is None:
        return math.inf
    if isinstance(v, str) and v.strip().lower() in ("inf", "infinity"):
        return math.inf
    return v


def _nest(raw: dict, errors: list) -> dict:
    """Fold dotted top-level keys (``"passive.g"``) into their sections."""
    out = {}
    for key, val in raw.items():
        if "." in key:
            sec, _, sub = key.partition(".")
            out.setdefault(sec, {})
            if not isinstance(out[sec], dict):
                errors.append((key, f"conflicts with non-object '{sec}'"))
                continue
            out[sec][sub] = val
        else:
            if isinstance(val, dict) and isinstance(out.get(key), dict):
                out[key] = {**val, **out[key]}
            else:
                out[key] = val
    return out


def _number(sec: dict, path: str, key: str, errors: list, default=None, required=False):
    if key not in sec or sec[key] is None and key != "inv_temperature":
        if required:
            errors.append((f"{path}.{key}", "required"))
        return default
    v = sec[key]
    if key == "inv_temperature":
        v = _parse_inf(v)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        errors.append((f"{path}.{key}", f"expected a number, got {v!r}"))
        return default
    v = float(v)
    if math.isnan(v) or (math.isinf(v) and key != "inv_temperature"):
        errors.append((f"{path}.{key}", "must be finite"))
        return default
    return v


def validate_config(raw) -> SweepConfig:
    """Parse JSON text (or an already-decoded dict) into a ``SweepConfig``.

    Every violation is collected and reported together in one ``ConfigError``.
    """
    if isinstance(raw, (str, bytes)):
        try:
            raw = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ConfigError([("", f"invalid JSON: {exc}")]) from exc
    if not isinstance(raw, dict):
        raise ConfigError([("", "top level must be a JSON object")])
    errors: list = []
    cfg = _nest(raw, errors)

    for key in cfg:
        if key not in _SECTIONS and key not in _TOP_KEYS:
            errors.append((key, "unknown key"))
    sections = {}
    for name, allowed in _SECTIONS.items():
        sec = cfg.get(name, {})
        if not isinstance(sec, dict):
            errors.append((name, "must be an object"))
            sec = {}
        for key in sec:
            if key not in allowed:
                errors.append((f"{name}.{key}", "unknown key"))
        sections[name] = sec

    system = cfg.get("system", "passive")
    if system not in SYSTEMS:
        errors.append(("system", f"must be one of {SYSTEMS}"))
        system = "passive"

    convention = cfg.get("eps_convention", model.SYMMETRIC)
    if convention not in model.EPS_CONVENTIONS:
        errors.append(("eps_convention", f"must be one of {model.EPS_CONVENTIONS}"))
        convention = model.SYMMETRIC

    parallel = cfg.get("parallel", 1)
    if isinstance(parallel, bool) or not isinstance(parallel, int) or parallel < 1:
        errors.append(("parallel", "must be an integer >= 1"))
        parallel = 1

    # sweep
    sw = sections["sweep"]
    var = sw.get("var")
    if var is None:
        errors.append(("sweep.var", "required"))
    elif var not in SWEEP_VARS:
        errors.append(("sweep.var", f"must be one of {SWEEP_VARS}"))
        var = None
    start = _number(sw, "sweep", "start", errors, required=True)
    stop = _number(sw, "sweep", "stop", errors, required=True)
    n_points = sw.get("n_points")
    if n_points is None:
        errors.append(("sweep.n_points", "required"))
    elif isinstance(n_points, bool) or not isinstance(n_points, int) or n_points < 2:
        errors.append(("sweep.n_points", "must be an integer >= 2"))
        n_points = None
    if start is not None and stop is not None and start == stop:
        errors.append(("sweep", "zero-width range (start == stop)"))
    units = sw.get("units", "absolute")
    if units not in UNITS:
        errors.append(("sweep.units", f"must be one of {UNITS}"))
        units = "absolute"
    if units == "threshold" and var != "s_z":
        errors.append(("sweep.units", "threshold units only apply to an s_z sweep"))
    probe_nu = _number(sw, "sweep", "probe_nu", errors)
    if var == "s_z" and system != "active":
        errors.append(("sweep.var", "s_z sweeps need system 'active'"))

    # outputs
    outputs = cfg.get("outputs")
    if outputs is None:
        errors.append(("outputs", "required"))
        outputs = []
    elif not isinstance(outputs, list) or not outputs:
        errors.append(("outputs", "must be a nonempty list"))
        outputs = []
    for o in outputs:
        if o not in OUTPUTS:
            errors.append(("outputs", f"unknown output {o!r}; expected {OUTPUTS}"))
        elif system == "active" and o in PASSIVE_ONLY:
            errors.append(("outputs", f"{o!r} is only defined for the passive system"))
    if len(set(outputs)) != len(outputs):
        errors.append(("outputs", "duplicate entries"))

    # passive cavities
    ps = sections["passive"]
    pvals = {}
    for key, default in (("gamma_a", None), ("gamma_b", 1.0), ("gamma_ex", 0.0),
                         ("g", None), ("nu_a", 0.0), ("nu_b", 0.0)):
        required = default is None and not (key == "g" and var == "g")
        v = _number(ps, "passive", key, errors, default=default, required=required)
        if v is not None:
            pvals[key] = v
    for key, cond, msg in (("gamma_a", lambda v: v > 0, "must be > 0"),
                           ("gamma_b", lambda v: v > 0, "must be > 0"),
                           ("gamma_ex", lambda v: v >= 0, "must be >= 0"),
                           ("g", lambda v: v >= 0, "must be >= 0")):
        if key in pvals and not cond(pvals[key]):
            errors.append((f"passive.{key}", msg))
            pvals.pop(key)
    if var == "g":
        pvals.setdefault("g", 0.0)
        for v in (start, stop):
            if v is not None and v < 0:
                errors.append(("sweep", "coupling g must stay >= 0"))
                break

    # probe field
    fs = sections["input"]
    fvals = {}
    for key, default, required in (("alpha", None, True), ("bandwidth", None, True),
                                   ("center", 0.0, False), ("inv_temperature", math.inf, False)):
        v = _number(fs, "input", key, errors, default=default, required=required)
        if v is not None:
            fvals[key] = v
    if "bandwidth" in fvals and not fvals["bandwidth"] > 0:
        errors.append(("input.bandwidth", "must be > 0"))
        fvals.pop("bandwidth")
    if "inv_temperature" in fvals and not fvals["inv_temperature"] > 0:
        errors.append(("input.inv_temperature", "must be > 0 (null or \"inf\" for zero temperature)"))
        fvals.pop("inv_temperature")
    if fvals.get("inv_temperature", math.inf) < math.inf:
        lo = min(x for x in (start, stop) if x is not None) if var == "nu" and start is not None else None
        if lo is not None and lo <= 0:
            errors.append(("sweep", "finite temperature needs nu > 0 across the sweep"))

    # gain medium
    gain = None
    gain_mode = active.FULL3
    if system == "active":
        gs = sections["gain"]
        gvals = {}
        for key, required in (("n_total", True), ("g_gain", True), ("kappa", True),
                              ("s_z", var != "s_z"), ("gamma_1", False)):
            v = _number(gs, "gain", key, errors, required=required)
            if v is not None:
                gvals[key] = v
        for key, cond, msg in (("kappa", lambda v: v > 0, "must be > 0"),
                               ("g_gain", lambda v: v > 0, "must be > 0"),
                               ("n_total", lambda v: v >= 0, "must be >= 0"),
                               ("s_z", lambda v: v >= 0, "must be >= 0"),
                               ("gamma_1", lambda v: v >= 0, "must be >= 0")):
            if key in gvals and not cond(gvals[key]):
                errors.append((f"gain.{key}", msg))
                gvals.pop(key)
        if "s_z" in gvals and "n_total" in gvals and gvals["s_z"] > gvals["n_total"]:
            errors.append(("gain.s_z", "cannot exceed gain.n_total"))
        gain_mode = gs.get("mode", active.FULL3)
        if gain_mode not in active.MODES:
            errors.append(("gain.mode", f"must be one of {active.MODES}"))
        gvals.setdefault("s_z", 0.0)
        gvals.setdefault("gamma_1", 0.0)
        if units == "threshold" and pvals.get("nu_a", 0.0) != pvals.get("nu_b", 0.0):
            errors.append(("sweep.units", "threshold units need resonant cavities (nu_a == nu_b)"))
        if not errors:
            gain = active.GainParams(**gvals)
    elif sections["gain"]:
        errors.append(("gain", "only valid for system 'active'"))

    qs = sections["quadrature"]
    rel_tol = _number(qs, "quadrature", "rel_tol", errors, default=1e-8)
    half_width = _number(qs, "quadrature", "half_width", errors)
    q_center = _number(qs, "quadrature", "center", errors)
    max_depth = qs.get("max_depth", 50)
    if isinstance(max_depth, bool) or not isinstance(max_depth, int) or max_depth < 4:
        errors.append(("quadrature.max_depth", "must be an integer >= 4"))
    if rel_tol is not None and not 0 < rel_tol < 1:
        errors.append(("quadrature.rel_tol", "must lie in (0, 1)"))
    if half_width is not None and not half_width > 0:
        errors.append(("quadrature.half_width", "must be > 0"))

    if errors:
        raise ConfigError(errors)

    try:
        passive = model.PassiveParams(**pvals)
        probe = InputField(**fvals)
        if half_width is None:
            half_width = max(10 * probe.bandwidth, 50 * passive.gamma_b)
        quad = QuadratureSpec(center=passive.nu_b if q_center is None else q_center,
                              half_width=half_width, rel_tol=rel_tol, max_depth=max_depth)
    except EpsenseError as exc:
        raise ConfigError([("", str(exc))]) from exc

    return SweepConfig(system=system, sweep_var=var, start=start, stop=stop,
                       n_points=n_points, passive=passive, field=probe, quadrature=quad,
                       outputs=tuple(outputs), gain=gain, gain_mode=gain_mode, units=units,
                       probe_nu=probe_nu, eps_convention=convention, parallel=parallel,
                       auto_center=q_center is None, raw=raw)


def load_config(path) -> SweepConfig:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return validate_config(text)
