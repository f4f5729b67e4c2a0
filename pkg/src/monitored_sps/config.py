"""INI configuration for the command-line driver.

Four sections, all optional; every key has a default::

    [model]    g, Gamma, kappa, gamma, Omega, eta
    [run]      dt, t_max, t_tail, n_traj, seed, epsilon, h, controller,
               t_stop, record_period, workers
    [output]   dir
    [sweep]    omega, cases, h_grid, t_spacing

Keys are case sensitive (``Gamma`` and ``gamma`` are different rates).
``t_tail = auto`` selects the tail length automatically. ``omega`` and
``h_grid`` are comma-separated floats (``h_grid = default`` uses the built-in
grid). ``cases`` is a comma-separated list of ``controller:gamma:eta`` or one
of the presets ``noise`` / ``efficiency``.
"""

from __future__ import annotations

import configparser
import dataclasses
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

from monitored_sps.dynamics import ModelParams
from monitored_sps.errors import ConfigError
from monitored_sps.experiment import (
    DEFAULT_H_GRID,
    EFFICIENCY_CASES,
    NOISE_CASES,
    Case,
    RunControl,
)

OUTDIR_ENV = "MONITORED_SPS_OUTDIR"
CASE_PRESETS = {"noise": NOISE_CASES, "efficiency": EFFICIENCY_CASES}
CASE_CONTROLLERS = ("deterministic", "timer", "cusum", "bayes")


class RegimeWarning(UserWarning):
    """Parameters outside the weak-coupling window where monitoring helps."""


@dataclass(frozen=True)
class OutputConfig:
    dir: str = "results"


@dataclass(frozen=True)
class SweepConfig:
    omega: tuple[float, ...] = (0.01, 0.02, 0.03, 0.05, 0.07, 0.1)
    cases: tuple[Case, ...] = NOISE_CASES
    h_grid: tuple[float, ...] = DEFAULT_H_GRID
    t_spacing: float = 0.1


@dataclass(frozen=True)
class Config:
    model: ModelParams = field(default_factory=ModelParams)
    run: RunControl = field(default_factory=RunControl)
    output: OutputConfig = field(default_factory=OutputConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)

    def to_dict(self) -> dict[str, dict[str, Any]]:
        """JSON-ready nested dict; :func:`from_dict` inverts it exactly."""
        return {
            "model": dataclasses.asdict(self.model),
            "run": dataclasses.asdict(self.run),
            "output": dataclasses.asdict(self.output),
            "sweep": {
                "omega": list(self.sweep.omega),
                "cases": [f"{c.controller}:{c.gamma!r}:{c.eta!r}" for c in self.sweep.cases],
                "h_grid": list(self.sweep.h_grid),
                "t_spacing": self.sweep.t_spacing,
            },
        }


# -- value converters (accept strings from INI or natives from JSON) ---------------


def _float(v) -> float:
    if isinstance(v, bool):
        raise ValueError("expected a number")
    out = float(v)
    if math.isnan(out):
        raise ValueError("NaN is not allowed")
    return out


def _int(v) -> int:
    if isinstance(v, bool):
        raise ValueError("expected an integer")
    if isinstance(v, str):
        return int(v.strip())
    if isinstance(v, float) and not v.is_integer():
        raise ValueError("expected an integer")
    return int(v)


def _opt_float(v):
    if v is None or (isinstance(v, str) and v.strip().lower() in ("auto", "none", "")):
        return None
    return _float(v)


def _str(v) -> str:
    return str(v).strip()


def _floats(v) -> tuple[float, ...]:
    if isinstance(v, str):
        v = [s for s in v.replace("\n", ",").split(",") if s.strip()]
    out = tuple(_float(x) for x in v)
    if not out:
        raise ValueError("list must be non-empty")
    return out


def _h_grid(v) -> tuple[float, ...]:
    if isinstance(v, str) and v.strip().lower() == "default":
        return DEFAULT_H_GRID
    return _floats(v)


def _case(text: str) -> Case:
    parts = [p.strip() for p in text.split(":")]
    if len(parts) != 3:
        raise ValueError(f"case {text!r} is not controller:gamma:eta")
    ctl = parts[0]
    if ctl not in CASE_CONTROLLERS:
        raise ValueError(f"unknown controller {ctl!r} in case {text!r}")
    case = Case(ctl, _float(parts[1]), _float(parts[2]))
    ModelParams(gamma=case.gamma, eta=case.eta)  # range check
    return case


def _cases(v) -> tuple[Case, ...]:
    if isinstance(v, str):
        key = v.strip().lower()
        if key in CASE_PRESETS:
            return CASE_PRESETS[key]
        v = [s for s in v.replace("\n", ",").split(",") if s.strip()]
    out = tuple(_case(c) for c in v)
    if not out:
        raise ValueError("cases must be non-empty")
    return out


_SCHEMA: dict[str, dict[str, Callable]] = {
    "model": {k: _float for k in ("g", "Gamma", "kappa", "gamma", "Omega", "eta")},
    "run": {
        "dt": _float, "t_max": _float, "t_tail": _opt_float, "n_traj": _int, "seed": _int,
        "epsilon": _float, "h": _float, "controller": _str, "t_stop": _float,
        "record_period": _int, "workers": _int,
    },
    "output": {"dir": _str},
    "sweep": {"omega": _floats, "cases": _cases, "h_grid": _h_grid, "t_spacing": _float},
}
_BUILD = {"model": ModelParams, "run": RunControl, "output": OutputConfig, "sweep": SweepConfig}


def from_dict(raw: dict[str, dict[str, Any]], *, warn: bool = True) -> Config:
    """Validate a section -> key -> value mapping; missing keys take defaults."""
    parts = {}
    for section, values in raw.items():
        if section not in _SCHEMA:
            raise ConfigError(section, "unknown section")
    for section, schema in _SCHEMA.items():
        values = raw.get(section, {}) or {}
        kwargs = {}
        for key, value in values.items():
            if key not in schema:
                raise ConfigError(f"{section}.{key}", "unknown key")
            try:
                kwargs[key] = schema[key](value)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{section}.{key}", str(exc)) from None
        try:
            parts[section] = _BUILD[section](**kwargs)
        except (TypeError, ValueError) as exc:
            raise ConfigError(section, str(exc)) from None
    sw = parts["sweep"]
    if sw.t_spacing <= 0:
        raise ConfigError("sweep.t_spacing", "must be positive")
    if any(o < 0 for o in sw.omega):
        raise ConfigError("sweep.omega", "rates must be non-negative")
    if any(h < 0 for h in sw.h_grid):
        raise ConfigError("sweep.h_grid", "thresholds must be non-negative")
    cfg = Config(**parts)
    if warn:
        for msg in regime_violations(cfg.model):
            warnings.warn(msg, RegimeWarning, stacklevel=2)
    return cfg


def regime_violations(p: ModelParams) -> list[str]:
    """Weak-coupling window ``Gamma << Omega`` (read as a factor 10) and ``g <= gamma <= kappa``."""
    out = []
    if not p.Gamma <= 0.1 * p.Omega:
        out.append(f"Gamma={p.Gamma:g} is not much smaller than Omega={p.Omega:g}")
    if not p.g <= p.gamma:
        out.append(f"gamma={p.gamma:g} is below g={p.g:g}")
    if not p.gamma <= p.kappa:
        out.append(f"gamma={p.gamma:g} exceeds kappa={p.kappa:g}")
    return out


def read_ini(path: str | Path) -> dict[str, dict[str, str]]:
    parser = configparser.ConfigParser(interpolation=None, default_section="__defaults__")
    parser.optionxform = str  # keep Gamma/gamma distinct
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise ConfigError(str(path), f"malformed INI: {exc}") from None
    return {s: dict(parser[s]) for s in parser.sections()}


def parse_config(path: str | Path | None = None, overrides: dict[str, Any] | None = None,
                 *, warn: bool = True) -> Config:
    """Read ``path`` (if any), apply dotted ``overrides`` such as ``{"run.seed": 3}``.

    Overrides win over file values. The output directory is finally taken from
    the ``MONITORED_SPS_OUTDIR`` environment variable when it is set, unless an
    override names ``output.dir`` explicitly.
    """
    import os

    raw = read_ini(path) if path is not None else {}
    for dotted, value in (overrides or {}).items():
        section, _, key = dotted.partition(".")
        if not key:
            raise ConfigError(dotted, "override must be section.key")
        raw.setdefault(section, {})[key] = value
    env = os.environ.get(OUTDIR_ENV)
    if env and "output.dir" not in (overrides or {}):
        raw.setdefault("output", {})["dir"] = env
    return from_dict(raw, warn=warn)
