"""Run configuration: a flat TOML file, presets, and command-line overrides.

Example::

    units = "omega1"        # or "GHz" (values are omega / 2 pi)
    omega2 = 1.25
    Omega1 = 0.999
    Omega2 = 1.24875
    g1 = 0.04
    g2 = 0.05
    lambda = 0.001
    initial_state = [0, 1, 2, 0]   # n1, s1, n2, s2 with s = 1 excited
    tau_max = 100
    tau_step = 0.05

A ``preset`` key (fig1, fig2, fig3, table) fills the Hamiltonian parameters,
the initial state and the window; explicit keys override it.
"""
from __future__ import annotations

import sys
from dataclasses import dataclass, replace
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigParseError, ValidationError
from .params import FIGURE_PRESETS, GRID_STEP, INITIAL_KET, TABLE_ROWS, WINDOWS, SimParams
from .sector import BasisKet

PRESETS = ("fig1", "fig2", "fig3", "table")
PARAM_KEYS = {"omega1": "omega1", "omega2": "omega2", "Omega1": "Omega1", "Omega2": "Omega2",
              "g1": "g1", "g2": "g2", "lambda": "lam"}
OTHER_KEYS = {"units", "initial_state", "tau_max", "tau_step", "preset", "csv", "svg",
              "coeffs", "out"}


@dataclass(frozen=True)
class RunConfig:
    params: SimParams
    initial_state: BasisKet
    tau_max: float
    tau_step: float = GRID_STEP
    csv: bool = True
    svg: bool = False
    coeffs: bool = False
    preset: str | None = None
    out: Path = Path(".")

    def __post_init__(self):
        if not self.tau_step > 0:
            raise ValidationError("tau_step must be positive")
        if not self.tau_max >= self.tau_step:
            raise ValidationError("tau_max must be at least tau_step")
        ket = self.initial_state
        if ket.n1 < 0 or ket.n2 < 0 or ket.s1 not in (0, 1) or ket.s2 not in (0, 1):
            raise ValidationError(f"initial_state {tuple(ket)} is not a valid ket")


def load_toml(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigParseError(f"cannot read config {path}: {exc}") from exc
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigParseError(f"{path}: {exc}") from exc  # message carries line/column


def _number(raw: dict, key: str) -> float:
    v = raw[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValidationError(f"{key} must be a number, got {v!r}")
    return float(v)


def _flag(raw: dict, key: str) -> bool:
    v = raw[key]
    if not isinstance(v, bool):
        raise ValidationError(f"{key} must be true or false, got {v!r}")
    return v


def _preset_params(name: str) -> SimParams:
    if name == "table":
        return TABLE_ROWS[0][0]
    return FIGURE_PRESETS[name]


def build_config(raw: dict) -> RunConfig:
    unknown = set(raw) - set(PARAM_KEYS) - OTHER_KEYS
    if unknown:
        raise ValidationError(f"unknown config keys: {', '.join(sorted(unknown))}")
    preset = raw.get("preset")
    if preset is not None and preset not in PRESETS:
        raise ValidationError(f"unknown preset {preset!r}; choose from {', '.join(PRESETS)}")

    units = raw.get("units", "omega1")
    if units not in ("omega1", "GHz"):
        raise ValidationError(f"units must be 'omega1' or 'GHz', got {units!r}")

    given = {PARAM_KEYS[k]: _number(raw, k) for k in PARAM_KEYS if k in raw}
    if preset is not None:
        params = _preset_params(preset)
        if given:
            if units == "GHz":
                raise ValidationError("GHz values cannot override a preset given in units of omega1")
            params = replace(params, **given)
    else:
        if units == "GHz" and "omega1" not in given:
            raise ValidationError("GHz units need an explicit omega1")
        params = SimParams(**given)
    params = params.scaled()

    if "initial_state" in raw:
        ket = raw["initial_state"]
        if (not isinstance(ket, list) or len(ket) != 4
                or not all(isinstance(x, int) and not isinstance(x, bool) for x in ket)):
            raise ValidationError("initial_state must be a list of four integers [n1, s1, n2, s2]")
        ket = BasisKet(*ket)
    else:
        ket = BasisKet(*INITIAL_KET)

    if "tau_max" in raw:
        tau_max = _number(raw, "tau_max")
    elif preset is not None:
        tau_max = WINDOWS[preset]
    else:
        raise ValidationError("tau_max is required when no preset is given")
    tau_step = _number(raw, "tau_step") if "tau_step" in raw else GRID_STEP

    flags = {k: _flag(raw, k) for k in ("csv", "svg", "coeffs") if k in raw}
    out = raw.get("out", ".")
    if not isinstance(out, str):
        raise ValidationError("out must be a path string")
    return RunConfig(params=params, initial_state=ket, tau_max=tau_max, tau_step=tau_step,
                     preset=preset, out=Path(out), **flags)


def parse_config(path=None, **overrides) -> RunConfig:
    """Merge a config file (if any) with keyword overrides; ``None`` overrides are ignored."""
    raw = load_toml(path) if path is not None else {}
    raw.update({k: v for k, v in overrides.items() if v is not None})
    return build_config(raw)
