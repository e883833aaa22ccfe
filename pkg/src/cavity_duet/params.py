"""Hamiltonian parameters and the preset regimes.

All frequencies are stored in units of the cavity-one frequency (so a
normalised parameter set has ``omega1 == 1``); time is measured in periods
of cavity one.  A phase ``w * t`` therefore reads ``2*pi * (w / omega1) * tau``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace

from .errors import ValidationError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SimParams:
    omega1: float = 1.0
    omega2: float = 1.25
    Omega1: float = 0.999
    Omega2: float = 0.999 * 1.25
    g1: float = 0.0
    g2: float = 0.0
    lam: float = 0.0

    def __post_init__(self):
        vals = asdict(self)
        if not all(math.isfinite(v) for v in vals.values()):
            raise ValidationError(f"non-finite parameter in {vals}")
        if self.omega1 <= 0:
            raise ValidationError("omega1 must be positive")
        for name in ("omega2", "Omega1", "Omega2"):
            if vals[name] < 0:
                raise ValidationError(f"{name} must be non-negative")
        for name in ("g1", "g2", "lam"):
            if vals[name] < 0:
                raise ValidationError(f"coupling {name} must be non-negative")

    def scaled(self) -> "SimParams":
        """Same physics with every frequency divided by ``omega1``."""
        w = self.omega1
        return SimParams(1.0, self.omega2 / w, self.Omega1 / w, self.Omega2 / w,
                         self.g1 / w, self.g2 / w, self.lam / w)

    @classmethod
    def from_ghz(cls, **freqs_ghz: float) -> "SimParams":
        """Build from linear frequencies (omega / 2 pi) in GHz; only ratios matter."""
        return cls(**freqs_ghz).scaled()

    # Angular rates per unit of dimensionless time (factor 2 pi from omega1 * T1).
    @property
    def hop_rate(self) -> float:
        p = self.scaled()
        return TWO_PI * p.lam

    @property
    def cavity_detuning_rate(self) -> float:
        """2 pi (omega1 - omega2) / omega1."""
        p = self.scaled()
        return TWO_PI * (p.omega1 - p.omega2)

    def atom_detuning_rate(self, cavity: int) -> float:
        """2 pi (Omega_i - omega_i) / omega1."""
        p = self.scaled()
        if cavity == 1:
            return TWO_PI * (p.Omega1 - p.omega1)
        if cavity == 2:
            return TWO_PI * (p.Omega2 - p.omega2)
        raise ValidationError(f"cavity must be 1 or 2, got {cavity}")

    def coupling_rate(self, cavity: int) -> float:
        p = self.scaled()
        if cavity == 1:
            return TWO_PI * p.g1
        if cavity == 2:
            return TWO_PI * p.g2
        raise ValidationError(f"cavity must be 1 or 2, got {cavity}")

    def with_couplings(self, g1=None, g2=None, lam=None) -> "SimParams":
        changes = {k: v for k, v in dict(g1=g1, g2=g2, lam=lam).items() if v is not None}
        return replace(self, **changes)


def regime_params(g_rel: float, lam_rel: float) -> SimParams:
    """Shared frequencies (omega2 = 1.25 omega1, Omega_i = 0.999 omega_i),
    atom-field couplings ``g_i = g_rel * omega_i`` and hopping ``lam_rel * omega1``."""
    w2 = 5.0 / 4.0
    return SimParams(
        omega1=1.0,
        omega2=w2,
        Omega1=0.999,
        Omega2=0.999 * w2,
        g1=g_rel,
        g2=g_rel * w2,
        lam=lam_rel,
    )


INITIAL_KET = (0, 1, 2, 0)  # |0,e> x |2,g>

FIGURE_PRESETS = {
    "fig1": regime_params(0.04, 1e-3),
    "fig2": regime_params(0.001, 0.25),
    "fig3": regime_params(0.04, 0.08),
}

# Rows of the validity table, in print order, with the expected verdicts.
TABLE_ROWS = [
    (regime_params(0.04, 1e-3), "QuantitativeAndQualitative"),
    (regime_params(0.001, 0.25), "QuantitativeAndQualitative"),
    (regime_params(0.01, 0.02), "QuantitativeAndQualitative"),
    (regime_params(0.4, 0.001), "QuantitativeAndQualitative"),
    (regime_params(0.04, 0.08), "QualitativeOnly"),
]

# Default comparison windows (tau_max) and grid step.
WINDOWS = {"fig1": 100.0, "fig2": 50.0, "fig3": 100.0, "table": 100.0}
GRID_STEP = 0.05
