"""Observable time series on both propagation paths and the validity classifier."""
from __future__ import annotations

import enum
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .analytic import analytic_amplitudes
from .errors import ValidationError
from .exact import exact_amplitudes
from .params import GRID_STEP, INITIAL_KET, WINDOWS, SimParams
from .sector import Observable, PureState, basis_state, build_sector_basis, expectations

OBSERVABLES = ("n1", "n2", "sz1", "sz2", "m1", "m2", "mtot")
COMPARED = ("n1", "n2", "sz1", "sz2")
QUANTITATIVE_THRESHOLD = 0.05


@dataclass
class ObservableSeries:
    tau: np.ndarray
    analytic: dict[str, np.ndarray]
    numeric: dict[str, np.ndarray]
    params: SimParams | None = None
    m_total: int = 0

    @property
    def diff(self) -> dict[str, np.ndarray]:
        return {k: self.analytic[k] - self.numeric[k] for k in OBSERVABLES}

    def max_abs_diff(self, tau_max: float | None = None, tau_min: float = 0.0) -> dict[str, float]:
        mask = self.tau >= tau_min
        if tau_max is not None:
            mask &= self.tau <= tau_max
        if not mask.any():
            raise ValidationError("comparison window contains no grid points")
        return {k: float(np.abs(v[mask]).max()) for k, v in self.diff.items()}


def tau_grid(tau_max: float, tau_step: float = GRID_STEP) -> np.ndarray:
    if tau_step <= 0 or tau_max < tau_step:
        raise ValidationError("need tau_step > 0 and tau_max >= tau_step")
    n = int(round(tau_max / tau_step))
    if not np.isclose(n * tau_step, tau_max, rtol=0, atol=1e-9 * max(1.0, tau_max)):
        n = int(np.floor(tau_max / tau_step))
    return np.arange(n + 1) * tau_step


def _observe(amps, basis) -> dict[str, np.ndarray]:
    return {k: expectations(amps, basis, Observable(k)) for k in OBSERVABLES}


def compute_series(params: SimParams, psi0: PureState, grid) -> ObservableSeries:
    grid = np.asarray(grid, dtype=float)
    basis = psi0.basis
    analytic = analytic_amplitudes(params, psi0, grid)
    numeric = exact_amplitudes(params, psi0, grid)
    return ObservableSeries(grid, _observe(analytic, basis), _observe(numeric, basis),
                            params=params, m_total=basis.m_total)


def reference_initial_state() -> PureState:
    return basis_state(build_sector_basis(sum(INITIAL_KET)), INITIAL_KET)


class Verdict(str, enum.Enum):
    QUANTITATIVE = "QuantitativeAndQualitative"
    QUALITATIVE = "QualitativeOnly"


@dataclass(frozen=True)
class RegimeReport:
    params: SimParams
    max_abs_diff: dict[str, float]
    verdict: Verdict
    window: tuple[float, float]


def classify_regime(series: ObservableSeries, threshold: float = QUANTITATIVE_THRESHOLD,
                    window: tuple[float, float] | None = None) -> RegimeReport:
    if window is None:
        window = (float(series.tau[0]), float(series.tau[-1]))
    diffs = series.max_abs_diff(tau_max=window[1], tau_min=window[0])
    worst = max(diffs[k] for k in COMPARED)
    verdict = Verdict.QUANTITATIVE if worst <= threshold else Verdict.QUALITATIVE
    return RegimeReport(series.params, diffs, verdict, (float(window[0]), float(window[1])))


def _thread_cap() -> int:
    raw = os.environ.get("CAVITY_DUET_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValidationError(f"CAVITY_DUET_THREADS must be an integer, got {raw!r}") from None


def run_table(presets, tau_max: float = WINDOWS["table"], tau_step: float = GRID_STEP,
              threshold: float = QUANTITATIVE_THRESHOLD, threads: int | None = None) -> list[RegimeReport]:
    """One report per parameter set, in input order."""
    presets = list(presets)
    if not presets:
        return []
    psi0 = reference_initial_state()
    grid = tau_grid(tau_max, tau_step)

    def row(params):
        return classify_regime(compute_series(params, psi0, grid), threshold)

    workers = min(threads or _thread_cap(), len(presets))
    if workers == 1:
        return [row(p) for p in presets]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(row, presets))

