"""Wei-Norman coefficients of the product-form evolution operator.

The hopping factor is ``exp(g1 J+) exp(g2 J-) exp(g3 Jz)`` with
``J+ = a1 a2^dag``, ``J- = a1^dag a2`` and ``Jz = n1 - n2``.  Each JC factor,
on the ladder {|m-1, e>, |m, g>} of cavity i, is
``exp(bz sz) exp(bp b^dag) exp(bm b)``, i.e. the 2x2 block

    [[e^bz,          e^bz bm            ],
     [bp e^-bz,      e^-bz (1 + bp bm)  ]]

The beta equations are not given in closed form by the model; they follow
from inserting that block into i dU/dt = H U with
``H = kappa (phi_raise b^dag + phi_lower b)`` and ``kappa = g sqrt(m)``:

    bm' = -i kappa phi_lower e^{-2 bz}
    bz' = bp bm'
    bp' = -i kappa phi_raise e^{2 bz} + bp^2 bm'

Correctness is checked against unitarity of the block and against dense
matrix exponentials, not assumed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .errors import FactorizationBreakdown, IdentityLadder, ValidationError
from .params import SimParams

RTOL = 1e-13
ATOL = 1e-15
GAMMA_CAP = 1e6
BETA_CAP = 700.0
MAX_STEPS = 20_000_000


@dataclass(frozen=True)
class GammaSet:
    tau: float
    g1c: complex
    g2c: complex
    g3c: complex

    def su2_matrix(self) -> np.ndarray:
        """Hopping factor on the one-photon pair (|0,1>, |1,0>)."""
        g1, g2, g3 = self.g1c, self.g2c, self.g3c
        return np.array([[(1 + g1 * g2) * np.exp(-g3), g1 * np.exp(g3)],
                         [g2 * np.exp(-g3), np.exp(g3)]])

    def unitarity_residual(self) -> float:
        u = self.su2_matrix()
        return float(np.abs(u.conj().T @ u - np.eye(2)).max())

    def hermiticity_residual(self) -> float:
        g1, g2, g3 = self.g1c, self.g2c, self.g3c
        return float(abs((1 + g1 * g2) * np.exp(-g3) - np.conj(np.exp(g3))))


@dataclass(frozen=True)
class PhiSet:
    phi11: complex
    phi12: complex
    phi21: complex
    phi22: complex

    def for_cavity(self, cavity: int) -> tuple[complex, complex]:
        """(raising, lowering) coefficient pair of one cavity."""
        if cavity == 1:
            return self.phi11, self.phi12
        if cavity == 2:
            return self.phi21, self.phi22
        raise ValidationError(f"cavity must be 1 or 2, got {cavity}")


@dataclass(frozen=True)
class LadderBetaSet:
    cavity: int
    m: int
    tau: float
    bz: complex
    bp: complex
    bm: complex

    def block(self) -> np.ndarray:
        return ladder_block(self.bz, self.bp, self.bm)

    def unitarity_residual(self) -> float:
        u = self.block()
        return float(np.abs(u.conj().T @ u - np.eye(2)).max())


def ladder_block(bz, bp, bm) -> np.ndarray:
    """2x2 JC block(s) on (|m-1,e>, |m,g>); broadcasts over leading axes."""
    bz, bp, bm = np.asarray(bz), np.asarray(bp), np.asarray(bm)
    ez, emz = np.exp(bz), np.exp(-bz)
    out = np.empty(bz.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = ez
    out[..., 0, 1] = ez * bm
    out[..., 1, 0] = bp * emz
    out[..., 1, 1] = emz * (1 + bp * bm)
    return out


def gamma_rhs(tau: float, gamma: GammaSet, params: SimParams) -> tuple[complex, complex, complex]:
    return tuple(complex(v) for v in K.gamma_rates(
        float(tau), complex(gamma.g1c), complex(gamma.g2c), complex(gamma.g3c),
        params.hop_rate, params.cavity_detuning_rate))


def phi_coeffs(tau: float, gamma: GammaSet, params: SimParams) -> PhiSet:
    vals = K.phi_values(float(tau), complex(gamma.g1c), complex(gamma.g2c), complex(gamma.g3c),
                        params.atom_detuning_rate(1), params.atom_detuning_rate(2))
    return PhiSet(*(complex(v) for v in vals))


def beta_rhs(tau: float, beta: LadderBetaSet, phi: PhiSet,
             params: SimParams) -> tuple[complex, complex, complex]:
    if beta.m < 0:
        raise ValidationError("ladder index m must be non-negative")
    if beta.m == 0:
        raise IdentityLadder("m = 0 ladder: the JC factor is the identity")
    kappa = params.coupling_rate(beta.cavity) * math.sqrt(beta.m)
    f_raise, f_lower = phi.for_cavity(beta.cavity)
    return tuple(complex(v) for v in K.beta_rates(
        complex(beta.bz), complex(beta.bp), complex(beta.bm), kappa, f_raise, f_lower))


def gamma_closed_form_resonant(lambda_dimless: float, tau: float) -> GammaSet:
    """Exact coefficients when w1 == w2; ``lambda_dimless`` = 2 pi lambda / w1."""
    x = lambda_dimless * tau
    c = math.cos(x)
    if abs(c) < 1e-12:
        raise FactorizationBreakdown(f"tangent pole at lambda' tau = {x:.15g}", tau=tau)
    return GammaSet(tau, -1j * math.tan(x), -0.5j * math.sin(2 * x), np.log(complex(c)))


def _check_grid(tau_grid) -> np.ndarray:
    grid = np.ascontiguousarray(tau_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValidationError("need a non-empty 1-d time grid")
    if grid[0] != 0.0:
        raise ValidationError("coefficient grids must start at tau = 0")
    if np.any(np.diff(grid) <= 0):
        raise ValidationError("time grid must be strictly increasing")
    return grid


_STATUS_TEXT = {
    K.STATUS_GAMMA_POLE: "|g1| exceeded {cap:g} (hopping-factor coordinate pole)",
    K.STATUS_BETA_OVERFLOW: "|bz| exceeded {beta:g} (JC-factor coordinate pole)",
    K.STATUS_STEP_UNDERFLOW: "step size underflow while coefficients diverge",
    K.STATUS_MAX_STEPS: "step budget exhausted",
}


def _solve(params: SimParams, grid: np.ndarray, cavity: int, m: int,
           rtol: float, atol: float) -> np.ndarray:
    with_beta = m > 0
    n = 6 if with_beta else 3
    kappa = params.coupling_rate(cavity) * math.sqrt(m) if with_beta else 0.0
    detun = params.atom_detuning_rate(cavity) if with_beta else 0.0
    y0 = np.zeros(n, dtype=np.complex128)
    out, status, t_last, _ = K.solve_on_grid(
        y0, grid, rtol, atol, params.hop_rate, params.cavity_detuning_rate,
        kappa, detun, cavity,
        K.TABLEAU_A, K.TABLEAU_B, K.TABLEAU_C, K.TABLEAU_E3, K.TABLEAU_E5,
        GAMMA_CAP, BETA_CAP, MAX_STEPS)
    if status != K.STATUS_OK:
        what = _STATUS_TEXT[status].format(cap=GAMMA_CAP, beta=BETA_CAP)
        where = f"cavity {cavity}, ladder m={m}" if with_beta else "hopping factor"
        raise FactorizationBreakdown(
            f"Wei-Norman factorization breaks down near tau={t_last:.6g} ({where}): {what}",
            tau=float(t_last))
    return out


def gamma_series(params: SimParams, tau_grid, rtol: float = RTOL, atol: float = ATOL) -> np.ndarray:
    """Array of shape (T, 3) holding g1, g2, g3 on the grid."""
    return _solve(params, _check_grid(tau_grid), 1, 0, rtol, atol)


def ladder_series(params: SimParams, cavity: int, m: int, tau_grid,
                  rtol: float = RTOL, atol: float = ATOL) -> np.ndarray:
    """Joint (g1, g2, g3, bz, bp, bm) trajectory for one ladder, shape (T, 6)."""
    if cavity not in (1, 2):
        raise ValidationError(f"cavity must be 1 or 2, got {cavity}")
    if m < 0:
        raise ValidationError("ladder index m must be non-negative")
    if m == 0:
        raise IdentityLadder("m = 0 ladder: the JC factor is the identity")
    return _solve(params, _check_grid(tau_grid), cavity, m, rtol, atol)


def integrate_gamma(params: SimParams, tau_grid, rtol: float = RTOL,
                    atol: float = ATOL) -> list[GammaSet]:
    grid = _check_grid(tau_grid)
    y = gamma_series(params, grid, rtol, atol)
    return [GammaSet(float(t), *row) for t, row in zip(grid, y)]


def integrate_beta(params: SimParams, cavity: int, m: int, tau_grid,
                   rtol: float = RTOL, atol: float = ATOL) -> list[LadderBetaSet]:
    grid = _check_grid(tau_grid)
    y = ladder_series(params, cavity, m, grid, rtol, atol)
    return [LadderBetaSet(cavity, m, float(t), *row[3:]) for t, row in zip(grid, y)]
