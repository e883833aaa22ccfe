"""Product-form evolution U = U0 U_hop U_JC1 U_JC2 applied to sector states.

Factors act right to left: both JC factors first (ladder by ladder), then the
hopping factor on the photon labels, then the free phases.  Each factor has a
dense matrix-exponential counterpart used as an oracle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
import scipy.linalg

from .errors import ValidationError
from .params import TWO_PI, SimParams
from .sector import BasisKet, PureState, SectorBasis
from .wei_norman import GammaSet, LadderBetaSet, gamma_series, ladder_block, ladder_series

MAX_PHOTONS = 20


def free_energies(params: SimParams, basis: SectorBasis) -> np.ndarray:
    """Diagonal of H0 / omega1 on the sector."""
    p = params.scaled()
    lab = basis.labels()
    n1, s1, n2, s2 = lab.T
    return (p.omega1 * n1 + p.omega2 * n2
            + 0.5 * p.Omega1 * (2 * s1 - 1) + 0.5 * p.Omega2 * (2 * s2 - 1))


def u0_phases(params: SimParams, basis: SectorBasis, taus) -> np.ndarray:
    return np.exp(-1j * TWO_PI * np.multiply.outer(np.asarray(taus, float), free_energies(params, basis)))


def apply_u0(params: SimParams, tau: float, state: PureState) -> PureState:
    return state.with_amp(u0_phases(params, state.basis, tau) * state.amp)


@lru_cache(maxsize=None)
def hop_terms(n1: int, n2: int) -> tuple[tuple[int, int, int, float], ...]:
    """Terms (p, k, target_n1, coefficient) of the finite double sum for U_hop|n1, n2>.

    U_hop|n1,n2> = e^{g3 (n1-n2)} sum_p sum_k coefficient * g2^p g1^k |n1+p-k, n2-p+k>
    """
    if n1 < 0 or n2 < 0:
        raise ValidationError("photon numbers must be non-negative")
    if max(n1, n2) > MAX_PHOTONS:
        raise ValidationError(f"photon number above {MAX_PHOTONS} is out of range")
    f = math.factorial
    terms = []
    for p in range(n2 + 1):
        outer = Fraction(f(n1 + p), f(p) * f(n2 - p))
        for k in range(n1 + p + 1):
            root = Fraction(f(n2) * f(n2 - p + k), f(n1) * f(n1 + p - k))
            coeff = float(outer / f(k)) * math.sqrt(root)
            terms.append((p, k, n1 + p - k, coeff))
    return tuple(terms)


def hop_block(gamma, n_photons: int) -> np.ndarray:
    """Hopping factor on the block {|N-j, j>}, indexed by n1; shape (..., N+1, N+1).

    ``gamma`` is a (..., 3) array of (g1, g2, g3); column n1 is U_hop|n1, N-n1>.
    """
    g = np.asarray(gamma, dtype=complex)
    g1, g2, g3 = g[..., 0], g[..., 1], g[..., 2]
    N = n_photons
    out = np.zeros(g1.shape + (N + 1, N + 1), dtype=complex)
    for n1 in range(N + 1):
        n2 = N - n1
        pref = np.exp(g3 * (n1 - n2))
        for p, k, t1, coeff in hop_terms(n1, n2):
            out[..., t1, n1] += coeff * g2 ** p * g1 ** k
        out[..., :, n1] *= pref[..., None]
    return out


@dataclass(frozen=True)
class _SectorMaps:
    """Index bookkeeping for applying factors to stacks of amplitude rows."""
    photon_blocks: dict[int, list[tuple[np.ndarray, np.ndarray]]]
    ladders: dict[int, list[tuple[int, int, int, int, int]]] = field(default_factory=dict)


@lru_cache(maxsize=None)
def _maps(basis: SectorBasis) -> _SectorMaps:
    # photon blocks: for each atomic pair and photon total N, the basis positions ordered by n1
    blocks: dict[int, list] = {}
    for s1 in (0, 1):
        for s2 in (0, 1):
            N = basis.m_total - s1 - s2
            if N < 0:
                continue
            pos = np.array([basis.index[BasisKet(n1, s1, N - n1, s2)] for n1 in range(N + 1)])
            blocks.setdefault(N, []).append((pos, np.arange(N + 1)))
    ladders = {}
    for cavity in (1, 2):
        entries = []
        for j, (n1, s1, n2, s2) in enumerate(basis.kets):
            n, s = (n1, s1) if cavity == 1 else (n2, s2)
            m = n + s
            if m == 0:
                continue
            if cavity == 1:
                e_ket, g_ket = BasisKet(m - 1, 1, n2, s2), BasisKet(m, 0, n2, s2)
            else:
                e_ket, g_ket = BasisKet(n1, s1, m - 1, 1), BasisKet(n1, s1, m, 0)
            col = 0 if s == 1 else 1
            entries.append((j, m, col, basis.index[e_ket], basis.index[g_ket]))
        ladders[cavity] = entries
    return _SectorMaps(blocks, ladders)


def hop_apply(gamma, amps: np.ndarray, basis: SectorBasis) -> np.ndarray:
    """Apply U_hop with coefficients ``gamma`` (..., 3) to rows ``amps`` (..., dim)."""
    amps = np.asarray(amps, dtype=complex)
    out = np.zeros_like(amps)
    for N, groups in _maps(basis).photon_blocks.items():
        U = hop_block(gamma, N)
        for pos, _ in groups:
            out[..., pos] = np.einsum("...ij,...j->...i", U, amps[..., pos])
    return out


def apply_ui1_sum(gamma: GammaSet, state: PureState) -> PureState:
    g = np.array([gamma.g1c, gamma.g2c, gamma.g3c])
    return state.with_amp(hop_apply(g, state.amp, state.basis))


def hop_generators(basis: SectorBasis) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Dense J+ = a1 a2^dag, J- = a1^dag a2, Jz = n1 - n2 on the sector."""
    d = basis.dim
    Jp = np.zeros((d, d))
    Jz = np.zeros((d, d))
    for i, (n1, s1, n2, s2) in enumerate(basis.kets):
        Jz[i, i] = n1 - n2
        if n1 > 0:
            Jp[basis.index[BasisKet(n1 - 1, s1, n2 + 1, s2)], i] = math.sqrt(n1 * (n2 + 1))
    return Jp, Jp.T.copy(), Jz


def apply_ui1_expm(gamma: GammaSet | None, state: PureState, *, params: SimParams | None = None,
                   tau: float | None = None) -> PureState:
    """Dense-exponential oracle for the hopping factor.

    With a GammaSet: exp(g1 J+) exp(g2 J-) exp(g3 Jz).  With ``params`` and
    ``tau`` on a resonant pair (w1 == w2): exp(-i lam' tau (J+ + J-)).
    """
    Jp, Jm, Jz = hop_generators(state.basis)
    if gamma is not None:
        U = (scipy.linalg.expm(gamma.g1c * Jp) @ scipy.linalg.expm(gamma.g2c * Jm)
             @ scipy.linalg.expm(gamma.g3c * Jz))
    else:
        if params is None or tau is None:
            raise ValidationError("need either a GammaSet or params and tau")
        p = params.scaled()
        if p.omega1 != p.omega2:
            raise ValidationError("time-independent hopping exponential needs w1 == w2")
        U = scipy.linalg.expm(-1j * params.hop_rate * tau * (Jp + Jm))
    return state.with_amp(U @ state.amp)


def jc_apply(cavity: int, betas: dict, amps: np.ndarray, basis: SectorBasis) -> np.ndarray:
    """Apply U_JC of one cavity; ``betas[m]`` is a (..., 3) array of (bz, bp, bm)."""
    amps = np.asarray(amps, dtype=complex)
    out = np.zeros_like(amps)
    blocks = {}
    for j, m, col, e_pos, g_pos in _maps(basis).ladders[cavity]:
        if m not in blocks:
            if m not in betas:
                raise ValidationError(f"no beta table for cavity {cavity}, ladder m={m}")
            b = np.asarray(betas[m], dtype=complex)
            blocks[m] = ladder_block(b[..., 0], b[..., 1], b[..., 2])
        U = blocks[m]
        out[..., e_pos] += U[..., 0, col] * amps[..., j]
        out[..., g_pos] += U[..., 1, col] * amps[..., j]
    # the (0, g) component of this cavity is untouched
    for j, (n1, s1, n2, s2) in enumerate(basis.kets):
        if (n1 + s1 if cavity == 1 else n2 + s2) == 0:
            out[..., j] += amps[..., j]
    return out


def apply_ujc(cavity: int, betas, state: PureState) -> PureState:
    """``betas`` maps ladder m to a LadderBetaSet (or a (bz, bp, bm) triple)."""
    table = {}
    for m, b in dict(betas).items():
        if isinstance(b, LadderBetaSet):
            if b.cavity != cavity or b.m != m:
                raise ValidationError("beta table keyed under the wrong ladder")
            b = (b.bz, b.bp, b.bm)
        table[m] = np.asarray(b, dtype=complex)
    return state.with_amp(jc_apply(cavity, table, state.amp, state.basis))


@dataclass(frozen=True)
class ProductEvolution:
    params: SimParams
    basis: SectorBasis
    tau_grid: np.ndarray
    gamma: np.ndarray                      # (T, 3)
    betas: dict[tuple[int, int], np.ndarray]  # (cavity, m) -> (T, 3); m = 0 omitted (identity)

    @classmethod
    def build(cls, params: SimParams, basis: SectorBasis, tau_grid) -> "ProductEvolution":
        grid = np.asarray(tau_grid, dtype=float)
        gamma = gamma_series(params, grid)
        betas = {}
        for cavity in (1, 2):
            for m in range(1, basis.m_total + 1):
                betas[(cavity, m)] = ladder_series(params, cavity, m, grid)[:, 3:]
        return cls(params, basis, grid, gamma, betas)

    def cavity_betas(self, cavity: int) -> dict[int, np.ndarray]:
        return {m: b for (c, m), b in self.betas.items() if c == cavity}

    def amplitudes(self, psi0: PureState) -> np.ndarray:
        if psi0.basis != self.basis:
            raise ValidationError("initial state lives in a different sector")
        T = self.tau_grid.size
        amps = np.broadcast_to(psi0.amp, (T, self.basis.dim))
        amps = jc_apply(2, self.cavity_betas(2), amps, self.basis)
        amps = jc_apply(1, self.cavity_betas(1), amps, self.basis)
        amps = hop_apply(self.gamma, amps, self.basis)
        return u0_phases(self.params, self.basis, self.tau_grid) * amps


def analytic_amplitudes(params: SimParams, psi0: PureState, tau_grid) -> np.ndarray:
    grid = np.asarray(tau_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or grid[0] < 0 or np.any(np.diff(grid) <= 0):
        raise ValidationError("time grid must be non-empty, strictly increasing, tau >= 0")
    pad = grid[0] > 0
    full = np.concatenate([[0.0], grid]) if pad else grid
    amps = ProductEvolution.build(params, psi0.basis, full).amplitudes(psi0)
    return amps[1:] if pad else amps


def evolve_analytic(params: SimParams, psi0: PureState, tau_grid) -> list[PureState]:
    return [psi0.with_amp(row) for row in analytic_amplitudes(params, psi0, tau_grid)]
