"""Conserved-excitation sector of two cavity modes, each holding one qubit.

A basis ket is labelled ``(n1, s1, n2, s2)`` with photon counts ``n_i >= 0``
and qubit levels ``s_i`` in {0, 1} (0 = ground, 1 = excited).  The full
Hamiltonian conserves ``n1 + s1 + n2 + s2``, so every computation here lives
on one sector of fixed total excitation ``M``.  The sector is exact, not a
truncation of the Fock space.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import SectorMismatchError, ValidationError


class BasisKet(NamedTuple):
    n1: int
    s1: int
    n2: int
    s2: int

    @property
    def excitations(self) -> int:
        return self.n1 + self.s1 + self.n2 + self.s2

    def label(self) -> str:
        g_e = "ge"
        return f"|{self.n1},{g_e[self.s1]};{self.n2},{g_e[self.s2]}>"


def _check_ket(ket: BasisKet) -> None:
    if ket.n1 < 0 or ket.n2 < 0 or ket.s1 not in (0, 1) or ket.s2 not in (0, 1):
        raise ValidationError(f"invalid ket labels {tuple(ket)}")


@dataclass(frozen=True)
class SectorBasis:
    m_total: int
    kets: tuple[BasisKet, ...]
    index: dict[BasisKet, int] = field(repr=False, compare=False)

    @property
    def dim(self) -> int:
        return len(self.kets)

    def __len__(self) -> int:
        return len(self.kets)

    def position(self, ket) -> int:
        ket = BasisKet(*ket)
        try:
            return self.index[ket]
        except KeyError:
            raise SectorMismatchError(
                f"ket {tuple(ket)} has {ket.excitations} excitations, "
                f"sector holds M = {self.m_total}"
            ) from None

    def labels(self) -> np.ndarray:
        """Integer array of shape (dim, 4) with columns n1, s1, n2, s2."""
        return np.array(self.kets, dtype=np.int64).reshape(-1, 4)


def build_sector_basis(m_total: int) -> SectorBasis:
    """All kets with ``n1 + s1 + n2 + s2 == m_total``, lexicographic in (n1, s1, n2, s2)."""
    if m_total < 0:
        raise ValidationError("total excitation number must be non-negative")
    kets = []
    for n1, s1, s2 in itertools.product(range(m_total + 1), (0, 1), (0, 1)):
        n2 = m_total - n1 - s1 - s2
        if n2 >= 0:
            kets.append(BasisKet(n1, s1, n2, s2))
    kets.sort()
    kets = tuple(kets)
    return SectorBasis(m_total, kets, {k: i for i, k in enumerate(kets)})


@dataclass(frozen=True)
class PureState:
    basis: SectorBasis
    amp: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amp, dtype=complex)
        if amp.shape != (self.basis.dim,):
            raise SectorMismatchError(
                f"amplitude vector of shape {amp.shape} does not fit a "
                f"{self.basis.dim}-dimensional sector"
            )
        object.__setattr__(self, "amp", amp)

    def with_amp(self, amp) -> "PureState":
        return PureState(self.basis, amp)


def basis_state(basis: SectorBasis, ket) -> PureState:
    ket = BasisKet(*ket)
    _check_ket(ket)
    amp = np.zeros(basis.dim, dtype=complex)
    amp[basis.position(ket)] = 1.0
    return PureState(basis, amp)


class Observable(enum.Enum):
    N1 = "n1"
    N2 = "n2"
    SZ1 = "sz1"
    SZ2 = "sz2"
    M1 = "m1"
    M2 = "m2"
    MTOT = "mtot"

    def values(self, basis: SectorBasis) -> np.ndarray:
        """Eigenvalue on every basis ket (all observables are diagonal)."""
        lab = basis.labels()
        n1, s1, n2, s2 = lab.T if lab.size else np.zeros((4, 0), dtype=np.int64)
        table = {
            Observable.N1: n1,
            Observable.N2: n2,
            Observable.SZ1: 2 * s1 - 1,
            Observable.SZ2: 2 * s2 - 1,
            Observable.M1: n1 + s1,
            Observable.M2: n2 + s2,
            Observable.MTOT: n1 + s1 + n2 + s2,
        }
        return table[self].astype(float)


def expectation(state: PureState, obs: Observable) -> float:
    prob = np.abs(state.amp) ** 2
    return float(prob @ obs.values(state.basis))


def expectations(amps: np.ndarray, basis: SectorBasis, obs: Observable) -> np.ndarray:
    """Vectorised ``expectation`` over a stack of amplitude rows, shape (T, dim)."""
    return (np.abs(amps) ** 2) @ obs.values(basis)


def norm(state: PureState) -> float:
    return float(np.linalg.norm(state.amp))
