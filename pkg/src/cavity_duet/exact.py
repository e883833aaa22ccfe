"""Reference evolution under the full lab-frame Hamiltonian.

    H / omega1 = w1 n1 + W1/2 sz1 + w2 n2 + W2/2 sz2
                 + g1 (a1 s1+ + a1^dag s1-) + g2 (a2 s2+ + a2^dag s2-)
                 + lam (a1 a2^dag + a1^dag a2)

H is time independent, so the sector propagator is exp(-2 pi i H tau) built
from a Hermitian eigendecomposition.  A classical RK4 integrator provides an
independent check of that path.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InstabilityError, NumericalFailure, ValidationError
from .params import TWO_PI, SimParams
from .sector import BasisKet, PureState, SectorBasis


def build_hamiltonian(params: SimParams, basis: SectorBasis) -> np.ndarray:
    """Dense Hermitian matrix of H / omega1 on the sector."""
    if basis.dim == 0:
        raise ValidationError("empty sector basis")
    p = params.scaled()
    H = np.zeros((basis.dim, basis.dim), dtype=complex)
    for i, (n1, s1, n2, s2) in enumerate(basis.kets):
        H[i, i] = (p.omega1 * n1 + p.omega2 * n2
                   + 0.5 * p.Omega1 * (2 * s1 - 1) + 0.5 * p.Omega2 * (2 * s2 - 1))
        # Only "lowering" moves are listed; the conjugate element is the mirror entry.
        if s1 == 0 and n1 > 0:  # a1 s1+ : |n1, g> -> sqrt(n1) |n1-1, e>
            j = basis.index[BasisKet(n1 - 1, 1, n2, s2)]
            H[j, i] += p.g1 * math.sqrt(n1)
            H[i, j] += p.g1 * math.sqrt(n1)
        if s2 == 0 and n2 > 0:
            j = basis.index[BasisKet(n1, s1, n2 - 1, 1)]
            H[j, i] += p.g2 * math.sqrt(n2)
            H[i, j] += p.g2 * math.sqrt(n2)
        if n1 > 0:  # a1 a2^dag : |n1, n2> -> sqrt(n1 (n2+1)) |n1-1, n2+1>
            j = basis.index[BasisKet(n1 - 1, s1, n2 + 1, s2)]
            amp = p.lam * math.sqrt(n1 * (n2 + 1))
            H[j, i] += amp
            H[i, j] += amp
    return H


def build_full_hamiltonian(params: SimParams, n_max: int) -> np.ndarray:
    """H / omega1 on the truncated product space (n_i <= n_max) via Kronecker products.

    Index order is (n1, s1, n2, s2) with s the fastest-varying label inside
    each mode factor, so lexicographic ket order is preserved.
    """
    p = params.scaled()
    a = np.diag(np.sqrt(np.arange(1, n_max + 1)), k=1).astype(complex)
    n = a.conj().T @ a
    sp = np.array([[0, 0], [1, 0]], dtype=complex)  # |g> -> |e> with s = 0 -> 1
    sz = np.diag([-1.0, 1.0]).astype(complex)
    If, Iq = np.eye(n_max + 1), np.eye(2)

    def op(f1, q1, f2, q2):
        return np.kron(np.kron(np.kron(f1, q1), f2), q2)

    a1, a2 = op(a, Iq, If, Iq), op(If, Iq, a, Iq)
    s1p, s2p = op(If, sp, If, Iq), op(If, Iq, If, sp)
    H = (p.omega1 * op(n, Iq, If, Iq) + p.omega2 * op(If, Iq, n, Iq)
         + 0.5 * p.Omega1 * op(If, sz, If, Iq) + 0.5 * p.Omega2 * op(If, Iq, If, sz))
    H = H + p.g1 * (a1 @ s1p + a1.conj().T @ s1p.conj().T)
    H = H + p.g2 * (a2 @ s2p + a2.conj().T @ s2p.conj().T)
    H = H + p.lam * (a1 @ a2.conj().T + a1.conj().T @ a2)
    return H


def full_space_index(ket, n_max: int) -> int:
    n1, s1, n2, s2 = ket
    return ((n1 * 2 + s1) * (n_max + 1) + n2) * 2 + s2


@dataclass(frozen=True)
class ExactEvolution:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    psi0: PureState

    @classmethod
    def prepare(cls, params: SimParams, psi0: PureState) -> "ExactEvolution":
        H = build_hamiltonian(params, psi0.basis)
        try:
            w, V = np.linalg.eigh(H)
        except np.linalg.LinAlgError as exc:
            raise NumericalFailure(f"eigendecomposition failed: {exc}") from exc
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(V))):
            raise NumericalFailure("eigendecomposition returned non-finite values")
        return cls(w, V, psi0)

    def amplitudes(self, times) -> np.ndarray:
        """Rows psi(tau) = V exp(-2 pi i D tau) V^dag psi0, shape (len(times), dim)."""
        t = np.asarray(times, dtype=float)
        c = self.eigenvectors.conj().T @ self.psi0.amp
        phases = np.exp(-1j * TWO_PI * np.outer(t, self.eigenvalues))
        return (phases * c) @ self.eigenvectors.T

    def reconstruction_residual(self, H: np.ndarray) -> float:
        V, w = self.eigenvectors, self.eigenvalues
        return float(np.abs(V @ np.diag(w) @ V.conj().T - H).max())


def _check_times(times) -> np.ndarray:
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise ValidationError("need a non-empty 1-d list of times")
    if t[0] < 0 or np.any(np.diff(t) < 0):
        raise ValidationError("times must be ascending and start at tau >= 0")
    return t


def exact_amplitudes(params: SimParams, psi0: PureState, times) -> np.ndarray:
    return ExactEvolution.prepare(params, psi0).amplitudes(_check_times(times))


def propagate_exact(params: SimParams, psi0: PureState, times) -> list[PureState]:
    amps = exact_amplitudes(params, psi0, times)
    return [psi0.with_amp(row) for row in amps]


def propagate_rk_check(params: SimParams, psi0: PureState, times,
                       step: float = 1e-3) -> list[PureState]:
    """Classical RK4 on i dpsi/dtau = 2 pi H psi, landing exactly on every output time.

    H is shifted by the midpoint of its diagonal range before stepping and the
    resulting global phase is restored exactly; this keeps the RK4 phase error
    set by the level spread rather than the absolute energy.
    """
    t = _check_times(times)
    if step <= 0:
        raise ValidationError("RK step must be positive")
    gaps = np.diff(t)
    if gaps.size and step > gaps[gaps > 0].min(initial=np.inf):
        raise ValidationError("RK step must not exceed the output spacing")
    H = build_hamiltonian(params, psi0.basis)
    diag = H.diagonal().real
    shift = 0.5 * (diag.max() + diag.min())
    A = -1j * TWO_PI * (H - shift * np.eye(H.shape[0]))

    psi = psi0.amp.copy()
    out = []
    tau = 0.0
    for target in t:
        span = target - tau
        nsub = int(math.ceil(span / step - 1e-9)) if span > 0 else 0
        if nsub:
            h = span / nsub
            for _ in range(nsub):
                k1 = A @ psi
                k2 = A @ (psi + 0.5 * h * k1)
                k3 = A @ (psi + 0.5 * h * k2)
                k4 = A @ (psi + h * k3)
                psi = psi + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            tau = target
            drift = abs(np.linalg.norm(psi) - 1.0)
            if drift > 1e-4:
                raise InstabilityError(
                    f"RK4 norm drift {drift:.2e} at tau={target:g}; use a smaller step")
        out.append(psi0.with_amp(psi * np.exp(-1j * TWO_PI * shift * target)))
    return out


def propagator(params: SimParams, basis: SectorBasis, tau: float) -> np.ndarray:
    """Dense exp(-2 pi i H tau) via scipy's matrix exponential (test helper)."""
    return scipy.linalg.expm(-1j * TWO_PI * tau * build_hamiltonian(params, basis))
