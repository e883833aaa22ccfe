import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cavity_duet.errors import ValidationError
from cavity_duet.exact import (
    ExactEvolution, build_full_hamiltonian, build_hamiltonian, exact_amplitudes,
    full_space_index, propagate_exact, propagate_rk_check, propagator,
)
from cavity_duet.params import SimParams
from cavity_duet.sector import BasisKet, Observable, basis_state, build_sector_basis, expectations

from conftest import random_state

params_strategy = st.builds(
    SimParams,
    omega1=st.just(1.0),
    omega2=st.floats(0.5, 1.5),
    Omega1=st.floats(0.5, 1.5),
    Omega2=st.floats(0.5, 1.5),
    g1=st.floats(0, 0.2),
    g2=st.floats(0, 0.2),
    lam=st.floats(0, 0.2),
)


def test_diagonal_entry_without_couplings(sector3):
    p = SimParams(omega2=1.25, Omega1=0.999, Omega2=1.24875)
    H = build_hamiltonian(p, sector3)
    i = sector3.index[BasisKet(0, 1, 2, 0)]
    assert H[i, i].real == pytest.approx(0.999 / 2 + 2 * 1.25 - 1.24875 / 2, abs=1e-15)
    assert np.count_nonzero(H - np.diag(H.diagonal())) == 0


def test_single_photon_hop_element():
    b = build_sector_basis(1)
    H = build_hamiltonian(SimParams(lam=0.3), b)
    assert H[b.index[BasisKet(0, 0, 1, 0)], b.index[BasisKet(1, 0, 0, 0)]] == 0.3


def test_jc_element():
    b = build_sector_basis(1)
    H = build_hamiltonian(SimParams(g1=0.07), b)
    assert H[b.index[BasisKet(1, 0, 0, 0)], b.index[BasisKet(0, 1, 0, 0)]] == 0.07


@pytest.mark.parametrize("m", [0, 1, 2, 3, 4])
def test_sector_block_of_full_space_hamiltonian(m):
    p = SimParams(omega2=1.3, Omega1=0.9, Omega2=1.1, g1=0.11, g2=0.07, lam=0.05)
    b = build_sector_basis(m)
    Hf = build_full_hamiltonian(p, n_max=m + 1)
    idx = [full_space_index(k, m + 1) for k in b.kets]
    np.testing.assert_allclose(Hf[np.ix_(idx, idx)], build_hamiltonian(p, b), atol=1e-14)
    # the sector does not leak into the rest of the truncated space
    rest = np.setdiff1d(np.arange(Hf.shape[0]), idx)
    assert np.abs(Hf[np.ix_(rest, idx)]).max() < 1e-14


def test_frequencies_scale_with_omega1(sector3):
    p = SimParams(omega1=2.0, omega2=2.5, Omega1=1.998, Omega2=2.4975, g1=0.08, g2=0.1, lam=0.002)
    np.testing.assert_allclose(build_hamiltonian(p, sector3), build_hamiltonian(p.scaled(), sector3))


@given(params_strategy, st.integers(0, 4))
def test_hermitian(p, m):
    H = build_hamiltonian(p, build_sector_basis(m))
    assert np.abs(H - H.conj().T).max() <= 1e-12


@given(params_strategy)
def test_eigendecomposition_residuals(p):
    b = build_sector_basis(3)
    evo = ExactEvolution.prepare(p, basis_state(b, (0, 1, 2, 0)))
    V = evo.eigenvectors
    assert evo.reconstruction_residual(build_hamiltonian(p, b)) <= 1e-9
    assert np.abs(V.conj().T @ V - np.eye(b.dim)).max() <= 1e-9


def test_no_coupling_gives_global_phase(sector3):
    psi = basis_state(sector3, (1, 1, 1, 0))
    out = propagate_exact(SimParams(), psi, np.linspace(0, 10, 21))
    for s in out:
        np.testing.assert_allclose(np.abs(s.amp), np.abs(psi.amp), atol=1e-14)


def test_resonant_single_jc_rabi():
    # lambda = g2 = 0, Omega1 = omega1: <sz1> = cos(2 g' tau) with g' = 2 pi g1
    g1 = 0.04
    p = SimParams(omega2=1.25, Omega1=1.0, Omega2=1.0, g1=g1)
    b = build_sector_basis(1)
    psi = basis_state(b, (0, 1, 0, 0))
    taus = np.linspace(0, 30, 301)
    sz1 = expectations(exact_amplitudes(p, psi, taus), b, Observable.SZ1)
    np.testing.assert_allclose(sz1, np.cos(2 * 2 * math.pi * g1 * taus), atol=1e-11)


def test_fig1_m1_nearly_constant(fig_params, psi_ref, sector3):
    # cavity-cavity exchange is negligible at lambda = 1e-3
    m1 = expectations(exact_amplitudes(fig_params["fig1"], psi_ref, np.arange(0, 100.01, 0.05)),
                      sector3, Observable.M1)
    assert np.ptp(m1) < 1e-2


def test_matches_scipy_expm(fig_params, psi_ref, sector3):
    p = fig_params["fig3"]
    amps = exact_amplitudes(p, psi_ref, [7.3])
    np.testing.assert_allclose(amps[0], propagator(p, sector3, 7.3) @ psi_ref.amp, atol=1e-11)


@given(params_strategy)
def test_norm_energy_and_mtot_conservation(p):
    b = build_sector_basis(3)
    psi = basis_state(b, (0, 1, 2, 0))
    taus = np.linspace(0, 100, 51)
    amps = exact_amplitudes(p, psi, taus)
    H = build_hamiltonian(p, b)
    assert np.abs(np.linalg.norm(amps, axis=1) - 1).max() <= 1e-9
    energy = np.einsum("ti,ij,tj->t", amps.conj(), H, amps).real
    assert np.abs(energy - energy[0]).max() <= 1e-9
    assert np.abs(expectations(amps, b, Observable.MTOT) - 3).max() <= 1e-12


def test_rk_zero_hamiltonian_is_identity():
    # the vacuum with zero qubit splittings has H = 0
    vac = build_sector_basis(0)
    zero = SimParams(omega1=1.0, omega2=0.0, Omega1=0.0, Omega2=0.0)
    out = propagate_rk_check(zero, basis_state(vac, (0, 0, 0, 0)), [0.0, 0.5, 1.0])
    for s in out:
        np.testing.assert_allclose(s.amp, [1.0], atol=1e-15)


def test_rk_matches_exact_fig2_at_tau10(fig_params, psi_ref):
    p = fig_params["fig2"]
    rk = propagate_rk_check(p, psi_ref, [0.0, 10.0], step=1e-3)[-1].amp
    ex = exact_amplitudes(p, psi_ref, [10.0])[0]
    assert np.abs(rk - ex).max() <= 1e-6


def test_rk_fourth_order_convergence(fig_params, psi_ref):
    p = fig_params["fig2"]
    ex = exact_amplitudes(p, psi_ref, [10.0])[0]
    errs = [np.abs(propagate_rk_check(p, psi_ref, [10.0], step=h)[-1].amp - ex).max()
            for h in (4e-3, 2e-3)]
    assert 12 < errs[0] / errs[1] < 20


@pytest.mark.parametrize("m", [1, 2, 3])
def test_rk_agrees_over_long_window(m, rng):
    p = SimParams(omega2=1.17, Omega1=0.95, Omega2=1.2, g1=0.06, g2=0.09, lam=0.12)
    b = build_sector_basis(m)
    psi = random_state(b, rng)
    taus = np.linspace(0, 100, 11)
    rk = np.array([s.amp for s in propagate_rk_check(p, psi, taus)])
    assert np.abs(rk - exact_amplitudes(p, psi, taus)).max() <= 1e-6


def test_rk_step_larger_than_spacing_rejected(psi_ref, fig_params):
    with pytest.raises(ValidationError):
        propagate_rk_check(fig_params["fig1"], psi_ref, [0.0, 0.01, 0.02], step=0.05)


def test_rk_instability_detected(psi_ref, fig_params):
    from cavity_duet.errors import InstabilityError
    with pytest.raises(InstabilityError):
        propagate_rk_check(fig_params["fig1"], psi_ref, [0.0, 50.0], step=0.2)


def test_times_must_be_sorted(psi_ref, fig_params):
    with pytest.raises(ValidationError):
        propagate_exact(fig_params["fig1"], psi_ref, [1.0, 0.5])
