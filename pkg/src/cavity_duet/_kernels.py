"""Compiled right-hand sides and an adaptive DOP853 driver for the coefficient ODEs.

State layout: ``y = [g1, g2, g3]`` for the hopping factor alone, or
``y = [g1, g2, g3, bz, bp, bm]`` when one JC ladder is carried along.
Rates are in radians per unit of dimensionless time.
"""
import numpy as np
from numba import njit
from scipy.integrate._ivp import dop853_coefficients as _dop

N_STAGES = _dop.N_STAGES
TABLEAU_A = np.ascontiguousarray(_dop.A[:N_STAGES, :N_STAGES])
TABLEAU_B = np.ascontiguousarray(_dop.B)
TABLEAU_C = np.ascontiguousarray(_dop.C[:N_STAGES])
TABLEAU_E3 = np.ascontiguousarray(_dop.E3)
TABLEAU_E5 = np.ascontiguousarray(_dop.E5)

STATUS_OK = 0
STATUS_GAMMA_POLE = 1
STATUS_BETA_OVERFLOW = 2
STATUS_STEP_UNDERFLOW = 3
STATUS_MAX_STEPS = 4

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0
_ERR_EXPONENT = -1.0 / 8.0


@njit(cache=True, nogil=True)
def gamma_rates(t, g1, g2, g3, lam, dw):
    """Hopping-factor coefficients; ``lam`` = 2 pi lambda, ``dw`` = 2 pi (w1 - w2)."""
    e = np.exp(1j * dw * t)
    d1 = -1j * lam * (np.conj(e) - g1 * g1 * e)
    d2 = -1j * lam * (1.0 + 2.0 * g1 * g2) * e
    d3 = -1j * lam * g1 * e
    return d1, d2, d3


@njit(cache=True, nogil=True)
def phi_values(t, g1, g2, g3, d1, d2):
    """(phi11, phi12, phi21, phi22); ``d_i`` = 2 pi (Omega_i - w_i)."""
    lower = (1.0 + g1 * g2) * np.exp(-g3)
    upper = np.exp(g3)
    return (lower * np.exp(-1j * d1 * t), upper * np.exp(1j * d1 * t),
            upper * np.exp(-1j * d2 * t), lower * np.exp(1j * d2 * t))


@njit(cache=True, nogil=True)
def beta_rates(bz, bp, bm, kappa, f_raise, f_lower):
    dbm = -1j * kappa * f_lower * np.exp(-2.0 * bz)
    dbz = bp * dbm
    dbp = -1j * kappa * f_raise * np.exp(2.0 * bz) + bp * bp * dbm
    return dbz, dbp, dbm


@njit(cache=True, nogil=True)
def joint_rhs(t, y, lam, dw, kappa, detun, cavity, out):
    d1, d2, d3 = gamma_rates(t, y[0], y[1], y[2], lam, dw)
    out[0] = d1
    out[1] = d2
    out[2] = d3
    if y.shape[0] == 6:
        lower = (1.0 + y[0] * y[1]) * np.exp(-y[2])
        upper = np.exp(y[2])
        if cavity == 1:
            f_raise = lower * np.exp(-1j * detun * t)
            f_lower = upper * np.exp(1j * detun * t)
        else:
            f_raise = upper * np.exp(-1j * detun * t)
            f_lower = lower * np.exp(1j * detun * t)
        dbz, dbp, dbm = beta_rates(y[3], y[4], y[5], kappa, f_raise, f_lower)
        out[3] = dbz
        out[4] = dbp
        out[5] = dbm


@njit(cache=True, nogil=True)
def _rms(v):
    s = 0.0
    for x in v:
        s += x * x
    return np.sqrt(s / v.shape[0])


@njit(cache=True, nogil=True)
def _all_finite(y):
    for v in y:
        if not (np.isfinite(v.real) and np.isfinite(v.imag)):
            return False
    return True


@njit(cache=True, nogil=True)
def solve_on_grid(y0, grid, rtol, atol, lam, dw, kappa, detun, cavity,
                  A, B, C, E3, E5, gamma_cap, beta_cap, max_steps):
    """Integrate from grid[0] through every grid point, landing on each exactly.

    Returns (samples, status, t_last_good, n_steps).  Rows of ``samples``
    after a failure are left as NaN and must not be used.
    """
    n = y0.shape[0]
    T = grid.shape[0]
    out = np.full((T, n), np.nan + 0j)
    y = y0.copy()
    t = grid[0]
    out[0] = y
    f = np.empty(n, dtype=np.complex128)
    joint_rhs(t, y, lam, dw, kappa, detun, cavity, f)
    K = np.zeros((N_STAGES + 1, n), dtype=np.complex128)
    tmp = np.empty(n, dtype=np.complex128)
    y_new = np.empty(n, dtype=np.complex128)
    f_new = np.empty(n, dtype=np.complex128)
    scale = np.empty(n)
    err = np.empty(n)

    # Hairer's starting-step heuristic.
    for i in range(n):
        scale[i] = atol + abs(y[i]) * rtol
    for i in range(n):
        err[i] = abs(y[i]) / scale[i]
    d0 = _rms(err)
    for i in range(n):
        err[i] = abs(f[i]) / scale[i]
    d1 = _rms(err)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    for i in range(n):
        tmp[i] = y[i] + h0 * f[i]
    joint_rhs(t + h0, tmp, lam, dw, kappa, detun, cavity, f_new)
    for i in range(n):
        err[i] = abs(f_new[i] - f[i]) / scale[i]
    d2 = _rms(err) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / 8.0)
    h_abs = min(100.0 * h0, h1)

    steps = 0
    for k in range(1, T):
        target = grid[k]
        while t < target:
            min_step = 10.0 * abs(np.nextafter(t, np.inf) - t)
            rejected = False
            while True:
                if h_abs < min_step:
                    return out, STATUS_STEP_UNDERFLOW, t, steps
                clipped = False
                h = h_abs
                if t + h >= target:
                    h = target - t
                    clipped = True
                # one DOP853 step
                for i in range(n):
                    K[0, i] = f[i]
                for s in range(1, N_STAGES):
                    for i in range(n):
                        acc = 0j
                        for j in range(s):
                            acc += A[s, j] * K[j, i]
                        tmp[i] = y[i] + h * acc
                    joint_rhs(t + C[s] * h, tmp, lam, dw, kappa, detun, cavity, K[s])
                for i in range(n):
                    acc = 0j
                    for j in range(N_STAGES):
                        acc += B[j] * K[j, i]
                    y_new[i] = y[i] + h * acc
                t_new = target if clipped else t + h
                joint_rhs(t_new, y_new, lam, dw, kappa, detun, cavity, f_new)
                for i in range(n):
                    K[N_STAGES, i] = f_new[i]
                # error norm as in scipy's DOP853
                e5 = 0.0
                e3 = 0.0
                for i in range(n):
                    sc = atol + max(abs(y[i]), abs(y_new[i])) * rtol
                    a5 = 0j
                    a3 = 0j
                    for j in range(N_STAGES + 1):
                        a5 += E5[j] * K[j, i]
                        a3 += E3[j] * K[j, i]
                    e5 += (abs(a5) / sc) ** 2
                    e3 += (abs(a3) / sc) ** 2
                if e5 == 0.0 and e3 == 0.0:
                    err_norm = 0.0
                else:
                    err_norm = h * e5 / np.sqrt((e5 + 0.01 * e3) * n)
                steps += 1
                if steps > max_steps:
                    return out, STATUS_MAX_STEPS, t, steps
                if err_norm < 1.0:
                    if err_norm == 0.0:
                        factor = _MAX_FACTOR
                    else:
                        factor = min(_MAX_FACTOR, _SAFETY * err_norm ** _ERR_EXPONENT)
                    if rejected:
                        factor = min(1.0, factor)
                    proposal = h * factor
                    if clipped:
                        # a step shortened to hit the grid says nothing against the old size
                        proposal = max(proposal, h_abs)
                    h_abs = proposal
                    break
                if np.isfinite(err_norm):
                    h_abs = h * max(_MIN_FACTOR, _SAFETY * err_norm ** _ERR_EXPONENT)
                else:
                    h_abs = h * _MIN_FACTOR
                rejected = True

            if not _all_finite(y_new):
                return out, STATUS_STEP_UNDERFLOW, t, steps
            if abs(y_new[0]) > gamma_cap:
                return out, STATUS_GAMMA_POLE, t, steps
            if n == 6 and abs(y_new[3]) > beta_cap:
                return out, STATUS_BETA_OVERFLOW, t, steps
            t = t_new
            for i in range(n):
                y[i] = y_new[i]
                f[i] = f_new[i]
        out[k] = y
    return out, STATUS_OK, t, steps
