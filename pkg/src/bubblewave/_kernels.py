"""Compiled inner loops for the bubble integrators.

The adaptive RK4 loop advances in steps of ~1e-10 s and routinely runs for
millions of iterations, so it is compiled with numba when available. Setting
``BUBBLEWAVE_NUMBA=0`` (or numba being unimportable) selects the identical
pure-Python implementation; ``python_impl`` exposes it either way so the two
paths can be benchmarked against each other.

Kernels are self-contained scalar loops: no calls into the rest of the
package, no numpy vectorization, identical IEEE arithmetic on both paths
(``fastmath`` stays off so results are bitwise reproducible).

Termination codes: 0 completed, 1 radius floor reached, 2 step budget
exhausted, 3 non-finite state produced.
Drive modes: 0 quiet, 1 sinusoid, 2 uniformly sampled table with linear
interpolation (mode 2 truncates steps at table sample times).
"""

from __future__ import annotations

import math
import os

import numpy as np

TERM_COMPLETED = 0
TERM_RADIUS_FLOOR = 1
TERM_STEP_FLOOR = 2
TERM_NONFINITE = 3

DRIVE_QUIET = 0
DRIVE_SINE = 1
DRIVE_TABLE = 2


def _select_numba() -> bool:
    flag = os.environ.get("BUBBLEWAVE_NUMBA", "").strip().lower()
    if flag in ("0", "false", "no", "off"):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


NUMBA_ENABLED = _select_numba()

if NUMBA_ENABLED:
    import numba

    def _compiled(fn):
        return numba.njit(cache=True, fastmath=False)(fn)
else:
    def _compiled(fn):
        return fn


def python_impl(fn):
    """The uncompiled implementation behind a kernel (the fn itself if the
    fallback path is active)."""
    return getattr(fn, "py_func", fn)


def backend_name() -> str:
    return "numba" if NUMBA_ENABLED else "numpy"


def _integrate_radial_impl(kind, rho, mu, sigma, chi, kappa, kappa_s, c,
                           p_b, p_pgn, R0,
                           r_init, v_init, t0, t_end,
                           lam, dt_min, dt_max, r_floor,
                           drive_mode, amp, freq, tab_t0, tab_dt, tab,
                           max_steps, stride):
    cap = 64
    times = np.empty(cap, dtype=np.float64)
    radii = np.empty(cap, dtype=np.float64)
    vels = np.empty(cap, dtype=np.float64)

    two_pi_f = 2.0 * math.pi * freq
    ntab = tab.shape[0]

    t = t0
    R = r_init
    Rt = v_init
    times[0] = t
    radii[0] = R
    vels[0] = Rt
    n_stored = 1
    n_steps = 0
    term = TERM_COMPLETED
    min_R = R
    max_R = R
    dt_lo = math.inf
    dt_hi = 0.0

    while t < t_end:
        dt = R ** lam
        if dt < dt_min:
            dt = dt_min
        elif dt > dt_max:
            dt = dt_max
        if dt < dt_lo:
            dt_lo = dt
        if dt > dt_hi:
            dt_hi = dt

        # Land exactly on table sample times and on t_end.
        t_stop = t_end
        if drive_mode == DRIVE_TABLE:
            s = (t - tab_t0) / tab_dt
            i = math.floor(s)
            if s - i > 1.0 - 1e-9:
                i += 1.0
            t_knot = tab_t0 + (i + 1.0) * tab_dt
            if t_knot < t_stop:
                t_stop = t_knot
        truncated = t + dt >= t_stop
        if truncated:
            dt = t_stop - t
            if dt <= 0.0:
                t = t_stop
                continue

        # RK4 stages; drive evaluated at t, t + dt/2, t + dt.
        bad_stage = False
        V1 = Rt
        A1 = 0.0
        V2 = 0.0
        A2 = 0.0
        V3 = 0.0
        A3 = 0.0
        V4 = 0.0
        A4 = 0.0
        for stage in range(4):
            if stage == 0:
                ts = t
                Rs = R
                Vs = V1
            elif stage == 1:
                ts = t + 0.5 * dt
                Rs = R + 0.5 * dt * V1
                Vs = Rt + 0.5 * dt * A1
            elif stage == 2:
                ts = t + 0.5 * dt
                Rs = R + 0.5 * dt * V2
                Vs = Rt + 0.5 * dt * A2
            else:
                ts = t + dt
                Rs = R + dt * V3
                Vs = Rt + dt * A3
            if Rs <= 0.0:
                bad_stage = True
                break

            if drive_mode == DRIVE_SINE:
                p = amp * math.sin(two_pi_f * ts)
            elif drive_mode == DRIVE_TABLE:
                s = (ts - tab_t0) / tab_dt
                j = int(math.floor(s))
                if j < 0:
                    j = 0
                elif j > ntab - 2:
                    j = ntab - 2
                w = s - j
                p = tab[j] + w * (tab[j + 1] - tab[j])
            else:
                p = 0.0

            h = p_b - 4.0 * mu * Vs / Rs
            if kind >= 1:
                if kind == 4:
                    sig = chi * (Rs * Rs / (R0 * R0) - 1.0)
                else:
                    sig = sigma
                h = h - 2.0 * sig / Rs
            if kind >= 2:
                gas = p_pgn * (R0 / Rs) ** (3.0 * kappa)
                if kind >= 3:
                    gas = gas * (1.0 - 3.0 * kappa * Vs / c)
                h = h + gas
                if kind == 4:
                    h = h - 4.0 * kappa_s * Vs / (Rs * Rs)
            a = (-1.5 * Vs * Vs + (h - p) / rho) / Rs

            if stage == 0:
                A1 = a
            elif stage == 1:
                V2 = Vs
                A2 = a
            elif stage == 2:
                V3 = Vs
                A3 = a
            else:
                V4 = Vs
                A4 = a
        if bad_stage:
            term = TERM_RADIUS_FLOOR
            break

        R_new = R + dt / 6.0 * (V1 + 2.0 * V2 + 2.0 * V3 + V4)
        Rt_new = Rt + dt / 6.0 * (A1 + 2.0 * A2 + 2.0 * A3 + A4)

        if not (math.isfinite(R_new) and math.isfinite(Rt_new)):
            term = TERM_NONFINITE
            break
        if R_new <= r_floor:
            term = TERM_RADIUS_FLOOR
            break

        R = R_new
        Rt = Rt_new
        t = t_stop if truncated else t + dt
        n_steps += 1
        if R < min_R:
            min_R = R
        if R > max_R:
            max_R = R

        if n_steps % stride == 0 or t >= t_end:
            if n_stored == cap:
                cap2 = cap * 2
                nt = np.empty(cap2, dtype=np.float64)
                nr = np.empty(cap2, dtype=np.float64)
                nv = np.empty(cap2, dtype=np.float64)
                nt[:cap] = times
                nr[:cap] = radii
                nv[:cap] = vels
                times = nt
                radii = nr
                vels = nv
                cap = cap2
            times[n_stored] = t
            radii[n_stored] = R
            vels[n_stored] = Rt
            n_stored += 1

        if n_steps >= max_steps and t < t_end:
            term = TERM_STEP_FLOOR
            break

    if times[n_stored - 1] != t and n_steps > 0:
        if n_stored == cap:
            cap2 = cap + 1
            nt = np.empty(cap2, dtype=np.float64)
            nr = np.empty(cap2, dtype=np.float64)
            nv = np.empty(cap2, dtype=np.float64)
            nt[:cap] = times
            nr[:cap] = radii
            nv[:cap] = vels
            times = nt
            radii = nr
            vels = nv
        times[n_stored] = t
        radii[n_stored] = R
        vels[n_stored] = Rt
        n_stored += 1

    return (times, radii, vels, n_stored, n_steps, term,
            min_R, max_R, dt_lo, dt_hi)


def _integrate_volume_impl(damp, omega0_sq, drive_coeff, v0_rest, nonlinear,
                           kappa, R0,
                           v_init, vt_init, a_init, t0, t_end,
                           lam, dt_min, dt_max, r_floor,
                           drive_mode, amp, freq, tab_t0, tab_dt, tab,
                           max_steps, stride):
    """Volume-perturbation oscillator; state (v, v_t), quadratic terms taken
    explicitly with the acceleration of the previous step."""
    cap = 64
    times = np.empty(cap, dtype=np.float64)
    vols = np.empty(cap, dtype=np.float64)
    vrates = np.empty(cap, dtype=np.float64)

    two_pi_f = 2.0 * math.pi * freq
    ntab = tab.shape[0]
    three_over_4pi = 3.0 / (4.0 * math.pi)
    third = 1.0 / 3.0
    nl_q = (kappa + 1.0) * omega0_sq / (2.0 * v0_rest)

    t = t0
    v = v_init
    vt = vt_init
    a_prev = a_init
    times[0] = t
    vols[0] = v
    vrates[0] = vt
    n_stored = 1
    n_steps = 0
    term = TERM_COMPLETED

    R = (three_over_4pi * (v0_rest + v)) ** third
    min_R = R
    max_R = R
    dt_lo = math.inf
    dt_hi = 0.0

    while t < t_end:
        total = v0_rest + v
        if total <= 0.0:
            term = TERM_RADIUS_FLOOR
            break
        R = (three_over_4pi * total) ** third
        dt = R ** lam
        if dt < dt_min:
            dt = dt_min
        elif dt > dt_max:
            dt = dt_max
        if dt < dt_lo:
            dt_lo = dt
        if dt > dt_hi:
            dt_hi = dt

        t_stop = t_end
        if drive_mode == DRIVE_TABLE:
            s = (t - tab_t0) / tab_dt
            i = math.floor(s)
            if s - i > 1.0 - 1e-9:
                i += 1.0
            t_knot = tab_t0 + (i + 1.0) * tab_dt
            if t_knot < t_stop:
                t_stop = t_knot
        truncated = t + dt >= t_stop
        if truncated:
            dt = t_stop - t
            if dt <= 0.0:
                t = t_stop
                continue

        K1 = vt
        A1 = 0.0
        K2 = 0.0
        A2 = 0.0
        K3 = 0.0
        A3 = 0.0
        K4 = 0.0
        A4 = 0.0
        for stage in range(4):
            if stage == 0:
                ts = t
                vs = v
                vts = K1
            elif stage == 1:
                ts = t + 0.5 * dt
                vs = v + 0.5 * dt * K1
                vts = vt + 0.5 * dt * A1
            elif stage == 2:
                ts = t + 0.5 * dt
                vs = v + 0.5 * dt * K2
                vts = vt + 0.5 * dt * A2
            else:
                ts = t + dt
                vs = v + dt * K3
                vts = vt + dt * A3

            if drive_mode == DRIVE_SINE:
                p = amp * math.sin(two_pi_f * ts)
            elif drive_mode == DRIVE_TABLE:
                s = (ts - tab_t0) / tab_dt
                j = int(math.floor(s))
                if j < 0:
                    j = 0
                elif j > ntab - 2:
                    j = ntab - 2
                w = s - j
                p = tab[j] + w * (tab[j + 1] - tab[j])
            else:
                p = 0.0

            a = -damp * vts - omega0_sq * vs - drive_coeff * p
            if nonlinear:
                a = a + nl_q * vs * vs \
                    + (2.0 * vs * a_prev + vts * vts) / (6.0 * v0_rest)

            if stage == 0:
                A1 = a
            elif stage == 1:
                K2 = vts
                A2 = a
            elif stage == 2:
                K3 = vts
                A3 = a
            else:
                K4 = vts
                A4 = a

        v_new = v + dt / 6.0 * (K1 + 2.0 * K2 + 2.0 * K3 + K4)
        vt_new = vt + dt / 6.0 * (A1 + 2.0 * A2 + 2.0 * A3 + A4)

        if not (math.isfinite(v_new) and math.isfinite(vt_new)):
            term = TERM_NONFINITE
            break
        total_new = v0_rest + v_new
        if total_new <= 0.0:
            term = TERM_RADIUS_FLOOR
            break
        R_new = (three_over_4pi * total_new) ** third
        if R_new <= r_floor:
            term = TERM_RADIUS_FLOOR
            break

        a_prev = A4
        v = v_new
        vt = vt_new
        t = t_stop if truncated else t + dt
        n_steps += 1
        if R_new < min_R:
            min_R = R_new
        if R_new > max_R:
            max_R = R_new

        if n_steps % stride == 0 or t >= t_end:
            if n_stored == cap:
                cap2 = cap * 2
                nt = np.empty(cap2, dtype=np.float64)
                nv = np.empty(cap2, dtype=np.float64)
                nr = np.empty(cap2, dtype=np.float64)
                nt[:cap] = times
                nv[:cap] = vols
                nr[:cap] = vrates
                times = nt
                vols = nv
                vrates = nr
                cap = cap2
            times[n_stored] = t
            vols[n_stored] = v
            vrates[n_stored] = vt
            n_stored += 1

        if n_steps >= max_steps and t < t_end:
            term = TERM_STEP_FLOOR
            break

    if times[n_stored - 1] != t and n_steps > 0:
        if n_stored == cap:
            cap2 = cap + 1
            nt = np.empty(cap2, dtype=np.float64)
            nv = np.empty(cap2, dtype=np.float64)
            nr = np.empty(cap2, dtype=np.float64)
            nt[:cap] = times
            nv[:cap] = vols
            nr[:cap] = vrates
            times = nt
            vols = nv
            vrates = nr
        times[n_stored] = t
        vols[n_stored] = v
        vrates[n_stored] = vt
        n_stored += 1

    return (times, vols, vrates, n_stored, n_steps, term,
            min_R, max_R, dt_lo, dt_hi, a_prev)


integrate_radial = _compiled(_integrate_radial_impl)
integrate_volume = _compiled(_integrate_volume_impl)

_EMPTY_TABLE = np.zeros(2, dtype=np.float64)


def warmup() -> None:
    """Trigger kernel compilation with tiny runs (no-op on the fallback)."""
    integrate_radial(2, 1000.0, 8.9e-3, 72.8e-3, 2.0, 1.4, 2e-6, 1500.0,
                     -97670.0, 170470.0, 2e-6,
                     2e-6, 0.0, 0.0, 1e-9,
                     1.75, 1e-13, 1e-8, 1e-9,
                     DRIVE_SINE, 0.0, 1e6, 0.0, 1.0, _EMPTY_TABLE,
                     1000, 1)
    integrate_radial(2, 1000.0, 8.9e-3, 72.8e-3, 2.0, 1.4, 2e-6, 1500.0,
                     -97670.0, 170470.0, 2e-6,
                     2e-6, 0.0, 0.0, 1e-9,
                     1.75, 1e-13, 1e-8, 1e-9,
                     DRIVE_TABLE, 0.0, 1e6, 0.0, 1e-9, _EMPTY_TABLE,
                     1000, 1)
    integrate_volume(1.0, 1.0, 1.0, 3.35e-17, False, 1.4, 2e-6,
                     0.0, 0.0, 0.0, 0.0, 1e-9,
                     1.75, 1e-13, 1e-8, 1e-9,
                     DRIVE_SINE, 0.0, 1e6, 0.0, 1.0, _EMPTY_TABLE,
                     1000, 1)
