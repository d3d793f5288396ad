"""Pure-numpy integration kernels for the assembled closed loops.

These mirror the compiled kernels in mracsim._loop exactly (same state
layout, same evaluation order, same RK4 staging); the backend module
picks whichever is available. Keep the two in sync.

Kernel contract (shared with the compiled version):

    run_proposed(n, m, p_low, cp, rm_low, om_low, h_low, ce,
                 r_amp, r_freq, r_phase, r_offset, beta1, beta2, adapt,
                 x0, dt, n_steps, stride)
        -> (times (S,), states (S, D), aux (S, 9), status, steps_done)

    run_baseline(n, m, p_low, cp, rm_low, om_low,
                 r_amp, r_freq, r_phase, r_offset,
                 gamma_theta, gamma_chi, sign_kp, adapt,
                 x0, dt, n_steps, stride)
        -> (times, states, aux (S, 6), status, steps_done)

status: 0 completed, 1 aborted on non-finite state, 2 aborted on a
singularity-contract violation (tuning gain failed its guarantee).

The tuning gain sigma is recomputed once per step from (rho, lambda) at
the step start and frozen across the four RK4 stages, which is what
makes it piecewise constant. Upsilon is symmetrized after every step.
"""

import numpy as np

STATUS_OK = 0
STATUS_NONFINITE = 1
STATUS_SINGULAR = 2

PROPOSED_AUX = ("y", "y_star", "e", "u", "sigma", "ebar", "eta",
                "eps_bar", "m_norm")
BASELINE_AUX = ("y", "y_star", "e", "u", "eps", "mu")


def _tuning_gain(rho, lam):
    rho = float(rho)
    lam = float(lam)
    s = (rho > 0.0) - (rho < 0.0) + (lam > 0.0) - (lam < 0.0)
    if s >= 1 or (rho == 0.0 and lam == 0.0):
        return 1.0
    if s <= -1:
        return -1.0
    return 0.0


def _companion_deriv(v, low, u):
    dv = np.empty_like(v)
    dv[:-1] = v[1:]
    dv[-1] = -(low @ v) + u
    return dv


def run_proposed(n, m, p_low, cp, rm_low, om_low, h_low, ce,
                 r_amp, r_freq, r_phase, r_offset, beta1, beta2, adapt,
                 x0, dt, n_steps, stride):
    nstar = n - m
    q = n - 1
    wdim = 4 * n + 1
    tdim = 4 * n + 2

    o_xp = 0
    o_xr = o_xp + n
    o_xf1 = o_xr + nstar
    o_xf2 = o_xf1 + q
    o_xe = o_xf2 + q
    o_xz = o_xe + nstar
    o_xh = o_xz + wdim * nstar
    o_th = o_xh + nstar
    o_up = o_th + tdim
    dim = o_up + tdim * tdim

    def deriv(t, x, sigma):
        """Returns (dx, signals); signals match PROPOSED_AUX order."""
        xp = x[o_xp:o_xr]
        xr = x[o_xr:o_xf1]
        xf1 = x[o_xf1:o_xf2]
        xf2 = x[o_xf2:o_xe]
        xe = x[o_xe:o_xz]
        xz = x[o_xz:o_xh].reshape(wdim, nstar)
        xh = x[o_xh:o_th]
        th = x[o_th:o_up]
        U = x[o_up:].reshape(tdim, tdim)

        r = r_offset + float(np.sin(r_freq * t + r_phase) @ r_amp)
        y = float(cp @ xp)
        ystar = xr[0]
        e = y - ystar

        theta = th[: 2 * n]
        theta_p = th[2 * n : 4 * n]
        rho = th[4 * n]
        lam = th[4 * n + 1]

        phi = np.concatenate([xf1, xf2, [y, r]])
        denom_u = 1.0 + sigma * rho
        if abs(denom_u) < 1e-12:
            return None, None
        u = float(theta @ phi + sigma * (theta_p @ phi)) / denom_u

        omega = np.concatenate([phi, sigma * phi, [-sigma * u]])
        zeta = xz[:, 0].copy()
        ebar = float(ce @ xe) + e
        theta_bar = th[:wdim]
        eta = float(theta_bar @ zeta) - xh[0]
        denom_l = sigma + lam
        if abs(denom_l) < 1e-12:
            return None, None
        eps_bar = ebar + eta / denom_l

        Phi = np.concatenate([zeta, [ebar]]) / denom_l
        g = U @ Phi
        m2 = 1.0 + beta1 * float(Phi @ Phi) + beta2 * float(Phi @ g)

        dx = np.empty(dim)
        dx[o_xp:o_xr] = _companion_deriv(xp, p_low, u)
        dx[o_xr:o_xf1] = _companion_deriv(xr, rm_low, r)
        dx[o_xf1:o_xf2] = _companion_deriv(xf1, om_low, u)
        dx[o_xf2:o_xe] = _companion_deriv(xf2, om_low, y)
        dx[o_xe:o_xz] = _companion_deriv(xe, h_low, e)
        dxz = dx[o_xz:o_xh].reshape(wdim, nstar)
        if nstar > 1:
            dxz[:, :-1] = xz[:, 1:]
        dxz[:, -1] = -(xz @ h_low) + omega
        dx[o_xh:o_th] = _companion_deriv(xh, h_low, float(theta_bar @ omega))
        if adapt:
            dx[o_th:o_up] = -(eps_bar / m2) * g
            dx[o_up:] = (-np.outer(g, g) / m2).ravel()
        else:
            dx[o_th:] = 0.0

        sig = (y, ystar, e, u, sigma, ebar, eta, eps_bar, np.sqrt(m2))
        return dx, sig

    n_samples = n_steps // stride + 1
    times = np.zeros(n_samples)
    states = np.zeros((n_samples, dim))
    aux = np.zeros((n_samples, len(PROPOSED_AUX)))

    x = x0.copy()
    status = STATUS_OK
    k = 0
    step = 0
    while step <= n_steps:
        th = x[o_th:o_up]
        sigma = _tuning_gain(th[4 * n], th[4 * n + 1])
        t = step * dt
        k1, sig = deriv(t, x, sigma)
        if k1 is None:
            status = STATUS_SINGULAR
            break
        if step % stride == 0:
            times[k] = t
            states[k] = x
            aux[k] = sig
            k += 1
        if step == n_steps:
            break
        k2, _ = deriv(t + 0.5 * dt, x + (0.5 * dt) * k1, sigma)
        if k2 is None:
            status = STATUS_SINGULAR
            break
        k3, _ = deriv(t + 0.5 * dt, x + (0.5 * dt) * k2, sigma)
        if k3 is None:
            status = STATUS_SINGULAR
            break
        k4, _ = deriv(t + dt, x + dt * k3, sigma)
        if k4 is None:
            status = STATUS_SINGULAR
            break
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        U = x[o_up:].reshape(tdim, tdim)
        U[:] = 0.5 * (U + U.T)
        if not np.all(np.isfinite(x)):
            status = STATUS_NONFINITE
            break
        step += 1

    return times[:k], states[:k], aux[:k], status, step


def run_baseline(n, m, p_low, cp, rm_low, om_low,
                 r_amp, r_freq, r_phase, r_offset,
                 gamma_theta, gamma_chi, sign_kp, adapt,
                 x0, dt, n_steps, stride):
    nstar = n - m
    q = n - 1

    o_xp = 0
    o_xr = o_xp + n
    o_xf1 = o_xr + nstar
    o_xf2 = o_xf1 + q
    o_xv = o_xf2 + q
    o_xmu = o_xv + 2 * n * nstar
    o_th = o_xmu + nstar
    o_chi = o_th + 2 * n
    dim = o_chi + 1

    def deriv(t, x):
        xp = x[o_xp:o_xr]
        xr = x[o_xr:o_xf1]
        xf1 = x[o_xf1:o_xf2]
        xf2 = x[o_xf2:o_xv]
        xv = x[o_xv:o_xmu].reshape(2 * n, nstar)
        xmu = x[o_xmu:o_th]
        theta = x[o_th:o_chi]
        chi = x[o_chi]

        r = r_offset + float(np.sin(r_freq * t + r_phase) @ r_amp)
        y = float(cp @ xp)
        ystar = xr[0]
        e = y - ystar

        phi = np.concatenate([xf1, xf2, [y, r]])
        u = float(theta @ phi)
        varphi = xv[:, 0].copy()
        mu = float(theta @ varphi) - xmu[0]
        eps = e + chi * mu

        dx = np.empty(dim)
        dx[o_xp:o_xr] = _companion_deriv(xp, p_low, u)
        dx[o_xr:o_xf1] = _companion_deriv(xr, rm_low, r)
        dx[o_xf1:o_xf2] = _companion_deriv(xf1, om_low, u)
        dx[o_xf2:o_xv] = _companion_deriv(xf2, om_low, y)
        dxv = dx[o_xv:o_xmu].reshape(2 * n, nstar)
        if nstar > 1:
            dxv[:, :-1] = xv[:, 1:]
        dxv[:, -1] = -(xv @ rm_low) + phi
        dx[o_xmu:o_th] = _companion_deriv(xmu, rm_low, float(theta @ phi))
        if adapt:
            dx[o_th:o_chi] = -sign_kp * gamma_theta * eps * varphi
            dx[o_chi] = -gamma_chi * eps * mu
        else:
            dx[o_th:] = 0.0

        sig = (y, ystar, e, u, eps, mu)
        return dx, sig

    n_samples = n_steps // stride + 1
    times = np.zeros(n_samples)
    states = np.zeros((n_samples, dim))
    aux = np.zeros((n_samples, len(BASELINE_AUX)))

    x = x0.copy()
    status = STATUS_OK
    k = 0
    step = 0
    while step <= n_steps:
        t = step * dt
        k1, sig = deriv(t, x)
        if step % stride == 0:
            times[k] = t
            states[k] = x
            aux[k] = sig
            k += 1
        if step == n_steps:
            break
        k2, _ = deriv(t + 0.5 * dt, x + (0.5 * dt) * k1)
        k3, _ = deriv(t + 0.5 * dt, x + (0.5 * dt) * k2)
        k4, _ = deriv(t + dt, x + dt * k3)
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(x)):
            status = STATUS_NONFINITE
            break
        step += 1

    return times[:k], states[:k], aux[:k], status, step
