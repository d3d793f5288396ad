# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled integration kernels for the assembled closed loops.

Must stay semantically identical to mracsim._loop_py (same state layout,
same evaluation order, same RK4 staging); tests compare the two on short
trajectories.
"""

import numpy as np

from libc.math cimport isfinite, sin, sqrt

STATUS_OK = 0
STATUS_NONFINITE = 1
STATUS_SINGULAR = 2


cdef inline double _tuning_gain(double rho, double lam) noexcept:
    cdef int s = 0
    if rho > 0.0:
        s += 1
    elif rho < 0.0:
        s -= 1
    if lam > 0.0:
        s += 1
    elif lam < 0.0:
        s -= 1
    if s >= 1 or (rho == 0.0 and lam == 0.0):
        return 1.0
    if s <= -1:
        return -1.0
    return 0.0


cdef inline double _ref_signal(double t, double[:] amp, double[:] freq,
                               double[:] phase, double offset) noexcept:
    cdef double r = offset
    cdef Py_ssize_t i
    for i in range(amp.shape[0]):
        r += amp[i] * sin(freq[i] * t + phase[i])
    return r


cdef int _deriv_proposed(
        double t, double[:] x, double sigma, double[:] dx, double[:] sig,
        int n, int m,
        double[:] p_low, double[:] cp, double[:] rm_low, double[:] om_low,
        double[:] h_low, double[:] ce,
        double[:] r_amp, double[:] r_freq, double[:] r_phase, double r_offset,
        double beta1, double beta2, int adapt,
        double[:] phi, double[:] omega, double[:] zeta, double[:] Phi,
        double[:] g) noexcept:
    """Evaluates the closed-loop derivative; returns 0 or -1 (singular).

    sig receives (y, y*, e, u, sigma, ebar, eta, eps_bar, m_norm).
    """
    cdef int nstar = n - m
    cdef int q = n - 1
    cdef int wdim = 4 * n + 1
    cdef int tdim = 4 * n + 2
    cdef int o_xp = 0
    cdef int o_xr = o_xp + n
    cdef int o_xf1 = o_xr + nstar
    cdef int o_xf2 = o_xf1 + q
    cdef int o_xe = o_xf2 + q
    cdef int o_xz = o_xe + nstar
    cdef int o_xh = o_xz + wdim * nstar
    cdef int o_th = o_xh + nstar
    cdef int o_up = o_th + tdim

    cdef Py_ssize_t i, j
    cdef double acc

    cdef double r = _ref_signal(t, r_amp, r_freq, r_phase, r_offset)
    cdef double y = 0.0
    for i in range(n):
        y += cp[i] * x[o_xp + i]
    cdef double ystar = x[o_xr]
    cdef double e = y - ystar

    cdef double rho = x[o_th + 4 * n]
    cdef double lam = x[o_th + 4 * n + 1]

    for i in range(q):
        phi[i] = x[o_xf1 + i]
        phi[q + i] = x[o_xf2 + i]
    phi[2 * q] = y
    phi[2 * q + 1] = r

    cdef double denom_u = 1.0 + sigma * rho
    if denom_u < 1e-12 and denom_u > -1e-12:
        return -1
    cdef double num_u = 0.0
    for i in range(2 * n):
        num_u += (x[o_th + i] + sigma * x[o_th + 2 * n + i]) * phi[i]
    cdef double u = num_u / denom_u

    for i in range(2 * n):
        omega[i] = phi[i]
        omega[2 * n + i] = sigma * phi[i]
    omega[4 * n] = -sigma * u

    for j in range(wdim):
        zeta[j] = x[o_xz + j * nstar]
    cdef double ebar = e
    for i in range(nstar):
        ebar += ce[i] * x[o_xe + i]
    cdef double eta = -x[o_xh]
    cdef double tbar_omega = 0.0
    for i in range(wdim):
        eta += x[o_th + i] * zeta[i]
        tbar_omega += x[o_th + i] * omega[i]

    cdef double denom_l = sigma + lam
    if denom_l < 1e-12 and denom_l > -1e-12:
        return -1
    cdef double eps_bar = ebar + eta / denom_l

    for i in range(wdim):
        Phi[i] = zeta[i] / denom_l
    Phi[wdim] = ebar / denom_l

    cdef double phi2 = 0.0
    cdef double phig = 0.0
    for i in range(tdim):
        acc = 0.0
        for j in range(tdim):
            acc += x[o_up + i * tdim + j] * Phi[j]
        g[i] = acc
        phi2 += Phi[i] * Phi[i]
        phig += Phi[i] * acc
    cdef double m2 = 1.0 + beta1 * phi2 + beta2 * phig

    # companion blocks
    for i in range(n - 1):
        dx[o_xp + i] = x[o_xp + i + 1]
    acc = u
    for i in range(n):
        acc -= p_low[i] * x[o_xp + i]
    dx[o_xp + n - 1] = acc

    for i in range(nstar - 1):
        dx[o_xr + i] = x[o_xr + i + 1]
    acc = r
    for i in range(nstar):
        acc -= rm_low[i] * x[o_xr + i]
    dx[o_xr + nstar - 1] = acc

    for i in range(q - 1):
        dx[o_xf1 + i] = x[o_xf1 + i + 1]
        dx[o_xf2 + i] = x[o_xf2 + i + 1]
    acc = u
    for i in range(q):
        acc -= om_low[i] * x[o_xf1 + i]
    dx[o_xf1 + q - 1] = acc
    acc = y
    for i in range(q):
        acc -= om_low[i] * x[o_xf2 + i]
    dx[o_xf2 + q - 1] = acc

    for i in range(nstar - 1):
        dx[o_xe + i] = x[o_xe + i + 1]
    acc = e
    for i in range(nstar):
        acc -= h_low[i] * x[o_xe + i]
    dx[o_xe + nstar - 1] = acc

    cdef Py_ssize_t base
    for j in range(wdim):
        base = o_xz + j * nstar
        for i in range(nstar - 1):
            dx[base + i] = x[base + i + 1]
        acc = omega[j]
        for i in range(nstar):
            acc -= h_low[i] * x[base + i]
        dx[base + nstar - 1] = acc

    for i in range(nstar - 1):
        dx[o_xh + i] = x[o_xh + i + 1]
    acc = tbar_omega
    for i in range(nstar):
        acc -= h_low[i] * x[o_xh + i]
    dx[o_xh + nstar - 1] = acc

    if adapt:
        for i in range(tdim):
            dx[o_th + i] = -(eps_bar / m2) * g[i]
            for j in range(tdim):
                dx[o_up + i * tdim + j] = -g[i] * g[j] / m2
    else:
        for i in range(tdim):
            dx[o_th + i] = 0.0
            for j in range(tdim):
                dx[o_up + i * tdim + j] = 0.0

    sig[0] = y
    sig[1] = ystar
    sig[2] = e
    sig[3] = u
    sig[4] = sigma
    sig[5] = ebar
    sig[6] = eta
    sig[7] = eps_bar
    sig[8] = sqrt(m2)
    return 0


def run_proposed(int n, int m,
                 double[:] p_low, double[:] cp, double[:] rm_low,
                 double[:] om_low, double[:] h_low, double[:] ce,
                 double[:] r_amp, double[:] r_freq, double[:] r_phase,
                 double r_offset, double beta1, double beta2, int adapt,
                 x0, double dt, long n_steps, long stride):
    cdef int nstar = n - m
    cdef int q = n - 1
    cdef int wdim = 4 * n + 1
    cdef int tdim = 4 * n + 2
    cdef int o_th = n + nstar + 2 * q + nstar + wdim * nstar + nstar
    cdef int o_up = o_th + tdim
    cdef int dim = o_up + tdim * tdim

    x_arr = np.array(x0, dtype=np.float64, copy=True)
    if x_arr.shape[0] != dim:
        raise ValueError(f"state must have length {dim}")
    cdef double[:] x = x_arr

    cdef long n_samples = n_steps // stride + 1
    times_arr = np.zeros(n_samples)
    states_arr = np.zeros((n_samples, dim))
    aux_arr = np.zeros((n_samples, 9))
    cdef double[:] times = times_arr
    cdef double[:, :] states = states_arr
    cdef double[:, :] aux = aux_arr

    work = np.zeros((5, dim))
    cdef double[:] k1 = work[0]
    cdef double[:] k2 = work[1]
    cdef double[:] k3 = work[2]
    cdef double[:] k4 = work[3]
    cdef double[:] xt = work[4]
    scratch = np.zeros((5, max(2 * n, wdim + 1)))
    cdef double[:] phi = scratch[0]
    cdef double[:] omega = scratch[1]
    cdef double[:] zeta = scratch[2]
    cdef double[:] Phi = scratch[3]
    cdef double[:] g = scratch[4]
    sig_arr = np.zeros(9)
    cdef double[:] sig = sig_arr
    cdef double[:] sig_scratch = np.zeros(9)

    cdef int status = STATUS_OK
    cdef long k = 0
    cdef long step = 0
    cdef Py_ssize_t i, j
    cdef double t, sigma, uij
    cdef int rc
    cdef bint finite

    while step <= n_steps:
        sigma = _tuning_gain(x[o_th + 4 * n], x[o_th + 4 * n + 1])
        t = step * dt
        rc = _deriv_proposed(t, x, sigma, k1, sig, n, m, p_low, cp, rm_low,
                             om_low, h_low, ce, r_amp, r_freq, r_phase,
                             r_offset, beta1, beta2, adapt,
                             phi, omega, zeta, Phi, g)
        if rc != 0:
            status = STATUS_SINGULAR
            break
        if step % stride == 0:
            times[k] = t
            for i in range(dim):
                states[k, i] = x[i]
            for i in range(9):
                aux[k, i] = sig[i]
            k += 1
        if step == n_steps:
            break
        for i in range(dim):
            xt[i] = x[i] + 0.5 * dt * k1[i]
        rc = _deriv_proposed(t + 0.5 * dt, xt, sigma, k2, sig_scratch, n, m,
                             p_low, cp, rm_low, om_low, h_low, ce, r_amp,
                             r_freq, r_phase, r_offset, beta1, beta2, adapt,
                             phi, omega, zeta, Phi, g)
        if rc != 0:
            status = STATUS_SINGULAR
            break
        for i in range(dim):
            xt[i] = x[i] + 0.5 * dt * k2[i]
        rc = _deriv_proposed(t + 0.5 * dt, xt, sigma, k3, sig_scratch, n, m,
                             p_low, cp, rm_low, om_low, h_low, ce, r_amp,
                             r_freq, r_phase, r_offset, beta1, beta2, adapt,
                             phi, omega, zeta, Phi, g)
        if rc != 0:
            status = STATUS_SINGULAR
            break
        for i in range(dim):
            xt[i] = x[i] + dt * k3[i]
        rc = _deriv_proposed(t + dt, xt, sigma, k4, sig_scratch, n, m,
                             p_low, cp, rm_low, om_low, h_low, ce, r_amp,
                             r_freq, r_phase, r_offset, beta1, beta2, adapt,
                             phi, omega, zeta, Phi, g)
        if rc != 0:
            status = STATUS_SINGULAR
            break
        finite = True
        for i in range(dim):
            x[i] = x[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i]
                                        + 2.0 * k3[i] + k4[i])
            if not isfinite(x[i]):
                finite = False
        # symmetrize Upsilon
        for i in range(tdim):
            for j in range(i):
                uij = 0.5 * (x[o_up + i * tdim + j] + x[o_up + j * tdim + i])
                x[o_up + i * tdim + j] = uij
                x[o_up + j * tdim + i] = uij
        if not finite:
            status = STATUS_NONFINITE
            break
        step += 1

    return (times_arr[:k], states_arr[:k], aux_arr[:k], status, step)


cdef int _deriv_baseline(
        double t, double[:] x, double[:] dx, double[:] sig,
        int n, int m,
        double[:] p_low, double[:] cp, double[:] rm_low, double[:] om_low,
        double[:] r_amp, double[:] r_freq, double[:] r_phase, double r_offset,
        double gamma_theta, double gamma_chi, int sign_kp, int adapt,
        double[:] phi, double[:] varphi) noexcept:
    """sig receives (y, y*, e, u, eps, mu)."""
    cdef int nstar = n - m
    cdef int q = n - 1
    cdef int o_xp = 0
    cdef int o_xr = o_xp + n
    cdef int o_xf1 = o_xr + nstar
    cdef int o_xf2 = o_xf1 + q
    cdef int o_xv = o_xf2 + q
    cdef int o_xmu = o_xv + 2 * n * nstar
    cdef int o_th = o_xmu + nstar
    cdef int o_chi = o_th + 2 * n

    cdef Py_ssize_t i, j, base
    cdef double acc

    cdef double r = _ref_signal(t, r_amp, r_freq, r_phase, r_offset)
    cdef double y = 0.0
    for i in range(n):
        y += cp[i] * x[o_xp + i]
    cdef double ystar = x[o_xr]
    cdef double e = y - ystar

    for i in range(q):
        phi[i] = x[o_xf1 + i]
        phi[q + i] = x[o_xf2 + i]
    phi[2 * q] = y
    phi[2 * q + 1] = r

    cdef double u = 0.0
    cdef double mu = -x[o_xmu]
    for i in range(2 * n):
        u += x[o_th + i] * phi[i]
        varphi[i] = x[o_xv + i * nstar]
        mu += x[o_th + i] * varphi[i]
    cdef double chi = x[o_chi]
    cdef double eps = e + chi * mu

    for i in range(n - 1):
        dx[o_xp + i] = x[o_xp + i + 1]
    acc = u
    for i in range(n):
        acc -= p_low[i] * x[o_xp + i]
    dx[o_xp + n - 1] = acc

    for i in range(nstar - 1):
        dx[o_xr + i] = x[o_xr + i + 1]
    acc = r
    for i in range(nstar):
        acc -= rm_low[i] * x[o_xr + i]
    dx[o_xr + nstar - 1] = acc

    for i in range(q - 1):
        dx[o_xf1 + i] = x[o_xf1 + i + 1]
        dx[o_xf2 + i] = x[o_xf2 + i + 1]
    acc = u
    for i in range(q):
        acc -= om_low[i] * x[o_xf1 + i]
    dx[o_xf1 + q - 1] = acc
    acc = y
    for i in range(q):
        acc -= om_low[i] * x[o_xf2 + i]
    dx[o_xf2 + q - 1] = acc

    for j in range(2 * n):
        base = o_xv + j * nstar
        for i in range(nstar - 1):
            dx[base + i] = x[base + i + 1]
        acc = phi[j]
        for i in range(nstar):
            acc -= rm_low[i] * x[base + i]
        dx[base + nstar - 1] = acc

    for i in range(nstar - 1):
        dx[o_xmu + i] = x[o_xmu + i + 1]
    acc = u
    for i in range(nstar):
        acc -= rm_low[i] * x[o_xmu + i]
    dx[o_xmu + nstar - 1] = acc

    if adapt:
        for i in range(2 * n):
            dx[o_th + i] = -sign_kp * gamma_theta * eps * varphi[i]
        dx[o_chi] = -gamma_chi * eps * mu
    else:
        for i in range(2 * n):
            dx[o_th + i] = 0.0
        dx[o_chi] = 0.0

    sig[0] = y
    sig[1] = ystar
    sig[2] = e
    sig[3] = u
    sig[4] = eps
    sig[5] = mu
    return 0


def run_baseline(int n, int m,
                 double[:] p_low, double[:] cp, double[:] rm_low,
                 double[:] om_low,
                 double[:] r_amp, double[:] r_freq, double[:] r_phase,
                 double r_offset, double gamma_theta, double gamma_chi,
                 int sign_kp, int adapt,
                 x0, double dt, long n_steps, long stride):
    cdef int nstar = n - m
    cdef int q = n - 1
    cdef int dim = n + nstar + 2 * q + 2 * n * nstar + nstar + 2 * n + 1

    x_arr = np.array(x0, dtype=np.float64, copy=True)
    if x_arr.shape[0] != dim:
        raise ValueError(f"state must have length {dim}")
    cdef double[:] x = x_arr

    cdef long n_samples = n_steps // stride + 1
    times_arr = np.zeros(n_samples)
    states_arr = np.zeros((n_samples, dim))
    aux_arr = np.zeros((n_samples, 6))
    cdef double[:] times = times_arr
    cdef double[:, :] states = states_arr
    cdef double[:, :] aux = aux_arr

    work = np.zeros((5, dim))
    cdef double[:] k1 = work[0]
    cdef double[:] k2 = work[1]
    cdef double[:] k3 = work[2]
    cdef double[:] k4 = work[3]
    cdef double[:] xt = work[4]
    scratch = np.zeros((2, 2 * n))
    cdef double[:] phi = scratch[0]
    cdef double[:] varphi = scratch[1]
    sig_arr = np.zeros(6)
    cdef double[:] sig = sig_arr
    cdef double[:] sig_scratch = np.zeros(6)

    cdef int status = STATUS_OK
    cdef long k = 0
    cdef long step = 0
    cdef Py_ssize_t i
    cdef double t
    cdef bint finite

    while step <= n_steps:
        t = step * dt
        _deriv_baseline(t, x, k1, sig, n, m, p_low, cp, rm_low, om_low,
                        r_amp, r_freq, r_phase, r_offset, gamma_theta,
                        gamma_chi, sign_kp, adapt, phi, varphi)
        if step % stride == 0:
            times[k] = t
            for i in range(dim):
                states[k, i] = x[i]
            for i in range(6):
                aux[k, i] = sig[i]
            k += 1
        if step == n_steps:
            break
        for i in range(dim):
            xt[i] = x[i] + 0.5 * dt * k1[i]
        _deriv_baseline(t + 0.5 * dt, xt, k2, sig_scratch, n, m, p_low, cp,
                        rm_low, om_low, r_amp, r_freq, r_phase, r_offset,
                        gamma_theta, gamma_chi, sign_kp, adapt, phi, varphi)
        for i in range(dim):
            xt[i] = x[i] + 0.5 * dt * k2[i]
        _deriv_baseline(t + 0.5 * dt, xt, k3, sig_scratch, n, m, p_low, cp,
                        rm_low, om_low, r_amp, r_freq, r_phase, r_offset,
                        gamma_theta, gamma_chi, sign_kp, adapt, phi, varphi)
        for i in range(dim):
            xt[i] = x[i] + dt * k3[i]
        _deriv_baseline(t + dt, xt, k4, sig_scratch, n, m, p_low, cp,
                        rm_low, om_low, r_amp, r_freq, r_phase, r_offset,
                        gamma_theta, gamma_chi, sign_kp, adapt, phi, varphi)
        finite = True
        for i in range(dim):
            x[i] = x[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i]
                                        + 2.0 * k3[i] + k4[i])
            if not isfinite(x[i]):
                finite = False
        if not finite:
            status = STATUS_NONFINITE
            break
        step += 1

    return (times_arr[:k], states_arr[:k], aux_arr[:k], status, step)
