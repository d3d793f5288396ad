"""Run records: sampled time series from a kernel run plus the derived
diagnostics and summary metrics.

The kernels return raw (times, states, aux) arrays; postprocessing here
unpacks the parameter estimates, singularity margins, Lyapunov function
and covariance diagnostics from the state snapshots, so the kernels stay
free of linear-algebra calls.
"""

from dataclasses import dataclass, field

import numpy as np

from ._loop_py import (BASELINE_AUX, PROPOSED_AUX, STATUS_NONFINITE,
                       STATUS_OK, STATUS_SINGULAR)
from .adaptation import COLLAPSE_EIG

STATUS_NAMES = {
    STATUS_OK: "completed",
    STATUS_NONFINITE: "aborted-nonfinite",
    STATUS_SINGULAR: "aborted-singular",
}

FINAL_WINDOW = 0.2  # fraction of the run used for steady-state metrics


@dataclass
class RunRecord:
    """Sampled trajectory of one closed-loop run.

    series maps column name -> 1-D array over samples. theta holds the
    full parameter snapshots (S, p). For the proposed controller with a
    known ideal parameter vector the Lyapunov diagnostics columns
    (V, min_eig_upsilon, solution_residual) are present too.
    """

    controller: str
    t: np.ndarray
    series: dict
    theta: np.ndarray
    status: int
    steps_done: int
    dt: float
    states: np.ndarray = None
    upsilon: np.ndarray = None       # (S, p, p) when proposed
    theta_star: np.ndarray = None
    metrics: dict = field(default_factory=dict)

    @property
    def completed(self):
        return self.status == STATUS_OK

    @property
    def abort_reason(self):
        return None if self.completed else STATUS_NAMES[self.status]

    def column_names(self):
        return tuple(self.series.keys())


def _switch_count(sigma):
    return int(np.count_nonzero(np.diff(sigma)))


def postprocess_proposed(problem, times, states, aux, status, steps_done,
                         dt, theta_star=None):
    """Builds a RunRecord for the proposed controller from raw kernel
    output, deriving rho/lambda, margins and (when the ideal parameters
    are known) the Lyapunov and closed-form-solution diagnostics."""
    lay = problem.layout
    n = problem.n
    S = len(times)
    theta = states[:, lay.slices["theta"]]
    ups = states[:, lay.slices["ups"]].reshape(S, lay.tdim, lay.tdim)

    series = {name: aux[:, i].copy() for i, name in enumerate(PROPOSED_AUX)}
    rho = theta[:, 4 * n]
    lam = theta[:, 4 * n + 1]
    sigma = series["sigma"]
    series["rho"] = rho
    series["lam"] = lam
    series["margin_u"] = 1.0 + sigma * rho
    series["margin_lambda"] = sigma + lam

    # Phi and the parameter derivative, reconstructed per sample
    zeta = states[:, lay.slices["xz"]].reshape(S, lay.wdim, lay.nstar)[:, :, 0]
    Phi = np.concatenate([zeta, series["ebar"][:, None]], axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        Phi = Phi / series["margin_lambda"][:, None]
    g = np.einsum("kij,kj->ki", ups, Phi)
    m2 = series["m_norm"] ** 2
    theta_dot = -(series["eps_bar"] / m2)[:, None] * g
    series["theta_dot_norm"] = np.linalg.norm(theta_dot, axis=1)

    if theta_star is not None:
        theta_star = np.asarray(theta_star, dtype=float)
        err = theta - theta_star
        eigs = np.linalg.eigvalsh(ups)
        series["min_eig_upsilon"] = eigs[:, 0]
        V = np.empty(S)
        for k in range(S):
            if eigs[k, 0] > 0:
                V[k] = err[k] @ np.linalg.solve(ups[k], err[k])
            else:
                V[k] = np.inf
        series["V"] = V
        u0_inv = np.linalg.inv(problem.upsilon0)
        pulled = np.einsum("kij,j->ki", ups, u0_inv @ err[0])
        series["solution_residual"] = np.linalg.norm(err - pulled, axis=1)

    rec = RunRecord(controller="proposed", t=times, series=series,
                    theta=theta, status=status, steps_done=steps_done,
                    dt=dt, states=states, upsilon=ups,
                    theta_star=theta_star)
    rec.metrics = compute_metrics(rec)
    return rec


def postprocess_baseline(problem, times, states, aux, status, steps_done,
                         dt):
    lay = problem.layout
    series = {name: aux[:, i].copy() for i, name in enumerate(BASELINE_AUX)}
    theta = np.concatenate(
        [states[:, lay.slices["theta"]], states[:, lay.slices["chi"]]],
        axis=1,
    )
    varphi = states[:, lay.slices["xv"]].reshape(
        len(times), 2 * problem.n, lay.nstar)[:, :, 0]
    tdot = (-problem.sign_kp * problem.gamma_theta
            * series["eps"][:, None] * varphi)
    chidot = -problem.gamma_chi * series["eps"] * series["mu"]
    series["theta_dot_norm"] = np.sqrt(
        np.sum(tdot ** 2, axis=1) + chidot ** 2)

    rec = RunRecord(controller="baseline", t=times, series=series,
                    theta=theta, status=status, steps_done=steps_done,
                    dt=dt, states=states)
    rec.metrics = compute_metrics(rec)
    return rec


def _rms(x):
    if not len(x):
        return float("nan")
    with np.errstate(over="ignore"):  # aborted runs can hold huge values
        return float(np.sqrt(np.mean(np.square(x))))


def compute_metrics(rec: RunRecord) -> dict:
    """Summary metrics over a (possibly partial) run."""
    t = rec.t
    s = rec.series
    out = {
        "status": STATUS_NAMES[rec.status],
        "completed": rec.completed,
        "steps_done": int(rec.steps_done),
        "t_end": float(t[-1]) if len(t) else 0.0,
    }
    if len(t) < 2:
        return out

    win = t >= t[-1] - FINAL_WINDOW * (t[-1] - t[0])
    rms_e = _rms(s["e"][win])
    rms_ystar = _rms(s["y_star"][win])
    out["rms_e_final_window"] = rms_e
    out["rms_ystar_final_window"] = rms_ystar
    out["tracking_ratio"] = (rms_e / rms_ystar if rms_ystar > 0
                             else float("inf"))
    out["max_abs_e"] = float(np.max(np.abs(s["e"])))
    out["max_abs_u"] = float(np.max(np.abs(s["u"])))

    # parameter settling between mid-run and the end
    k_half = int(np.searchsorted(t, 0.5 * t[-1]))
    th_half = rec.theta[k_half]
    th_end = rec.theta[-1]
    settle = float(np.linalg.norm(th_end - th_half))
    out["theta_settling"] = settle
    out["theta_settling_ratio"] = settle / (1.0 + float(np.linalg.norm(th_half)))

    trapezoid = getattr(np, "trapezoid", np.trapz)
    out["integrated_theta_dot_sq"] = float(
        trapezoid(s["theta_dot_norm"] ** 2, t))

    if rec.controller == "proposed":
        out["sigma_switch_count"] = _switch_count(s["sigma"])
        out["sigma_final"] = float(s["sigma"][-1])
        out["min_margin_u"] = float(np.min(s["margin_u"]))
        out["min_abs_margin_lambda"] = float(
            np.min(np.abs(s["margin_lambda"])))
        if "V" in s:
            V = s["V"]
            jumps = np.diff(V) > 1e-8 * (1.0 + V[:-1])
            out["V_monotonicity_violations"] = int(np.count_nonzero(jumps))
            out["min_eig_upsilon"] = float(np.min(s["min_eig_upsilon"]))
            out["covariance_collapsed"] = bool(
                np.min(s["min_eig_upsilon"]) < COLLAPSE_EIG)
            th_err0 = rec.theta[0] - rec.theta_star
            out["max_solution_residual"] = float(
                np.max(s["solution_residual"]))
            out["max_solution_residual_normalized"] = out[
                "max_solution_residual"] / (1.0 + float(np.linalg.norm(th_err0)))
    return out
