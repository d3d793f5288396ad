"""Scenario definitions and the top-level run loop.

A ScenarioConfig is a plain-value description (coefficient lists, floats,
strings) of one closed-loop experiment: plant, reference model,
controller choice, filter polynomials, adaptation settings and
integration grid. run_scenario turns it into kernel inputs, integrates,
and returns a RunRecord with diagnostics and summary metrics.

The Boeing 737 longitudinal model and its two standard initializations
(one starting with the correct high-frequency-gain sign estimate, one
with the wrong sign) are provided as built-ins, plus a baseline-MRAC
variant of the same plant.
"""

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from . import backend
from .adaptation import AdaptationConfig
from .assemble import (BaselineProblem, ProposedProblem, ReferenceSignal,
                       build_baseline, build_proposed)
from .controller import MracStructure, tuning_gain
from .matching import MatchingError, solve_matching
from .poly import Polynomial
from .records import postprocess_baseline, postprocess_proposed


@dataclass(frozen=True)
class PlantModel:
    """SISO plant kp * Z(s) / P(s), P monic degree n, Z monic Hurwitz."""

    P: Polynomial
    Z: Polynomial
    kp: float

    def __post_init__(self):
        from .poly import is_hurwitz

        if not self.P.is_monic or not self.Z.is_monic:
            raise ValueError("P and Z must be monic")
        if self.Z.degree >= self.P.degree:
            raise ValueError("plant must be strictly proper")
        if self.kp == 0.0:
            raise ValueError("high-frequency gain must be nonzero")
        if not is_hurwitz(self.Z):
            raise ValueError("plant zeros must be stable (Z Hurwitz)")

    @property
    def n(self):
        return self.P.degree

    @property
    def m(self):
        return self.Z.degree

    @property
    def n_star(self):
        return self.P.degree - self.Z.degree


@dataclass(frozen=True)
class ReferenceModel:
    """y* = (1/Rm)[r] with r a finite sum of sinusoids plus an offset."""

    Rm: Polynomial
    signal: ReferenceSignal

    def __post_init__(self):
        from .poly import is_hurwitz

        if not is_hurwitz(self.Rm):
            raise ValueError("Rm must be Hurwitz")


@dataclass
class ScenarioConfig:
    """Plain-value description of one run; all polynomial coefficient
    lists are ascending (coeffs[i] multiplies s^i) and include the
    leading 1."""

    name: str = "scenario"
    plant_p: list = None
    plant_z: list = None
    kp: float = 0.0
    controller: str = "proposed"
    rm: list = None
    omega: list = None
    h_den: list = None           # defaults to rm
    ref_sinusoids: list = field(default_factory=list)
    ref_offset: float = 0.0
    beta1: float = 1.0
    beta2: float = 1.0
    upsilon0_scale: float = 1e3
    theta0_mode: str = "multipliers"    # multipliers | explicit | zero
    theta0_multipliers: list = None     # 7 per-block factors (see below)
    theta0_explicit: list = None
    gamma_theta: float = 10.0
    gamma_chi: float = 10.0
    sign_kp: int = 0                    # 0 = derive from kp
    chi0_multiplier: float = 1.0
    adapt: bool = True
    dt: float = 1e-3
    t_final: float = 200.0
    record_stride: int = 10

    # theta0_multipliers order for the proposed controller:
    # [c_theta1, c_theta2, c_theta3, c_theta4, c_theta_p, c_rho, c_lambda]
    # (each scales the corresponding ideal block). The baseline
    # controller uses the first four entries for its theta blocks and
    # chi0_multiplier for chi0.

    def validate(self):
        if self.controller not in ("proposed", "baseline"):
            raise ValueError(f"unknown controller '{self.controller}'")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.t_final <= self.dt:
            raise ValueError("t_final must exceed dt")
        if self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")
        if self.theta0_mode not in ("multipliers", "explicit", "zero"):
            raise ValueError(f"unknown theta0_mode '{self.theta0_mode}'")
        if self.theta0_mode == "multipliers":
            mults = self.theta0_multipliers
            if mults is None or len(mults) != 7:
                raise ValueError(
                    "theta0_multipliers must list 7 per-block factors")
        if not self.plant_p or not self.plant_z:
            raise ValueError("plant_p and plant_z are required")
        if not self.rm or not self.omega:
            raise ValueError("rm and omega polynomials are required")
        return self

    def replace(self, **kw):
        return dataclasses.replace(self, **kw)

    def as_dict(self):
        return dataclasses.asdict(self)


def boeing_model() -> PlantModel:
    """Linearized longitudinal dynamics of a Boeing 737 (pitch channel):
    fourth-order plant, two stable zeros, small negative gain."""
    return PlantModel(
        P=Polynomial([0.065, 0.989, 2.174, 1.379, 1.0]),
        Z=Polynomial([0.050, 0.767, 1.0]),
        kp=-0.023,
    )


_BOEING_COMMON = dict(
    plant_p=[0.065, 0.989, 2.174, 1.379, 1.0],
    plant_z=[0.050, 0.767, 1.0],
    kp=-0.023,
    rm=[108.0, 21.0, 1.0],
    omega=[11.25, 18.25, 8.0, 1.0],
    h_den=[108.0, 21.0, 1.0],
    ref_sinusoids=[(1.0, 1.0, 0.0), (-0.5, 0.5, 0.0)],
    dt=1e-3,
    t_final=200.0,
    record_stride=10,
)


def boeing_scenario(case_id: str) -> ScenarioConfig:
    """The two standard Boeing 737 runs: case 'i' starts with all
    parameter-sign estimates correct, case 'ii' starts with the gain
    blocks sign-flipped (wrong high-frequency-gain sign)."""
    if case_id == "i":
        mults = [1.2, 1.2, 1.2, 1.2, 0.9, 1.2, 0.8]
    elif case_id == "ii":
        mults = [0.8, 0.8, 0.8, -0.3, -0.5, -0.5, -0.5]
    else:
        raise ValueError(f"case_id must be 'i' or 'ii', got {case_id!r}")
    return ScenarioConfig(
        name=f"boeing-case-{case_id}",
        controller="proposed",
        beta1=1.0, beta2=1.0,
        upsilon0_scale=1e10,
        theta0_mode="multipliers",
        theta0_multipliers=mults,
        **_BOEING_COMMON,
    ).validate()


def boeing_baseline_scenario() -> ScenarioConfig:
    """Baseline MRAC (known gain sign) on the Boeing plant, started at
    80% of the ideal gains."""
    return ScenarioConfig(
        name="boeing-baseline",
        controller="baseline",
        theta0_mode="multipliers",
        theta0_multipliers=[0.8, 0.8, 0.8, 0.8, 1.0, 1.0, 1.0],
        chi0_multiplier=0.8,
        gamma_theta=10.0, gamma_chi=10.0,
        sign_kp=-1,
        **_BOEING_COMMON,
    ).validate()


BUILTIN_SCENARIOS = {
    "boeing-case-i": lambda: boeing_scenario("i"),
    "boeing-case-ii": lambda: boeing_scenario("ii"),
    "boeing-baseline": boeing_baseline_scenario,
}


def _structure(cfg: ScenarioConfig, plant: PlantModel) -> MracStructure:
    h = cfg.h_den if cfg.h_den else cfg.rm
    return MracStructure(
        n=plant.n, m=plant.m,
        Omega=Polynomial(cfg.omega),
        Rm=Polynomial(cfg.rm),
        H_den=Polynomial(h),
    )


def _theta_star(cfg, plant, structure):
    gains = solve_matching(plant.P, plant.Z, plant.kp,
                           Omega=structure.Omega, Rm=structure.Rm)
    return gains


def proposed_theta0(cfg: ScenarioConfig, gains, n: int):
    """Initial parameter vector from the config's theta0 mode."""
    tdim = 4 * n + 2
    if cfg.theta0_mode == "zero":
        return np.zeros(tdim)
    if cfg.theta0_mode == "explicit":
        v = np.asarray(cfg.theta0_explicit, dtype=float)
        if v.shape != (tdim,):
            raise ValueError(f"theta0_explicit must have length {tdim}")
        return v
    c1, c2, c3, c4, cp_, crho, clam = cfg.theta0_multipliers
    star = gains.theta_star_full(cfg.kp)
    scale = np.concatenate([
        np.full(n - 1, c1), np.full(n - 1, c2), [c3, c4],
        np.full(2 * n, cp_), [crho, clam],
    ])
    return star * scale


def baseline_theta0(cfg: ScenarioConfig, gains, n: int):
    if cfg.theta0_mode == "zero":
        return np.zeros(2 * n), 0.0
    if cfg.theta0_mode == "explicit":
        v = np.asarray(cfg.theta0_explicit, dtype=float)
        if v.shape != (2 * n + 1,):
            raise ValueError(
                f"theta0_explicit must have length {2 * n + 1} "
                "(theta blocks then chi)")
        return v[:-1], float(v[-1])
    c1, c2, c3, c4 = cfg.theta0_multipliers[:4]
    scale = np.concatenate(
        [np.full(n - 1, c1), np.full(n - 1, c2), [c3, c4]])
    return gains.theta * scale, cfg.chi0_multiplier * cfg.kp


def build_problem(cfg: ScenarioConfig):
    """(problem, theta_star or None) from a validated config. theta_star
    is the full ideal vector when the matching system is solvable, used
    for diagnostics; multiplier-mode initialization requires it."""
    cfg.validate()
    plant = PlantModel(P=Polynomial(cfg.plant_p),
                       Z=Polynomial(cfg.plant_z), kp=cfg.kp)
    structure = _structure(cfg, plant)
    ref = ReferenceSignal(sinusoids=tuple(tuple(s) for s in cfg.ref_sinusoids),
                          offset=cfg.ref_offset)

    gains = None
    try:
        gains = _theta_star(cfg, plant, structure)
    except MatchingError:
        if cfg.theta0_mode == "multipliers":
            raise

    if cfg.controller == "proposed":
        theta0 = proposed_theta0(cfg, gains, plant.n)
        adapt_cfg = AdaptationConfig(beta1=cfg.beta1, beta2=cfg.beta2,
                                     upsilon0_scale=cfg.upsilon0_scale)
        prob = build_proposed(plant.P, plant.Z, plant.kp, structure, ref,
                              adapt_cfg, theta0, adapt=cfg.adapt)
        star = gains.theta_star_full(cfg.kp) if gains is not None else None
        return prob, star

    theta0, chi0 = baseline_theta0(cfg, gains, plant.n)
    sign_kp = cfg.sign_kp if cfg.sign_kp in (-1, 1) else None
    prob = build_baseline(plant.P, plant.Z, plant.kp, structure, ref,
                          theta0, chi0, gamma_theta=cfg.gamma_theta,
                          gamma_chi=cfg.gamma_chi, sign_kp=sign_kp,
                          adapt=cfg.adapt)
    return prob, (gains.theta if gains is not None else None)


def closed_loop_derivative(problem: ProposedProblem):
    """A pure derivative function dx = f(t, x, sigma) for the proposed
    closed loop, built from the modular signal-path functions. Slower
    than the kernels; used as an independent cross-check and for
    inspecting a single evaluation."""
    from .adaptation import adaptation_derivatives
    from .controller import (assemble_phi, build_omega, build_Phi,
                             control_input, estimation_error, eta_signal)

    lay = problem.layout
    n = problem.n
    nstar = lay.nstar

    def deriv(t, x, sigma):
        xp = lay.view(x, "xp")
        xr = lay.view(x, "xr")
        xf1 = lay.view(x, "xf1")
        xf2 = lay.view(x, "xf2")
        xe = lay.view(x, "xe")
        xz = lay.view(x, "xz").reshape(lay.wdim, nstar)
        xh = lay.view(x, "xh")
        th = lay.theta_of(x)
        U = lay.upsilon_of(x)

        r = problem.r_offset + float(
            np.sin(problem.r_freq * t + problem.r_phase) @ problem.r_amp)
        y = float(problem.cp @ xp)
        e = y - xr[0]
        rho = th[4 * n]
        lam = th[4 * n + 1]

        phi = assemble_phi(xf1, xf2, y, r)
        u = control_input(th, phi, sigma)
        omega = build_omega(phi, sigma, u)
        zeta = xz[:, 0]
        ebar = float(problem.ce @ xe) + e
        theta_bar = th[: lay.wdim]
        eta = eta_signal(theta_bar, zeta, xh[0])
        eps_bar = estimation_error(ebar, eta, sigma, lam)
        Phi = build_Phi(zeta, ebar, sigma, lam)
        dTheta, dU = adaptation_derivatives(th, U, Phi, eps_bar,
                                            problem.beta1, problem.beta2)

        def companion(v, low, inp):
            dv = np.empty_like(v)
            dv[:-1] = v[1:]
            dv[-1] = -(low @ v) + inp
            return dv

        dx = np.empty(lay.dim)
        lay.view(dx, "xp")[:] = companion(xp, problem.p_low, u)
        lay.view(dx, "xr")[:] = companion(xr, problem.rm_low, r)
        lay.view(dx, "xf1")[:] = companion(xf1, problem.om_low, u)
        lay.view(dx, "xf2")[:] = companion(xf2, problem.om_low, y)
        lay.view(dx, "xe")[:] = companion(xe, problem.h_low, e)
        dxz = lay.view(dx, "xz").reshape(lay.wdim, nstar)
        for j in range(lay.wdim):
            dxz[j] = companion(xz[j], problem.h_low, omega[j])
        lay.view(dx, "xh")[:] = companion(xh, problem.h_low,
                                          float(theta_bar @ omega))
        if problem.adapt:
            lay.theta_of(dx)[:] = dTheta
            lay.view(dx, "ups")[:] = dU.ravel()
        else:
            lay.theta_of(dx)[:] = 0.0
            lay.view(dx, "ups")[:] = 0.0
        return dx

    return deriv


def run_scenario(cfg: ScenarioConfig, use_python_kernel=False):
    """Integrate one scenario and return its RunRecord."""
    prob, star = build_problem(cfg)
    n_steps = int(round(cfg.t_final / cfg.dt))
    x0 = prob.initial_state()
    if cfg.controller == "proposed":
        kern = (backend.run_proposed_py if use_python_kernel
                else backend.run_proposed)
        out = kern(*prob.kernel_args(), x0, cfg.dt, n_steps,
                   cfg.record_stride)
        rec = postprocess_proposed(prob, *out, cfg.dt, theta_star=star)
    else:
        kern = (backend.run_baseline_py if use_python_kernel
                else backend.run_baseline)
        out = kern(*prob.kernel_args(), x0, cfg.dt, n_steps,
                   cfg.record_stride)
        rec = postprocess_baseline(prob, *out, cfg.dt)
    rec.metrics["scenario"] = cfg.name
    rec.metrics["backend"] = ("python" if use_python_kernel
                              else backend.BACKEND)
    return rec
