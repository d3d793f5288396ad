"""Closed-loop assembly: packs plant, reference model, controller filters
and the adaptation law into flat arrays consumed by the integration
kernels (compiled or pure-python).

All dynamic blocks are companion-form realizations sharing the pattern
dx[i] = x[i+1], dx[k-1] = -(low coeffs) . x + input, so a kernel only
needs each denominator's ascending low-order coefficients.

Proposed-controller global state layout (dim D):

    [ xp (n)        plant, CCF of kp Z/P
      xr (n*)       reference, 1/Rm on r, y* = xr[0]
      xf1 (n-1)     b(s)/Omega on u, phi1 = xf1
      xf2 (n-1)     b(s)/Omega on y, phi2 = xf2
      xe (n*)       Rm/H on e (biproper, feedthrough 1), ebar = Ce.xe + e
      xz (4n+1, n*) 1/H on each omega channel, zeta_j = xz[j,0]
      xh (n*)       1/H on theta_bar^T omega, output xh[0]
      Theta (4n+2)
      Upsilon (4n+2, 4n+2) row-major ]

Baseline layout:

    [ xp (n); xr (n*); xf1 (n-1); xf2 (n-1);
      xv (2n, n*)   1/Rm on each phi channel, varphi_j = xv[j,0]
      xmu (n*)      1/Rm on theta^T phi
      theta (2n); chi (1) ]
"""

from dataclasses import dataclass, field

import numpy as np

from .adaptation import AdaptationConfig
from .controller import MracStructure
from .poly import Polynomial


@dataclass(frozen=True)
class ReferenceSignal:
    """r(t) = offset + sum_i amp_i * sin(freq_i * t + phase_i)."""

    sinusoids: tuple = ()  # (amplitude, frequency rad/s, phase) triples
    offset: float = 0.0

    def arrays(self):
        if self.sinusoids:
            a = np.array([s[0] for s in self.sinusoids], dtype=float)
            w = np.array([s[1] for s in self.sinusoids], dtype=float)
            p = np.array([s[2] for s in self.sinusoids], dtype=float)
        else:
            a = w = p = np.zeros(0)
        return a, w, p

    def __call__(self, t):
        a, w, p = self.arrays()
        t = np.asarray(t, dtype=float)
        if a.size == 0:
            return np.broadcast_to(self.offset, t.shape).copy()
        return self.offset + np.sin(np.multiply.outer(t, w) + p) @ a


@dataclass
class ProposedLayout:
    n: int
    m: int

    def __post_init__(self):
        n, m = self.n, self.m
        self.nstar = n - m
        self.q = n - 1
        self.wdim = 4 * n + 1
        self.tdim = 4 * n + 2
        sizes = [
            ("xp", n),
            ("xr", self.nstar),
            ("xf1", self.q),
            ("xf2", self.q),
            ("xe", self.nstar),
            ("xz", self.wdim * self.nstar),
            ("xh", self.nstar),
            ("theta", self.tdim),
            ("ups", self.tdim * self.tdim),
        ]
        off = 0
        self.slices = {}
        for name, size in sizes:
            self.slices[name] = slice(off, off + size)
            off += size
        self.dim = off

    def view(self, x, name):
        return x[self.slices[name]]

    def theta_of(self, x):
        return x[self.slices["theta"]]

    def upsilon_of(self, x):
        t = self.tdim
        return x[self.slices["ups"]].reshape(t, t)


@dataclass
class BaselineLayout:
    n: int
    m: int

    def __post_init__(self):
        n, m = self.n, self.m
        self.nstar = n - m
        self.q = n - 1
        sizes = [
            ("xp", n),
            ("xr", self.nstar),
            ("xf1", self.q),
            ("xf2", self.q),
            ("xv", 2 * n * self.nstar),
            ("xmu", self.nstar),
            ("theta", 2 * n),
            ("chi", 1),
        ]
        off = 0
        self.slices = {}
        for name, size in sizes:
            self.slices[name] = slice(off, off + size)
            off += size
        self.dim = off


def _low(p: Polynomial):
    """Ascending low-order coefficients of a monic polynomial (drops the
    leading 1); the companion last row is their negation."""
    return p.monic().coeffs[:-1].copy()


@dataclass
class ProposedProblem:
    """Everything a kernel needs to integrate the proposed closed loop."""

    n: int
    m: int
    p_low: np.ndarray      # plant denominator P
    cp: np.ndarray         # plant output row: kp * Z coefficients, len n
    rm_low: np.ndarray     # reference denominator Rm
    om_low: np.ndarray     # filter denominator Omega
    h_low: np.ndarray      # filter denominator H
    ce: np.ndarray         # ebar output row: (Rm - H) low coefficients
    r_amp: np.ndarray
    r_freq: np.ndarray
    r_phase: np.ndarray
    r_offset: float
    beta1: float
    beta2: float
    theta0: np.ndarray
    upsilon0: np.ndarray
    adapt: bool = True
    layout: ProposedLayout = None

    def __post_init__(self):
        if self.layout is None:
            self.layout = ProposedLayout(self.n, self.m)

    def initial_state(self):
        x = np.zeros(self.layout.dim)
        x[self.layout.slices["theta"]] = self.theta0
        x[self.layout.slices["ups"]] = self.upsilon0.ravel()
        return x

    def kernel_args(self):
        return (
            self.n, self.m,
            self.p_low, self.cp, self.rm_low, self.om_low,
            self.h_low, self.ce,
            self.r_amp, self.r_freq, self.r_phase, self.r_offset,
            self.beta1, self.beta2, 1 if self.adapt else 0,
        )


@dataclass
class BaselineProblem:
    n: int
    m: int
    p_low: np.ndarray
    cp: np.ndarray
    rm_low: np.ndarray
    om_low: np.ndarray
    r_amp: np.ndarray
    r_freq: np.ndarray
    r_phase: np.ndarray
    r_offset: float
    gamma_theta: float     # Gamma = gamma_theta * I
    gamma_chi: float
    sign_kp: int
    theta0: np.ndarray
    chi0: float
    adapt: bool = True
    layout: BaselineLayout = None

    def __post_init__(self):
        if self.layout is None:
            self.layout = BaselineLayout(self.n, self.m)
        if self.sign_kp not in (-1, 1):
            raise ValueError("sign_kp must be -1 or +1")

    def initial_state(self):
        x = np.zeros(self.layout.dim)
        x[self.layout.slices["theta"]] = self.theta0
        x[self.layout.slices["chi"]] = self.chi0
        return x

    def kernel_args(self):
        return (
            self.n, self.m,
            self.p_low, self.cp, self.rm_low, self.om_low,
            self.r_amp, self.r_freq, self.r_phase, self.r_offset,
            self.gamma_theta, self.gamma_chi, self.sign_kp,
            1 if self.adapt else 0,
        )


def build_proposed(plant_P, plant_Z, kp, structure: MracStructure,
                   reference: ReferenceSignal, adapt_cfg: AdaptationConfig,
                   theta0, adapt=True) -> ProposedProblem:
    n = plant_P.degree
    cp = np.zeros(n)
    cp[: len(plant_Z.coeffs)] = kp * plant_Z.coeffs
    ce = structure.Rm.monic().coeffs[:-1] - structure.H_den.monic().coeffs[:-1]
    amp, freq, phase = reference.arrays()
    theta0 = np.asarray(theta0, dtype=float)
    if theta0.shape != (structure.theta_dim,):
        raise ValueError(
            f"theta0 must have length {structure.theta_dim}, "
            f"got {theta0.shape}"
        )
    return ProposedProblem(
        n=n, m=plant_Z.degree,
        p_low=_low(plant_P), cp=cp,
        rm_low=_low(structure.Rm), om_low=_low(structure.Omega),
        h_low=_low(structure.H_den), ce=ce,
        r_amp=amp, r_freq=freq, r_phase=phase, r_offset=reference.offset,
        beta1=adapt_cfg.beta1, beta2=adapt_cfg.beta2,
        theta0=theta0,
        upsilon0=adapt_cfg.initial_upsilon(structure.theta_dim),
        adapt=adapt,
    )


def build_baseline(plant_P, plant_Z, kp, structure: MracStructure,
                   reference: ReferenceSignal, theta0, chi0,
                   gamma_theta=10.0, gamma_chi=10.0, sign_kp=None,
                   adapt=True) -> BaselineProblem:
    n = plant_P.degree
    cp = np.zeros(n)
    cp[: len(plant_Z.coeffs)] = kp * plant_Z.coeffs
    amp, freq, phase = reference.arrays()
    if sign_kp is None:
        sign_kp = 1 if kp > 0 else -1
    theta0 = np.asarray(theta0, dtype=float)
    if theta0.shape != (2 * n,):
        raise ValueError(f"theta0 must have length {2 * n}")
    return BaselineProblem(
        n=n, m=plant_Z.degree,
        p_low=_low(plant_P), cp=cp,
        rm_low=_low(structure.Rm), om_low=_low(structure.Omega),
        r_amp=amp, r_freq=freq, r_phase=phase, r_offset=reference.offset,
        gamma_theta=gamma_theta, gamma_chi=gamma_chi, sign_kp=int(sign_kp),
        theta0=theta0, chi0=float(chi0), adapt=adapt,
    )
