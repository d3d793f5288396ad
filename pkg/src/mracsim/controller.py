"""Singularity-free MRAC law: control input, regressor assembly, tracking
and estimation error signals, and the piecewise constant tuning gain.

Parameter estimate layout (length 4n+2):

    Theta = [theta (2n); theta_p (2n); rho; lambda]

with theta = [theta1 (n-1); theta2 (n-1); theta3; theta4]. The tuning
gain guarantees 1 + sigma*rho >= 1 and sigma + lambda != 0, so the
control law never divides by zero regardless of parameter excursions.
"""

from dataclasses import dataclass

import math

import numpy as np

from .poly import Polynomial, is_hurwitz

MARGIN_EPS = 1e-12


class SingularityViolation(RuntimeError):
    """A divisor the tuning gain must keep away from zero hit zero."""


@dataclass(frozen=True)
class MracStructure:
    """Design polynomials for the controller filters."""

    n: int
    m: int
    Omega: Polynomial
    Rm: Polynomial
    H_den: Polynomial

    def __post_init__(self):
        nstar = self.n - self.m
        if self.Omega.degree != self.n - 1 or not self.Omega.is_monic:
            raise ValueError(f"Omega must be monic of degree {self.n - 1}")
        if self.Rm.degree != nstar or not self.Rm.is_monic:
            raise ValueError(f"Rm must be monic of degree n*={nstar}")
        if self.H_den.degree != nstar or not self.H_den.is_monic:
            raise ValueError(f"H denominator must be monic of degree {nstar}")
        for name, p in (("Omega", self.Omega), ("Rm", self.Rm),
                        ("H", self.H_den)):
            if not is_hurwitz(p):
                raise ValueError(f"{name} = {p} is not Hurwitz")

    @property
    def n_star(self):
        return self.n - self.m

    @property
    def theta_dim(self):
        return 4 * self.n + 2


def tuning_gain(rho: float, lam: float) -> int:
    """Piecewise constant tuning gain from the current (rho, lambda).

    sigma = +1 when sign(rho)+sign(lambda) >= 1 or both estimates are
    exactly zero, -1 when sign(rho)+sign(lambda) <= -1, else 0. This
    guarantees 1 + sigma*rho >= 1 and sigma + lambda != 0.
    """
    rho = float(rho)
    lam = float(lam)
    s = (rho > 0.0) - (rho < 0.0) + (lam > 0.0) - (lam < 0.0)
    if s >= 1 or (rho == 0.0 and lam == 0.0):
        return 1
    if s <= -1:
        return -1
    return 0


def assemble_phi(phi1, phi2, y: float, r: float):
    """phi = [phi1; phi2; y; r], length 2n."""
    return np.concatenate([phi1, phi2, [y, r]])


def control_input(Theta, phi, sigma) -> float:
    """u = (theta^T phi + sigma * theta_p^T phi) / (1 + sigma*rho)."""
    two_n = len(phi)
    theta = Theta[:two_n]
    theta_p = Theta[two_n : 2 * two_n]
    rho = Theta[2 * two_n]
    denom = 1.0 + sigma * rho
    if abs(denom) < MARGIN_EPS:
        raise SingularityViolation(
            f"1 + sigma*rho = {denom} with sigma={sigma}, rho={rho}; "
            "the tuning gain contract was violated"
        )
    return float((theta @ phi + sigma * (theta_p @ phi)) / denom)


def build_omega(phi, sigma, u: float):
    """omega = [phi; sigma*phi; -sigma*u], length 4n+1."""
    return np.concatenate([phi, sigma * phi, [-sigma * u]])


def estimation_error(ebar: float, eta: float, sigma, lam: float) -> float:
    """eps_bar = ebar + eta / (sigma + lambda)."""
    denom = sigma + lam
    if abs(denom) < MARGIN_EPS:
        raise SingularityViolation(
            f"sigma + lambda = {denom}; tuning gain contract violated"
        )
    return ebar + eta / denom


def build_Phi(zeta, ebar: float, sigma, lam: float):
    """Phi = [zeta; ebar] / (sigma + lambda), length 4n+2."""
    denom = sigma + lam
    if abs(denom) < MARGIN_EPS:
        raise SingularityViolation(
            f"sigma + lambda = {denom}; tuning gain contract violated"
        )
    return np.concatenate([zeta, [ebar]]) / denom


def singularity_margins(Theta, sigma, n: int):
    """(1 + sigma*rho, sigma + lambda) for logging and assertions."""
    rho = Theta[4 * n]
    lam = Theta[4 * n + 1]
    return 1.0 + sigma * rho, sigma + lam


def eta_signal(theta_bar, zeta, filtered_tbar_omega: float) -> float:
    """eta = theta_bar^T zeta - H(s)[theta_bar^T omega], given the scalar
    filter output for the second term."""
    return float(theta_bar @ zeta) - filtered_tbar_omega
