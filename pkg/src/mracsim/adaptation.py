"""Normalized least-squares parameter update law and its diagnostics.

    dTheta/dt   = -Upsilon Phi eps_bar / m^2
    dUpsilon/dt = -Upsilon Phi Phi^T Upsilon / m^2
    m^2         = 1 + beta1 Phi^T Phi + beta2 Phi^T Upsilon Phi

Upsilon is integrated as a full matrix ODE and symmetrized after each
step; no forgetting factor, resetting, or projection.
"""

from dataclasses import dataclass, field

import numpy as np

COLLAPSE_EIG = 1e-12


@dataclass
class AdaptationConfig:
    beta1: float = 1.0
    beta2: float = 1.0
    upsilon0_scale: float = 1e3
    upsilon0: np.ndarray = None  # explicit matrix overrides the scale

    def __post_init__(self):
        if self.beta1 <= 0 or self.beta2 <= 0:
            raise ValueError("beta1 and beta2 must be positive")
        if self.upsilon0 is not None:
            U = np.asarray(self.upsilon0, dtype=float)
            if not np.allclose(U, U.T):
                raise ValueError("upsilon0 must be symmetric")
            if np.min(np.linalg.eigvalsh(U)) <= 0:
                raise ValueError("upsilon0 must be positive definite")
            self.upsilon0 = U
        elif self.upsilon0_scale <= 0:
            raise ValueError("upsilon0_scale must be positive")

    def initial_upsilon(self, dim: int):
        if self.upsilon0 is not None:
            if self.upsilon0.shape != (dim, dim):
                raise ValueError(
                    f"upsilon0 must be {dim}x{dim}, got {self.upsilon0.shape}"
                )
            return self.upsilon0.copy()
        return self.upsilon0_scale * np.eye(dim)


def normalization(Phi, Upsilon, beta1: float, beta2: float) -> float:
    """m = sqrt(1 + beta1 Phi^T Phi + beta2 Phi^T Upsilon Phi) >= 1."""
    rad = 1.0 + beta1 * float(Phi @ Phi) + beta2 * float(Phi @ (Upsilon @ Phi))
    if rad < 0.0:
        raise ArithmeticError(
            f"negative normalization radicand {rad}: Upsilon lost "
            "positive definiteness"
        )
    return float(np.sqrt(rad))


def adaptation_derivatives(Theta, Upsilon, Phi, eps_bar, beta1, beta2):
    """(dTheta, dUpsilon) of the least-squares law; dUpsilon is symmetric
    negative semidefinite of rank <= 1."""
    g = Upsilon @ Phi
    m2 = 1.0 + beta1 * float(Phi @ Phi) + beta2 * float(Phi @ g)
    dTheta = -(eps_bar / m2) * g
    dUpsilon = -np.outer(g, g) / m2
    return dTheta, dUpsilon


def lyapunov_diagnostics(Theta, Upsilon, Theta_star):
    """(V, min_eig): V = Theta_err^T Upsilon^-1 Theta_err and the smallest
    eigenvalue of Upsilon."""
    err = Theta - Theta_star
    eigs = np.linalg.eigvalsh(Upsilon)
    min_eig = float(eigs[0])
    cond = float(eigs[-1] / eigs[0]) if eigs[0] > 0 else np.inf
    if min_eig <= 0 or not np.isfinite(cond) or cond > 1e16:
        raise np.linalg.LinAlgError(
            f"Upsilon numerically singular (min_eig={min_eig:.3e}, "
            f"cond={cond:.3e})"
        )
    V = float(err @ np.linalg.solve(Upsilon, err))
    return V, min_eig


def solution_identity_residual(Theta, Upsilon, upsilon0_inv, Theta0,
                               Theta_star) -> float:
    """|| (Theta - Theta*) - Upsilon Upsilon0^-1 (Theta0 - Theta*) ||.

    The update law admits the closed form
    Theta_err(t) = Upsilon(t) Upsilon0^-1 Theta_err(0); this residual
    measures how well the integrated trajectory tracks it.
    """
    err = Theta - Theta_star
    err0 = Theta0 - Theta_star
    return float(np.linalg.norm(err - Upsilon @ (upsilon0_inv @ err0)))
