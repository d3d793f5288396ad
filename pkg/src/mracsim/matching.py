"""Ideal-gain solver for the model-matching polynomial identity.

The closed loop equals the reference model when constants
theta1 (length n-1), theta2 (length n-1), theta3, theta4 = 1/kp satisfy

    theta1^T b(s) P(s) + (theta2^T b(s) + theta3 Omega(s)) kp Z(s)
        = Omega(s) (P(s) - kp theta4 Z(s) Rm(s)),

with b(s) = [1, s, ..., s^(n-2)]^T. Expanding both sides in powers of s
gives a square (2n-1) x (2n-1) linear system: after theta4 = 1/kp the
right side has degree <= 2n-2, as does the left.
"""

from dataclasses import dataclass

import numpy as np

from .poly import Polynomial, poly_add_scaled, poly_mul, poly_power

COND_WARN = 1e12
COND_SINGULAR = 1e15


class MatchingError(ValueError):
    pass


@dataclass(frozen=True)
class MatchedGains:
    theta1: np.ndarray
    theta2: np.ndarray
    theta3: float
    theta4: float
    cond: float = 0.0
    ill_conditioned: bool = False

    @property
    def theta(self):
        """[theta1; theta2; theta3; theta4], length 2n."""
        return np.concatenate(
            [self.theta1, self.theta2, [self.theta3, self.theta4]]
        )

    def theta_p(self, kp):
        """kp * theta, length 2n; last entry is exactly 1."""
        return kp * self.theta

    def rho_star(self, kp):
        return kp

    def lambda_star(self, kp):
        return self.theta4

    def theta_star_full(self, kp):
        """[theta; theta_p; rho*; lambda*], length 4n+2."""
        return np.concatenate(
            [self.theta, self.theta_p(kp), [kp, self.theta4]]
        )

    def as_dict(self, kp):
        return {
            "theta1": self.theta1.tolist(),
            "theta2": self.theta2.tolist(),
            "theta3": self.theta3,
            "theta4": self.theta4,
            "theta_p": self.theta_p(kp).tolist(),
            "rho_star": kp,
            "lambda_star": self.theta4,
            "condition_number": self.cond,
            "ill_conditioned": self.ill_conditioned,
        }


def default_omega(n: int) -> Polynomial:
    """(s+1)**(n-1): a convenient monic Hurwitz choice of degree n-1."""
    return poly_power(Polynomial([1.0, 1.0]), n - 1)


def _shifted_coeffs(p: Polynomial, shift: int, size: int):
    """Coefficient column of s**shift * p(s), padded/truncated to size."""
    col = np.zeros(size)
    c = p.coeffs
    col[shift : shift + len(c)] = c
    return col


def solve_matching(P, Z, kp, Omega=None, Rm=None) -> MatchedGains:
    """Solve the matching identity by direct coefficient comparison.

    Unknowns [theta1 (n-1); theta2 (n-1); theta3] form a square dense
    system solved with partial-pivoting elimination (numpy.linalg.solve);
    theta4 = 1/kp is set directly.
    """
    n = P.degree
    m = Z.degree
    if n < 2:
        raise MatchingError("plant denominator degree must be >= 2")
    if not P.is_monic or not Z.is_monic:
        raise MatchingError("P and Z must be monic")
    if m >= n:
        raise MatchingError("deg(Z) must be < deg(P)")
    if kp == 0.0:
        raise MatchingError("high-frequency gain must be nonzero")
    if Omega is None:
        Omega = default_omega(n)
    if Omega.degree != n - 1:
        raise MatchingError(f"Omega must have degree n-1 = {n - 1}")
    if Rm is None or Rm.degree != n - m:
        raise MatchingError(f"Rm must have degree n* = {n - m}")

    q = n - 1
    size = 2 * n - 1  # coefficients of s^0 .. s^(2n-2)
    M = np.zeros((size, size))
    for i in range(q):
        M[:, i] = _shifted_coeffs(P, i, size)  # theta1_i * s^i * P
        M[:, q + i] = kp * _shifted_coeffs(Z, i, size)  # theta2_i * kp s^i Z
    M[:, 2 * q] = kp * _shifted_coeffs(poly_mul(Omega, Z), 0, size)  # theta3

    rhs_poly = poly_mul(Omega, poly_add_scaled(P, poly_mul(Z, Rm), -1.0))
    rhs = _shifted_coeffs(rhs_poly, 0, size)

    cond = float(np.linalg.cond(M))
    if not np.isfinite(cond) or cond > COND_SINGULAR:
        raise MatchingError(
            f"singular matching system, condition {cond:.3e} "
            "(are P and Z coprime?)"
        )
    try:
        x = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError as exc:
        raise MatchingError(
            "singular matching system (are P and Z coprime?)"
        ) from exc

    return MatchedGains(
        theta1=x[:q].copy(),
        theta2=x[q : 2 * q].copy(),
        theta3=float(x[2 * q]),
        theta4=1.0 / kp,
        cond=cond,
        ill_conditioned=cond > COND_WARN,
    )


def matching_residual(g: MatchedGains, P, Z, kp, Omega, Rm) -> Polynomial:
    """LHS - RHS of the matching identity as a polynomial; ~0 for valid
    gains."""
    n = P.degree
    q = n - 1
    lhs = Polynomial([0.0])
    for i in range(q):
        si = Polynomial([0.0] * i + [1.0])
        lhs = poly_add_scaled(lhs, poly_mul(si, P), g.theta1[i])
        lhs = poly_add_scaled(lhs, poly_mul(si, Z), kp * g.theta2[i])
    lhs = poly_add_scaled(lhs, poly_mul(Omega, Z), kp * g.theta3)
    rhs = poly_mul(
        Omega, poly_add_scaled(P, poly_mul(Z, Rm), -kp * g.theta4)
    )
    return poly_add_scaled(lhs, rhs, -1.0)
