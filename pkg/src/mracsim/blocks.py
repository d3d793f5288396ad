"""State-space simulation primitives and the fixed-step RK4 integrator."""

from dataclasses import dataclass, field

import numpy as np

from .poly import RationalTF, realize_ccf


class NonFiniteState(RuntimeError):
    """Raised when a derivative or state stops being finite; carries t."""

    def __init__(self, t, detail=""):
        self.t = t
        super().__init__(f"non-finite value encountered at t={t:.6f}s {detail}")


@dataclass
class StateSpaceBlock:
    """SISO/MIMO LTI block dx = A x + B u, y = C x + D u with owned state."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    x: np.ndarray = None

    def __post_init__(self):
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        nx = self.A.shape[0]
        if self.A.shape != (nx, nx):
            raise ValueError("A must be square")
        self.B = np.asarray(self.B, dtype=float).reshape(nx, -1)
        self.C = np.asarray(self.C, dtype=float).reshape(-1, nx)
        ny, nu = self.C.shape[0], self.B.shape[1]
        self.D = np.asarray(self.D, dtype=float).reshape(ny, nu)
        if self.x is None:
            self.x = np.zeros(nx)
        else:
            self.x = np.asarray(self.x, dtype=float).reshape(nx)

    @classmethod
    def from_tf(cls, tf: RationalTF):
        A, B, C, d = realize_ccf(tf)
        return cls(A, B, C, np.array([[d]]))

    def output(self, u):
        u = np.atleast_1d(np.asarray(u, dtype=float))
        return self.C @ self.x + self.D @ u


def block_derivative(block: StateSpaceBlock, u):
    """(A x + B u, C x + D u) without mutating the block state."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if u.shape[0] != block.B.shape[1]:
        raise ValueError(
            f"input width {u.shape[0]} != expected {block.B.shape[1]}"
        )
    dx = block.A @ block.x + block.B @ u
    y = block.C @ block.x + block.D @ u
    return dx, y


def rk4_step(deriv, t, x, dt):
    """Classical 4th-order Runge-Kutta update of the global state vector.

    Piecewise-constant exogenous decisions must be frozen inside `deriv`
    for the duration of the step by the caller.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    k1 = deriv(t, x)
    k2 = deriv(t + 0.5 * dt, x + 0.5 * dt * k1)
    k3 = deriv(t + 0.5 * dt, x + 0.5 * dt * k2)
    k4 = deriv(t + dt, x + dt * k3)
    out = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(out)):
        raise NonFiniteState(t, "(RK4 step output)")
    return out
