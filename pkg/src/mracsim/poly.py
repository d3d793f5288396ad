"""Polynomial and rational transfer-function algebra.

Coefficients are stored in ascending degree: coeffs[i] multiplies s**i.
Everything downstream (convolution, companion forms) indexes naturally
this way.
"""

from dataclasses import dataclass, field

import numpy as np

# Products of realistically scaled coefficients generate dust; trailing
# terms below this relative threshold are trimmed.
TRIM_REL = 1e-14


class ImproperTransferFunction(ValueError):
    pass


def _trim(coeffs):
    c = np.asarray(coeffs, dtype=float)
    if c.ndim != 1 or c.size == 0:
        raise ValueError("coefficients must be a nonempty 1-D sequence")
    scale = np.max(np.abs(c))
    if scale == 0.0:
        return np.zeros(1)
    keep = np.nonzero(np.abs(c) > TRIM_REL * scale)[0]
    return c[: keep[-1] + 1].copy()


@dataclass(frozen=True)
class Polynomial:
    """Real polynomial with ascending-degree coefficient storage."""

    coeffs: np.ndarray

    def __init__(self, coeffs):
        object.__setattr__(self, "coeffs", _trim(coeffs))
        self.coeffs.setflags(write=False)

    @property
    def degree(self):
        return len(self.coeffs) - 1

    @property
    def is_zero(self):
        return self.degree == 0 and self.coeffs[0] == 0.0

    @property
    def is_monic(self):
        return self.coeffs[-1] == 1.0

    def leading(self):
        return float(self.coeffs[-1])

    def monic(self):
        if self.is_zero:
            raise ValueError("zero polynomial cannot be made monic")
        return Polynomial(self.coeffs / self.coeffs[-1])

    def __call__(self, s):
        # Horner in ascending storage -> evaluate reversed.
        return np.polyval(self.coeffs[::-1], s)

    def derivative(self):
        if self.degree == 0:
            return Polynomial([0.0])
        k = np.arange(1, len(self.coeffs))
        return Polynomial(self.coeffs[1:] * k)

    def roots(self):
        if self.degree == 0:
            return np.array([])
        return np.roots(self.coeffs[::-1])

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            return poly_mul(self, other)
        return Polynomial(self.coeffs * float(other))

    __rmul__ = __mul__

    def __add__(self, other):
        return poly_add_scaled(self, other, 1.0)

    def __sub__(self, other):
        return poly_add_scaled(self, other, -1.0)

    def __eq__(self, other):
        return isinstance(other, Polynomial) and np.array_equal(
            self.coeffs, other.coeffs
        )

    def __repr__(self):
        return f"Polynomial({self.coeffs.tolist()})"


def poly_mul(a: Polynomial, b: Polynomial) -> Polynomial:
    """Coefficient convolution; degree adds for nonzero inputs."""
    return Polynomial(np.convolve(a.coeffs, b.coeffs))


def poly_add_scaled(a: Polynomial, b: Polynomial, c: float) -> Polynomial:
    """a + c*b, with trailing-zero normalization."""
    la, lb = len(a.coeffs), len(b.coeffs)
    out = np.zeros(max(la, lb))
    out[:la] = a.coeffs
    out[:lb] += c * b.coeffs
    return Polynomial(out)


def poly_power(a: Polynomial, k: int) -> Polynomial:
    out = Polynomial([1.0])
    for _ in range(k):
        out = poly_mul(out, a)
    return out


def from_roots(roots) -> Polynomial:
    """Monic real polynomial with the given (real) roots."""
    out = Polynomial([1.0])
    for r in roots:
        out = poly_mul(out, Polynomial([-float(r), 1.0]))
    return out


def is_hurwitz(p: Polynomial, eps: float = 1e-9) -> bool:
    """Routh-Hurwitz tabular test: all roots strictly in the open LHP.

    Zero pivot entries use the epsilon-perturbation rule; a full zero row
    uses the auxiliary-polynomial derivative rule (such rows indicate
    imaginary-axis-symmetric roots, hence not Hurwitz, but the table is
    completed to keep the decision uniform).
    """
    if p.is_zero:
        return False
    c = p.coeffs / p.coeffs[-1]  # normalize leading coefficient to +1
    deg = len(c) - 1
    if deg == 0:
        # Constant: vacuously true (no roots); callers wanting degree >= 1
        # should check before calling.
        return True
    scale = np.max(np.abs(c))
    # A Hurwitz polynomial has all coefficients strictly positive; this is
    # only a fast reject, the table below is the decision.
    if np.any(c <= 0.0):
        return False

    # First two rows from alternating coefficients (descending degree),
    # padded so every row has the same width.
    d = c[::-1]
    width = (deg + 2) // 2 + 1
    row_hi = np.zeros(width)
    row_lo = np.zeros(width)
    row_hi[: len(d[0::2])] = d[0::2]
    row_lo[: len(d[1::2])] = d[1::2]

    first_column = [row_hi[0]]
    power = deg - 1  # degree label of row_lo
    while power >= 0:
        if np.all(np.abs(row_lo) <= eps * scale):
            # Zero row: differentiate the auxiliary polynomial built from
            # row_hi (even powers of power+1).
            aux_pows = (power + 1) - 2 * np.arange(width)
            row_lo = row_hi * np.clip(aux_pows, 0, None)
        first_column.append(row_lo[0])
        pivot = row_lo[0]
        if abs(pivot) <= eps * scale:
            pivot = eps * scale  # epsilon-perturbation rule
        new = np.zeros(width)
        new[:-1] = (pivot * row_hi[1:] - row_hi[0] * row_lo[1:]) / pivot
        row_hi, row_lo = row_lo, new
        power -= 1

    col = np.asarray(first_column)
    return bool(np.all(col > eps * scale))


@dataclass(frozen=True)
class RationalTF:
    """gain * num(s) / den(s); den must be nonzero."""

    num: Polynomial
    den: Polynomial
    gain: float = 1.0

    def __post_init__(self):
        if self.den.is_zero:
            raise ValueError("denominator must be nonzero")

    @property
    def proper(self):
        return self.num.degree <= self.den.degree

    @property
    def strictly_proper(self):
        return self.num.degree < self.den.degree

    def __call__(self, s):
        return self.gain * self.num(s) / self.den(s)


def companion(den: Polynomial):
    """Companion (controllable canonical) A matrix and input vector for a
    monic-normalized denominator. States x_i realize s**i / den on the
    input, i = 0..deg-1."""
    d = den.monic().coeffs
    n = len(d) - 1
    if n == 0:
        raise ValueError("denominator must have degree >= 1")
    A = np.zeros((n, n))
    A[:-1, 1:] = np.eye(n - 1)
    A[-1, :] = -d[:-1]
    B = np.zeros(n)
    B[-1] = 1.0
    return A, B


def realize_ccf(tf: RationalTF):
    """Controllable-canonical state-space realization of a proper tf.

    Returns (A, B, C, D). Biproper inputs get feedthrough
    D = gain * (leading numerator coefficient after den normalization);
    strictly proper inputs get D = 0.
    """
    if not tf.proper:
        raise ImproperTransferFunction(
            f"deg(num)={tf.num.degree} > deg(den)={tf.den.degree}: "
            "cannot realize an improper transfer function"
        )
    den_lead = tf.den.leading()
    num = Polynomial(tf.num.coeffs * (tf.gain / den_lead))
    den = tf.den.monic()
    n = den.degree
    if tf.num.degree == tf.den.degree:
        d = num.leading()
        # num = d*den + rem, deg(rem) < n
        rem = poly_add_scaled(num, den, -d)
    else:
        d = 0.0
        rem = num
    A, B = companion(den)
    C = np.zeros(n)
    C[: len(rem.coeffs)] = rem.coeffs
    if rem.is_zero:
        C[:] = 0.0
    return A, B, C, float(d)
