"""The ideal-gain matching solver and its residual check."""

import numpy as np
import pytest

from mracsim.matching import (MatchingError, default_omega,
                              matching_residual, solve_matching)
from mracsim.poly import Polynomial, from_roots, poly_mul


def _residual_ok(gains, P, Z, kp, Omega, Rm, tol=1e-8):
    res = matching_residual(gains, P, Z, kp, Omega, Rm)
    scale = max(np.max(np.abs(P.coeffs)), np.max(np.abs(Z.coeffs)),
                np.max(np.abs(Omega.coeffs)), np.max(np.abs(Rm.coeffs)))
    return np.max(np.abs(res.coeffs)) <= tol * scale if not res.is_zero \
        else True


def test_boeing_residual(boeing, boeing_omega, boeing_rm, boeing_gains):
    assert _residual_ok(boeing_gains, boeing.P, boeing.Z, boeing.kp,
                        boeing_omega, boeing_rm)


def test_theta4_is_inverse_gain(boeing_gains, boeing):
    assert boeing_gains.theta4 == pytest.approx(1.0 / boeing.kp)
    assert boeing_gains.theta_p(boeing.kp)[-1] == pytest.approx(1.0)


def test_full_vector_layout(boeing_gains, boeing):
    full = boeing_gains.theta_star_full(boeing.kp)
    assert full.shape == (18,)
    assert full[16] == pytest.approx(boeing.kp)          # rho*
    assert full[17] == pytest.approx(boeing_gains.theta4)  # lambda*


def test_plant_equal_model_gives_zero_gains():
    # a plant that already equals the reference model (P = Rm, Z = 1,
    # kp = 1) needs no correction: every gain solves to zero
    Z = Polynomial([1.0])
    Rm = Polynomial([2.0, 3.0, 1.0])
    P = Rm
    g = solve_matching(P, Z, 1.0, Rm=Rm)
    assert np.allclose(g.theta1, 0.0, atol=1e-12)
    assert np.allclose(g.theta2, 0.0, atol=1e-12)
    assert g.theta3 == pytest.approx(0.0, abs=1e-12)
    assert g.theta4 == pytest.approx(1.0)


def test_random_plants_residual():
    rng = np.random.default_rng(2024)
    checked = 0
    while checked < 200:
        n = int(rng.integers(2, 6))
        m = int(rng.integers(0, n))
        P = from_roots(rng.uniform(-2.0, 1.0, size=n))
        Z = from_roots(-rng.uniform(0.1, 3.0, size=m)) if m else \
            Polynomial([1.0])
        kp = float(rng.choice([-1, 1]) * rng.uniform(0.1, 3.0))
        Rm = from_roots(-rng.uniform(0.5, 3.0, size=n - m))
        try:
            g = solve_matching(P, Z, kp, Rm=Rm)
        except MatchingError:
            continue  # randomly degenerate (non-coprime) draw
        assert _residual_ok(g, P, Z, kp, default_omega(n), Rm), \
            f"n={n} m={m} kp={kp}"
        checked += 1


def test_rejects_bad_inputs():
    P = Polynomial([2.0, 3.0, 1.0])
    Z = Polynomial([1.0, 1.0])
    Rm = Polynomial([1.0, 1.0])
    with pytest.raises(MatchingError):
        solve_matching(P, Z, 0.0, Rm=Rm)                  # zero gain
    with pytest.raises(MatchingError):
        solve_matching(Polynomial([2.0, 3.0, 2.0]), Z, 1.0, Rm=Rm)
    with pytest.raises(MatchingError):
        solve_matching(P, Polynomial([0.0, 0.0, 1.0, 1.0]), 1.0, Rm=Rm)
    with pytest.raises(MatchingError):
        solve_matching(P, Z, 1.0, Rm=Polynomial([1.0, 2.0, 1.0]))


def test_shared_root_is_singular():
    # P and Z share the factor (s+1): the system has no unique solution
    P = poly_mul(Polynomial([1.0, 1.0]), Polynomial([2.0, 1.0]))
    Z = Polynomial([1.0, 1.0])
    with pytest.raises(MatchingError):
        solve_matching(P, Z, 1.0, Rm=Polynomial([1.0, 1.0]))
