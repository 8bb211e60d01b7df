import numpy as np
import pytest

from nafdyn.exact import (
    electronic_exact,
    mc_verify_sqz_equivalence,
    mc_verify_window_integrals,
    propagator,
)

from conftest import rng


def random_hermitian(F, seed=0, scale=1.0):
    r = rng(seed)
    H = r.standard_normal((F, F)) + 1j * r.standard_normal((F, F))
    return scale * 0.5 * (H + H.conj().T)


def test_exact_correlation_at_t0():
    H = random_hermitian(3, 1)
    for n in range(3):
        for m in range(3):
            val = electronic_exact(H, 0.0, n, m, n, m)
            # U(0) = 1 so U_ln conj(U_km) = delta_ln delta_km
            assert val == pytest.approx(1.0 if n == m else 0.0, abs=1e-14)


def test_exact_correlation_diagonal_h():
    H = np.diag([0.2, -0.1, 0.05]).astype(complex)
    t = 1.7
    val = electronic_exact(H, t, 0, 1, 1, 0)  # l=0 -> U_00, k=1 -> conj(U_11)
    assert val == pytest.approx(np.exp(-1j * (0.2 - (-0.1)) * t))


def test_propagator_unitarity():
    H = random_hermitian(4, 2)
    U = propagator(H, 2.3)
    assert np.abs(U @ U.conj().T - np.eye(4)).max() <= 1e-12


def test_window_integral_identities():
    for F in (2, 3):
        checks = mc_verify_window_integrals(F, 400_000, rng(10 + F))
        for c in checks:
            assert c.passed, c.line()


def test_sqz_equivalence_two_states():
    H = random_hermitian(2, 5, scale=0.7)
    gap = np.linalg.eigvalsh(H)
    period = 2 * np.pi / (gap[1] - gap[0])
    t_grid = np.linspace(0, period, 5)
    rows = mc_verify_sqz_equivalence(0.5, H, t_grid, 200_000, rng(6))
    for row in rows:
        if row["t"] == 0.0:
            # both estimators give exactly the initial occupation
            assert row["tw"] == pytest.approx(1.0 if row["state"] == 0 else 0.0)
            assert row["sqz"] == pytest.approx(1.0 if row["state"] == 0 else 0.0)
        sig = np.hypot(row["tw_err"], row["sqz_err"])
        assert abs(row["tw"] - row["sqz"]) <= 3.0 * max(sig, 1e-4), row
        assert abs(row["tw"] - row["exact"]) <= 3.0 * max(row["tw_err"], 1e-4), row
        assert abs(row["sqz"] - row["exact"]) <= 3.0 * max(row["sqz_err"], 1e-4), row
