import numpy as np
import pytest

from nafdyn import (
    build_cavity,
    build_et_model,
    build_lvcm,
    build_spin_boson,
    build_tully,
    discretize_ohmic,
)
from nafdyn.models import FMO_HAMILTONIAN_CM1
from nafdyn.units import C_LIGHT_AU, au_to_cm1, cm1_to_au

from conftest import all_model_families, rng, toy_morse


def random_points(model, n, seed=11, scale=1.5):
    r = rng(seed)
    return scale * r.standard_normal((n, model.nmodes))


def fd_gradient(model, R, h=1e-5):
    B, N = R.shape
    F = model.nstates
    out = np.empty((B, N, F, F))
    for j in range(N):
        dR = np.zeros(N)
        dR[j] = h
        out[:, j] = (model.potential(R + dR) - model.potential(R - dR)) / (2 * h)
    return out


def test_potential_symmetry_all_families(family_model):
    R = random_points(family_model, 20)
    V = family_model.potential(R)
    asym = np.abs(V - np.swapaxes(V, 1, 2)).max()
    scale = max(np.abs(V).max(), 1.0)
    assert asym <= 1e-12 * scale


def test_analytic_gradients_match_finite_differences(family_model):
    R = random_points(family_model, 8, scale=1.0)
    ana = family_model.grad_dense(R)
    num = fd_gradient(family_model, R)
    scale = np.abs(num).max() + 1e-10
    assert np.abs(ana - num).max() / scale <= 1e-6


def test_contracted_gradients_match_dense(family_model):
    model = family_model
    r = rng(21)
    R = random_points(model, 6)
    dV = model.grad_dense(R)
    F = model.nstates
    sigma = r.standard_normal((6, F, F))
    sigma = 0.5 * (sigma + np.swapaxes(sigma, 1, 2))
    v = r.standard_normal((6, model.nmodes))
    a = r.standard_normal((6, F))
    b = r.standard_normal((6, F))
    assert np.allclose(model.grad_trace(R, sigma),
                       np.einsum("bjnm,bnm->bj", dV, sigma), atol=1e-12, rtol=1e-10)
    assert np.allclose(model.grad_vdot(R, v),
                       np.einsum("bjnm,bj->bnm", dV, v), atol=1e-12, rtol=1e-10)
    assert np.allclose(model.grad_bilinear(R, a, b),
                       np.einsum("bjnm,bn,bm->bj", dV, a, b), atol=1e-12, rtol=1e-10)


def test_unit_round_trip():
    x = np.array([12410.0, -87.7, 35.0, 106.14])
    assert np.allclose(au_to_cm1(cm1_to_au(x)), x, rtol=1e-12)


# --- spin-boson ---------------------------------------------------------


def test_spin_boson_at_origin():
    model = build_spin_boson(0.0, 0.4, discretize_ohmic(0.1, 1.0, 5))
    V = model.potential(np.zeros(5))
    assert np.allclose(V, [[0.0, 0.4], [0.4, 0.0]], atol=1e-15)


def test_spin_boson_gradient_elements():
    bath = discretize_ohmic(0.2, 1.3, 4)
    model = build_spin_boson(0.1, 0.4, bath)
    R = rng(2).standard_normal(4)
    dV = model.grad_dense(R)
    assert np.allclose(dV[:, 0, 0], bath.couplings + bath.omegas**2 * R)
    assert np.allclose(dV[:, 1, 1], -bath.couplings + bath.omegas**2 * R)
    assert np.allclose(dV[:, 0, 1], 0.0)


def test_spin_boson_paper_sets_construct():
    for alpha in (0.1, 0.4):
        for wc in (1.0, 2.5):
            model = build_spin_boson(0.0, 1.0, discretize_ohmic(alpha, wc, 300), beta=5.0)
            assert model.nmodes == 300
            assert model.nstates == 2


# --- FMO ----------------------------------------------------------------


def test_fmo_system_matrix_values():
    h = FMO_HAMILTONIAN_CM1
    assert h[0, 0] == 12410.0
    assert h[0, 1] == -87.7
    assert h[3, 6] == h[6, 3] == -63.3
    assert np.allclose(h, h.T)


def test_fmo_mode_count(family_model):
    if family_model.kind != "fmo":
        pytest.skip("fmo only")
    assert family_model.nmodes == 7 * family_model.bath.nb


# --- cavity -------------------------------------------------------------


def test_cavity_frequencies_and_node_pattern():
    model = build_cavity(nmodes=8)
    L = 236200.0
    assert np.allclose(model.mode_omegas, np.arange(1, 9) * np.pi * C_LIGHT_AU / L)
    # atom at the cavity midpoint: even modes have a node there
    assert np.allclose(model.mode_lambdas[1::2], 0.0, atol=1e-12)
    assert np.all(np.abs(model.mode_lambdas[0::2]) > 0)


def test_cavity_defaults():
    model = build_cavity(nmodes=400)
    assert model.nstates == 3
    assert np.allclose(model.levels, [-0.6738, -0.2798, -0.1547])
    assert model.dipoles[0, 1] == -1.034
    assert model.dipoles[1, 2] == -2.536
    assert model.dipoles[0, 2] == 0.0
    two = build_cavity(nmodes=4, two_level=True)
    assert two.nstates == 2
    assert two.init.electronic.indices == (1,)


# --- LVCM ---------------------------------------------------------------


def test_lvcm_decoupled_limit():
    omegas = np.array([0.01, 0.02])
    energies = np.array([0.0, 0.05])
    model = build_lvcm(energies, omegas, np.zeros((2, 2)), np.zeros((2, 2, 2)))
    R = rng(5).standard_normal((4, 2))
    V = model.potential(R)
    ub = 0.5 * (R * R) @ omegas
    assert np.allclose(V[:, 0, 1], 0.0)
    assert np.allclose(V[:, 0, 0], ub)
    assert np.allclose(V[:, 1, 1], ub + 0.05)


def test_lvcm_coupling_gradient_and_masses():
    omegas = np.array([0.01, 0.02, 0.03])
    kappa = np.zeros((2, 3))
    lam = np.zeros((2, 2, 3))
    lam[0, 1] = lam[1, 0] = [1e-3, 2e-3, 3e-3]
    model = build_lvcm(np.array([0.0, 0.1]), omegas, kappa, lam)
    dV = model.grad_dense(np.zeros(3))
    assert np.allclose(dV[:, 0, 1], lam[0, 1])
    assert np.allclose(model.masses, 1.0 / omegas)
    # kinetic term realizes sum w_k P_k^2 / 2
    P = rng(6).standard_normal(3)
    assert model.kinetic(P) == pytest.approx(0.5 * np.sum(omegas * P**2))


# --- Morse --------------------------------------------------------------


def test_morse_minima_and_coupling_peaks():
    model = toy_morse()
    for i, (rm, ci) in enumerate(zip(model.r_min, model.c)):
        V = model.potential(np.array([rm]))
        assert V[i, i] == pytest.approx(ci, abs=1e-14)
    V = model.potential(np.array([2.5]))
    assert V[0, 1] == pytest.approx(0.002, abs=1e-14)
    assert model.masses[0] == 20000.0


# --- Tully --------------------------------------------------------------


def test_tully_sac_limits():
    model = build_tully("sac")
    assert model.potential(np.array([0.0]))[0, 0] == 0.0
    assert model.potential(np.array([40.0]))[0, 0] == pytest.approx(0.01, rel=1e-10)
    assert model.potential(np.array([-40.0]))[0, 0] == pytest.approx(-0.01, rel=1e-10)


def test_tully_ecr_coupling_continuous():
    model = build_tully("ecr")
    v_left = model.potential(np.array([-1e-12]))[0, 1]
    v_right = model.potential(np.array([1e-12]))[0, 1]
    v_zero = model.potential(np.array([0.0]))[0, 1]
    assert v_zero == pytest.approx(0.1, abs=1e-10)
    assert v_left == pytest.approx(v_right, abs=1e-10)
    assert model.potential(np.array([0.0]))[0, 0] == -0.0006


def test_tully_dac_well_depth():
    model = build_tully("dac")
    assert model.potential(np.array([0.0]))[1, 1] == pytest.approx(-0.05, abs=1e-14)
    assert model.potential(np.array([0.0]))[0, 0] == 0.0


def test_tully_unknown_variant():
    with pytest.raises(ValueError):
        build_tully("xyz")
    with pytest.raises(ValueError):
        build_tully("sac", nonsense=2.0)


# --- electron transfer --------------------------------------------------


def test_et_bias_and_coupling():
    model = build_et_model(eps=0.012, nb=6)
    V = model.potential(np.zeros(7))
    assert V[0, 0] - V[1, 1] == pytest.approx(0.012, abs=1e-14)
    assert V[0, 1] == pytest.approx(5e-5)
    assert model.c_s == pytest.approx(3.5e-4 * np.sqrt(2.39e-2 / 2.0), rel=1e-12)


def test_et_bath_gradient():
    model = build_et_model(eps=0.0, nb=6)
    R = rng(7).standard_normal(7)
    dV = model.grad_dense(R)
    w2 = model.bath.omegas**2
    expected = w2 * R[1:] + model.bath.couplings * R[0]
    assert np.allclose(dV[1:, 0, 0], expected)
    assert np.allclose(dV[1:, 1, 1], expected)


def test_model_family_fixture_covers_everything(family_model):
    assert family_model.nstates >= 2
    assert family_model.init is not None
