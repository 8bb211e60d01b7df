import numpy as np
import pytest

from nafdyn import build_lvcm, build_tully
from nafdyn.adiabatic import (
    DegenerateStatesError,
    adiabatize,
    diabatic_leg_propagator,
    effective_potential,
    eigh_frames,
    short_time_propagator,
    to_adiabatic_initial,
    veff_from_contractions,
)

from conftest import rng


def random_frame(F=3, N=2, seed=0):
    r = rng(seed)
    V = r.standard_normal((F, F))
    V = 0.5 * (V + V.T) + np.diag(np.arange(F) * 2.0)  # well separated
    dV = r.standard_normal((N, F, F))
    dV = 0.5 * (dV + dV.transpose(0, 2, 1))
    return V, dV


def test_two_state_offdiagonal():
    delta = 0.3
    V = np.array([[0.0, delta], [delta, 0.0]])
    frame = adiabatize(V, np.zeros((1, 2, 2)))
    assert np.allclose(frame.energies, [-delta, delta])
    c = 1 / np.sqrt(2)
    # columns up to the sign fixed by the identity reference
    assert np.allclose(np.abs(frame.trans), c)
    assert np.all(np.diag(frame.trans) >= 0)


def test_frame_invariants():
    V, dV = random_frame(4, 3, seed=2)
    frame = adiabatize(V, dV)
    T = frame.trans
    assert np.abs(T.T @ T - np.eye(4)).max() <= 1e-10
    assert np.abs(T @ np.diag(frame.energies) @ T.T - V).max() <= 1e-10
    # antisymmetry of the coupling components
    assert np.abs(frame.nac + frame.nac.transpose(0, 2, 1)).max() <= 1e-10
    # Hellmann-Feynman: offdiag of T^T dV T equals (E_n - E_m) d_mn
    W = np.einsum("nk,jnm,ml->jkl", T, dV, T)
    gaps = frame.energies[None, :] - frame.energies[:, None]
    lhs = W - np.einsum("jk,kl->jkl", np.zeros((3, 4)), np.eye(4))
    for j in range(3):
        off = ~np.eye(4, dtype=bool)
        assert np.allclose(W[j][off], (gaps * frame.nac[j])[off], atol=1e-10)
        assert np.allclose(np.diag(W[j]), frame.grad_energies[j], atol=1e-12)


def test_decoupled_lvcm_has_zero_coupling():
    model = build_lvcm(np.array([0.0, 0.2]), np.array([0.01, 0.02]),
                       np.zeros((2, 2)), np.zeros((2, 2, 2)))
    R = np.array([0.3, -0.7])
    frame = adiabatize(model.potential(R), model.grad_dense(R))
    assert np.abs(frame.nac).max() == 0.0


def test_tully_sac_coupling_matches_finite_difference():
    model = build_tully("sac")
    h = 1e-6  # small: |R| keeps only C^1 smoothness at the origin

    def aligned_T(r, ref):
        _, T, _ = eigh_frames(model.potential(np.array([[r]])),
                              None if ref is None else ref[None])
        return T[0]

    T0 = aligned_T(0.0, None)
    Tp = aligned_T(h, T0)
    Tm = aligned_T(-h, T0)
    dT = (Tp - Tm) / (2 * h)
    d12_fd = T0[:, 0] @ dT[:, 1]
    frame = adiabatize(model.potential(np.array([0.0])),
                       model.grad_dense(np.array([0.0])))
    assert frame.nac[0, 0, 1] == pytest.approx(d12_fd, abs=1e-5)


def test_degeneracy_error():
    V = np.diag([0.0, 1e-13])
    with pytest.raises(DegenerateStatesError):
        adiabatize(V, np.zeros((1, 2, 2)), location=np.array([1.0]))


def test_sign_alignment_follows_previous_frame():
    V, dV = random_frame(3, 1, seed=4)
    f0 = adiabatize(V, dV)
    # a slightly perturbed potential keeps all column overlaps positive
    V2 = V + 1e-4 * dV[0]
    f1 = adiabatize(V2, dV, prev=f0)
    assert np.all(np.sum(f0.trans * f1.trans, axis=0) > 0)


def test_effective_potential():
    V, dV = random_frame(3, 2, seed=5)
    frame = adiabatize(V, dV)
    veff0 = effective_potential(frame, np.zeros(2), np.ones(2))
    assert np.allclose(veff0, np.diag(frame.energies))
    P = np.array([1.3, -0.4])
    M = np.array([2.0, 1.0])
    veff = effective_potential(frame, P, M)
    assert np.abs(veff - veff.conj().T).max() <= 1e-12
    want = -1j * np.einsum("j,jnk->nk", P / M, frame.nac)[0, 1]
    assert veff[0, 1] == pytest.approx(want)
    # batched construction agrees
    Wv = np.einsum("nk,jnm,j,ml->kl", frame.trans, dV, P / M, frame.trans)
    veff_b = veff_from_contractions(frame.energies[None].copy(), Wv[None])[0]
    assert np.allclose(veff_b, veff, atol=1e-12)


def test_short_time_propagator():
    V, dV = random_frame(3, 2, seed=6)
    frame = adiabatize(V, dV)
    veff = effective_potential(frame, np.array([0.7, 0.1]), np.ones(2))
    assert np.allclose(short_time_propagator(veff, 0.0), np.eye(3), atol=1e-14)
    U = short_time_propagator(veff, 0.31)
    assert np.abs(U @ U.conj().T - np.eye(3)).max() <= 1e-12
    # diagonal phases
    d = np.diag([0.1, 0.4, -0.2]).astype(complex)
    assert np.allclose(np.diag(short_time_propagator(d, 2.0)),
                       np.exp(-1j * 2.0 * np.diag(d).real))


def test_diabatic_leg_propagator():
    V = np.array([[0.0, 0.2], [0.2, 0.1]])
    U = diabatic_leg_propagator(np.eye(2), V, np.eye(2), 0.4)
    w, S = np.linalg.eigh(V)
    direct = (S * np.exp(-1j * 0.4 * w)) @ S.T
    assert np.allclose(U, direct, atol=1e-13)
    assert np.abs(U @ U.conj().T - np.eye(2)).max() <= 1e-12
    # for an R-independent V this equals the adiabatic propagator conjugated by T
    frame = adiabatize(V, np.zeros((1, 2, 2)))
    U2 = diabatic_leg_propagator(frame.trans, V, frame.trans, 0.4)
    Uad = short_time_propagator(np.diag(frame.energies).astype(complex), 0.4)
    assert np.allclose(U2, Uad, atol=1e-12)


def test_to_adiabatic_initial():
    r = rng(8)
    g = r.standard_normal(3) + 1j * r.standard_normal(3)
    G = r.standard_normal((3, 3)) + 1j * r.standard_normal((3, 3))
    G = 0.5 * (G + G.conj().T)
    g2, G2 = to_adiabatic_initial(g, G, np.eye(3))
    assert np.allclose(g2, g) and np.allclose(G2, G)
    V, dV = random_frame(3, 1, seed=9)
    T = adiabatize(V, dV).trans
    g2, G2 = to_adiabatic_initial(g, G, T)
    assert np.linalg.norm(g2) == pytest.approx(np.linalg.norm(g))
    assert np.trace(G2) == pytest.approx(np.trace(G))
