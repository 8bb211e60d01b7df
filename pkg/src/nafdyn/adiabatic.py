"""Adiabatic representation at a nuclear geometry: energies, sign-continuous
transformation matrices, nonadiabatic couplings, and short-time electronic
propagators.

The single-trajectory interface returns a full ``AdiabaticFrame`` (with the
dense coupling family d); the batched helpers used by the propagation engine
keep only (E, T) and build contracted couplings on demand.
"""

from dataclasses import dataclass

import numpy as np

GAP_TOL = 1e-10


class DegenerateStatesError(RuntimeError):
    """Raised when adiabatic energies come closer than the gap tolerance."""

    def __init__(self, gap, location):
        self.gap = gap
        self.location = np.asarray(location)
        super().__init__(f"adiabatic gap {gap:.3e} below tolerance at R={self.location}")


@dataclass
class AdiabaticFrame:
    energies: np.ndarray  # (F,) ascending
    trans: np.ndarray  # (F, F), columns are adiabatic states in the diabatic basis
    nac: np.ndarray  # (N, F, F) antisymmetric coupling components
    grad_energies: np.ndarray  # (N, F)


def align_columns(T, prev_T):
    """Flip eigenvector-column signs so overlaps with the previous frame are >= 0."""
    overlap = np.sum(prev_T * T, axis=-2)
    return T * np.where(overlap < 0.0, -1.0, 1.0)[..., None, :]


def _eigh_sym2(V):
    """Closed-form eigendecomposition of batched real-symmetric 2x2 matrices
    (ascending), much faster than the LAPACK loop."""
    a = V[..., 0, 0]
    b = V[..., 1, 1]
    c = V[..., 0, 1]
    mean = 0.5 * (a + b)
    r = np.hypot(0.5 * (a - b), c)
    E = np.stack([mean - r, mean + r], axis=-1)
    theta = 0.5 * np.arctan2(2.0 * c, a - b)
    ct, st = np.cos(theta), np.sin(theta)
    T = np.empty(V.shape)
    T[..., 0, 0] = -st
    T[..., 1, 0] = ct
    T[..., 0, 1] = ct
    T[..., 1, 1] = st
    return E, T


def eigh_frames(V, prev_T=None, gap_tol=GAP_TOL):
    """Batched eigendecomposition with sign continuity.

    Returns (E, T, degenerate) where degenerate flags batch entries whose
    smallest adjacent gap is below gap_tol.
    """
    if V.shape[-1] == 2:
        E, T = _eigh_sym2(V)
    else:
        E, T = np.linalg.eigh(V)
    if prev_T is None:
        prev_T = np.broadcast_to(np.eye(T.shape[-1]), T.shape)
    T = align_columns(T, prev_T)
    gaps = np.min(np.diff(E, axis=-1), axis=-1) if E.shape[-1] > 1 else np.full(E.shape[:-1], np.inf)
    return E, T, gaps < gap_tol


def adiabatize(V, gradV, prev=None, gap_tol=GAP_TOL, location=None):
    """Full adiabatic frame at one geometry from V (F,F) and gradV (N,F,F)."""
    V = np.asarray(V, float)
    gradV = np.asarray(gradV, float)
    prev_T = None if prev is None else prev.trans[None]
    E, T, degen = eigh_frames(V[None], prev_T, gap_tol)
    if degen[0]:
        gap = float(np.min(np.diff(E[0])))
        raise DegenerateStatesError(gap, location if location is not None else [])
    E, T = E[0], T[0]
    W = np.einsum("nk,jnm,ml->jkl", T, gradV, T)  # T^T dV_J T per mode
    grad_e = np.einsum("jkk->jk", W).copy()
    denom = E[None, :] - E[:, None]  # E_n - E_m at (m, n)
    np.fill_diagonal(denom, np.inf)
    nac = W / denom[None, :, :]
    return AdiabaticFrame(E, T, nac, grad_e)


def effective_potential(frame, P, masses):
    """V_eff[n,k] = E_n delta_nk - i sum_J (P_J/M_J) d_nk^J (complex Hermitian)."""
    v = np.asarray(P, float) / np.asarray(masses, float)
    vd = np.einsum("j,jnk->nk", v, frame.nac)
    return np.diag(frame.energies).astype(complex) - 1j * vd


def veff_from_contractions(E, Wv):
    """Batched effective potential from Wv = T^T (sum_J v_J dV_J) T.

    Off-diagonal couplings (P/M).d_nk equal Wv_nk / (E_k - E_n).
    """
    denom = E[..., None, :] - E[..., :, None]  # E_k - E_n at (n, k)
    F = E.shape[-1]
    idx = np.arange(F)
    denom[..., idx, idx] = np.inf
    veff = (-1j * (Wv / denom)).astype(complex)
    veff[..., idx, idx] += E
    return veff


def _expm_herm2(H, dt):
    """exp(-i dt H) for batched Hermitian 2x2 via the Pauli decomposition:
    e^{-i dt mean} [cos(w dt) 1 - i sin(w dt)/w (H - mean 1)]."""
    mean = 0.5 * (H[..., 0, 0].real + H[..., 1, 1].real)
    d = 0.5 * (H[..., 0, 0].real - H[..., 1, 1].real)
    z = H[..., 0, 1]
    w = np.sqrt(d * d + z.real**2 + z.imag**2)
    sinc = np.where(w > 1e-300, np.sin(w * dt) / np.where(w > 1e-300, w, 1.0), dt)
    cosw = np.cos(w * dt)
    U = np.empty(H.shape, complex)
    U[..., 0, 0] = cosw - 1j * sinc * d
    U[..., 1, 1] = cosw + 1j * sinc * d
    U[..., 0, 1] = -1j * sinc * z
    U[..., 1, 0] = -1j * sinc * np.conj(z)
    return U * np.exp(-1j * mean * dt)[..., None, None]


def short_time_propagator(veff, dt):
    """exp(-i dt V_eff) through the Hermitian eigendecomposition; unitary."""
    if veff.shape[-1] == 2:
        return _expm_herm2(np.asarray(veff, complex), dt)
    w, U = np.linalg.eigh(veff)
    phase = np.exp(-1j * dt * w)
    return np.einsum("...nk,...k,...mk->...nm", U, phase, np.conj(U))


def diabatic_leg_propagator(T_next, V_next, T_cur, dt):
    """Alternative step propagator T(R')^T exp(-i dt V(R')) T(R) for
    diabatic-native models; unitary as a product of unitaries."""
    w, U = np.linalg.eigh(np.asarray(V_next, float))
    expV = np.einsum("...nk,...k,...mk->...nm", U, np.exp(-1j * dt * w), U)
    return np.swapaxes(T_next, -1, -2) @ expV @ T_cur


def to_adiabatic_initial(g_dia, Gamma_dia, T):
    """Rotate diabatic mapping variables and commutator matrix into the
    adiabatic frame: g~ = T^T g, Gamma~ = T^T Gamma T."""
    Tt = np.swapaxes(T, -1, -2)
    g_adia = np.einsum("...nk,...k->...n", Tt, g_dia)
    Gamma_adia = None
    if Gamma_dia is not None:
        Gamma_adia = Tt @ Gamma_dia @ T
    return g_adia, Gamma_adia
