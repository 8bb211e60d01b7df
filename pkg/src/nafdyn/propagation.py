"""Per-trajectory time steppers: the six-step nonadiabatic-field integrator
(NaF, NaF-TW, NaF-TW2), the mean-field stepper (Ehrenfest, SQC-TW, SQC-TW2),
and fewest-switches surface hopping.

The core engine advances a whole batch of trajectories through numpy at once
(``EnsembleState``); thin single-trajectory wrappers (``step_naf`` etc.)
operate on a ``PhaseSpacePoint``.  The nonadiabatic-field mapping energy
H = P^T M^-1 P / 2 + E_occ(R) is pinned to its initial value by the final
momentum rescale of every step; when that rescale is impossible the interval
is retried with a halved time step (depth cap 8) before the trajectory is
declared failed.
"""

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .adiabatic import eigh_frames, short_time_propagator, veff_from_contractions, GAP_TOL
from .mapping import (
    actions,
    gamma_init,
    quasi_density_gamma,
    quasi_density_tw,
    sample_cps,
    sample_tw,
)
from .sampling import sample_nuclear

log = logging.getLogger(__name__)

MAX_HALVINGS = 8
KIN_EPS = 1e-300

NAF_METHODS = ("naf", "naf-tw", "naf-tw2")
MEANFIELD_METHODS = ("ehrenfest", "sqc-tw", "sqc-tw2")
ALL_METHODS = NAF_METHODS + MEANFIELD_METHODS + ("fssh",)


@dataclass(frozen=True)
class MethodVariant:
    """Dynamics method plus its options."""

    name: str
    gamma: float = 0.5  # CPS sphere parameter (naf only)
    perpendicular_force: bool = False
    gap_tol: float = GAP_TOL

    def __post_init__(self):
        if self.name not in ALL_METHODS:
            raise ValueError(f"unknown method {self.name!r}; choose from {ALL_METHODS}")

    @property
    def family(self):
        if self.name in NAF_METHODS:
            return "naf"
        if self.name in MEANFIELD_METHODS:
            return "meanfield"
        return "fssh"

    @property
    def sampler(self):
        """Electronic initial-condition sampler: cps | tw | delta."""
        if self.name == "naf":
            return "cps"
        if self.name in ("naf-tw", "naf-tw2", "sqc-tw", "sqc-tw2"):
            return "tw"
        return "delta"

    @property
    def estimator(self):
        """Which estimator family reads this method's ensembles."""
        if self.name == "naf":
            return "cps"
        if self.name in ("naf-tw", "naf-tw2", "sqc-tw", "sqc-tw2"):
            return "tw"
        return self.name  # ehrenfest | fssh

    @property
    def uses_gamma_matrix(self):
        return self.name in ("naf", "naf-tw2", "sqc-tw", "sqc-tw2")

    @property
    def evolves_gamma(self):
        return self.name in ("naf", "naf-tw2", "sqc-tw2")

    def quasi_density(self, g, Gamma):
        if self.name == "naf-tw":
            return quasi_density_tw(g)
        if self.name in ("ehrenfest", "fssh"):
            return 0.5 * (g[..., :, None] * np.conj(g[..., None, :]))
        return quasi_density_gamma(g, Gamma)


@dataclass
class EnsembleState:
    """Batched trajectory state in the adiabatic representation."""

    R: np.ndarray  # (B, N)
    P: np.ndarray  # (B, N)
    g: np.ndarray  # (B, F) complex
    Gamma: np.ndarray  # (B, F, F) complex or None
    j_occ: np.ndarray  # (B,) int
    energies: np.ndarray  # (B, F)
    trans: np.ndarray  # (B, F, F)
    force: np.ndarray  # (B, N) cached total force at the current time
    e_ref: np.ndarray  # (B,) conserved mapping energy (naf family)
    failed: np.ndarray  # (B,) bool
    degenerate_count: int = 0

    @property
    def size(self):
        return self.R.shape[0]

    def take(self, idx):
        return EnsembleState(
            R=self.R[idx], P=self.P[idx], g=self.g[idx],
            Gamma=None if self.Gamma is None else self.Gamma[idx],
            j_occ=self.j_occ[idx], energies=self.energies[idx],
            trans=self.trans[idx], force=self.force[idx],
            e_ref=self.e_ref[idx], failed=self.failed[idx],
        )

    def put(self, idx, other):
        self.R[idx] = other.R
        self.P[idx] = other.P
        self.g[idx] = other.g
        if self.Gamma is not None:
            self.Gamma[idx] = other.Gamma
        self.j_occ[idx] = other.j_occ
        self.energies[idx] = other.energies
        self.trans[idx] = other.trans
        self.force[idx] = other.force
        self.e_ref[idx] = other.e_ref
        self.failed[idx] = other.failed


@dataclass
class PhaseSpacePoint:
    """Single-trajectory state (adiabatic representation)."""

    R: np.ndarray
    P: np.ndarray
    g: np.ndarray
    Gamma: np.ndarray
    j_occ: int
    energies: np.ndarray
    trans: np.ndarray
    force: np.ndarray
    e_ref: float
    failed: bool = False


def _point_to_batch(pt):
    return EnsembleState(
        R=np.array([pt.R], float), P=np.array([pt.P], float),
        g=np.array([pt.g], complex),
        Gamma=None if pt.Gamma is None else np.array([pt.Gamma], complex),
        j_occ=np.array([pt.j_occ]), energies=np.array([pt.energies], float),
        trans=np.array([pt.trans], float), force=np.array([pt.force], float),
        e_ref=np.array([pt.e_ref], float), failed=np.array([pt.failed]),
    )


def _batch_to_point(st):
    return PhaseSpacePoint(
        R=st.R[0], P=st.P[0], g=st.g[0],
        Gamma=None if st.Gamma is None else st.Gamma[0],
        j_occ=int(st.j_occ[0]), energies=st.energies[0], trans=st.trans[0],
        force=st.force[0], e_ref=float(st.e_ref[0]), failed=bool(st.failed[0]),
    )


# ---------------------------------------------------------------------------
# forces


def dominant_state(rho, current):
    """Index of the largest diagonal quasi-density weight; ties keep the
    current state, then the lowest index."""
    diag = np.real(np.einsum("...kk->...k", np.asarray(rho)))
    if diag.ndim == 1:
        best = float(np.max(diag))
        if diag[current] >= best:
            return int(current)
        return int(np.argmax(diag))
    best = np.max(diag, axis=1)
    arg = np.argmax(diag, axis=1)
    cur = diag[np.arange(len(arg)), current]
    return np.where(cur >= best, current, arg)


def nonadiabatic_force(frame, rho):
    """f_J = -sum_{k!=l} (E_k - E_l) d_lk^J rho_kl for one trajectory.

    The contraction is real for Hermitian rho; an imaginary residual above
    1e-10 signals an internal inconsistency.
    """
    E = frame.energies
    diff = E[None, :] - E[:, None]  # (l, k) -> E_k - E_l
    contraction = np.einsum("jlk,lk,kl->j", frame.nac, diff, np.asarray(rho))
    resid = float(np.max(np.abs(contraction.imag), initial=0.0))
    if resid > 1e-10:
        raise RuntimeError(f"nonadiabatic force has imaginary residual {resid:.3e}")
    return -contraction.real


def perpendicular_nonadiabatic_force(f, P, masses):
    """Project the nonadiabatic force perpendicular to the velocity."""
    v = np.asarray(P, float) / np.asarray(masses, float)
    vv = v @ v
    if vv < 1e-28:
        log.warning("velocity ~ 0; perpendicular projection skipped")
        return np.asarray(f, float)
    return np.asarray(f, float) - (np.asarray(f, float) @ v / vv) * v


def _occupied_columns(T, j_occ):
    return np.take_along_axis(T, j_occ[:, None, None], axis=2)[:, :, 0]


def _sigma_rotate(T, rho):
    """Real part of T rho T^T (the diabatic-frame contraction weight)."""
    return T @ rho.real @ np.swapaxes(T, 1, 2)


def _total_force(model, R, E, T, rho, j_occ, variant):
    """Nuclear force for the mean-field and single-surface families (batched).

    meanfield:  -sum_kl [grad E_k delta_kl + (E_k - E_l) d_lk] rho_kl
    fssh:       -grad E_occ
    """
    if variant.family == "fssh":
        occ = _occupied_columns(T, j_occ)
        sigma = occ[:, :, None] * occ[:, None, :]
        return -model.grad_trace(R, sigma)
    return -model.grad_trace(R, _sigma_rotate(T, rho))


def _naf_force(model, R, P, E, T, rho, j_occ, variant):
    """NaF force with optional perpendicular projection of the coupling part."""
    idx = np.arange(rho.shape[-1])
    rho_od = rho.copy()
    rho_od[:, idx, idx] = 0.0
    occ = _occupied_columns(T, j_occ)
    sigma_occ = occ[:, :, None] * occ[:, None, :]
    if not variant.perpendicular_force:
        return -model.grad_trace(R, _sigma_rotate(T, rho_od) + sigma_occ)
    f_adia = -model.grad_trace(R, sigma_occ)
    f_na = -model.grad_trace(R, _sigma_rotate(T, rho_od))
    v = P * model.inv_masses
    vv = np.sum(v * v, axis=1)
    proj = np.where(vv > 1e-28, np.sum(f_na * v, axis=1) / np.maximum(vv, 1e-28), 0.0)
    return f_adia + f_na - proj[:, None] * v


def compute_force(model, state, variant, rho=None):
    """Force consistent with the current (R, frame, rho, j_occ)."""
    if rho is None:
        rho = variant.quasi_density(state.g, state.Gamma)
    if variant.family == "naf":
        return _naf_force(model, state.R, state.P, state.energies, state.trans,
                          rho, state.j_occ, variant)
    return _total_force(model, state.R, state.energies, state.trans, rho,
                        state.j_occ, variant)


def mapping_energy(model, P, energies, j_occ):
    """H = P^T M^-1 P / 2 + E_occ."""
    kin = model.kinetic(P)
    occ = np.take_along_axis(np.asarray(energies), np.asarray(j_occ)[..., None], axis=-1)[..., 0]
    return kin + occ


# ---------------------------------------------------------------------------
# batched steppers


def _electronic_update(model, variant, R_new, P_half, g, Gamma, prev_T, dt):
    """Frame at the drifted geometry plus the unitary electronic step."""
    V_new = model.potential(R_new)
    E_new, T_new, degen = eigh_frames(V_new, prev_T, variant.gap_tol)
    v = P_half * model.inv_masses
    Wv = np.swapaxes(T_new, 1, 2) @ model.grad_vdot(R_new, v) @ T_new
    veff = veff_from_contractions(E_new, Wv)
    U = short_time_propagator(veff, dt)
    g_new = np.einsum("bnk,bk->bn", U, g)
    Gamma_new = Gamma
    if Gamma is not None and variant.evolves_gamma:
        Gamma_new = U @ Gamma @ np.conj(np.swapaxes(U, 1, 2))
    return E_new, T_new, degen, veff, U, g_new, Gamma_new


def _step_naf_once(model, variant, st, dt):
    """One six-step NaF interval on the whole batch; returns (new_state, retry)."""
    B = st.size
    rows = np.arange(B)
    # 1) half kick with the cached force, 2) drift
    P_half = st.P + 0.5 * dt * st.force
    R_new = st.R + dt * (P_half * model.inv_masses)
    # 3) electronic propagation at the new geometry
    E_new, T_new, degen, veff, U, g_new, Gamma_new = _electronic_update(
        model, variant, R_new, P_half, st.g, st.Gamma, st.trans, dt)
    rho_new = variant.quasi_density(g_new, Gamma_new)
    # 4) dominant-state switch with momentum rescale against the mapping energy
    j_old = st.j_occ
    j_new = dominant_state(rho_new, j_old)
    switch = j_new != j_old
    if switch.any():
        kin = model.kinetic(P_half)
        e_old = E_new[rows, j_old]
        e_new = E_new[rows, j_new]
        target = kin + e_old - e_new
        allowed = switch & (target >= 0.0) & (kin > KIN_EPS)
        scale = np.sqrt(np.where(allowed, np.maximum(target, 0.0), kin) /
                        np.where(kin > KIN_EPS, kin, 1.0))
        P_half = np.where(allowed[:, None], P_half * scale[:, None], P_half)
        j_new = np.where(allowed, j_new, j_old)
    # 5) second half kick with the force at the new time
    f_new = _naf_force(model, R_new, P_half, E_new, T_new, rho_new, j_new, variant)
    P_new = P_half + 0.5 * dt * f_new
    # 6) final rescale pinning the mapping energy to its t=0 value
    kin6 = model.kinetic(P_new)
    target6 = st.e_ref - E_new[rows, j_new]
    still = kin6 <= KIN_EPS
    ok = np.where(still, np.abs(target6) <= 1e-12 * (1.0 + np.abs(st.e_ref)),
                  target6 >= 0.0)
    scale6 = np.sqrt(np.where(ok & ~still, np.maximum(target6, 0.0), kin6) /
                     np.where(kin6 > KIN_EPS, kin6, 1.0))
    P_new = np.where((ok & ~still)[:, None], P_new * scale6[:, None], P_new)
    retry = ~ok | degen
    new = EnsembleState(
        R=R_new, P=P_new, g=g_new, Gamma=Gamma_new, j_occ=j_new,
        energies=E_new, trans=T_new, force=f_new, e_ref=st.e_ref,
        failed=st.failed.copy(),
    )
    return new, retry, degen


def _step_meanfield_once(model, variant, st, dt):
    P_half = st.P + 0.5 * dt * st.force
    R_new = st.R + dt * (P_half * model.inv_masses)
    E_new, T_new, degen, veff, U, g_new, Gamma_new = _electronic_update(
        model, variant, R_new, P_half, st.g, st.Gamma, st.trans, dt)
    rho_new = variant.quasi_density(g_new, Gamma_new)
    f_new = _total_force(model, R_new, E_new, T_new, rho_new, st.j_occ, variant)
    P_new = P_half + 0.5 * dt * f_new
    new = EnsembleState(
        R=R_new, P=P_new, g=g_new, Gamma=Gamma_new, j_occ=st.j_occ.copy(),
        energies=E_new, trans=T_new, force=f_new, e_ref=st.e_ref,
        failed=st.failed.copy(),
    )
    return new, np.zeros(st.size, bool), degen


def _fssh_hops(model, variant, st, R_new, E_new, T_new, veff, g_new, P_half, dt, uniforms):
    """Fewest-switches hop test and momentum rescale along the coupling vector."""
    B = st.size
    rows = np.arange(B)
    j = st.j_occ.copy()
    rho = 0.5 * (g_new[:, :, None] * np.conj(g_new[:, None, :]))
    occ_pop = np.real(rho[rows, j, j])
    # rate of population flow current -> k: 2 Re[i rho_kj veff_jk]
    rho_col = rho[rows, :, j]  # rho_kj over k
    veff_row = veff[rows, j, :]  # veff_jk over k
    flux = 2.0 * np.real(1j * rho_col * veff_row)
    probs = dt * np.maximum(flux, 0.0) / np.maximum(occ_pop, 1e-300)[:, None]
    probs[rows, j] = 0.0
    probs[occ_pop < 1e-12] = 0.0
    total = probs.sum(axis=1)
    over = total > 1.0
    if over.any():  # keep the summed hop probability a probability
        probs[over] /= total[over][:, None]
    cum = np.cumsum(probs, axis=1)
    u = uniforms[:, None]
    k_sel = np.sum(u >= cum, axis=1)  # first k with u < cum[k]
    hop = k_sel < probs.shape[1]
    hop &= k_sel != j
    if not hop.any():
        return j, P_half
    idx = np.flatnonzero(hop)
    jj = j[idx]
    kk = k_sel[idx]
    Tj = np.take_along_axis(T_new[idx], jj[:, None, None], axis=2)[:, :, 0]
    Tk = np.take_along_axis(T_new[idx], kk[:, None, None], axis=2)[:, :, 0]
    gap = E_new[idx, kk] - E_new[idx, jj]
    w = model.grad_bilinear(R_new[idx], Tj, Tk)  # (n, N): T_j^T dV_J T_k
    d_vec = w / gap[:, None]
    inv_m = model.inv_masses
    a = 0.5 * np.sum(d_vec * d_vec * inv_m, axis=1)
    b = np.sum(P_half[idx] * d_vec * inv_m, axis=1)
    disc = b * b - 4.0 * a * gap
    can = (disc >= 0.0) & (a > 0.0)
    root = np.sqrt(np.maximum(disc, 0.0))
    kappa1 = (-b + root) / (2.0 * np.maximum(a, 1e-300))
    kappa2 = (-b - root) / (2.0 * np.maximum(a, 1e-300))
    kappa = np.where(np.abs(kappa1) <= np.abs(kappa2), kappa1, kappa2)
    sel = idx[can]
    P_half[sel] += kappa[can][:, None] * d_vec[can]
    j[sel] = kk[can]
    return j, P_half


def _step_fssh_once(model, variant, st, dt, uniforms):
    P_half = st.P + 0.5 * dt * st.force
    R_new = st.R + dt * (P_half * model.inv_masses)
    E_new, T_new, degen, veff, U, g_new, Gamma_new = _electronic_update(
        model, variant, R_new, P_half, st.g, st.Gamma, st.trans, dt)
    j_new, P_half = _fssh_hops(model, variant, st, R_new, E_new, T_new, veff,
                               g_new, P_half, dt, uniforms)
    f_new = _total_force(model, R_new, E_new, T_new, None, j_new,
                         replace(variant, name="fssh"))
    P_new = P_half + 0.5 * dt * f_new
    new = EnsembleState(
        R=R_new, P=P_new, g=g_new, Gamma=Gamma_new, j_occ=j_new,
        energies=E_new, trans=T_new, force=f_new, e_ref=st.e_ref,
        failed=st.failed.copy(),
    )
    return new, np.zeros(st.size, bool), degen


def advance(model, variant, st, dt, uniforms=None, depth=0):
    """Advance the batch one interval dt, retrying failed rows at dt/2."""
    if variant.family == "naf":
        new, retry, degen = _step_naf_once(model, variant, st, dt)
    elif variant.family == "meanfield":
        new, retry, degen = _step_meanfield_once(model, variant, st, dt)
    else:
        if uniforms is None:
            raise ValueError("fssh stepping requires hop uniforms")
        new, retry, degen = _step_fssh_once(model, variant, st, dt, uniforms)

    if degen.any():
        idx = np.flatnonzero(degen)
        new.put(idx, st.take(idx))  # freeze at the pre-step state
        new.failed[idx] = True
        new.degenerate_count += int(len(idx))
        retry = retry & ~degen
    # never rework rows that were already failed before this interval
    retry &= ~st.failed
    if retry.any():
        idx = np.flatnonzero(retry)
        if depth >= MAX_HALVINGS:
            new.put(idx, st.take(idx))
            new.failed[idx] = True
        else:
            sub = st.take(idx)
            half_u = None if uniforms is None else uniforms[idx]
            sub = advance(model, variant, sub, 0.5 * dt, half_u, depth + 1)
            sub = advance(model, variant, sub, 0.5 * dt, half_u, depth + 1)
            new.put(idx, sub)
            new.degenerate_count += sub.degenerate_count
    if st.failed.any():
        idx = np.flatnonzero(st.failed)
        new.put(idx, st.take(idx))  # failed trajectories stay frozen
    return new


# ---------------------------------------------------------------------------
# initialization


def initialize_ensemble(model, variant, rngs, electronic=None):
    """Sample initial conditions for a batch; one Generator per trajectory.

    Returns (state, init_record) where init_record keeps the raw electronic
    sample in its own representation for the time-0 estimator kernels.
    """
    electronic = electronic if electronic is not None else model.init.electronic
    electronic.validate(model.nstates)
    B = len(rngs)
    N, F = model.nmodes, model.nstates
    R = np.empty((B, N))
    P = np.empty((B, N))
    g_raw = np.empty((B, F), complex)
    j_occ0 = np.empty(B, int)
    fssh_u = np.empty(B)
    for s, rng in enumerate(rngs):
        R[s], P[s] = sample_nuclear(model.init.nuclear, rng)
        if electronic.kind == "state":
            j = electronic.indices[0]
        else:
            j = electronic.indices[0] if rng.random() < 0.5 else electronic.indices[1]
        j_occ0[s] = j
        if variant.sampler == "cps":
            g_raw[s] = sample_cps(F, variant.gamma, rng)
        elif variant.sampler == "tw":
            g_raw[s] = sample_tw(F, j, rng)
        else:
            g_raw[s] = 0.0
            g_raw[s, j] = np.sqrt(2.0)
        if variant.family == "fssh":
            fssh_u[s] = rng.random()

    V0 = model.potential(R)
    E0, T0, degen = eigh_frames(V0, None, variant.gap_tol)

    Gamma_raw = None
    if variant.uses_gamma_matrix:
        Gamma_raw = np.zeros((B, F, F), complex)
        e_raw = actions(g_raw)
        idx = np.arange(F)
        Gamma_raw[:, idx, idx] = e_raw
        Gamma_raw[np.arange(B), j_occ0, j_occ0] -= 1.0

    if electronic.basis == "diabatic":
        Tt = np.swapaxes(T0, 1, 2)
        g = np.einsum("bnk,bk->bn", Tt, g_raw)
        Gamma = None if Gamma_raw is None else Tt @ Gamma_raw @ T0
    else:
        g = g_raw.copy()
        Gamma = None if Gamma_raw is None else Gamma_raw.copy()

    if variant.family == "fssh":
        if electronic.basis == "adiabatic":
            j_occ = j_occ0.copy()
        else:
            # sample the active surface from the adiabatic weights of the
            # initial diabatic state
            w = np.abs(g) ** 2
            w /= w.sum(axis=1, keepdims=True)
            cum = np.cumsum(w, axis=1)
            j_occ = np.sum(fssh_u[:, None] >= cum, axis=1)
            j_occ = np.minimum(j_occ, F - 1)
    else:
        rho0 = variant.quasi_density(g, Gamma)
        j_occ = np.asarray(dominant_state(rho0, j_occ0.copy()))
        if electronic.basis == "adiabatic":
            # occupied adiabatic state is part of the initial condition
            j_occ = j_occ0.copy()

    e_ref = mapping_energy(model, P, E0, j_occ)
    rho0 = variant.quasi_density(g, Gamma)
    if variant.family == "naf":
        force = _naf_force(model, R, P, E0, T0, rho0, j_occ, variant)
    elif variant.family == "meanfield":
        force = _total_force(model, R, E0, T0, rho0, j_occ, variant)
    else:
        force = _total_force(model, R, E0, T0, None, j_occ, variant)

    state = EnsembleState(
        R=R, P=P, g=g, Gamma=Gamma, j_occ=j_occ, energies=E0, trans=T0,
        force=force, e_ref=e_ref, failed=degen.copy(),
        degenerate_count=int(degen.sum()),
    )
    init_record = {"g_raw": g_raw, "j_occ0": j_occ0, "basis": electronic.basis,
                   "electronic": electronic}
    return state, init_record


# ---------------------------------------------------------------------------
# trajectory-level drivers


@dataclass
class TrajectoryRecord:
    times: np.ndarray
    R: np.ndarray  # (S, N)
    P: np.ndarray  # (S, N)
    g: np.ndarray  # (S, F)
    Gamma: np.ndarray  # (S, F, F) or None
    j_occ: np.ndarray  # (S,)
    e_adiabatic: np.ndarray  # (S, F)
    e_diabatic: np.ndarray  # (S, F)
    failed: bool


def step_naf(point, model, dt, variant, rng=None):
    """One six-step NaF interval for a single trajectory."""
    st = advance(model, variant, _point_to_batch(point), dt)
    return _batch_to_point(st)


def step_meanfield(point, model, dt, variant):
    st = advance(model, variant, _point_to_batch(point), dt)
    return _batch_to_point(st)


def step_fssh(point, model, dt, rng, variant=None):
    variant = variant or MethodVariant("fssh")
    u = np.array([rng.random()])
    st = advance(model, variant, _point_to_batch(point), dt, uniforms=u)
    return _batch_to_point(st)


def init_point(model, variant, rng, electronic=None):
    """Sample a single PhaseSpacePoint."""
    st, rec = initialize_ensemble(model, variant, [rng], electronic)
    return _batch_to_point(st), {k: (v[0] if isinstance(v, np.ndarray) else v)
                                 for k, v in rec.items()}


def propagate_trajectory(point, model, variant, t_grid, dt, rng=None):
    """Propagate one trajectory, recording snapshots at the requested times.

    t_grid entries must be (near-)integer multiples of dt starting at 0.
    """
    t_grid = np.asarray(t_grid, float)
    if len(t_grid) == 0 or t_grid[0] < 0 or np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be ascending and start at t >= 0")
    steps = np.rint(t_grid / dt).astype(int)
    if np.max(np.abs(steps * dt - t_grid)) > 1e-9 * max(dt, 1.0):
        raise ValueError("t_grid times must be multiples of dt")

    snaps = []
    st = _point_to_batch(point)
    step_now = 0
    for target in steps:
        while step_now < target and not st.failed[0]:
            u = None
            if variant.family == "fssh":
                u = np.array([rng.random()])
            st = advance(model, variant, st, dt, uniforms=u)
            step_now += 1
        if st.failed[0] and step_now < target:
            break
        snaps.append((step_now * dt, _batch_to_point(st)))

    times = np.array([t for t, _ in snaps])
    S = len(snaps)
    F = model.nstates
    rec = TrajectoryRecord(
        times=times,
        R=np.array([p.R for _, p in snaps]),
        P=np.array([p.P for _, p in snaps]),
        g=np.array([p.g for _, p in snaps]),
        Gamma=(np.array([p.Gamma for _, p in snaps])
               if snaps and snaps[0][1].Gamma is not None else None),
        j_occ=np.array([p.j_occ for _, p in snaps]),
        e_adiabatic=np.zeros((S, F)),
        e_diabatic=np.zeros((S, F)),
        failed=bool(st.failed[0]),
    )
    for i, (_, p) in enumerate(snaps):
        rec.e_adiabatic[i] = actions(p.g)
        rec.e_diabatic[i] = actions(p.trans @ p.g)
    return rec


@dataclass
class EnsembleHistory:
    """Materialized snapshots of a whole batch; convenient for the
    estimator functions at desk scale (the runner streams instead)."""

    times: np.ndarray
    snapshots: list  # EnsembleState per time
    model: object
    variant: MethodVariant
    init_record: dict

    def subset(self, a, b):
        sl = slice(a, b)
        rec = {k: (v[sl] if isinstance(v, np.ndarray) else v)
               for k, v in self.init_record.items()}
        return [s.take(sl) for s in self.snapshots], rec


def run_history(model, variant, n_traj, dt, t_max, stride=1, seed=0,
                electronic=None):
    """Propagate an ensemble keeping every snapshot in memory."""
    rngs = [np.random.Generator(np.random.Philox(key=np.array([seed, s], dtype=np.uint64)))
            for s in range(n_traj)]
    state, init_record = initialize_ensemble(model, variant, rngs, electronic)
    n_steps = int(round(t_max / dt))
    snap_steps = list(range(0, n_steps + 1, stride))
    snaps = []

    hop = None
    if variant.family == "fssh":
        def hop(step):
            return np.array([r.random() for r in rngs])

    def on_snapshot(step, st):
        snaps.append(st.take(slice(None)))

    propagate_ensemble(model, variant, state, dt, n_steps, snap_steps,
                       on_snapshot, hop_uniforms=hop)
    times = np.array(snap_steps) * dt
    return EnsembleHistory(times, snaps, model, variant, init_record)


def propagate_ensemble(model, variant, state, dt, n_steps, snapshot_steps,
                       on_snapshot, hop_uniforms=None):
    """Advance a batch for n_steps, invoking on_snapshot(step, state) at the
    listed step indices (0 means the initial state).

    hop_uniforms: callable step -> (B,) uniforms; required for fssh.
    """
    snapshot_steps = set(int(s) for s in snapshot_steps)
    if 0 in snapshot_steps:
        on_snapshot(0, state)
    for step in range(1, n_steps + 1):
        u = hop_uniforms(step) if hop_uniforms is not None else None
        state = advance(model, variant, state, dt, uniforms=u)
        if step in snapshot_steps:
            on_snapshot(step, state)
    return state
