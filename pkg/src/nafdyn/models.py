"""Benchmark diabatic models: system-bath, cavity, vibronic-coupling, and scattering.

Every model exposes the diabatic potential matrix V(R) and analytic-gradient
contractions.  Evaluation is vectorized over a leading batch axis so that a
whole trajectory ensemble advances through numpy at once.  Full per-mode
gradient tensors are only materialized by ``grad_dense`` (small models and
tests); the propagation engine uses the contracted forms:

    grad_trace(R, sigma)    -> sum_nm dV_J[n,m] sigma[n,m]      (forces)
    grad_vdot(R, v)         -> sum_J v_J dV_J                   (P.d coupling)
    grad_bilinear(R, a, b)  -> sum_nm dV_J[n,m] a_n b_m         (hop direction)

All quantities are in Hartree atomic units unless noted.
"""

from dataclasses import dataclass, field

import numpy as np

from .baths import BathDiscretization, discretize_ohmic
from .units import C_LIGHT_AU, EPS0_AU, cm1_to_au, kelvin_to_beta


# ---------------------------------------------------------------------------
# initial conditions


@dataclass(frozen=True)
class ThermalHarmonic:
    """Thermal Wigner distribution of independent harmonic modes.

    beta may be inf (vacuum limit).
    """

    omegas: np.ndarray
    beta: float


@dataclass(frozen=True)
class ShiftedThermal:
    """Thermal harmonic Wigner distribution with per-mode coordinate centers."""

    omegas: np.ndarray
    beta: float
    centers: np.ndarray


@dataclass(frozen=True)
class GaussianWavepacket:
    """Minimum-uncertainty wavepacket: Var(R)=1/(2a), Var(P)=a/2 per mode."""

    r0: np.ndarray
    p0: np.ndarray
    alpha: np.ndarray


@dataclass(frozen=True)
class LVCMGround:
    """Ground-state Wigner of dimensionless vibronic modes: Var(R)=Var(P)=1/2."""

    n_modes: int


@dataclass(frozen=True)
class ElectronicInit:
    """Initially occupied state, or a coherence pair (n, m).  0-based indices."""

    kind: str  # "state" | "coherence"
    indices: tuple
    basis: str = "diabatic"  # "diabatic" | "adiabatic"

    def validate(self, nstates):
        if self.kind not in ("state", "coherence"):
            raise ValueError(f"unknown electronic init kind {self.kind!r}")
        if self.basis not in ("diabatic", "adiabatic"):
            raise ValueError(f"unknown basis {self.basis!r}")
        want = 1 if self.kind == "state" else 2
        if len(self.indices) != want:
            raise ValueError("electronic init has wrong number of state indices")
        for i in self.indices:
            if not 0 <= i < nstates:
                raise ValueError(f"state index {i} outside [0, {nstates})")


@dataclass(frozen=True)
class InitialCondition:
    electronic: ElectronicInit
    nuclear: object  # one of the nuclear distributions above


# ---------------------------------------------------------------------------
# model base


class ModelSpec:
    """Base class for F-state, N-mode diabatic models."""

    def __init__(self, name, nstates, nmodes, masses, init, params=None, units="au"):
        self.name = name
        self.nstates = int(nstates)
        self.nmodes = int(nmodes)
        self.masses = np.broadcast_to(np.asarray(masses, float), (self.nmodes,)).copy()
        self.inv_masses = 1.0 / self.masses
        self.init = init
        self.params = dict(params or {})
        self.units = units
        if init is not None:
            init.electronic.validate(self.nstates)

    # subclasses implement the batched forms
    def _potential(self, R):
        raise NotImplementedError

    def _grad_dense(self, R):
        raise NotImplementedError

    def potential(self, R):
        """Diabatic potential matrix: (..., N) -> (..., F, F)."""
        R, one = _as_batch(R, self.nmodes)
        V = self._potential(R)
        return V[0] if one else V

    def grad_dense(self, R):
        """Full analytic gradient: (..., N) -> (..., N, F, F)."""
        R, one = _as_batch(R, self.nmodes)
        dV = self._grad_dense(R)
        return dV[0] if one else dV

    # contracted gradients; subclasses override when N is large
    def _grad_trace(self, R, sigma):
        return np.einsum("bjnm,bnm->bj", self._grad_dense(R), sigma)

    def _grad_vdot(self, R, v):
        return np.einsum("bjnm,bj->bnm", self._grad_dense(R), v)

    def _grad_bilinear(self, R, a, b):
        return np.einsum("bjnm,bn,bm->bj", self._grad_dense(R), a, b)

    def grad_trace(self, R, sigma):
        """Trace of each mode gradient against a (real) matrix sigma."""
        R, one = _as_batch(R, self.nmodes)
        sigma = np.asarray(sigma, float)
        if one:
            sigma = sigma[None]
        out = self._grad_trace(R, sigma)
        return out[0] if one else out

    def grad_vdot(self, R, v):
        """Velocity contraction of the gradient family: sum_J v_J dV_J."""
        R, one = _as_batch(R, self.nmodes)
        v = np.asarray(v, float)
        if one:
            v = v[None]
        out = self._grad_vdot(R, v)
        return out[0] if one else out

    def grad_bilinear(self, R, a, b):
        """Per-mode bilinear form a^T dV_J b for real vectors a, b."""
        R, one = _as_batch(R, self.nmodes)
        a = np.asarray(a, float)
        b = np.asarray(b, float)
        if one:
            a, b = a[None], b[None]
        out = self._grad_bilinear(R, a, b)
        return out[0] if one else out

    def kinetic(self, P):
        P = np.asarray(P, float)
        return 0.5 * np.sum(P * P * self.inv_masses, axis=-1)

    def to_dict(self):
        return {"kind": self.kind, "name": self.name, "units": "au", "params": _jsonify(self.params)}


def _as_batch(R, nmodes):
    R = np.asarray(R, dtype=float)
    if R.ndim == 1:
        if R.shape[0] != nmodes:
            raise ValueError(f"expected {nmodes} modes, got {R.shape[0]}")
        return R[None], True
    if R.ndim != 2 or R.shape[1] != nmodes:
        raise ValueError(f"expected (batch, {nmodes}) coordinates, got {R.shape}")
    return R, False


def _jsonify(obj):
    if isinstance(obj, dict):
        return {k: _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


# ---------------------------------------------------------------------------
# spin-boson


class SpinBosonModel(ModelSpec):
    """Two states with opposite bias, bilinearly coupled to a harmonic bath."""

    kind = "spin_boson"

    def __init__(self, eps, delta, bath, beta=5.0, name="spin_boson"):
        self.eps = float(eps)
        self.delta = float(delta)
        self.bath = bath
        self.beta = float(beta)
        init = InitialCondition(
            electronic=ElectronicInit("state", (0,)),
            nuclear=ThermalHarmonic(bath.omegas, beta),
        )
        super().__init__(
            name, 2, bath.nb, 1.0, init,
            params={"eps": eps, "delta": delta, "beta": beta,
                    "omegas": bath.omegas, "couplings": bath.couplings},
        )
        self._w2 = bath.omegas**2
        self._c = bath.couplings

    def _potential(self, R):
        bias = self.eps + R @ self._c
        ub = 0.5 * (R * R) @ self._w2
        V = np.zeros((R.shape[0], 2, 2))
        V[:, 0, 0] = ub + bias
        V[:, 1, 1] = ub - bias
        V[:, 0, 1] = V[:, 1, 0] = self.delta
        return V

    def _grad_dense(self, R):
        B, N = R.shape
        dV = np.zeros((B, N, 2, 2))
        harm = self._w2 * R
        dV[:, :, 0, 0] = harm + self._c
        dV[:, :, 1, 1] = harm - self._c
        return dV

    def _grad_trace(self, R, sigma):
        dz = sigma[:, 0, 0] - sigma[:, 1, 1]
        tr = sigma[:, 0, 0] + sigma[:, 1, 1]
        return dz[:, None] * self._c + tr[:, None] * (self._w2 * R)

    def _grad_vdot(self, R, v):
        a = v @ self._c
        b = (v * R) @ self._w2
        out = np.zeros((R.shape[0], 2, 2))
        out[:, 0, 0] = b + a
        out[:, 1, 1] = b - a
        return out

    def _grad_bilinear(self, R, a, b):
        dz = a[:, 0] * b[:, 0] - a[:, 1] * b[:, 1]
        dot = np.sum(a * b, axis=1)
        return dz[:, None] * self._c + dot[:, None] * (self._w2 * R)


def build_spin_boson(eps, delta, bath, beta=5.0):
    """Spin-boson model; default initial state is diabatic state 1 with a thermal bath."""
    return SpinBosonModel(eps, delta, bath, beta=beta)


# ---------------------------------------------------------------------------
# FMO monomer (seven-site exciton model, one bath copy per site)

FMO_HAMILTONIAN_CM1 = np.array(
    [
        [12410.0, -87.7, 5.5, -5.9, 6.7, -13.7, -9.9],
        [-87.7, 12530.0, 30.8, 8.2, 0.7, 11.8, 4.3],
        [5.5, 30.8, 12210.0, -53.5, -2.2, -9.6, 6.0],
        [-5.9, 8.2, -53.5, 12320.0, -70.7, -17.0, -63.3],
        [6.7, 0.7, -2.2, -70.7, 12480.0, 81.1, -1.3],
        [-13.7, 11.8, -9.6, -17.0, 81.1, 12630.0, 39.7],
        [-9.9, 4.3, 6.0, -63.3, -1.3, 39.7, 12440.0],
    ]
)


class SiteExcitonModel(ModelSpec):
    """Site-exciton system where each site carries its own copy of the bath."""

    kind = "fmo"

    def __init__(self, h_sys, bath, beta, name="fmo", initial_site=0):
        h_sys = np.asarray(h_sys, float)
        F = h_sys.shape[0]
        nb = bath.nb
        self.h_sys = h_sys
        self.bath = bath
        self.beta = float(beta)
        init = InitialCondition(
            electronic=ElectronicInit("state", (initial_site,)),
            nuclear=ThermalHarmonic(np.tile(bath.omegas, F), beta),
        )
        super().__init__(
            name, F, F * nb, 1.0, init,
            params={"h_sys": h_sys, "beta": beta,
                    "omegas": bath.omegas, "couplings": bath.couplings,
                    "initial_site": initial_site},
        )
        self._nb = nb
        self._w2 = bath.omegas**2
        self._c = bath.couplings

    def _site_view(self, R):
        return R.reshape(R.shape[0], self.nstates, self._nb)

    def _potential(self, R):
        Rs = self._site_view(R)
        site = Rs @ self._c  # (B, F)
        ub = 0.5 * np.einsum("bfj,j->b", Rs * Rs, self._w2)
        V = np.broadcast_to(self.h_sys, (R.shape[0],) + self.h_sys.shape).copy()
        idx = np.arange(self.nstates)
        V[:, idx, idx] += site + ub[:, None]
        return V

    def _grad_dense(self, R):
        B = R.shape[0]
        F, nb = self.nstates, self._nb
        Rs = self._site_view(R)
        dV = np.zeros((B, F, nb, F, F))
        harm = self._w2 * Rs  # (B, F, nb)
        idx = np.arange(F)
        dV[:, :, :, idx, idx] = harm[:, :, :, None]  # bath term on every diagonal
        for n in range(F):
            dV[:, n, :, n, n] += self._c
        return dV.reshape(B, F * nb, F, F)

    def _grad_trace(self, R, sigma):
        Rs = self._site_view(R)
        tr = np.trace(sigma, axis1=1, axis2=2)
        diag = np.einsum("bnn->bn", sigma)
        out = diag[:, :, None] * self._c + tr[:, None, None] * (self._w2 * Rs)
        return out.reshape(R.shape[0], -1)

    def _grad_vdot(self, R, v):
        B = R.shape[0]
        Rs = self._site_view(R)
        vs = self._site_view(v)
        site = vs @ self._c  # (B, F)
        b = np.einsum("bfj,j->b", vs * Rs, self._w2)
        out = np.zeros((B, self.nstates, self.nstates))
        idx = np.arange(self.nstates)
        out[:, idx, idx] = site + b[:, None]
        return out

    def _grad_bilinear(self, R, a, b):
        Rs = self._site_view(R)
        dot = np.sum(a * b, axis=1)
        out = (a * b)[:, :, None] * self._c + dot[:, None, None] * (self._w2 * Rs)
        return out.reshape(R.shape[0], -1)


def build_fmo(bath, temperature=77.0, initial_site=0):
    """Seven-site FMO monomer; system matrix in cm^-1 converted to a.u."""
    return SiteExcitonModel(
        cm1_to_au(FMO_HAMILTONIAN_CM1), bath, kelvin_to_beta(temperature),
        initial_site=initial_site,
    )


# ---------------------------------------------------------------------------
# atom in a one-dimensional lossless cavity


class CavityModel(ModelSpec):
    """Multi-level atom coupled to the standing-wave modes of a 1-d cavity."""

    kind = "cavity"

    def __init__(self, levels, dipoles, L, r0, nmodes, name="cavity"):
        levels = np.asarray(levels, float)
        dipoles = np.asarray(dipoles, float)
        F = len(levels)
        if dipoles.shape != (F, F):
            raise ValueError("dipole matrix shape mismatch")
        if not (L > 0 and 0 < r0 < L and nmodes >= 1):
            raise ValueError("need L > 0, 0 < r0 < L, nmodes >= 1")
        self.levels = levels
        self.dipoles = 0.5 * (dipoles + dipoles.T)
        np.fill_diagonal(self.dipoles, 0.0)
        j = np.arange(1, nmodes + 1)
        self.mode_omegas = j * np.pi * C_LIGHT_AU / L
        self.mode_lambdas = np.sqrt(2.0 / (EPS0_AU * L)) * np.sin(j * np.pi * r0 / L)
        init = InitialCondition(
            electronic=ElectronicInit("state", (F - 1,)),
            nuclear=ThermalHarmonic(self.mode_omegas, np.inf),
        )
        super().__init__(
            name, F, nmodes, 1.0, init,
            params={"levels": levels, "dipoles": dipoles, "L": L, "r0": r0,
                    "nmodes": nmodes},
        )
        self._w2 = self.mode_omegas**2
        self._g = self.mode_omegas * self.mode_lambdas  # coupling per unit R_j

    def _potential(self, R):
        ub = 0.5 * (R * R) @ self._w2
        coup = R @ self._g
        V = coup[:, None, None] * self.dipoles
        idx = np.arange(self.nstates)
        V[:, idx, idx] += self.levels + ub[:, None]
        return V

    def _grad_dense(self, R):
        B, N = R.shape
        dV = self._g[None, :, None, None] * self.dipoles
        dV = np.broadcast_to(dV, (B, N, self.nstates, self.nstates)).copy()
        idx = np.arange(self.nstates)
        dV[:, :, idx, idx] += (self._w2 * R)[:, :, None]
        return dV

    def _grad_trace(self, R, sigma):
        s_mu = np.einsum("nm,bnm->b", self.dipoles, sigma)
        tr = np.trace(sigma, axis1=1, axis2=2)
        return s_mu[:, None] * self._g + tr[:, None] * (self._w2 * R)

    def _grad_vdot(self, R, v):
        a = v @ self._g
        b = (v * R) @ self._w2
        out = a[:, None, None] * self.dipoles
        idx = np.arange(self.nstates)
        out[:, idx, idx] += b[:, None]
        return out

    def _grad_bilinear(self, R, a, b):
        s_mu = np.einsum("nm,bn,bm->b", self.dipoles, a, b)
        dot = np.sum(a * b, axis=1)
        return s_mu[:, None] * self._g + dot[:, None] * (self._w2 * R)


CAVITY_LEVELS = np.array([-0.6738, -0.2798, -0.1547])
CAVITY_DIPOLES_3 = np.array(
    [[0.0, -1.034, 0.0], [-1.034, 0.0, -2.536], [0.0, -2.536, 0.0]]
)


def build_cavity(levels=None, dipoles=None, L=236200.0, r0=None, nmodes=400,
                 two_level=False):
    """Atom-in-cavity model; defaults are the three-level hydrogen-like atom.

    ``two_level=True`` keeps only the lowest two levels (the dipole block
    between them).  The highest retained level is initially occupied and the
    field modes start in the vacuum state.
    """
    if levels is None:
        levels = CAVITY_LEVELS
    if dipoles is None:
        dipoles = CAVITY_DIPOLES_3[: len(levels), : len(levels)]
    levels = np.asarray(levels, float)
    dipoles = np.asarray(dipoles, float)
    if two_level:
        levels = levels[:2]
        dipoles = dipoles[:2, :2]
    if r0 is None:
        r0 = L / 2.0
    return CavityModel(levels, dipoles, L, r0, nmodes,
                       name="cavity2" if len(levels) == 2 else "cavity3")


# ---------------------------------------------------------------------------
# linear vibronic coupling model


class LVCModel(ModelSpec):
    """Dimensionless-mode LVCM: harmonic modes with linear diabatic couplings.

    Kinetic energy is sum_k w_k P_k^2 / 2, realized by masses 1/w_k under the
    generic P^T M^-1 P / 2 kinetic term.
    """

    kind = "lvcm"

    def __init__(self, energies, omegas, kappa, lam, init=None, name="lvcm"):
        energies = np.asarray(energies, float)
        omegas = np.asarray(omegas, float)
        kappa = np.asarray(kappa, float)
        lam = np.asarray(lam, float)
        F, N = len(energies), len(omegas)
        if kappa.shape != (F, N):
            raise ValueError(f"kappa must have shape ({F}, {N})")
        if lam.shape != (F, F, N):
            raise ValueError(f"lambda must have shape ({F}, {F}, {N})")
        if not np.allclose(lam, lam.transpose(1, 0, 2)):
            raise ValueError("off-diagonal couplings must be symmetric in the state pair")
        self.energies = energies
        self.omegas = omegas
        self.kappa = kappa
        self.lam = lam.copy()
        idx = np.arange(F)
        self.lam[idx, idx, :] = 0.0
        # constant gradient matrices G_k = diag(kappa[:,k]) + lam[:,:,k]
        self._G = np.transpose(self.lam, (2, 0, 1)).copy()
        self._G[:, idx, idx] += kappa.T
        if init is None:
            init = InitialCondition(
                electronic=ElectronicInit("state", (F - 1,)),
                nuclear=LVCMGround(N),
            )
        super().__init__(
            name, F, N, 1.0 / omegas, init,
            params={"energies": energies, "omegas": omegas, "kappa": kappa,
                    "lambda": lam},
        )

    def _potential(self, R):
        ub = 0.5 * (R * R) @ self.omegas
        V = np.einsum("bk,knm->bnm", R, self._G)
        idx = np.arange(self.nstates)
        V[:, idx, idx] += self.energies + ub[:, None]
        return V

    def _grad_dense(self, R):
        B, N = R.shape
        dV = np.broadcast_to(self._G, (B, N, self.nstates, self.nstates)).copy()
        idx = np.arange(self.nstates)
        dV[:, :, idx, idx] += (self.omegas * R)[:, :, None]
        return dV


def build_lvcm(energies, omegas, kappa, lam, init=None):
    """Linear vibronic coupling model from parameter arrays (a.u.)."""
    return LVCModel(energies, omegas, kappa, lam, init=init)


# ---------------------------------------------------------------------------
# coupled Morse photodissociation


class MorseModel(ModelSpec):
    """Coupled Morse potentials with Gaussian diabatic couplings (1 nuclear DOF)."""

    kind = "morse"

    def __init__(self, d, beta_m, r_min, c, a, alpha_g, r_g, mass=20000.0,
                 init=None, name="morse"):
        d = np.asarray(d, float)
        beta_m = np.asarray(beta_m, float)
        r_min = np.asarray(r_min, float)
        c = np.asarray(c, float)
        a = np.asarray(a, float)
        alpha_g = np.asarray(alpha_g, float)
        r_g = np.asarray(r_g, float)
        F = len(d)
        if np.any(d <= 0) or np.any(beta_m <= 0):
            raise ValueError("Morse well depths and widths must be positive")
        for arr, shape in ((a, (F, F)), (alpha_g, (F, F)), (r_g, (F, F))):
            if arr.shape != shape:
                raise ValueError("pair-coupling arrays must be (F, F)")
        self.d, self.beta_m, self.r_min, self.c = d, beta_m, r_min, c
        self.a = 0.5 * (a + a.T)
        np.fill_diagonal(self.a, 0.0)
        self.alpha_g, self.r_g = alpha_g, r_g
        if init is None:
            init = InitialCondition(
                electronic=ElectronicInit("state", (0,)),
                nuclear=GaussianWavepacket(np.zeros(1), np.zeros(1), np.ones(1)),
            )
        super().__init__(
            name, F, 1, mass, init,
            params={"d": d, "beta": beta_m, "r_min": r_min, "c": c, "a": a,
                    "alpha": alpha_g, "r_g": r_g, "mass": mass},
        )

    def _potential(self, R):
        r = R[:, 0]
        F = self.nstates
        V = np.zeros((len(r), F, F))
        for i in range(F):
            e = np.exp(-self.beta_m[i] * (r - self.r_min[i]))
            V[:, i, i] = self.d[i] * (1.0 - e) ** 2 + self.c[i]
        for i in range(F):
            for j in range(i + 1, F):
                if self.a[i, j] != 0.0:
                    g = self.a[i, j] * np.exp(-self.alpha_g[i, j] * (r - self.r_g[i, j]) ** 2)
                    V[:, i, j] = V[:, j, i] = g
        return V

    def _grad_dense(self, R):
        r = R[:, 0]
        F = self.nstates
        dV = np.zeros((len(r), 1, F, F))
        for i in range(F):
            e = np.exp(-self.beta_m[i] * (r - self.r_min[i]))
            dV[:, 0, i, i] = 2.0 * self.d[i] * (1.0 - e) * self.beta_m[i] * e
        for i in range(F):
            for j in range(i + 1, F):
                if self.a[i, j] != 0.0:
                    g = self.a[i, j] * np.exp(-self.alpha_g[i, j] * (r - self.r_g[i, j]) ** 2)
                    dg = -2.0 * self.alpha_g[i, j] * (r - self.r_g[i, j]) * g
                    dV[:, 0, i, j] = dV[:, 0, j, i] = dg
        return dV


def build_morse3(d, beta_m, r_min, c, a, alpha_g, r_g, mass=20000.0, init=None):
    """Three-state coupled Morse model (photodissociation-type)."""
    return MorseModel(d, beta_m, r_min, c, a, alpha_g, r_g, mass=mass, init=init)


# ---------------------------------------------------------------------------
# Tully scattering models

TULLY_DEFAULTS = {
    "sac": {"a": 0.01, "b": 1.6, "c": 0.005, "d": 1.0,
            "r0": -3.8, "alpha": 1.0, "p0": 20.0},
    "dac": {"a": 0.1, "b": 0.28, "c": 0.015, "d": 0.06, "e0": 0.05,
            "r0": -10.0, "alpha": 1.0, "p0": 20.0},
    "ecr": {"b": 0.9, "c": 0.1, "e0": -0.0006,
            "r0": -13.0, "alpha": 1.0, "p0": 20.0},
}


class TullyModel(ModelSpec):
    """Tully's one-dimensional scattering models (SAC, DAC, ECR)."""

    kind = "tully"

    def __init__(self, variant, mass=2000.0, **overrides):
        variant = variant.lower()
        if variant not in TULLY_DEFAULTS:
            raise ValueError(f"unknown Tully variant {variant!r}")
        p = dict(TULLY_DEFAULTS[variant])
        unknown = set(overrides) - set(p)
        if unknown:
            raise ValueError(f"unknown parameters for Tully {variant}: {sorted(unknown)}")
        p.update(overrides)
        self.variant = variant
        self.p = p
        init = InitialCondition(
            electronic=ElectronicInit("state", (0,), basis="adiabatic"),
            nuclear=GaussianWavepacket(
                np.array([p["r0"]]), np.array([p["p0"]]), np.array([p["alpha"]])
            ),
        )
        super().__init__(
            f"tully_{variant}", 2, 1, mass, init,
            params={"variant": variant, "mass": mass, **p},
        )

    def _potential(self, R):
        r = R[:, 0]
        p = self.p
        V = np.zeros((len(r), 2, 2))
        if self.variant == "sac":
            v11 = np.where(r >= 0,
                           p["a"] * (1.0 - np.exp(-p["b"] * r)),
                           -p["a"] * (1.0 - np.exp(p["b"] * r)))
            V[:, 0, 0] = v11
            V[:, 1, 1] = -v11
            V[:, 0, 1] = V[:, 1, 0] = p["c"] * np.exp(-p["d"] * r * r)
        elif self.variant == "dac":
            V[:, 1, 1] = -p["a"] * np.exp(-p["b"] * r * r) + p["e0"]
            V[:, 0, 1] = V[:, 1, 0] = p["c"] * np.exp(-p["d"] * r * r)
        else:  # ecr
            V[:, 0, 0] = p["e0"]
            V[:, 1, 1] = -p["e0"]
            v12 = np.where(r < 0,
                           p["c"] * np.exp(p["b"] * r),
                           p["c"] * (2.0 - np.exp(-p["b"] * r)))
            V[:, 0, 1] = V[:, 1, 0] = v12
        return V

    def _grad_dense(self, R):
        r = R[:, 0]
        p = self.p
        dV = np.zeros((len(r), 1, 2, 2))
        if self.variant == "sac":
            d11 = p["a"] * p["b"] * np.exp(-p["b"] * np.abs(r))
            dV[:, 0, 0, 0] = d11
            dV[:, 0, 1, 1] = -d11
            d12 = -2.0 * p["d"] * r * p["c"] * np.exp(-p["d"] * r * r)
            dV[:, 0, 0, 1] = dV[:, 0, 1, 0] = d12
        elif self.variant == "dac":
            dV[:, 0, 1, 1] = 2.0 * p["a"] * p["b"] * r * np.exp(-p["b"] * r * r)
            d12 = -2.0 * p["d"] * r * p["c"] * np.exp(-p["d"] * r * r)
            dV[:, 0, 0, 1] = dV[:, 0, 1, 0] = d12
        else:
            d12 = p["c"] * p["b"] * np.exp(-p["b"] * np.abs(r))
            dV[:, 0, 0, 1] = dV[:, 0, 1, 0] = d12
        return dV


def build_tully(variant, **overrides):
    """Tully SAC/DAC/ECR model with literature defaults, overridable."""
    mass = overrides.pop("mass", 2000.0)
    return TullyModel(variant, mass=mass, **overrides)


# ---------------------------------------------------------------------------
# electron-transfer model: reaction mode + solvent bath


class ETModel(ModelSpec):
    """Two-level electron-transfer model: a reaction mode bilinearly coupled
    to a discretized Ohmic solvent bath.  Mode 0 is the reaction coordinate.
    """

    kind = "et"

    def __init__(self, eps, bath, Omega=3.5e-4, lambda_reorg=2.39e-2,
                 delta=5e-5, temperature=300.0, name="et"):
        self.eps = float(eps)
        self.Omega = float(Omega)
        self.lambda_reorg = float(lambda_reorg)
        self.delta = float(delta)
        if Omega <= 0 or lambda_reorg <= 0:
            raise ValueError("Omega and lambda_reorg must be positive")
        self.c_s = Omega * np.sqrt(lambda_reorg / 2.0)
        self.bath = bath
        beta = kelvin_to_beta(temperature)
        self.beta = beta
        omegas = np.concatenate(([Omega], bath.omegas))
        centers = np.zeros(bath.nb + 1)
        centers[0] = -self.c_s / Omega**2
        init = InitialCondition(
            electronic=ElectronicInit("state", (0,)),
            nuclear=ShiftedThermal(omegas, beta, centers),
        )
        super().__init__(
            name, 2, bath.nb + 1, 1.0, init,
            params={"eps": eps, "Omega": Omega, "lambda": lambda_reorg,
                    "delta": delta, "temperature": temperature,
                    "omegas": bath.omegas, "couplings": bath.couplings},
        )
        self._w2 = bath.omegas**2
        self._c = bath.couplings

    def _potential(self, R):
        rs = R[:, 0]
        rb = R[:, 1:]
        shifted = rb + rs[:, None] * (self._c / self._w2)
        ub = 0.5 * np.einsum("bj,j->b", shifted * shifted, self._w2)
        common = 0.5 * self.Omega**2 * rs**2 + ub
        bias = 0.5 * self.eps + self.c_s * rs
        V = np.zeros((len(rs), 2, 2))
        V[:, 0, 0] = common + bias
        V[:, 1, 1] = common - bias
        V[:, 0, 1] = V[:, 1, 0] = self.delta
        return V

    def _sym_antisym_parts(self, R):
        """d(common)/dR (identity part) and d(bias)/dR (sigma_z part)."""
        rs = R[:, 0]
        rb = R[:, 1:]
        shifted_force = self._w2 * rb + self._c * rs[:, None]  # dU/dR_n
        d_common = np.empty_like(R)
        d_common[:, 0] = self.Omega**2 * rs + shifted_force @ (self._c / self._w2)
        d_common[:, 1:] = shifted_force
        d_bias = np.zeros_like(R)
        d_bias[:, 0] = self.c_s
        return d_common, d_bias

    def _grad_dense(self, R):
        B, N = R.shape
        d_common, d_bias = self._sym_antisym_parts(R)
        dV = np.zeros((B, N, 2, 2))
        dV[:, :, 0, 0] = d_common + d_bias
        dV[:, :, 1, 1] = d_common - d_bias
        return dV

    def _grad_trace(self, R, sigma):
        d_common, d_bias = self._sym_antisym_parts(R)
        tr = sigma[:, 0, 0] + sigma[:, 1, 1]
        dz = sigma[:, 0, 0] - sigma[:, 1, 1]
        return tr[:, None] * d_common + dz[:, None] * d_bias

    def _grad_vdot(self, R, v):
        d_common, d_bias = self._sym_antisym_parts(R)
        a = np.sum(v * d_common, axis=1)
        b = np.sum(v * d_bias, axis=1)
        out = np.zeros((R.shape[0], 2, 2))
        out[:, 0, 0] = a + b
        out[:, 1, 1] = a - b
        return out

    def _grad_bilinear(self, R, a, b):
        d_common, d_bias = self._sym_antisym_parts(R)
        dot = np.sum(a * b, axis=1)
        dz = a[:, 0] * b[:, 0] - a[:, 1] * b[:, 1]
        return dot[:, None] * d_common + dz[:, None] * d_bias


def build_et_model(eps, bath=None, Omega=3.5e-4, lambda_reorg=2.39e-2,
                   delta=5e-5, nb=100, temperature=300.0,
                   kondo_alpha=9.49e-6):
    """Electron-transfer model with literature defaults; bath is Ohmic."""
    if bath is None:
        bath = discretize_ohmic(kondo_alpha, Omega, nb)
    return ETModel(eps, bath, Omega=Omega, lambda_reorg=lambda_reorg,
                   delta=delta, temperature=temperature)


# ---------------------------------------------------------------------------
# single-surface reference models (grid-solver sanity checks)


class Harmonic1D(ModelSpec):
    """One state, one mode: V = m w^2 R^2 / 2."""

    kind = "harmonic1d"

    def __init__(self, omega, mass=1.0):
        init = InitialCondition(
            ElectronicInit("state", (0,)),
            GaussianWavepacket(np.zeros(1), np.zeros(1), np.array([mass * omega])),
        )
        super().__init__("harmonic1d", 1, 1, mass, init,
                         params={"omega": omega, "mass": mass})
        self.omega = float(omega)

    def _potential(self, R):
        return (0.5 * self.masses[0] * self.omega**2 * R[:, 0] ** 2)[:, None, None]

    def _grad_dense(self, R):
        return (self.masses[0] * self.omega**2 * R[:, 0])[:, None, None, None]


class Free1D(ModelSpec):
    """One state, one mode, zero potential."""

    kind = "free1d"

    def __init__(self, mass=1.0):
        init = InitialCondition(
            ElectronicInit("state", (0,)),
            GaussianWavepacket(np.zeros(1), np.zeros(1), np.ones(1)),
        )
        super().__init__("free1d", 1, 1, mass, init, params={"mass": mass})

    def _potential(self, R):
        return np.zeros((R.shape[0], 1, 1))

    def _grad_dense(self, R):
        return np.zeros((R.shape[0], 1, 1, 1))
