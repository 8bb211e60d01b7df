"""Grid-based exact quantum dynamics for one-dimensional multi-state models:
sinc-DVR Hamiltonian (Colbert-Miller kinetic matrix) with Chebyshev
wavepacket propagation.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import matmul_toeplitz
from scipy.special import jv

from .adiabatic import align_columns

EDGE_POINTS = 5
EDGE_TOL = 1e-8
CHEB_TOL = 1e-10
SAFETY = 1.1


@dataclass(frozen=True)
class DVRGrid:
    r_min: float
    r_max: float
    npts: int
    mass: float

    def __post_init__(self):
        if self.npts < 16:
            raise ValueError("grid needs at least 16 points")
        if self.r_max <= self.r_min:
            raise ValueError("empty grid domain")

    @property
    def dr(self):
        return (self.r_max - self.r_min) / (self.npts - 1)

    @property
    def points(self):
        return np.linspace(self.r_min, self.r_max, self.npts)


@dataclass
class WavepacketState:
    psi: np.ndarray  # (npts, F) diabatic components, norm sum |psi|^2 dr = 1
    t: float


class DomainTooSmallError(RuntimeError):
    def __init__(self, t, edge_density):
        self.t = t
        self.edge_density = edge_density
        super().__init__(
            f"wavepacket reached the grid edge at t={t:g} (edge density {edge_density:.2e})")


class DVRHamiltonian:
    """Matrix-free sinc-DVR Hamiltonian for a 1-d F-state diabatic model.

    Kinetic matrix (per state): T_ii = c pi^2/3, T_ij = 2 c (-1)^(i-j)/(i-j)^2
    with c = 1/(2 m dr^2); applied as a Toeplitz product.
    """

    def __init__(self, model, grid):
        if model.nmodes != 1:
            raise ValueError("DVR reference requires a 1-d model")
        self.model = model
        self.grid = grid
        c = 1.0 / (2.0 * grid.mass * grid.dr**2)
        k = np.arange(grid.npts)
        col = np.empty(grid.npts)
        col[0] = c * np.pi**2 / 3.0
        col[1:] = 2.0 * c * (-1.0) ** k[1:] / k[1:] ** 2
        self._tcol = col
        self.V = model.potential(grid.points[:, None])  # (npts, F, F)
        vband = np.linalg.eigvalsh(self.V)
        self.e_min = float(vband.min())
        self.e_max = float(vband.max() + c * np.pi**2)

    @property
    def nstates(self):
        return self.model.nstates

    def apply(self, psi):
        out = matmul_toeplitz((self._tcol, self._tcol), psi)
        out += np.einsum("xnm,xm->xn", self.V, psi)
        return out

    def dense(self):
        """Full (npts F) x (npts F) matrix; for small grids and tests."""
        n, F = self.grid.npts, self.nstates
        i = np.arange(n)
        Tmat = self._tcol[np.abs(i[:, None] - i[None, :])]
        H = np.zeros((n, F, n, F))
        for a in range(F):
            H[:, a, :, a] = Tmat
        ii = np.arange(n)
        H[ii, :, ii, :] += self.V
        return H.reshape(n * F, n * F)


def dvr_hamiltonian(model, grid):
    return DVRHamiltonian(model, grid)


def gaussian_packet(grid, r0, p0, alpha):
    """Normalized packet exp(-alpha (R-R0)^2/2 + i P0 (R-R0)) on the grid."""
    x = grid.points
    psi = np.exp(-0.5 * alpha * (x - r0) ** 2 + 1j * p0 * (x - r0))
    psi /= np.sqrt(np.sum(np.abs(psi) ** 2) * grid.dr)
    return psi


def grid_frames(model, grid):
    """Adiabatic frames along the grid with left-to-right sign continuity."""
    V = model.potential(grid.points[:, None])
    E, T = np.linalg.eigh(V)
    for i in range(1, grid.npts):
        T[i] = align_columns(T[i], T[i - 1])
    return E, T


def initial_wavepacket(model, grid, r0, p0, alpha, state, basis="diabatic"):
    """Gaussian packet on a diabatic or adiabatic electronic state."""
    phi = gaussian_packet(grid, r0, p0, alpha)
    psi = np.zeros((grid.npts, model.nstates), complex)
    if basis == "diabatic":
        psi[:, state] = phi
    elif basis == "adiabatic":
        _, T = grid_frames(model, grid)
        psi = T[:, :, state] * phi[:, None]
    else:
        raise ValueError(f"unknown basis {basis!r}")
    return WavepacketState(psi, 0.0)


def norm(state, grid):
    return float(np.sum(np.abs(state.psi) ** 2) * grid.dr)


def edge_density(state, grid):
    p = np.sum(np.abs(state.psi) ** 2, axis=1) * grid.dr
    return float(p[:EDGE_POINTS].sum() + p[-EDGE_POINTS:].sum())


def chebyshev_step(H, psi, tau, tol=CHEB_TOL):
    """psi(t + tau) by Chebyshev expansion of exp(-i H tau)."""
    half = 0.5 * (H.e_max - H.e_min) * SAFETY
    mid = 0.5 * (H.e_max + H.e_min)
    z = half * tau
    n_terms = int(z + 60 + 12 * z ** (1.0 / 3.0)) if z > 1 else 80
    c = jv(np.arange(n_terms), z) * (-1j) ** np.arange(n_terms)
    c[1:] *= 2.0
    # drop the negligible tail
    keep = np.nonzero(np.abs(c) > tol * 1e-2)[0]
    n_terms = int(keep[-1]) + 1 if len(keep) else 1

    def h_norm(v):
        return (H.apply(v) - mid * v) / half

    phi_prev = psi
    phi = h_norm(psi)
    out = c[0] * phi_prev + c[1] * phi
    for k in range(2, n_terms):
        phi_next = 2.0 * h_norm(phi) - phi_prev
        out += c[k] * phi_next
        phi_prev, phi = phi, phi_next
    return out * np.exp(-1j * mid * tau)


def dvr_propagate(psi0, H, t_grid, tol=CHEB_TOL, check_edges=True):
    """Propagate through the requested times; returns a list of states.

    Raises DomainTooSmallError when probability accumulates at the grid edge,
    naming the offending time.
    """
    t_grid = np.asarray(t_grid, float)
    if t_grid[0] < psi0.t - 1e-12:
        raise ValueError("t_grid starts before the initial state")
    states = []
    cur = WavepacketState(psi0.psi.copy(), psi0.t)
    for t in t_grid:
        tau = t - cur.t
        if tau > 1e-14:
            cur = WavepacketState(chebyshev_step(H, cur.psi, tau, tol), t)
        states.append(WavepacketState(cur.psi.copy(), t))
        if check_edges:
            ed = edge_density(cur, H.grid)
            if ed > EDGE_TOL:
                raise DomainTooSmallError(t, ed)
    return states


# ---------------------------------------------------------------------------
# observables


def populations_diabatic(state, grid):
    return np.sum(np.abs(state.psi) ** 2, axis=0) * grid.dr


def adiabatic_components(state, model, grid):
    _, T = grid_frames(model, grid)
    return np.einsum("xnk,xn->xk", T, state.psi)


def populations_adiabatic(state, model, grid):
    psi_ad = adiabatic_components(state, model, grid)
    return np.sum(np.abs(psi_ad) ** 2, axis=0) * grid.dr


def scattering_fractions(state, model, grid):
    """Probability per (channel, adiabatic state); channels transmit (R>0)
    and reflect (R<0)."""
    psi_ad = adiabatic_components(state, model, grid)
    dens = np.abs(psi_ad) ** 2 * grid.dr
    right = grid.points > 0
    return {
        "transmit": dens[right].sum(axis=0),
        "reflect": dens[~right].sum(axis=0),
    }


def momentum_distribution(state, grid, bins=None):
    """Unit-normalized momentum density from the discrete Fourier transform
    of the diabatic components.

    Returns (k_grid, density) or, with bin edges, (bins, binned density).
    """
    n = grid.npts
    k = 2.0 * np.pi * np.fft.fftfreq(n, grid.dr)
    order = np.argsort(k)
    # unitary convention: psi_hat(k) = dr/sqrt(2 pi) sum_x psi(x) e^{-ikx}
    psi_hat = np.fft.fft(state.psi, axis=0) * grid.dr / np.sqrt(2.0 * np.pi)
    dens = np.sum(np.abs(psi_hat) ** 2, axis=1)[order]
    k = k[order]
    dk = k[1] - k[0]
    dens = dens / (dens.sum() * dk)
    if bins is None:
        return k, dens
    bins = np.asarray(bins, float)
    hist, _ = np.histogram(k, bins=bins, weights=dens * dk)
    width = np.diff(bins)
    density = hist / width
    total = np.sum(density * width)
    if total > 0:
        density = density / total
    return bins, density
