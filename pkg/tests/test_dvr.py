import numpy as np
import pytest

from nafdyn import build_tully
from nafdyn.dvr import (
    DVRGrid,
    DomainTooSmallError,
    WavepacketState,
    dvr_hamiltonian,
    dvr_propagate,
    gaussian_packet,
    initial_wavepacket,
    momentum_distribution,
    norm,
    populations_adiabatic,
    populations_diabatic,
)
from nafdyn.models import Free1D, Harmonic1D
from nafdyn.reference import dvr_reference, scattering_time


def test_grid_validation():
    with pytest.raises(ValueError):
        DVRGrid(0.0, 1.0, 8, 1.0)
    with pytest.raises(ValueError):
        DVRGrid(1.0, 0.0, 64, 1.0)
    g = DVRGrid(-1.0, 1.0, 101, 1.0)
    assert g.dr == pytest.approx(0.02)


def test_hamiltonian_hermitian_and_matrix_free_apply():
    model = build_tully("sac")
    grid = DVRGrid(-10.0, 10.0, 64, model.masses[0])
    H = dvr_hamiltonian(model, grid)
    dense = H.dense()
    assert np.abs(dense - dense.T).max() == 0.0
    r = np.random.Generator(np.random.Philox(key=np.array([1, 0], dtype=np.uint64)))
    psi = r.standard_normal((64, 2)) + 1j * r.standard_normal((64, 2))
    direct = (dense @ psi.reshape(-1)).reshape(64, 2)
    assert np.abs(H.apply(psi) - direct).max() <= 1e-10


def test_free_particle_plane_wave_energy():
    mass = 500.0
    grid = DVRGrid(-20.0, 20.0, 512, mass)
    H = dvr_hamiltonian(Free1D(mass), grid)
    k = 0.2 * np.pi / grid.dr
    psi = np.exp(1j * k * grid.points)[:, None]
    hpsi = H.apply(psi)
    # the truncated kinetic rows carry an edge-tail error decaying as d^-2,
    # so only the deep interior reproduces the lattice dispersion
    mid = slice(200, 312)
    ratio = (hpsi[mid, 0] / psi[mid, 0]).real
    assert np.allclose(ratio, k**2 / (2 * mass), rtol=1e-3)
    center = (hpsi[256, 0] / psi[256, 0]).real
    assert center == pytest.approx(k**2 / (2 * mass), rel=2e-4)


def test_harmonic_ground_state_energy():
    omega, mass = 0.005, 2000.0
    grid = DVRGrid(-8.0, 8.0, 256, mass)
    H = dvr_hamiltonian(Harmonic1D(omega, mass), grid)
    e0 = np.linalg.eigvalsh(H.dense())[0]
    assert abs(e0 - omega / 2) <= 1e-6


def test_free_gaussian_dispersion():
    mass, alpha = 1000.0, 1.0
    grid = DVRGrid(-60.0, 60.0, 1024, mass)
    H = dvr_hamiltonian(Free1D(mass), grid)
    psi0 = WavepacketState(gaussian_packet(grid, 0.0, 0.0, alpha)[:, None], 0.0)
    t = 4000.0
    state = dvr_propagate(psi0, H, [t])[-1]
    dens = np.abs(state.psi[:, 0]) ** 2 * grid.dr
    var = np.sum(dens * grid.points**2) - np.sum(dens * grid.points) ** 2
    sigma0_sq = 1.0 / (2 * alpha)
    assert abs(var - (sigma0_sq + t**2 / (4 * mass**2 * sigma0_sq))) <= 1e-6
    assert abs(norm(state, grid) - 1.0) <= 1e-8


def test_stationary_eigenstate_is_stationary():
    omega, mass = 0.005, 2000.0
    grid = DVRGrid(-8.0, 8.0, 128, mass)
    H = dvr_hamiltonian(Harmonic1D(omega, mass), grid)
    w, vecs = np.linalg.eigh(H.dense())
    psi0 = vecs[:, 0][:, None] / np.sqrt(grid.dr)
    states = dvr_propagate(WavepacketState(psi0.astype(complex), 0.0), H,
                           [0.0, 500.0, 1000.0])
    p0 = populations_diabatic(states[0], grid)
    for s in states[1:]:
        dens_change = np.abs(np.abs(s.psi) ** 2 - np.abs(states[0].psi) ** 2).max()
        assert dens_change <= 1e-8
        assert abs(populations_diabatic(s, grid) - p0).max() <= 1e-8


def test_edge_breach_reports_time():
    mass = 200.0
    grid = DVRGrid(-10.0, 10.0, 128, mass)
    H = dvr_hamiltonian(Free1D(mass), grid)
    psi0 = WavepacketState(gaussian_packet(grid, 0.0, 5.0, 1.0)[:, None], 0.0)
    with pytest.raises(DomainTooSmallError) as err:
        dvr_propagate(psi0, H, [100.0, 400.0, 2000.0])
    assert err.value.t in (100.0, 400.0, 2000.0)


def test_momentum_distribution_peak_and_norm():
    mass = 2000.0
    grid = DVRGrid(-30.0, 30.0, 1024, mass)
    H = dvr_hamiltonian(Free1D(mass), grid)
    psi = WavepacketState(gaussian_packet(grid, -5.0, 12.0, 1.0)[:, None], 0.0)
    k, dens = momentum_distribution(psi, grid)
    dk = k[1] - k[0]
    assert np.sum(dens * dk) == pytest.approx(1.0, abs=1e-10)
    assert k[np.argmax(dens)] == pytest.approx(12.0, abs=dk)
    bins = np.arange(-20.0, 20.5, 1.0)
    _, binned = momentum_distribution(psi, grid, bins=bins)
    assert np.sum(binned * 1.0) == pytest.approx(1.0, abs=1e-10)


def test_initial_wavepacket_adiabatic_projection():
    model = build_tully("ecr")
    grid = DVRGrid(-40.0, 40.0, 512, model.masses[0])
    state = initial_wavepacket(model, grid, -13.0, 20.0, 1.0, 0, basis="adiabatic")
    assert norm(state, grid) == pytest.approx(1.0, abs=1e-12)
    pops = populations_adiabatic(state, model, grid)
    assert pops[0] == pytest.approx(1.0, abs=1e-10)


def test_scattering_time_uses_open_channels():
    model = build_tully("ecr", p0=20.0)
    t = scattering_time(model)
    v0 = 20.0 / 2000.0
    assert t > (13.0 + 15.0) / (2.5 * v0)  # slower than the accelerated channel
    assert t < 3.0 * (13.0 + 15.0) / v0


def test_dvr_reference_rejects_underresolved_grid():
    model = build_tully("sac", p0=20.0)
    grid = DVRGrid(-40.0, 40.0, 256, model.masses[0])
    with pytest.raises(ValueError, match="resolve"):
        dvr_reference(model, t_max=10.0, grid=grid)
