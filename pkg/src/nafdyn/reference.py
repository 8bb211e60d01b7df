"""Exact grid references for one-dimensional models, packaged in the same
series schema the trajectory estimators write (descriptor method="dvr")."""

import numpy as np

from .dvr import (
    DVRGrid,
    dvr_hamiltonian,
    dvr_propagate,
    initial_wavepacket,
    momentum_distribution,
    populations_adiabatic,
    populations_diabatic,
    scattering_fractions,
)
from .estimators import EstimateSeries

TULLY_SPAN = (-60.0, 80.0)
TULLY_NPTS = 4096
MORSE_SPAN = (1.0, 40.0)
MORSE_NPTS = 4096


def scattering_time(model, p0=None, clearance=15.0, r_eval=25.0, kin_floor=1e-4):
    """Time for the slowest open scattering channel to clear the coupling
    region, from the asymptotic adiabatic energies."""
    nuc = model.init.nuclear
    r0 = float(nuc.r0[0])
    p0 = float(nuc.p0[0]) if p0 is None else float(p0)
    m = model.masses[0]
    e_init = np.linalg.eigvalsh(model.potential(np.array([r0])))
    state0 = model.init.electronic.indices[0]
    e_tot = p0**2 / (2 * m) + e_init[state0]
    speeds = []
    for side in (-r_eval, r_eval):
        for ek in np.linalg.eigvalsh(model.potential(np.array([side]))):
            kin = e_tot - ek
            if kin > kin_floor:
                speeds.append(np.sqrt(2.0 * kin / m))
    if not speeds:
        raise ValueError("no open scattering channel")
    return (abs(r0) + clearance) / min(speeds)


def default_grid(model, span=None, npts=None):
    if span is None or npts is None:
        if model.kind == "morse":
            span = span or MORSE_SPAN
            npts = npts or MORSE_NPTS
        else:
            span = span or TULLY_SPAN
            npts = npts or TULLY_NPTS
    return DVRGrid(span[0], span[1], npts, model.masses[0])


def dvr_reference(model, t_max=None, n_snapshots=5, grid=None, bins=None,
                  p0=None, tol=1e-10):
    """Exact reference observables for a 1-d scattering/photodissociation model.

    Returns {filename: EstimateSeries} mirroring the trajectory estimator
    outputs: adiabatic/diabatic populations over time, final transmission and
    reflection fractions per adiabatic state, and (with bins) the final-time
    momentum distribution.
    """
    if model.nmodes != 1:
        raise ValueError("DVR reference requires a 1-d model")
    nuc = model.init.nuclear
    ele = model.init.electronic
    grid = grid if grid is not None else default_grid(model)
    p_c = abs(float(nuc.p0[0]) if p0 is None else float(p0))
    p_max = p_c + 4.0 * np.sqrt(float(nuc.alpha[0]) / 2.0)
    if p_max * grid.dr >= 0.8 * np.pi:
        raise ValueError(
            f"grid spacing {grid.dr:.4f} cannot resolve momenta up to {p_max:.1f}; "
            f"need p_max * dr < 0.8 pi")
    if t_max is None:
        t_max = scattering_time(model, p0=p0)
    H = dvr_hamiltonian(model, grid)
    psi0 = initial_wavepacket(
        model, grid, float(nuc.r0[0]),
        float(nuc.p0[0]) if p0 is None else float(p0),
        float(nuc.alpha[0]), ele.indices[0], basis=ele.basis)
    t_grid = np.linspace(0.0, t_max, max(n_snapshots, 2))
    states = dvr_propagate(psi0, H, t_grid, tol=tol)

    F = model.nstates
    pops_ad = np.array([populations_adiabatic(s, model, grid) for s in states])
    pops_di = np.array([populations_diabatic(s, grid) for s in states])
    base = {"model": model.name, "method": "dvr", "n_traj": 0, "seed": None}
    out = {}
    zeros = np.zeros(len(t_grid))
    nzero = np.zeros(len(t_grid), int)
    for k in range(F):
        out[f"pop_adi_{k + 1}.csv"] = EstimateSeries(
            t_grid, pops_ad[:, k].astype(complex), zeros.copy(), nzero.copy(),
            {**base, "kind": "population", "state": k + 1, "basis": "adiabatic"})
        out[f"pop_dia_{k + 1}.csv"] = EstimateSeries(
            t_grid, pops_di[:, k].astype(complex), zeros.copy(), nzero.copy(),
            {**base, "kind": "population", "state": k + 1, "basis": "diabatic"})

    frac = scattering_fractions(states[-1], model, grid)
    for label in ("transmit", "reflect"):
        for k in range(F):
            out[f"scatter_{label}_{k + 1}.csv"] = EstimateSeries(
                np.array([t_grid[-1]]), np.array([frac[label][k]], complex),
                np.zeros(1), np.zeros(1, int),
                {**base, "kind": "scattering", "channel": label, "state": k + 1,
                 "basis": "adiabatic"})

    if bins is not None:
        edges = np.asarray(bins, float)
        centers = 0.5 * (edges[1:] + edges[:-1])
        _, dens = momentum_distribution(states[-1], grid, bins=edges)
        out[f"phist_t{t_grid[-1]:g}.csv"] = EstimateSeries(
            centers, dens.astype(complex), np.zeros(len(centers)),
            np.zeros(len(centers), int),
            {**base, "kind": "momentum_histogram", "at_time": float(t_grid[-1]),
             "abscissa": "momentum", "weighting": "exact"})
    return out


def self_convergence(model, t_max=None, grid=None, p0=None, tol=1e-10):
    """Transmission/reflection change under grid doubling (domain + points);
    the gate before any DVR number is quoted as an oracle."""
    grid = grid if grid is not None else default_grid(model)
    if t_max is None:
        t_max = scattering_time(model, p0=p0)
    wide = DVRGrid(grid.r_min * 1.5, grid.r_max * 1.5, grid.npts * 2, grid.mass)
    out = []
    for g in (grid, wide):
        H = dvr_hamiltonian(model, g)
        nuc, ele = model.init.nuclear, model.init.electronic
        psi0 = initial_wavepacket(model, g, float(nuc.r0[0]),
                                  float(nuc.p0[0]) if p0 is None else float(p0),
                                  float(nuc.alpha[0]), ele.indices[0], basis=ele.basis)
        states = dvr_propagate(psi0, H, [t_max], tol=tol)
        frac = scattering_fractions(states[-1], model, g)
        out.append(np.concatenate([frac["transmit"], frac["reflect"]]))
    return float(np.abs(out[0] - out[1]).max()), out[0], out[1]
