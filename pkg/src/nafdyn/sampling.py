"""Wigner sampling of initial nuclear phase-space points.

Gaussians come from ``numpy.random.Generator.standard_normal`` (ziggurat);
this choice is fixed so that a given seed reproduces the same stream on any
worker layout.
"""

import numpy as np

from .models import GaussianWavepacket, LVCMGround, ShiftedThermal, ThermalHarmonic


def quantum_corrector(omegas, beta):
    """Q(w) = (beta w / 2) / tanh(beta w / 2); elementwise, beta=inf allowed."""
    omegas = np.asarray(omegas, float)
    if np.isinf(beta):
        return np.full_like(omegas, np.inf)
    x = 0.5 * beta * omegas
    return x / np.tanh(x)


def _thermal_widths(omegas, beta):
    """Per-mode std devs (sigma_R, sigma_P) of the thermal harmonic Wigner."""
    omegas = np.asarray(omegas, float)
    if np.any(omegas <= 0):
        raise ValueError("thermal sampling needs positive frequencies")
    if np.isinf(beta):
        # vacuum: Var(R) = 1/(2w), Var(P) = w/2
        return 1.0 / np.sqrt(2.0 * omegas), np.sqrt(omegas / 2.0)
    if beta <= 0:
        raise ValueError("beta must be positive or inf")
    q = quantum_corrector(omegas, beta)
    return np.sqrt(q / beta) / omegas, np.sqrt(q / beta)


def wigner_thermal_harmonic(omegas, beta, rng):
    """Draw (R, P) of independent thermal harmonic modes."""
    sig_r, sig_p = _thermal_widths(omegas, beta)
    R = sig_r * rng.standard_normal(len(sig_r))
    P = sig_p * rng.standard_normal(len(sig_p))
    return R, P


def wigner_shifted_thermal(omegas, beta, centers, rng):
    """Thermal harmonic Wigner with displaced coordinate centers."""
    R, P = wigner_thermal_harmonic(omegas, beta, rng)
    return R + np.asarray(centers, float), P


def wigner_et_reaction_mode(Omega, c_s, beta, rng):
    """Reaction-mode draw: thermal widths at Omega, center shifted to -c_s/Omega^2."""
    if Omega <= 0:
        raise ValueError("Omega must be positive")
    R, P = wigner_thermal_harmonic(np.array([Omega]), beta, rng)
    return R[0] - c_s / Omega**2, P[0]


def wigner_gaussian(r0, p0, alpha, rng):
    """Minimum-uncertainty packet: R ~ N(r0, 1/(2a)), P ~ N(p0, a/2)."""
    r0 = np.atleast_1d(np.asarray(r0, float))
    p0 = np.atleast_1d(np.asarray(p0, float))
    alpha = np.broadcast_to(np.asarray(alpha, float), r0.shape)
    if np.any(alpha <= 0):
        raise ValueError("width parameter alpha must be positive")
    R = r0 + rng.standard_normal(len(r0)) / np.sqrt(2.0 * alpha)
    P = p0 + rng.standard_normal(len(p0)) * np.sqrt(alpha / 2.0)
    return R, P


def wigner_lvcm_ground(n_modes, rng):
    """Ground-state Wigner of dimensionless modes: Var(R) = Var(P) = 1/2."""
    s = np.sqrt(0.5)
    return s * rng.standard_normal(n_modes), s * rng.standard_normal(n_modes)


def sample_nuclear(dist, rng):
    """Dispatch on the nuclear initial-condition tag; returns (R, P)."""
    if isinstance(dist, ThermalHarmonic):
        return wigner_thermal_harmonic(dist.omegas, dist.beta, rng)
    if isinstance(dist, ShiftedThermal):
        return wigner_shifted_thermal(dist.omegas, dist.beta, dist.centers, rng)
    if isinstance(dist, GaussianWavepacket):
        return wigner_gaussian(dist.r0, dist.p0, dist.alpha, rng)
    if isinstance(dist, LVCMGround):
        return wigner_lvcm_ground(dist.n_modes, rng)
    raise TypeError(f"unknown nuclear distribution {type(dist).__name__}")
