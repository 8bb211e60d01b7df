import numpy as np
import pytest

from nafdyn import (
    build_cavity,
    build_et_model,
    build_fmo,
    build_lvcm,
    build_morse3,
    build_spin_boson,
    build_tully,
    discretize_debye,
    discretize_ohmic,
)


def rng(seed=0):
    return np.random.Generator(np.random.Philox(key=np.array([seed, 0], dtype=np.uint64)))


@pytest.fixture
def make_rng():
    return rng


def toy_lvcm(nstates=2, nmodes=2, seed=3):
    r = rng(seed)
    omegas = 0.002 + 0.01 * r.random(nmodes)
    energies = np.sort(0.05 * r.random(nstates))
    kappa = 0.002 * r.standard_normal((nstates, nmodes))
    lam = 0.001 * r.standard_normal((nstates, nstates, nmodes))
    lam = 0.5 * (lam + lam.transpose(1, 0, 2))
    return build_lvcm(energies, omegas, kappa, lam)


def toy_morse():
    d = np.array([0.02, 0.015, 0.025])
    beta_m = np.array([0.6, 0.7, 0.55])
    r_min = np.array([2.0, 3.0, 4.0])
    c = np.array([0.0, 0.01, 0.02])
    a = np.zeros((3, 3))
    alpha_g = np.ones((3, 3))
    r_g = np.ones((3, 3))
    a[0, 1] = a[1, 0] = 0.002
    a[1, 2] = a[2, 1] = 0.001
    alpha_g[0, 1] = alpha_g[1, 0] = 0.4
    alpha_g[1, 2] = alpha_g[2, 1] = 0.7
    r_g[0, 1] = r_g[1, 0] = 2.5
    r_g[1, 2] = r_g[2, 1] = 3.4
    return build_morse3(d, beta_m, r_min, c, a, alpha_g, r_g)


def all_model_families():
    """One small instance per model family, for property sweeps."""
    return {
        "spin_boson": build_spin_boson(0.3, 1.0, discretize_ohmic(0.1, 1.0, 8)),
        "fmo": build_fmo(discretize_debye(1.6e-4, 4.8e-4, 4)),
        "cavity": build_cavity(nmodes=6),
        "cavity2": build_cavity(nmodes=6, two_level=True),
        "lvcm": toy_lvcm(),
        "morse": toy_morse(),
        "tully_sac": build_tully("sac"),
        "tully_dac": build_tully("dac"),
        "tully_ecr": build_tully("ecr"),
        "et": build_et_model(eps=0.012, nb=8),
    }


@pytest.fixture(params=list(all_model_families()))
def family_model(request):
    return all_model_families()[request.param]
