"""Discretization of harmonic-bath spectral densities into explicit modes."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class BathDiscretization:
    """Discrete bath: mode frequencies and system-bath couplings (a.u.)."""

    omegas: np.ndarray
    couplings: np.ndarray

    @property
    def nb(self):
        return len(self.omegas)

    def __post_init__(self):
        object.__setattr__(self, "omegas", np.asarray(self.omegas, dtype=float))
        object.__setattr__(self, "couplings", np.asarray(self.couplings, dtype=float))
        if self.omegas.shape != self.couplings.shape or self.omegas.ndim != 1:
            raise ValueError("omegas and couplings must be 1-d arrays of equal length")
        if not np.all(np.isfinite(self.omegas)) or not np.all(np.isfinite(self.couplings)):
            raise ValueError("bath parameters must be finite")
        if np.any(self.omegas <= 0):
            raise ValueError("bath frequencies must be positive")


def discretize_ohmic(alpha, omega_c, nb):
    """Discretize an Ohmic spectral density J(w) = (pi/2) alpha w exp(-w/wc).

    Mode j (1-based) gets w_j = -wc ln(1 - j/(1+Nb)) and
    c_j = w_j sqrt(alpha wc / (Nb+1)).  Frequencies increase with j.
    """
    if alpha <= 0 or omega_c <= 0:
        raise ValueError("alpha and omega_c must be positive")
    if nb < 1:
        raise ValueError("nb must be >= 1")
    j = np.arange(1, nb + 1)
    omegas = -omega_c * np.log(1.0 - j / (1.0 + nb))
    couplings = omegas * np.sqrt(alpha * omega_c / (nb + 1))
    return BathDiscretization(omegas, couplings)


def discretize_debye(lambda_reorg, omega_c, nb):
    """Discretize a Debye spectral density J(w) = 2 lambda wc w / (w^2 + wc^2).

    Mode j (1-based) gets w_j = wc tan(pi/2 - pi j / (2(Nb+1))) and
    c_j = w_j sqrt(2 lambda / (Nb+1)).  Frequencies decrease with j.
    """
    if lambda_reorg <= 0 or omega_c <= 0:
        raise ValueError("lambda_reorg and omega_c must be positive")
    if nb < 1:
        raise ValueError("nb must be >= 1")
    j = np.arange(1, nb + 1)
    omegas = omega_c * np.tan(np.pi / 2.0 - np.pi * j / (2.0 * (nb + 1)))
    couplings = omegas * np.sqrt(2.0 * lambda_reorg / (nb + 1))
    return BathDiscretization(omegas, couplings)
