"""Trajectory-based nonadiabatic dynamics on quantum phase space.

Methods: nonadiabatic-field dynamics with triangle-window electronic
representations (naf-tw, naf-tw2), the original CPS variant (naf), windowed
and plain mean-field dynamics (sqc-tw, sqc-tw2, ehrenfest), and fewest-
switches surface hopping (fssh) -- on a shared library of benchmark diabatic
models, with matrix-exponential and sinc-DVR exact references built in.
"""

from .baths import BathDiscretization, discretize_debye, discretize_ohmic
from .models import (
    ElectronicInit,
    GaussianWavepacket,
    InitialCondition,
    LVCMGround,
    ModelSpec,
    ShiftedThermal,
    ThermalHarmonic,
    build_cavity,
    build_et_model,
    build_fmo,
    build_lvcm,
    build_morse3,
    build_spin_boson,
    build_tully,
)
from .propagation import MethodVariant, PhaseSpacePoint

__all__ = [
    "BathDiscretization",
    "discretize_debye",
    "discretize_ohmic",
    "ElectronicInit",
    "GaussianWavepacket",
    "InitialCondition",
    "LVCMGround",
    "ModelSpec",
    "ShiftedThermal",
    "ThermalHarmonic",
    "build_cavity",
    "build_et_model",
    "build_fmo",
    "build_lvcm",
    "build_morse3",
    "build_spin_boson",
    "build_tully",
    "MethodVariant",
    "PhaseSpacePoint",
]

__version__ = "0.1.0"
