"""Steady-state optical response of a pumped four-level cold 87Rb atom.

Computes relative permittivity, permeability and refractive index over a
probe-detuning sweep and locates the bands where the medium is left-handed.
"""

from .dynamics import (
    DensityMatrix,
    Generator,
    build_generator,
    evolve,
    rho21_weak,
    rho23_weak,
    rho24_weak,
    steady_state,
)
from .params import PRESETS, ScenarioPreset, SystemParameters, apply_linkages, preset, validate
from .response import (
    Band,
    ResponsePoint,
    clausius_mossotti,
    detect_bands,
    magnetizability,
    polarizability,
    refractive_index,
)
from .sweep import SweepResult, SweepSpec, compare_scenarios, run_sweep

__version__ = "0.1.0"
