"""Simulator and verification harness for self-gravitating particle
clouds with a general (notably Fermi-Dirac) equation of state.

The density obeys a drift-diffusion equation coupled to the attractive
Poisson potential, either directly (elliptic coupling) or through a
damped parabolic relaxation.  Temperature is prescribed (isothermal) or
pinned each instant by a fixed total energy (microcanonical).  Every
computable invariant of the model family is monitored at runtime.
"""

from .eos import EosKind, EosModel
from .evolve import Outcome, RunResult, State, TimeControl, run
from .fermi import fermi_derivative, fermi_integral, fermi_inverse
from .grid import RadialGrid

__version__ = "0.1.0"

__all__ = [
    "EosKind",
    "EosModel",
    "Outcome",
    "RadialGrid",
    "RunResult",
    "State",
    "TimeControl",
    "fermi_derivative",
    "fermi_integral",
    "fermi_inverse",
    "run",
    "__version__",
]
