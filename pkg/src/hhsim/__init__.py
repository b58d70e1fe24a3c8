"""Simulation of Hubbard-Holstein dynamics on hybrid qubit-resonator registers.

Exact, digital-analog (Trotterized analog blocks + digital steps) and purely
digital propagation, Kraus noise channels, circuit resource accounting, and
condensed-matter observables, with a CLI for runs and parameter sweeps.
"""

__version__ = "0.1.0"

from .model import HHParams, TermDecomposition, build_fermion_boson, build_spin_boson, initial_state
from .spaces import HilbertSpace, expm_apply

__all__ = [
    "HHParams",
    "TermDecomposition",
    "HilbertSpace",
    "build_fermion_boson",
    "build_spin_boson",
    "expm_apply",
    "initial_state",
    "__version__",
]
