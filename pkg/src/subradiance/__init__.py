"""Subradiant single-excitation states of multilevel atom chains."""
__version__ = "0.1.0"

from .angular import TOY_ATOM, LevelScheme, clebsch_coefficient, transition_table, wigner3j
from .bloch import delta_at_zone_edge, dispersion, dispersion_curve, find_intersection, polylog
from .greens import ChainGeometry, coupling_rates, greens_tensor
from .hamiltonian import EffectiveHamiltonian, assemble, toy_hamiltonian
from .hilbert import FzBlock, enumerate_block
from .spectra import EigenMode, eigendecompose, filtered_symmetric_search, most_subradiant

__all__ = [
    "TOY_ATOM", "LevelScheme", "clebsch_coefficient", "transition_table", "wigner3j",
    "delta_at_zone_edge", "dispersion", "dispersion_curve", "find_intersection", "polylog",
    "ChainGeometry", "coupling_rates", "greens_tensor",
    "EffectiveHamiltonian", "assemble", "toy_hamiltonian",
    "FzBlock", "enumerate_block",
    "EigenMode", "eigendecompose", "filtered_symmetric_search", "most_subradiant",
]
