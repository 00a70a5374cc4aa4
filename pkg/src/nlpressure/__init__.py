"""Finite-resolution pressure of nonlinear energies on shifts of finite type."""

__version__ = "0.1.0"

from .covers import Cover, CylSet, JoinAtoms, Partition, ResolutionCapExceeded
from .energy import CylinderFunction, EnergyFunctional
from .logexp import ExpSum
from .measures import AtomicMeasure, MarkovMeasure, bernoulli
from .subshift import PointRep, Subshift

__all__ = [
    "AtomicMeasure",
    "Cover",
    "CylSet",
    "CylinderFunction",
    "EnergyFunctional",
    "ExpSum",
    "JoinAtoms",
    "MarkovMeasure",
    "Partition",
    "PointRep",
    "ResolutionCapExceeded",
    "Subshift",
    "bernoulli",
    "__version__",
]
