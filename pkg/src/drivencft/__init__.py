"""Möbius-matrix toolkit for driven two-dimensional conformal field theories.

Modules
-------
mobius        2x2 step matrices and their group classes
drive         Thue-Morse and random multipolar driving sequences
tracemap      the planar trace map, its preimages and escape times
entropy       overflow-safe products, entanglement and pseudo-entropy
rmd           random multipolar lifetimes, scaling and averaged blocks
nonhermitian  combined SU(2)/SL(2,R) drive and its phase diagram
fermion       free-fermion lattice oracle
cli           batch command line front end
"""
from .errors import (CapacityError, ClassError, DegenerateInputError, DomainError, InvalidParameterError,
                     NoRootError, NormalizationError, NumericError, SingularConfigurationError)
from .mobius import (INFINITY, DeformationParams, GroupClass, MobiusMatrix, build_from_deformation, build_u0,
                     build_u1, build_u2, build_u3, classify_group, mobius_apply)
from .scaled import ScaledProduct

__version__ = "0.1.0"
