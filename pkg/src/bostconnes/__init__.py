"""Bost-Connes and GL2 quantum statistical mechanical systems at finite arithmetic level.

Submodules: numtower (exact numbers, residues, cyclotomics, bounded complex
values), qlat1d (1-dimensional Q-lattices and their groupoid), bcalg (the
finite-level algebra and its relations), kms (Gibbs, KMS and ground states),
galois (cyclotomic Galois action and intertwining), gl2 (the 2-dimensional
system) and cli.
"""
from . import bcalg, galois, gl2, kernels, kms, numtower, qlat1d
from .errors import (
    BostConnesError,
    ConsistencyError,
    DegenerateInput,
    DeterminantBoundExceeded,
    DomainError,
    LevelMismatch,
    ModeMismatch,
    NonInvertible,
    NotComposable,
    NotInGroupoid,
    NotInSpace,
)
from .numtower import BigComplex, Cyclotomic, QmodZ, ResidueEndo, hurwitz_zeta

__version__ = "0.1.0"

__all__ = [
    "bcalg", "galois", "gl2", "kernels", "kms", "numtower", "qlat1d",
    "BigComplex", "Cyclotomic", "QmodZ", "ResidueEndo", "hurwitz_zeta",
    "BostConnesError", "ConsistencyError", "DegenerateInput", "DeterminantBoundExceeded", "DomainError",
    "LevelMismatch", "ModeMismatch", "NonInvertible", "NotComposable", "NotInGroupoid", "NotInSpace",
]
