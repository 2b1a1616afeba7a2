"""Dimension polynomials of inversive difference field extensions.

Modules:
    binompoly  numerical polynomials in the binomial basis
    lattice    partitions, orders on Z^m and lattice-set polynomials
    diffring   inversive difference polynomials, reduction, characteristic sets
    extdim     dimension polynomials of extensions, invariants, oracle
    cli        the ``dimpoly`` command
"""

from .binompoly import NumPoly, interpolate
from .lattice import LatticeSet, Partition, omega, phi_set, shell_count
from .diffring import DiffPolynomial, Term, e_reduce, linear_char_set, parse_poly
from .extdim import (ExtensionSpec, WindowSpec, compute_phi, equivalence_distinguish, invariants,
                     trdeg_oracle, univariate_phi)

__version__ = "0.1.0"

__all__ = [
    "NumPoly", "interpolate", "LatticeSet", "Partition", "omega", "phi_set", "shell_count",
    "DiffPolynomial", "Term", "e_reduce", "linear_char_set", "parse_poly", "ExtensionSpec",
    "WindowSpec", "compute_phi", "equivalence_distinguish", "invariants", "trdeg_oracle",
    "univariate_phi",
]
