"""Numerical study of generalized p-Laplacian eigenvalues on long cylinders.

The library discretizes the mixed, Dirichlet and half-cylinder eigenvalue
problems on (-ell, ell) x (-1/2, 1/2) with a symmetric coefficient matrix
A(x2), computes first (and, for p = 2, higher) eigenpairs, and provides the
sweep/diagnostic machinery used to observe the eigenvalue gap, eigenfunction
decay and half-cylinder limits as the cylinder grows.
"""

from .coeffs import (CoefficientFamily, CoefficientField, FamilyKind,
                     ellipticity_margin, load_tabulated_csv,
                     make_coefficients, reflect_axis, satisfies_symmetry_S)
from .discretization import (DiscreteField, QuadratureRule, SparsePair,
                             assemble_p2, energy, energy_gradient,
                             grad_p_norm, lift_cross_section, p_mass,
                             rayleigh)
from .eigensolve import (CrossSectionResult, EigenResult, Init, Side,
                         SolveOptions, cross_section_ground_state,
                         half_cylinder_eigen, linear_spectrum,
                         minimize_rayleigh)
from .mesh import (BC, CylinderMesh, DomainSpec, Shape, SlabProfile,
                   build_mesh, slab_integrals)

__version__ = "0.1.0"

__all__ = [
    "BC", "CoefficientFamily", "CoefficientField", "CrossSectionResult",
    "CylinderMesh", "DiscreteField", "DomainSpec", "EigenResult",
    "FamilyKind", "Init", "QuadratureRule", "Shape", "Side", "SlabProfile",
    "SolveOptions", "SparsePair", "assemble_p2", "build_mesh",
    "cross_section_ground_state", "ellipticity_margin", "energy",
    "energy_gradient", "grad_p_norm", "half_cylinder_eigen",
    "lift_cross_section", "linear_spectrum", "load_tabulated_csv",
    "make_coefficients", "minimize_rayleigh", "p_mass", "rayleigh",
    "reflect_axis", "satisfies_symmetry_S", "slab_integrals",
    "__version__",
]
