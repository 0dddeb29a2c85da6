"""Exact R-matrix, tri-Hamiltonian and Lax-flow machinery for the 2D Toda hierarchy.

Operators are difference operators ``Σ a_k(n) Λ^k`` with coefficients on the
periodic lattice Z/NZ, stored as exact rationals (gmpy2) unless a float mode
is requested.  The submodules build on each other in this order:

``scalar_lattice``   lattice functions, shifts, (Λ-1)^-1 and the 𝒟^k sums
``diffop``           difference operators with exactness windows
``pair_algebra``     pairs (X, Xb), the trace form and the R-matrix
``poisson_tensors``  the three unreduced Poisson tensors
``dirac_reduction``  Lax states, reduced tensors and a generic Dirac oracle
``coord_brackets``   explicit coordinate brackets and Jacobi checks
``hierarchy``        Hamiltonians, Lax flows, zero curvature, RK4, 2D Toda
``verify``           seeded verification suites and reports
``cli``              the ``toda2d`` command
"""
from .coord_brackets import (CoordIndex, bracket_terms, evaluate_bracket, jacobiator,
                             tensor_bracket)
from .diffop import DiffOp, commutator, mul, power, project, residue, trace
from .dirac_reduction import (DiracOracle, LaxState, numeric_dirac_oracle, reduced_p1,
                              reduced_p2, reduced_p3, reduced_tensor, shift_pushforward_residual)
from .errors import (DepthExceeded, NonVanishingVComponent, NonZeroMean, PeriodMismatch,
                     StarConditionViolated, StepRejected, TangencyViolation, TodaError,
                     TruncationViolation, UnsupportedIndex)
from .hierarchy import (FlowSpec, HamiltonianId, hamiltonian, integrate, lax_vector,
                        toda_equation_check, toda_initial_state)
from .pair_algebra import PairElement, inner_pair, myb_residual, r_adjoint, r_matrix
from .poisson_tensors import apply_tensor, bracket_functionals
from .scalar_lattice import LatticeFunction, rational, shift

__version__ = "0.1.0"

__all__ = [
    "CoordIndex", "DepthExceeded", "DiffOp", "DiracOracle", "FlowSpec", "HamiltonianId",
    "LatticeFunction", "LaxState", "NonVanishingVComponent", "NonZeroMean", "PairElement",
    "PeriodMismatch", "StarConditionViolated", "StepRejected", "TangencyViolation",
    "TodaError", "TruncationViolation", "UnsupportedIndex", "apply_tensor",
    "bracket_functionals", "bracket_terms", "commutator", "evaluate_bracket", "hamiltonian",
    "inner_pair", "integrate", "jacobiator", "lax_vector", "mul", "myb_residual",
    "numeric_dirac_oracle", "power", "project", "r_adjoint", "r_matrix", "rational",
    "reduced_p1", "reduced_p2", "reduced_p3", "reduced_tensor", "residue", "shift",
    "shift_pushforward_residual", "tensor_bracket", "toda_equation_check",
    "toda_initial_state", "trace",
]
