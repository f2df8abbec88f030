"""Numerical verification of Hermite-Hadamard type inequalities for symmetric matrices.

Kernels run under numba when available; set ``HHLAB_BACKEND=numpy`` before
import to force the pure-numpy path.
"""
from ._kernels import BACKEND
from .errors import ConvergenceError, DimensionError, DomainError, HypothesisError
from .matcore import (
    Relation,
    absolute_value,
    apply_function,
    as_symmetric,
    loewner_compare,
    operator_norm,
    spectral_bounds,
    spectral_decompose,
)
from .scalarfn import Convexity, ScalarFunction, chord_coefficients, get_function, probe_convexity
from .quad import gauss_legendre, segment_integral, weighted_nabla_integral
from .bounds import alpha_constant, beta_constant, delta_refinement, xi_refinement
from .checks import (
    InequalityReport,
    check_corollary22,
    check_gradient_refinements,
    check_hh_chain,
    check_norm_chain,
    check_reverse,
    check_theorem21,
    check_weighted_nabla,
)
from .harness import SuiteConfig, paper_counterexample, random_symmetric, run_suite

__version__ = "0.1.0"
