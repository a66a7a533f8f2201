"""Random integrals ``int_(0,1] t dY(r(t))`` driven by Levy processes.

The time changes ``r`` are CDFs of products of powers of independent
uniforms; see :mod:`randintegral.product_law`.  Levy-Khintchine triples
and their transforms live in :mod:`randintegral.levy_core`, quadrature and
simulation of the integrals in :mod:`randintegral.integral_engine`.
"""

__version__ = "0.1.0"

from .coefficients import (BetaMultiset, CoefficientVector, big_C, d_coeff, e_coeff, lagrange_identity_residual,
                           little_c, pochhammer, rho, two_block_bracket)
from .errors import (DimensionError, DomainError, InvalidInputError, NumericError, QuadratureError,
                     RandIntegralError, UnsupportedError)
from .integral_engine import (CFComparison, EmpiricalCF, IntegralSpec, SimulationResult, cf_compare,
                              compose_residual, empirical_cf, general_compose_residual, logcf_quadrature,
                              nested_logcf, simulate_coupled, simulate_integral)
from .levy_core import (BallComplement, FiniteAtomic, LevyTriple, Transformed, b_M, decompose,
                        levy_exponent, levy_measure_valid, logcf_signed_sum, measure_eval, rescale,
                        standard_test_triple, transform_multi, transform_single)
from .product_law import (ClosedFormLaw, SampleBatch, build_law, case_formula_law, cdf, pdf,
                          pdf_numeric_oracle, repeated_cdf_gamma, sample)
from .triple_io import TripleSchemaError, dump_triple, load_triple, parse_triple

__all__ = [
    "BallComplement", "BetaMultiset", "CFComparison", "ClosedFormLaw", "CoefficientVector", "DimensionError",
    "DomainError", "EmpiricalCF", "FiniteAtomic", "IntegralSpec", "InvalidInputError", "LevyTriple",
    "NumericError", "QuadratureError", "RandIntegralError", "SampleBatch", "SimulationResult", "Transformed",
    "TripleSchemaError", "UnsupportedError", "b_M", "big_C", "build_law", "case_formula_law", "cdf", "cf_compare",
    "compose_residual", "d_coeff", "decompose", "dump_triple", "e_coeff", "empirical_cf",
    "general_compose_residual", "lagrange_identity_residual", "levy_exponent", "levy_measure_valid", "little_c",
    "load_triple", "logcf_quadrature", "logcf_signed_sum", "measure_eval", "nested_logcf", "pdf",
    "pdf_numeric_oracle", "pochhammer", "repeated_cdf_gamma", "rescale", "rho", "sample", "simulate_coupled",
    "simulate_integral", "standard_test_triple", "transform_multi", "transform_single", "two_block_bracket",
]
