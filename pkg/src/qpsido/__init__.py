"""Twisted pseudodifferential calculus laboratory for the quantum sphere.

Exact U_q(su2) / O(SU_q(2)) crossed-product algebra, weighted binomial
calculus, a truncated spinor-space representation of the quantum-sphere
spectral triple, and zeta/residue diagnostics.
"""

from .algebra import (AlgebraElement, Monomial, TensorElement, act, casimir,
                      casimir_printed, centrality_defect, coproduct, counit,
                      expansion_terms, filtration_order, gen, laplace_element,
                      multiply, nabla, nabla_mu, normal_form, parse_element,
                      twist_theta, weight_decompose)
from .mucalc import (ContourResult, IllConditioningWarning, MuBinomialExact,
                     WeightTuple, ZExpr, contour_mu_cauchy_oracle,
                     hermite_leading_coefficient, mu_binomial_exact,
                     mu_binomial_numeric, mu_derivative_power,
                     partial_fraction_decompose)
from .scalars import LPoly, QScalar, parse_scalar, qq
from .spectral import (OrderEstimate, TruncatedRep, analytic_order_estimate,
                       build_rep, delta_theta_iterate,
                       dirac_squared_vs_casimir, elliptic_constant,
                       expansion_remainder, operator_norm, represent,
                       shell_profile, sobolev_norm, spectrum_rows)
from .suites import RunConfig, SuiteReport, run_suite
from .zeta import (DiagSpec, RhoSpec, ShellModel, ZetaReport,
                   pole_order_probe, twisted_trace_defect, zeta_partial,
                   zeta_residue)

__version__ = "0.1.0"
