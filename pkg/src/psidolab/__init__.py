"""Desk-scale numerical laboratory for pseudodifferential operators with
finitely smooth symbols on mixed-norm Lebesgue spaces over periodic boxes."""

from .errors import (InfeasibleBudgetError, InvalidInputError,
                     PreconditionError, SymbolEvaluationError)
from .grid import (Grid, SampledFunction, dual_pairing, fourier_transform,
                   japanese_bracket, quadrature, random_band_limited,
                   spectral_derivative, vector_pnorm)
from .mixed_norm import MixedExponent, holder_dual, mixed_norm, partial_norm
from .symbols import (DerivativeBoundReport, SampleSpec, Symbol,
                      SymbolClassParams, bessel_multiplier, builtin_symbols,
                      constant_symbol, eval_symbol, finite_diff_derivative,
                      schwartz_seminorm, separable_symbol,
                      smoothness_coefficients, trig_multiplication,
                      verify_symbol_class, wave_multiplier, with_params)
from .operators import (DyadicDecomposition, Kernel, apply_psido,
                        default_levels, discrete_adjoint_apply,
                        dyadic_decompose, kernel_piece, kernel_sum,
                        low_pass_cutoff, offsupport_apply, ring_cutoff,
                        support_mask)
from .estimates import (CZCheckConfig, CZReport, ConditionReport,
                        DecayFitResult, EnvelopeReport, KernelDecayParams,
                        NormBoundInputs, NormEstimate, ProbeReport,
                        SmoothnessBudget, condition_report,
                        cz_condition_check, cz_sweep, decay_fit,
                        dyadic_envelope_check, make_cancellation_test_function,
                        necessary_condition_probe, operator_norm_estimate,
                        smoothness_budget, theorem_norm_bound)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
