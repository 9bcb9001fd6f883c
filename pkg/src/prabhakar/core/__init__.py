"""Evaluation of the Prabhakar function and directly derived scalar quantities."""

from prabhakar.core.asymptotic import (asymptotic_coeff_c, eval_asymptotic, exponential_branches,
                                       negative_axis_leading)
from prabhakar.core.dispatch import evaluate, kernel
from prabhakar.core.gamma import pochhammer
from prabhakar.core.identities import (ReductionVariant, coeff_d, derivative_z,
                                       dzhrbashyan_derivative, integer_gamma_via_ml, reduce_gamma)
from prabhakar.core.inversion import (eval_inversion, inversion_applicable, plan_contour, residues,
                                      select_contour)
from prabhakar.core.series import eval_series
from prabhakar.core.spectral import (CMRange, eval_spectral, is_cm_range, mellin_of_E,
                                     spectral_density, theta_alpha)

__all__ = [
    "CMRange", "ReductionVariant", "asymptotic_coeff_c", "coeff_d", "derivative_z",
    "dzhrbashyan_derivative", "eval_asymptotic", "eval_inversion", "eval_series", "eval_spectral",
    "evaluate", "exponential_branches", "integer_gamma_via_ml", "inversion_applicable",
    "is_cm_range", "kernel", "mellin_of_E", "negative_axis_leading", "plan_contour", "pochhammer",
    "reduce_gamma", "residues", "select_contour", "spectral_density", "theta_alpha",
]
