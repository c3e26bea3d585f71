"""Mappings between classes of infinitely divisible laws on R^d."""

__version__ = "0.1.0"

from .core import (Atoms, AtomSeries, CMDensity, CMRep, Density, Direction, GeneratingTriplet,
                   LevyMeasure, MixingMeasure, RadialSum, TabulatedDensity, convolve, eval_cumulant,
                   is_symmetric, log_moment_order, validate_levy_measure)
from .numerics import DomainError, QuadratureError, exp_integral_e1, gamma_fn
from .mappings import (Kernel, compose_check, embed_E_alpha_in_E_beta, make_kernel, n_alpha,
                       n_alpha_inverse, transform_cumulant, transform_triplet)
from .classes import cm_test, is_member, is_member_E_alpha, preimage_radial, radial_of_transform
from .qrep import (Integrand, Q_from_h, dom_classify, h_from_Q, interleave, levy_tail_of_integral,
                   represent_one_sided, tail_identity_check, validate_Q)
from .simulate import (ecf, ecf_compare, improper_integral_sample, integral_sample, sample_integral,
                       sample_path, simulate_mapped_law, symmetric_cp_triplet, write_csv)
from .verify import run_suite

__all__ = [
    "Atoms", "AtomSeries", "CMDensity", "CMRep", "Density", "Direction", "GeneratingTriplet",
    "LevyMeasure", "MixingMeasure", "RadialSum", "TabulatedDensity", "convolve", "eval_cumulant",
    "is_symmetric", "log_moment_order", "validate_levy_measure", "DomainError", "QuadratureError",
    "exp_integral_e1", "gamma_fn",
    "Kernel", "compose_check", "embed_E_alpha_in_E_beta", "make_kernel", "n_alpha",
    "n_alpha_inverse", "transform_cumulant", "transform_triplet", "cm_test", "is_member",
    "is_member_E_alpha", "preimage_radial", "radial_of_transform", "Integrand", "Q_from_h",
    "dom_classify", "h_from_Q", "interleave", "levy_tail_of_integral", "represent_one_sided",
    "tail_identity_check", "validate_Q", "ecf", "ecf_compare", "improper_integral_sample",
    "integral_sample", "sample_integral", "sample_path", "simulate_mapped_law",
    "symmetric_cp_triplet", "write_csv", "run_suite",
]
