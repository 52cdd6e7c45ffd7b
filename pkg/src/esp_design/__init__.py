"""Optimal experimental design scored by elementary symmetric polynomials.

Order ``l = 1`` gives A-optimal design, ``l = m`` D-optimal design, and the
orders in between interpolate.  See the README for a tour of the API.
"""
from .data import (
    Dataset,
    SyntheticKind,
    SyntheticSpec,
    gen_skewed,
    gen_sparse_precision,
    generate,
    load_csv,
    predictive_error,
    sparsity_fraction,
)
from .discretize import (
    MethodTag,
    RoundingOutcome,
    fedorov_exchange,
    greedy_from_relaxation,
    greedy_removal,
    rounding_diagnostic,
    sample_rounding,
    uniform_baseline,
)
from .dual import DualCertificate, a_of_H_closed_form, dual_bound, dual_certificate, dual_value, solve_a_of_H
from .errors import *  # noqa: F401,F403
from .esp import LogESP, SpectralDecomp, esp_gradient, esp_matrix, esp_of_inverse, esp_vector, geodesic_point
from .objective import f_discrete, f_relaxed, grad_relaxed, w_matrix
from .pipeline import RunRecord, run_methods
from .relax import SolverConfig, SolverReport, project_knapsack, solve_relaxation, support

__version__ = "0.1.0"
