"""Identification of affine discrete-time fractional-order systems.

Grünwald-Letnikov simulation, least-squares estimation of the fractional
order (with known or basis-approximated dynamics) and the sample-complexity
bounds of the repeated-observation estimator.
"""
from ._backend import BACKEND
from .basis import BasisSpec, RegressorBlocks, assemble_blocks, eval_chebyshev, eval_chebyshev_gap, \
    eval_trig
from .bounds import BoundInputs, Sigma, TailBound, chi2_tail_bound, error_covariance, \
    exact_expected_error, expectation_bound, laurent_massart_tail_bound, subexp_tail_bound
from .errors import DesignError, DimensionError, DivergenceError, FodsError, HorizonError, OrderError
from .experiment import ExperimentBatch, RepeatedObservations, design_matrix, generate_batch, \
    generate_repeated, sample_inits
from .gl import FractionalOrder, GlCoefficients, fractional_difference, fractional_difference_all, \
    gl_coefficients, memory_term
from .harness import ExperimentPlan, ExperimentReport, run_accuracy, run_complexity
from .identify import IdentResult, estimate_from_repeated, identify_known, identify_unknown
from .simulate import DynamicsFn, NoiseSpec, Trajectory, logistic_cosexp, simulate, step

__version__ = "0.1.0"
