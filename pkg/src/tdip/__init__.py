"""Separable convex integer programs solved by Graver-basis augmentation
along treedepth decompositions of the constraint matrix."""

from .augment import Backend, augment_to_optimality
from .blocks import (
    build_multi_stage,
    build_nfold,
    build_nfold_general,
    build_tree_fold,
    build_two_stage,
    model_scheduling_qcmax,
    model_three_way_table,
)
from .errors import DecompositionError, InstanceError, LimitError, TdipError
from .graver import enumerate_graver_small
from .instance import (
    INF,
    IpInstance,
    Linear,
    PiecewiseLinear,
    Quadratic,
    SeparableObjective,
    SparseIntMatrix,
    validate_instance,
)
from .oracle import brute_force_solve
from .report import SolveReport
from .scaling import scaling_solve, solve_relaxation_eps
from .solver import solve
from .structure import DUAL, PRIMAL, TdDecomposition, compute_treedepth_exact

__version__ = "0.1.0"
