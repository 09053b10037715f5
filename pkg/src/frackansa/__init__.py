"""Semi-discrete Kansa solver for space-time fractional advection-dispersion problems."""

from .geometry import Disk, NodeSet, Rectangle, generate_nodes, ray_exit_distance
from .mlf import gamma, mittag_leffler
from .operator import MixingMeasure, RbfBasis
from .quadrature import angular_rule, gauss_jacobi, gauss_legendre
from .solver import (
    AxisOperator,
    BoundarySpec,
    KansaSolver,
    MeasureOperator,
    ProblemSpec,
    propagate,
)

__all__ = [
    "AxisOperator",
    "BoundarySpec",
    "Disk",
    "KansaSolver",
    "MeasureOperator",
    "MixingMeasure",
    "NodeSet",
    "ProblemSpec",
    "RbfBasis",
    "Rectangle",
    "angular_rule",
    "gamma",
    "gauss_jacobi",
    "gauss_legendre",
    "generate_nodes",
    "mittag_leffler",
    "propagate",
    "ray_exit_distance",
]
