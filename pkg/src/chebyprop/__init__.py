"""Approximate graph propagation: personalized PageRank, heat-kernel
PageRank and general kernels of the random-walk matrix, via truncated
Taylor and Chebyshev series with global and local solvers."""

from .bidirectional import RandomWalkConfig, ResidualVector, cheby_push_rw, compute_residual
from .eval import ErrorReport, GroundTruth, ground_truth, measure, select_sources
from .graph import (Graph, GraphFormatError, GraphStructureError, NodeSet, from_edges,
                    load_edge_list, read_csr_cache, write_csr_cache, write_edge_list)
from .kernels import (Kernel, KernelError, NumericalError, TruncationPlan, custom_cheby_coeffs,
                      hkpr_cheby_coeffs, parse_kernel, plan_truncation, ppr_cheby_coeffs,
                      taylor_coeffs)
from .solvers import (Estimate, cheby_power, cheby_push, general_gp_matrix, general_gp_vector,
                      power_method, push)

__version__ = "0.1.0"
