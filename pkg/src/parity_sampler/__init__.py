"""Exact sampling of random even subgraphs through the q=2 random-cluster model."""
from ._jit import backend_name
from .graph import (CycleBasis, EdgeSet, Graph, GraphError, build_graph, component_count,
                    cycle_space_dim, cyclic_edges, fundamental_cycle_basis, odd_vertex_set,
                    spanning_forest, xor)
from .rc import (CftpResult, CftpState, CoalescenceError, RCSpec, alpha_beta, cftp_sample,
                 gibbs_step, heat_bath_conditional, w_even_support)
from .even import (EvenWeights, PathFamily, pair_paths, rc_from_even, sample_even,
                   sample_even_general, sample_even_subcritical, uniform_even)

__version__ = "0.1.0"

__all__ = [
    "CycleBasis", "EdgeSet", "Graph", "GraphError", "build_graph", "component_count",
    "cycle_space_dim", "cyclic_edges", "fundamental_cycle_basis", "odd_vertex_set",
    "spanning_forest", "xor", "CftpResult", "CftpState", "CoalescenceError", "RCSpec",
    "alpha_beta", "cftp_sample", "gibbs_step", "heat_bath_conditional", "w_even_support",
    "EvenWeights", "PathFamily", "pair_paths", "rc_from_even", "sample_even",
    "sample_even_general", "sample_even_subcritical", "uniform_even", "backend_name",
]
