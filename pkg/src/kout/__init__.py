"""k-out sampling, XOR edge sketches and one-way spanning forest protocols."""

from kout.connectivity import (
    Forest,
    Partition,
    components,
    inter_component_edges,
    is_connected,
    spanning_forest,
)
from kout.graph import Graph, new_graph
from kout.rng import RngStream, trial_seed
from kout.sampling import (
    EdgeSample,
    edge_inclusion_prob,
    expected_k_out_sample,
    k_out_sample,
    p_sample,
)

__all__ = [
    "EdgeSample",
    "Forest",
    "Graph",
    "Partition",
    "RngStream",
    "components",
    "edge_inclusion_prob",
    "expected_k_out_sample",
    "inter_component_edges",
    "is_connected",
    "k_out_sample",
    "new_graph",
    "p_sample",
    "spanning_forest",
    "trial_seed",
]
