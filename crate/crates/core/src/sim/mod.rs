//! Sampling of community affiliation graphs and their connectivity.

pub mod dsu;
pub mod estimate;
pub mod graph;
pub mod sampling;
pub mod seed;

pub use dsu::DisjointSets;
pub use estimate::McEstimate;
pub use graph::{
    connectivity_stats, coupling_monotonicity_check, sample_graph, ConnectivityStats, CouplingReport,
    CouplingViolation, GraphSample, GraphSampler,
};
pub use sampling::{sample_layer_edges, sample_vertex_subset, EdgeSink, SubsetSampler};
