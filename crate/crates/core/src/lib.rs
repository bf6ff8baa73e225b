//! Community vulnerability evaluation for undirected networks.
//!
//! The pipeline detects communities by greedy modularity agglomeration,
//! measures each community's internal edges, boundary edges and gravity
//! index over a Jensen-Shannon based community network, combines them into
//! a weighted vulnerability score, and ranks communities with a fuzzy chain.
//! Weight sensitivity is quantified with Sobol' indices.

pub mod community;
pub mod export;
pub mod graph;
pub mod metrics;
pub mod pipeline;
pub mod sensitivity;
pub mod serde_inf;
pub mod vulnerability;

pub use community::{
    detect_communities, merge_delta_q, modularity, DetectionTrace, Partition, TraceStep,
};
pub use graph::{parse_edge_list, Graph, GraphError};
pub use metrics::{CommunityNetwork, DegreeMode, ProbabilitySet};
pub use pipeline::{evaluate, EvaluateOptions, PipelineError, VulnerabilityReport};
pub use sensitivity::{sobol_indices, Parameter, SobolConfig, SobolResult};
pub use vulnerability::{FuzzyRanking, NormalizedFactors, Relation, Weights};
