//! The backhaul chain-partition problem and its solvers.
//!
//! Every drone must join exactly one backhaul chain ending at a gateway,
//! and each link along a chain must carry the accumulated load of the
//! drones behind it. Candidate designs are encoded as permutation
//! genomes (all drones plus all gateways, gateways in ascending order,
//! highest gateway terminal), scored by edge- or node-surplus fitness
//! under three penalty regimes, and searched with a genetic algorithm.
//! Exact baselines (uniform sampling and full enumeration) provide
//! ground truth on small instances.

mod exact;
mod fitness;
mod ga;
mod genome;
mod graph;

pub use exact::{exact_sampler, exhaustive_enumerate, genome_space_size, EnumerationResult};
pub use fitness::{
    evaluate, penalty_constant, score_terms, FitnessBasis, GaSetting, PenaltyMode, Solution,
};
pub use ga::{run_ga, GaConfig, GaOutcome, GenerationStats};
pub use genome::Genome;
pub use graph::{
    build_graph, graph_from_str, graph_to_string, random_dense_graph, BackhaulGraph,
};
