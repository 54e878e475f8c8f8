//! Exact solver for the global minimum energy conformation (GMEC) problem
//! over pairwise-decomposable energy functions.
//!
//! The pipeline: parse or generate an instance ([`model`]), optionally prune
//! rotamers with dead-end elimination ([`pruning`]), build the residue
//! interaction network and a pseudo-tree ([`graph`]), precompute mini-bucket
//! lower-bound tables ([`heuristic`]), then run depth-first AND/OR
//! branch-and-bound ([`search`]) or enumerate the k best conformations within
//! an energy cutoff ([`kbest`]). [`oracle`] holds independent brute-force and
//! plain branch-and-bound baselines used for cross-checking.

pub mod error;
pub mod fixtures;
pub mod graph;
pub mod heuristic;
pub mod kbest;
pub mod model;
pub mod oracle;
pub mod pruning;
pub mod search;

pub use error::Error;
pub use graph::{
    build_interaction_graph, build_pseudo_tree, min_fill_ordering, validate_pseudo_tree,
    EliminationOrdering, InteractionGraph, PseudoTree,
};
pub use heuristic::{
    auto_i_bound, bucket_elimination, mini_bucket_elimination, BucketTables, MiniBucketHeuristic,
    DEFAULT_MEM_CAP,
};
pub use kbest::{kbest_solve, merge_and, merge_or, AndMerge, KBestList};
pub use model::{parse_instance, random_instance, Assignment, Conformation, EnergyModel};
pub use oracle::{brute_force_min, brute_force_topk, plain_bnb};
pub use pruning::{goldstein_singles, PruneResult};
pub use search::{count_full_tree, greedy_initial, solve, SearchStats, Solution, SolveOptions};
