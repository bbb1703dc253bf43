//! Measurement placement: spanning trees for relative measurements and vertex subsets
//! for sampling bandlimited signals.

pub mod nodes;
pub mod trees;

pub use nodes::{
    adesign_selection, edesign_selection, greedy_node_selection, random_selection, select_nodes, NodePolicy,
    NodePolicyResult, RemovalStep,
};
pub use trees::{spanning_tree_policy, tree_stretch, EdgePolicyResult, TreePolicy, UnionFind};
