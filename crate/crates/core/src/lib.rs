//! Consensus and bipartite-consensus analysis for matrix-weighted signed
//! networks.
pub mod balance;
pub mod conditions;
pub mod dynamics;
pub mod generator;
pub mod graph;
pub mod linalg;
pub mod report;
pub mod spectral;
pub mod subspace;
pub mod tolerances;
pub mod topology;

pub use graph::{GraphError, MatrixWeightedGraph};
pub use subspace::SubspaceBasis;
pub use tolerances::Tolerances;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Topology(#[from] topology::TopologyError),
    #[error(transparent)]
    Balance(#[from] balance::BalanceError),
    #[error(transparent)]
    Condition(#[from] conditions::ConditionError),
    #[error(transparent)]
    Dynamics(#[from] dynamics::DynamicsError),
    #[error(transparent)]
    Generator(#[from] generator::GeneratorError),
}
