//! Exact graph-state machinery: Pauli algebra, graph topologies, the stabilizer
//! tableau, a dense state-vector oracle, and closed-form propagation rules.

pub mod dense;
pub mod graph;
pub mod ops;
pub mod pauli;
pub mod tableau;

pub use dense::DenseState;
pub use graph::{GraphKind, GraphSpec, LossMask};
pub use ops::{
    chain_flip_byproduct, measure_x_chain, measure_z, measure_z_complete, recover_from_loss, rewrite_x_error,
    x_chain_root_byproduct, LossRecovery,
};
pub use pauli::{Pauli, PauliString, Phase};
pub use tableau::{Basis, Measurement, StabilizerTableau};

/// Tableau of the graph state described by `spec`.
pub fn build_graph_tableau(spec: &GraphSpec) -> crate::Result<StabilizerTableau> {
    StabilizerTableau::graph_state(spec)
}
