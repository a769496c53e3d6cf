//! MAX-CUT problem instances: graphs, sampling, fingerprints and the cost Hamiltonian.

mod edgelist;
mod fingerprint;
mod generate;
mod graph;
mod hamiltonian;

pub use edgelist::{read_edge_list, write_edge_list};
pub use fingerprint::{canonical_fingerprint, Fingerprint, FingerprintKind, EXACT_MAX_VERTICES};
pub use generate::{collect_nonisomorphic, generate_random_regular, sample_distinct, EnsembleDraw};
pub use graph::{Graph, GraphMetadata};
pub use hamiltonian::{build_hp_diagonal, solve_exact, DiagonalHamiltonian, OptimumReport, MAX_QUBITS};
