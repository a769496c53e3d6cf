use serde::Serialize;

use super::Graph;
use crate::error::{Error, Result};

/// Default qubit limit for dense diagonals and statevectors (2^24 amplitudes).
pub const MAX_QUBITS: usize = 24;

/// Diagonal of the MAX-CUT cost Hamiltonian `-1/2 sum_(i,j) (1 - Z_i Z_j)`.
///
/// Entry `z` is minus the number of edges cut by the bipartition that puts
/// vertex `i` on side `(z >> i) & 1`. Entries are integers in `[-|E|, 0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalHamiltonian {
    n: usize,
    edge_count: usize,
    diag: Vec<f64>,
}

impl DiagonalHamiltonian {
    pub fn from_graph(g: &Graph, max_qubits: usize) -> Result<Self> {
        let n = g.n();
        if n > max_qubits {
            return Err(Error::QubitLimit { n, limit: max_qubits });
        }
        let diag = (0..1usize << n)
            .map(|z| {
                let cut = g
                    .edges()
                    .iter()
                    .filter(|&&(i, j)| ((z >> i) ^ (z >> j)) & 1 == 1)
                    .count();
                -(cut as f64)
            })
            .collect();
        Ok(Self {
            n,
            edge_count: g.edge_count(),
            diag,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }
}

pub fn build_hp_diagonal(g: &Graph) -> Result<DiagonalHamiltonian> {
    DiagonalHamiltonian::from_graph(g, MAX_QUBITS)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimumReport {
    pub e_min: f64,
    pub argmin_count: usize,
}

/// Ground energy of the diagonal and its multiplicity, by enumeration.
pub fn solve_exact(h: &DiagonalHamiltonian) -> OptimumReport {
    let e_min = h.diag().iter().copied().fold(f64::INFINITY, f64::min);
    let argmin_count = h.diag().iter().filter(|&&e| e == e_min).count();
    OptimumReport { e_min, argmin_count }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::generate_random_regular;

    fn triangle() -> Graph {
        Graph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn triangle_entries() {
        let h = build_hp_diagonal(&triangle()).unwrap();
        assert_eq!(h.diag()[0b000], 0.0);
        assert_eq!(h.diag()[0b001], -2.0);
        assert_eq!(h.diag()[0b011], -2.0);
        assert_eq!(h.diag()[0b111], 0.0);
    }

    #[test]
    fn all_zeros_bitstring_has_zero_energy() {
        for seed in 0..5 {
            let g = generate_random_regular(8, 3, seed).unwrap();
            assert_eq!(build_hp_diagonal(&g).unwrap().diag()[0], 0.0);
        }
    }

    #[test]
    fn complement_symmetry() {
        let g = generate_random_regular(10, 3, 4).unwrap();
        let h = build_hp_diagonal(&g).unwrap();
        let mask = h.dim() - 1;
        for z in 0..h.dim() {
            assert_eq!(h.diag()[z], h.diag()[z ^ mask]);
        }
    }

    #[test]
    fn exact_optima() {
        let k4 = build_hp_diagonal(&Graph::complete(4).unwrap()).unwrap();
        let rep = solve_exact(&k4);
        assert_eq!(rep.e_min, -4.0);
        // Balanced 2-2 splits: C(4,2) = 6.
        assert_eq!(rep.argmin_count, 6);

        let k33 = Graph::new(6, (0..3).flat_map(|i| (3..6).map(move |j| (i, j)))).unwrap();
        let rep = solve_exact(&build_hp_diagonal(&k33).unwrap());
        assert_eq!(rep.e_min, -9.0);
        assert_eq!(rep.argmin_count, 2);

        let empty = build_hp_diagonal(&Graph::edgeless(5).unwrap()).unwrap();
        assert_eq!(
            solve_exact(&empty),
            OptimumReport {
                e_min: 0.0,
                argmin_count: 32
            }
        );
    }

    #[test]
    fn qubit_limit_is_enforced() {
        let g = Graph::edgeless(6).unwrap();
        assert!(matches!(
            DiagonalHamiltonian::from_graph(&g, 5),
            Err(Error::QubitLimit { n: 6, limit: 5 })
        ));
    }
}
