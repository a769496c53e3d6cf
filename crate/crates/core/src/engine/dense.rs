//! Dense-matrix reference for the feedback scalars.
//!
//! Builds `H_p` and `H_d` as explicit `2^n x 2^n` matrices and forms the
//! commutators by matrix multiplication. Only meant for small `n` as an
//! independent check of the matrix-free kernels.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use super::{FeedbackScalars, StateVector};
use crate::problem::DiagonalHamiltonian;

pub struct DenseOperators {
    /// `i [H_d, H_p]`
    pub a_op: DMatrix<Complex64>,
    /// `1/2 [[H_d, H_p], H_d]`
    pub b_op: DMatrix<Complex64>,
    /// `[[H_d, H_p], H_p]`
    pub c_op: DMatrix<Complex64>,
}

impl DenseOperators {
    pub fn new(h: &DiagonalHamiltonian) -> Self {
        let (hp, hd) = (problem_matrix(h), driver_matrix(h.n()));
        let comm = &hd * &hp - &hp * &hd;
        let i = Complex64::new(0.0, 1.0);
        Self {
            a_op: comm.map(|x| x * i),
            b_op: (&comm * &hd - &hd * &comm).map(|x| x * 0.5),
            c_op: &comm * &hp - &hp * &comm,
        }
    }

    pub fn scalars(&self, s: &StateVector) -> FeedbackScalars {
        let psi = DVector::from_column_slice(s.amplitudes());
        let ev = |m: &DMatrix<Complex64>| psi.dotc(&(m * &psi)).re;
        FeedbackScalars {
            a: ev(&self.a_op),
            b: ev(&self.b_op),
            c: ev(&self.c_op),
        }
    }
}

pub fn problem_matrix(h: &DiagonalHamiltonian) -> DMatrix<Complex64> {
    DMatrix::from_diagonal(&DVector::from_iterator(
        h.dim(),
        h.diag().iter().map(|&e| Complex64::new(e, 0.0)),
    ))
}

/// `-sum_i X_i`.
pub fn driver_matrix(n: usize) -> DMatrix<Complex64> {
    let dim = 1usize << n;
    let mut m = DMatrix::zeros(dim, dim);
    for z in 0..dim {
        for q in 0..n {
            m[(z ^ (1 << q), z)] -= Complex64::new(1.0, 0.0);
        }
    }
    m
}

/// Normalized state with independent uniform real and imaginary parts.
pub fn random_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> StateVector {
    let amp: Vec<Complex64> = (0..1usize << n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let norm = amp.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    StateVector::from_amplitudes(amp.into_iter().map(|a| a / norm).collect()).expect("normalized by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::feedback_scalars;
    use crate::problem::{build_hp_diagonal, Graph};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn commutator_operators_are_hermitian() {
        let g = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        let ops = DenseOperators::new(&build_hp_diagonal(&g).unwrap());
        for m in [&ops.a_op, &ops.b_op, &ops.c_op] {
            assert!((m - m.adjoint()).norm() < 1e-12);
        }
    }

    #[test]
    fn matches_matrix_free_on_small_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = Graph::new(4, [(0, 1), (1, 2), (2, 3), (0, 2)]).unwrap();
        let h = build_hp_diagonal(&g).unwrap();
        let ops = DenseOperators::new(&h);
        for _ in 0..10 {
            let s = random_state(4, &mut rng);
            let fast = feedback_scalars(&s, &h).unwrap();
            let slow = ops.scalars(&s);
            assert!((fast.a - slow.a).abs() < 1e-10);
            assert!((fast.b - slow.b).abs() < 1e-10);
            assert!((fast.c - slow.c).abs() < 1e-10);
        }
    }
}
