//! Matrix-free statevector kernels for the alternating layers
//! `U_p = exp(-i H_p dt)` and `U_d(beta) = exp(-i beta H_d dt)` with
//! `H_d = -sum_i X_i`, plus the expectation values that drive the feedback.
//!
//! Basis index `z` encodes qubit `i` in bit `i`. `H_p` acts as an elementwise
//! multiply by its diagonal, `H_d` as minus the sum of the single-bit-flip
//! images.

pub mod dense;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{DiagonalHamiltonian, MAX_QUBITS};

/// Tolerance on `|norm - 1|` accepted by [`StateVector::from_amplitudes`].
pub const NORM_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amp: Vec<Complex64>,
}

impl StateVector {
    /// `|+>^n`: every amplitude `2^(-n/2)`.
    pub fn plus(n: usize) -> Result<Self> {
        check_qubits(n)?;
        let dim = 1usize << n;
        let a = Complex64::new((dim as f64).sqrt().recip(), 0.0);
        Ok(Self { n, amp: vec![a; dim] })
    }

    /// Computational basis state `|z>`.
    pub fn basis(n: usize, z: usize) -> Result<Self> {
        check_qubits(n)?;
        let dim = 1usize << n;
        if z >= dim {
            return Err(Error::InvalidParameter(format!("basis index {z} out of range")));
        }
        let mut amp = vec![Complex64::new(0.0, 0.0); dim];
        amp[z] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amp })
    }

    /// Wraps amplitudes whose length is a power of two and whose norm is one.
    pub fn from_amplitudes(amp: Vec<Complex64>) -> Result<Self> {
        if amp.is_empty() || !amp.len().is_power_of_two() || amp.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "amplitude count {} is not a power of two >= 2",
                amp.len()
            )));
        }
        let s = Self {
            n: amp.len().trailing_zeros() as usize,
            amp,
        };
        let norm = s.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidParameter(format!("state norm {norm} is not 1")));
        }
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amp
    }

    pub fn norm(&self) -> f64 {
        self.amp.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amp.iter().zip(&other.amp).map(|(a, b)| a.conj() * b).sum()
    }
}

/// Alias used where the initial state of the iteration is meant.
pub fn init_plus_state(n: usize) -> Result<StateVector> {
    StateVector::plus(n)
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("qubit count must be positive".into()));
    }
    if n > MAX_QUBITS {
        return Err(Error::QubitLimit { n, limit: MAX_QUBITS });
    }
    Ok(())
}

fn check_dims(s: &StateVector, h: &DiagonalHamiltonian) -> Result<()> {
    if s.n != h.n() {
        return Err(Error::DimensionMismatch {
            state: s.n,
            hamiltonian: h.n(),
        });
    }
    Ok(())
}

/// One layer's time interval and control parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerParams {
    pub dt: f64,
    pub beta: f64,
}

impl LayerParams {
    pub fn new(dt: f64, beta: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        if !beta.is_finite() {
            return Err(Error::InvalidParameter(format!("beta must be finite, got {beta}")));
        }
        Ok(Self { dt, beta })
    }
}

/// `amp[z] *= exp(-i diag[z] dt)`.
pub fn apply_up(s: &mut StateVector, h: &DiagonalHamiltonian, dt: f64) -> Result<()> {
    check_dims(s, h)?;
    // Diagonal entries are minus integer cut sizes, so one phase per cut value.
    let phases: Vec<Complex64> = (0..=h.edge_count())
        .map(|cut| Complex64::from_polar(1.0, cut as f64 * dt))
        .collect();
    for (a, &e) in s.amp.iter_mut().zip(h.diag()) {
        *a *= phases[(-e) as usize];
    }
    Ok(())
}

/// Applies `exp(i beta dt X)` to every qubit, i.e. `exp(-i beta dt H_d)`.
pub fn apply_ud(s: &mut StateVector, beta: f64, dt: f64) {
    let theta = beta * dt;
    if theta == 0.0 {
        return;
    }
    let (sin, cos) = theta.sin_cos();
    let i_sin = Complex64::new(0.0, sin);
    for q in 0..s.n {
        let stride = 1usize << q;
        for block in s.amp.chunks_exact_mut(2 * stride) {
            let (lo, hi) = block.split_at_mut(stride);
            for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a0, *a1);
                *a0 = x * cos + y * i_sin;
                *a1 = x * i_sin + y * cos;
            }
        }
    }
}

/// Applies one full layer `U_d(beta) U_p`.
pub fn apply_layer(s: &mut StateVector, h: &DiagonalHamiltonian, params: LayerParams) -> Result<()> {
    apply_up(s, h, params.dt)?;
    apply_ud(s, params.beta, params.dt);
    Ok(())
}

/// `<psi|H_p|psi>`.
pub fn energy(s: &StateVector, h: &DiagonalHamiltonian) -> Result<f64> {
    check_dims(s, h)?;
    Ok(s.amp.iter().zip(h.diag()).map(|(a, &e)| e * a.norm_sqr()).sum())
}

/// Expectations `A = <i[H_d,H_p]>`, `B = <1/2 [[H_d,H_p],H_d]>` and
/// `C = <[[H_d,H_p],H_p]>` on one state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeedbackScalars {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl FeedbackScalars {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c }
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite()
    }
}

/// Evaluates `A`, `B` and `C` in a single matrix-free pass.
///
/// With `a = H_d psi`, `b = H_p psi`, `d = H_d b`, `f = H_p^2 psi`:
///
/// - `A = -2 Im<a|b>`
/// - `B = <a|H_p|a> - Re<a|d>`  (`<a|d> = <H_d^2 psi|b>` since `H_d` is Hermitian)
/// - `C = 2 Re<a|f> - 2 <b|d>`
///
/// `a[z]` and `d[z]` are accumulated on the fly from the bit-flip neighbours
/// of `z`, so no scratch vectors are allocated.
pub fn feedback_scalars(s: &StateVector, h: &DiagonalHamiltonian) -> Result<FeedbackScalars> {
    check_dims(s, h)?;
    let diag = h.diag();
    let amp = &s.amp;
    let mut ab = Complex64::new(0.0, 0.0);
    let mut a_hp_a = 0.0;
    let mut re_ad = 0.0;
    let mut re_af = 0.0;
    let mut bd = Complex64::new(0.0, 0.0);
    for z in 0..amp.len() {
        let mut flip_sum = Complex64::new(0.0, 0.0);
        let mut weighted_flip_sum = Complex64::new(0.0, 0.0);
        for q in 0..s.n {
            let w = z ^ (1 << q);
            flip_sum += amp[w];
            weighted_flip_sum += amp[w] * diag[w];
        }
        let a = -flip_sum;
        let d = -weighted_flip_sum;
        let e = diag[z];
        let b = amp[z] * e;
        let a_conj = a.conj();
        ab += a_conj * b;
        a_hp_a += e * a.norm_sqr();
        re_ad += (a_conj * d).re;
        re_af += (a_conj * b).re * e;
        bd += b.conj() * d;
    }
    debug_assert!(
        bd.im.abs() <= 1e-10 * (1.0 + bd.re.abs()),
        "<b|H_d|b> has imaginary residue {}",
        bd.im
    );
    Ok(FeedbackScalars {
        a: -2.0 * ab.im,
        b: a_hp_a - re_ad,
        c: 2.0 * re_af - 2.0 * bd.re,
    })
}

/// Second-order model of the energy change produced by one layer applied to
/// the state on which `sc` was measured.
pub fn quadratic_model(sc: &FeedbackScalars, beta: f64, dt: f64) -> f64 {
    dt * beta * sc.a + dt * dt * beta * beta * sc.b + dt * dt * beta * sc.c
}

/// `|Delta<H_p> - quadratic_model|` for one layer applied to `s`. The exact
/// change and the model agree through second order, so this is `O(dt^3)`.
pub fn model_residual(s: &StateVector, h: &DiagonalHamiltonian, beta: f64, dt: f64) -> Result<f64> {
    let sc = feedback_scalars(s, h)?;
    let before = energy(s, h)?;
    let mut next = s.clone();
    apply_layer(&mut next, h, LayerParams::new(dt, beta)?)?;
    Ok((energy(&next, h)? - before - quadratic_model(&sc, beta, dt)).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{build_hp_diagonal, generate_random_regular, Graph};
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn plus_state_amplitudes() {
        let s = StateVector::plus(1).unwrap();
        assert!(s
            .amplitudes()
            .iter()
            .all(|&a| close(a, Complex64::new(FRAC_1_SQRT_2, 0.0))));
        let s = StateVector::plus(2).unwrap();
        assert!(s.amplitudes().iter().all(|&a| close(a, Complex64::new(0.5, 0.0))));
        for n in 1..=16 {
            assert!((StateVector::plus(n).unwrap().norm() - 1.0).abs() < 1e-12);
        }
        assert!(matches!(
            StateVector::plus(MAX_QUBITS + 1),
            Err(Error::QubitLimit { .. })
        ));
    }

    #[test]
    fn up_identity_cases() {
        let h = build_hp_diagonal(&Graph::edgeless(3).unwrap()).unwrap();
        let mut s = StateVector::plus(3).unwrap();
        apply_up(&mut s, &h, 0.7).unwrap();
        assert_eq!(s, StateVector::plus(3).unwrap());

        let h = build_hp_diagonal(&Graph::complete(3).unwrap()).unwrap();
        let mut s = StateVector::plus(3).unwrap();
        apply_up(&mut s, &h, 0.0).unwrap();
        assert_eq!(s, StateVector::plus(3).unwrap());
    }

    #[test]
    fn up_phase_on_basis_state() {
        let h = build_hp_diagonal(&Graph::complete(3).unwrap()).unwrap();
        let mut s = StateVector::basis(3, 0b001).unwrap();
        apply_up(&mut s, &h, 0.1).unwrap();
        assert!(close(s.amplitudes()[0b001], Complex64::from_polar(1.0, 0.2)));
    }

    #[test]
    fn up_rejects_mismatch() {
        let h = build_hp_diagonal(&Graph::complete(3).unwrap()).unwrap();
        let mut s = StateVector::plus(4).unwrap();
        assert!(matches!(
            apply_up(&mut s, &h, 0.1),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(energy(&s, &h).is_err());
        assert!(feedback_scalars(&s, &h).is_err());
    }

    #[test]
    fn ud_rotation_convention() {
        let mut s = StateVector::basis(1, 0).unwrap();
        apply_ud(&mut s, FRAC_PI_2, 1.0);
        assert!(close(s.amplitudes()[0], Complex64::new(0.0, 0.0)));
        assert!(close(s.amplitudes()[1], Complex64::new(0.0, 1.0)));

        let mut s = StateVector::plus(3).unwrap();
        apply_ud(&mut s, 0.0, 0.3);
        assert_eq!(s, StateVector::plus(3).unwrap());
    }

    #[test]
    fn plus_state_is_driver_eigenstate() {
        let (beta, dt, n) = (0.8, 0.25, 4);
        let mut s = StateVector::plus(n).unwrap();
        apply_ud(&mut s, beta, dt);
        let phase = Complex64::from_polar(1.0, n as f64 * beta * dt);
        let a0 = Complex64::new(0.25, 0.0);
        assert!(s.amplitudes().iter().all(|&a| close(a, a0 * phase)));
    }

    #[test]
    fn energy_examples() {
        let h = build_hp_diagonal(&Graph::complete(4).unwrap()).unwrap();
        let mean = h.diag().iter().sum::<f64>() / 16.0;
        assert_eq!(mean, -3.0);
        assert!((energy(&StateVector::plus(4).unwrap(), &h).unwrap() + 3.0).abs() < 1e-12);
        for z in 0..16 {
            assert_eq!(energy(&StateVector::basis(4, z).unwrap(), &h).unwrap(), h.diag()[z]);
        }
        let empty = build_hp_diagonal(&Graph::edgeless(4).unwrap()).unwrap();
        assert_eq!(energy(&StateVector::plus(4).unwrap(), &empty).unwrap(), 0.0);
    }

    #[test]
    fn scalars_vanish_on_plus_state() {
        let g = generate_random_regular(8, 3, 2).unwrap();
        let h = build_hp_diagonal(&g).unwrap();
        let sc = feedback_scalars(&StateVector::plus(8).unwrap(), &h).unwrap();
        assert!(sc.a.abs() < 1e-12, "{sc:?}");
        assert!(sc.b.abs() < 1e-12, "{sc:?}");
    }

    #[test]
    fn first_feedback_signal_is_negative() {
        let g = generate_random_regular(8, 3, 2).unwrap();
        let h = build_hp_diagonal(&g).unwrap();
        let mut s = StateVector::plus(8).unwrap();
        apply_up(&mut s, &h, 0.01).unwrap();
        let sc = feedback_scalars(&s, &h).unwrap();
        let oracle = dense::DenseOperators::new(&h).scalars(&s);
        assert!(sc.a < 0.0, "{sc:?}");
        assert!((sc.a - oracle.a).abs() < 1e-10);
    }

    #[test]
    fn from_amplitudes_validates() {
        assert!(StateVector::from_amplitudes(vec![Complex64::new(1.0, 0.0); 3]).is_err());
        assert!(StateVector::from_amplitudes(vec![Complex64::new(1.0, 0.0); 2]).is_err());
        let s = StateVector::from_amplitudes(vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)]).unwrap();
        assert_eq!(s.n(), 1);
    }

    #[test]
    fn layer_params_validate() {
        assert!(LayerParams::new(0.0, 1.0).is_err());
        assert!(LayerParams::new(0.1, f64::NAN).is_err());
        assert!(LayerParams::new(0.1, -3.0).is_ok());
    }
}
