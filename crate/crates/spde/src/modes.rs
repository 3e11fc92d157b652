//! Galerkin coefficient vectors and fractional-power norms.
//!
//! Coefficients are taken with respect to the orthonormal eigenbasis, so the
//! plain Euclidean norm of a [`ModeVector`] is the discrete `L^2` norm of the
//! function it represents. The fractional norm weights mode `k` by
//! `|lambda0 - lambda_k|^eta`, the discrete counterpart of applying
//! `(lambda0 - A)^eta`.

use crate::error::{Result, SpdeError};

/// Coefficients `(u_1, ..., u_n)` of a truncated eigenfunction expansion.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeVector {
    coeffs: Vec<f64>,
}

impl ModeVector {
    pub fn new(coeffs: Vec<f64>) -> Self {
        ModeVector { coeffs }
    }

    pub fn zeros(n: usize) -> Self {
        ModeVector {
            coeffs: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, s: f64) -> ModeVector {
        ModeVector {
            coeffs: self.coeffs.iter().map(|c| s * c).collect(),
        }
    }

    /// Truncate or zero-pad to length `n` (the projection `P_n`).
    pub fn projected(&self, n: usize) -> ModeVector {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(n, 0.0);
        ModeVector { coeffs }
    }

    pub fn check_finite(&self, step: usize) -> Result<()> {
        match self.coeffs.iter().position(|c| !c.is_finite()) {
            None => Ok(()),
            Some(k) => Err(SpdeError::NonFiniteState {
                step,
                detail: format!("mode {} is {}", k + 1, self.coeffs[k]),
            }),
        }
    }
}

impl From<Vec<f64>> for ModeVector {
    fn from(coeffs: Vec<f64>) -> Self {
        ModeVector::new(coeffs)
    }
}

/// The fixed resolvent shift: `1 + max(0, sup_k lambda_k)`. Any value to the
/// right of the spectrum would do; fixing one makes defect numbers
/// reproducible across runs.
pub fn resolvent_shift(eigenvalues: &[f64]) -> f64 {
    let top = eigenvalues
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    1.0 + top.max(0.0)
}

/// Weighted norm `( sum_k |lambda0 - lambda_k|^(2 eta) v_k^2 )^(1/2)`.
///
/// `lambda0` must lie strictly to the right of every supplied eigenvalue;
/// `eta = 0` reduces to the plain Euclidean norm.
pub fn fractional_norm(v: &ModeVector, eta: f64, lambda0: f64, eigenvalues: &[f64]) -> Result<f64> {
    if !eta.is_finite() || eta < 0.0 {
        return Err(SpdeError::invalid(format!("eta must be >= 0, got {eta}")));
    }
    if v.len() > eigenvalues.len() {
        return Err(SpdeError::invalid(format!(
            "vector has {} modes but only {} eigenvalues supplied",
            v.len(),
            eigenvalues.len()
        )));
    }
    let top = eigenvalues
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    if !(lambda0 > top) {
        return Err(SpdeError::invalid(format!(
            "lambda0 = {lambda0} must exceed the largest eigenvalue {top}"
        )));
    }
    let mut acc = 0.0;
    for (vk, lk) in v.as_slice().iter().zip(eigenvalues) {
        let gap = lambda0 - lk;
        acc += gap.powf(2.0 * eta) * vk * vk;
    }
    Ok(acc.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn eta_zero_is_l2() {
        let v = ModeVector::new(vec![1.0, 0.0, 0.0]);
        let eigs = [-1.0, -2.0, -3.0];
        let n = fractional_norm(&v, 0.0, 5.0, &eigs).unwrap();
        assert_eq!(n, 1.0);
    }

    #[test]
    fn heat_mode_pair_example() {
        // v = (1,1), eta = 1, lambda0 = 0, eigenvalues (-pi^2, -4 pi^2):
        // sqrt(pi^4 + 16 pi^4) = pi^2 sqrt(17).
        let v = ModeVector::new(vec![1.0, 1.0]);
        let eigs = [-PI * PI, -4.0 * PI * PI];
        let n = fractional_norm(&v, 1.0, 0.0, &eigs).unwrap();
        let expected = PI * PI * 17f64.sqrt();
        assert!((n - expected).abs() < 1e-12 * expected, "{n} vs {expected}");
    }

    #[test]
    fn zero_vector_any_eta() {
        let v = ModeVector::zeros(4);
        let eigs = [-1.0, -4.0, -9.0, -16.0];
        for eta in [0.0, 0.25, 1.0, 2.0] {
            assert_eq!(fractional_norm(&v, eta, 1.0, &eigs).unwrap(), 0.0);
        }
    }

    #[test]
    fn rejects_lambda0_in_spectrum() {
        let v = ModeVector::new(vec![1.0]);
        assert!(fractional_norm(&v, 0.5, -1.0, &[-1.0]).is_err());
        assert!(fractional_norm(&v, 0.5, -2.0, &[-1.0]).is_err());
    }

    #[test]
    fn rejects_short_eigenvalue_list() {
        let v = ModeVector::new(vec![1.0, 2.0]);
        assert!(fractional_norm(&v, 0.5, 1.0, &[-1.0]).is_err());
    }

    #[test]
    fn shift_convention() {
        assert_eq!(resolvent_shift(&[-PI * PI, -4.0 * PI * PI]), 1.0);
        assert_eq!(resolvent_shift(&[3.0, -1.0]), 4.0);
    }

    proptest! {
        #[test]
        fn absolutely_homogeneous(
            coeffs in proptest::collection::vec(-1e3f64..1e3, 1..8),
            c in -100.0f64..100.0,
            eta in 0.0f64..2.0,
        ) {
            let eigs: Vec<f64> = (1..=coeffs.len()).map(|k| -((k * k) as f64)).collect();
            let v = ModeVector::new(coeffs);
            let base = fractional_norm(&v, eta, 1.0, &eigs).unwrap();
            let scaled = fractional_norm(&v.scaled(c), eta, 1.0, &eigs).unwrap();
            let expected = c.abs() * base;
            prop_assert!((scaled - expected).abs() <= 1e-9 * (1.0 + expected));
        }

        #[test]
        fn monotone_in_eta_for_unit_gaps(
            coeffs in proptest::collection::vec(-10.0f64..10.0, 1..8),
            eta1 in 0.0f64..1.5,
            bump in 0.0f64..1.5,
        ) {
            // Gaps |lambda0 - lambda_k| = 1 + k^2 >= 1, so the norm grows with eta.
            let eigs: Vec<f64> = (1..=coeffs.len()).map(|k| -((k * k) as f64)).collect();
            let v = ModeVector::new(coeffs);
            let lo = fractional_norm(&v, eta1, 1.0, &eigs).unwrap();
            let hi = fractional_norm(&v, eta1 + bump, 1.0, &eigs).unwrap();
            prop_assert!(hi >= lo - 1e-12);
        }
    }
}
