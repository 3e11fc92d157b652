//! Initial-condition catalog, usable both as sine-mode coefficients and as a
//! pointwise function on `(0,1)`.

use crate::modes::ModeVector;
use std::f64::consts::{PI, SQRT_2};

/// Selectable initial data. Coefficients refer to the orthonormal basis
/// `sqrt(2) sin(k pi x)`.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialCondition {
    Zero,
    /// `u0(x) = scale * sin(pi x)`, a single smooth mode.
    SinPi {
        scale: f64,
    },
    /// Smooth data supported on the first four modes with coefficients
    /// `scale / k^2`.
    Smooth4 {
        scale: f64,
    },
    /// Explicit orthonormal sine coefficients.
    Modes(Vec<f64>),
}

impl InitialCondition {
    pub fn sin_pi() -> Self {
        InitialCondition::SinPi { scale: 1.0 }
    }

    pub fn smooth4() -> Self {
        InitialCondition::Smooth4 { scale: 1.0 }
    }

    /// Orthonormal sine coefficients, truncated or padded to `n` modes.
    pub fn mode_coefficients(&self, n: usize) -> ModeVector {
        let mut coeffs = vec![0.0; n];
        match self {
            InitialCondition::Zero => {}
            InitialCondition::SinPi { scale } => {
                if n >= 1 {
                    coeffs[0] = scale / SQRT_2;
                }
            }
            InitialCondition::Smooth4 { scale } => {
                for k in 1..=4.min(n) {
                    coeffs[k - 1] = scale / (k * k) as f64;
                }
            }
            InitialCondition::Modes(c) => {
                for (i, v) in c.iter().take(n).enumerate() {
                    coeffs[i] = *v;
                }
            }
        }
        ModeVector::new(coeffs)
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            InitialCondition::Zero => 0.0,
            InitialCondition::SinPi { scale } => scale * (PI * x).sin(),
            InitialCondition::Smooth4 { scale } => (1..=4)
                .map(|k| scale / (k * k) as f64 * SQRT_2 * (k as f64 * PI * x).sin())
                .sum(),
            InitialCondition::Modes(c) => c
                .iter()
                .enumerate()
                .map(|(i, v)| v * SQRT_2 * ((i + 1) as f64 * PI * x).sin())
                .sum(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sin_pi_coefficient_matches_function() {
        // sin(pi x) = (1/sqrt(2)) * sqrt(2) sin(pi x)
        let ic = InitialCondition::sin_pi();
        let modes = ic.mode_coefficients(3);
        assert!((modes.as_slice()[0] - 1.0 / SQRT_2).abs() < 1e-15);
        assert_eq!(modes.as_slice()[1], 0.0);
        let x = 0.37;
        let from_modes = modes.as_slice()[0] * SQRT_2 * (PI * x).sin();
        assert!((ic.value(x) - from_modes).abs() < 1e-14);
    }

    #[test]
    fn smooth4_band_limited() {
        let modes = InitialCondition::smooth4().mode_coefficients(8);
        assert_eq!(&modes.as_slice()[4..], &[0.0; 4]);
        assert!((modes.as_slice()[3] - 1.0 / 16.0).abs() < 1e-15);
    }
}
