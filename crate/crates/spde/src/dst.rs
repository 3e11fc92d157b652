//! Discrete sine transform pair on a uniform interior grid.
//!
//! Nodes `x_q = q / (N+1)`, `q = 1..=N`, carry the exact quadrature
//! `sum_q sin(j pi x_q) sin(k pi x_q) = (N+1)/2 delta_jk` for `j, k <= N`,
//! so synthesis followed by analysis is the identity on band-limited data up
//! to round-off. Oversampling (more nodes than modes) bounds the aliasing of
//! nonlinear images.

use crate::error::{Result, SpdeError};
use std::f64::consts::{PI, SQRT_2};

pub struct SineQuadrature {
    n_modes: usize,
    n_nodes: usize,
    nodes: Vec<f64>,
    /// `sines[k * n_nodes + q] = sin((k+1) pi x_q)`
    sines: Vec<f64>,
}

impl SineQuadrature {
    pub fn new(n_modes: usize, n_nodes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(SpdeError::invalid("need at least one mode"));
        }
        if n_nodes < n_modes {
            return Err(SpdeError::invalid(format!(
                "quadrature needs at least as many nodes ({n_nodes}) as modes ({n_modes})"
            )));
        }
        let nodes: Vec<f64> = (1..=n_nodes)
            .map(|q| q as f64 / (n_nodes + 1) as f64)
            .collect();
        let mut sines = vec![0.0; n_modes * n_nodes];
        for k in 0..n_modes {
            for (q, x) in nodes.iter().enumerate() {
                sines[k * n_nodes + q] = ((k + 1) as f64 * PI * x).sin();
            }
        }
        Ok(SineQuadrature {
            n_modes,
            n_nodes,
            nodes,
            sines,
        })
    }

    pub fn modes(&self) -> usize {
        self.n_modes
    }

    pub fn node_count(&self) -> usize {
        self.n_nodes
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Values `u(x_q) = sum_k c_k sqrt(2) sin(k pi x_q)` of the expansion.
    pub fn synthesize(&self, coeffs: &[f64], out: &mut [f64]) {
        debug_assert!(coeffs.len() <= self.n_modes && out.len() == self.n_nodes);
        out.fill(0.0);
        for (k, &c) in coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let row = &self.sines[k * self.n_nodes..(k + 1) * self.n_nodes];
            let a = SQRT_2 * c;
            for (o, s) in out.iter_mut().zip(row) {
                *o += a * s;
            }
        }
    }

    /// First `out.len()` orthonormal sine coefficients of grid values.
    pub fn analyze(&self, values: &[f64], out: &mut [f64]) {
        debug_assert!(values.len() == self.n_nodes && out.len() <= self.n_modes);
        let w = SQRT_2 / (self.n_nodes + 1) as f64;
        for (k, o) in out.iter_mut().enumerate() {
            let row = &self.sines[k * self.n_nodes..(k + 1) * self.n_nodes];
            let mut acc = 0.0;
            for (v, s) in values.iter().zip(row) {
                acc += v * s;
            }
            *o = w * acc;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_identity_on_band_limited_data() {
        let q = SineQuadrature::new(8, 33).unwrap();
        let coeffs: Vec<f64> = (0..8).map(|k| (k as f64 * 0.7).sin()).collect();
        let mut values = vec![0.0; 33];
        q.synthesize(&coeffs, &mut values);
        let mut back = vec![0.0; 8];
        q.analyze(&values, &mut back);
        for (a, b) in coeffs.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn analyze_recovers_constant_function_coefficients() {
        // <1, sqrt(2) sin(k pi x)> = sqrt(2) (1 - (-1)^k) / (k pi)
        let q = SineQuadrature::new(4, 4096).unwrap();
        let values = vec![1.0; 4096];
        let mut coeffs = vec![0.0; 4];
        q.analyze(&values, &mut coeffs);
        for k in 1..=4usize {
            let exact = SQRT_2 * (1.0 - (-1f64).powi(k as i32)) / (k as f64 * PI);
            assert!(
                (coeffs[k - 1] - exact).abs() < 1e-6,
                "mode {k}: {} vs {exact}",
                coeffs[k - 1]
            );
        }
    }

    #[test]
    fn node_count_validation() {
        assert!(SineQuadrature::new(0, 8).is_err());
        assert!(SineQuadrature::new(8, 7).is_err());
    }
}
