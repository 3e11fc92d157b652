//! Uniform time grids on `[0, T]`.

use crate::error::{Result, SpdeError};

/// Uniform partition of `[0, T]` into `steps` intervals of width `dt = T / steps`.
///
/// Node `m` sits at `m * dt`; the last node is pinned to `T` exactly so that
/// grid-maximum norms cover the full interval.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if !horizon.is_finite() || horizon <= 0.0 {
            return Err(SpdeError::invalid(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        if steps == 0 {
            return Err(SpdeError::invalid("time grid needs at least one step"));
        }
        Ok(TimeGrid { horizon, steps })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    /// Node `m`, for `m` in `0..=steps`.
    pub fn node(&self, m: usize) -> f64 {
        debug_assert!(m <= self.steps);
        if m == self.steps {
            self.horizon
        } else {
            m as f64 * self.dt()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.steps).map(|m| self.node(m)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_cover_interval() {
        let g = TimeGrid::new(1.0, 7).unwrap();
        let nodes = g.nodes();
        assert_eq!(nodes.len(), 8);
        assert_eq!(nodes[0], 0.0);
        assert_eq!(nodes[7], 1.0);
        for w in nodes.windows(2) {
            assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(TimeGrid::new(0.0, 10).is_err());
        assert!(TimeGrid::new(-1.0, 10).is_err());
        assert!(TimeGrid::new(1.0, 0).is_err());
        assert!(TimeGrid::new(f64::NAN, 10).is_err());
    }
}
