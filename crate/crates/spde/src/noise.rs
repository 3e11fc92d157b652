//! Brownian increments for the driving cylindrical or Q-Wiener noise.
//!
//! The noise is represented over an orthonormal basis of `L^2(0,1)`: either
//! `sqrt(2) cos(j pi x)` (the representation under which a multiplicative
//! identity diffusion closes at every truncation level), `sqrt(2) sin(j pi x)`,
//! or the sine basis scaled by `sqrt(q_j)` for a Q-Wiener process.
//!
//! Increment `(l, m)` depends only on `(master_seed, path, l, m)`, never on the
//! table's mode count, so tables generated at different truncation levels agree
//! exactly on shared modes. That coupling is what turns level-vs-reference
//! differences into coupled-path (strong) errors.

use crate::error::{Result, SpdeError};
use crate::grid::TimeGrid;
use crate::streams::{derive_stream, NormalStream, StreamKey};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoiseKind {
    /// Cylindrical noise over `sqrt(2) cos(j pi x)`.
    CosineCylindrical,
    /// Cylindrical noise over `sqrt(2) sin(j pi x)`.
    SineCylindrical,
    /// Trace-class (or truncated white) noise over the sine basis, mode `j`
    /// scaled by `sqrt(q_j)`.
    QWiener,
}

/// Basis representation and truncation of the driving noise.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseBasisSpec {
    kind: NoiseKind,
    modes: usize,
    q_eigenvalues: Option<Vec<f64>>,
    decay_exponent: Option<f64>,
}

impl NoiseBasisSpec {
    pub fn cosine(modes: usize) -> Result<Self> {
        Self::validated(NoiseKind::CosineCylindrical, modes, None, None)
    }

    pub fn sine(modes: usize) -> Result<Self> {
        Self::validated(NoiseKind::SineCylindrical, modes, None, None)
    }

    pub fn q_wiener(q_eigenvalues: Vec<f64>) -> Result<Self> {
        let modes = q_eigenvalues.len();
        Self::validated(NoiseKind::QWiener, modes, Some(q_eigenvalues), None)
    }

    /// Q-Wiener with `q_j = j^(-2 rho)`.
    pub fn q_wiener_decay(rho: f64, modes: usize) -> Result<Self> {
        let q = (1..=modes).map(|j| (j as f64).powf(-2.0 * rho)).collect();
        Self::validated(NoiseKind::QWiener, modes, Some(q), Some(rho))
    }

    /// Truncated space-time white noise: `q_j = 1` on the sine basis.
    pub fn white(modes: usize) -> Result<Self> {
        Self::validated(NoiseKind::QWiener, modes, Some(vec![1.0; modes]), Some(0.0))
    }

    fn validated(
        kind: NoiseKind,
        modes: usize,
        q: Option<Vec<f64>>,
        rho: Option<f64>,
    ) -> Result<Self> {
        if modes == 0 {
            return Err(SpdeError::invalid("noise basis needs at least one mode"));
        }
        if let Some(q) = &q {
            if q.len() != modes {
                return Err(SpdeError::invalid(
                    "q eigenvalue count must match mode count",
                ));
            }
            if q.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(SpdeError::invalid(
                    "q eigenvalues must be finite and nonnegative",
                ));
            }
        }
        Ok(NoiseBasisSpec {
            kind,
            modes,
            q_eigenvalues: q,
            decay_exponent: rho,
        })
    }

    pub fn kind(&self) -> NoiseKind {
        self.kind
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// `sqrt(q_j)` for mode `j` (1-based); 1 for cylindrical representations.
    pub fn sqrt_q(&self, mode: usize) -> f64 {
        debug_assert!(mode >= 1 && mode <= self.modes);
        match &self.q_eigenvalues {
            Some(q) => q[mode - 1].sqrt(),
            None => 1.0,
        }
    }

    /// Trace of the truncated covariance (always finite at finite truncation).
    pub fn trace(&self) -> f64 {
        match &self.q_eigenvalues {
            Some(q) => q.iter().sum(),
            None => self.modes as f64,
        }
    }

    /// Whether the untruncated covariance would be trace class. Metadata only:
    /// `sum j^(-2 rho)` converges iff `rho > 1/2`.
    pub fn trace_class_intended(&self) -> Option<bool> {
        self.decay_exponent.map(|rho| rho > 0.5)
    }

    /// Spatial basis function of mode `j` at `x`.
    pub fn basis_value(&self, mode: usize, x: f64) -> f64 {
        let j = mode as f64;
        match self.kind {
            NoiseKind::CosineCylindrical => std::f64::consts::SQRT_2 * (j * PI * x).cos(),
            NoiseKind::SineCylindrical | NoiseKind::QWiener => {
                std::f64::consts::SQRT_2 * (j * PI * x).sin()
            }
        }
    }

    /// True when the basis coincides with the sine eigenbasis, i.e. additive
    /// noise acts diagonally on mode coefficients.
    pub fn is_sine_aligned(&self) -> bool {
        matches!(self.kind, NoiseKind::SineCylindrical | NoiseKind::QWiener)
    }
}

/// How increments relate across time refinements.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenMode {
    /// Each grid's increments are drawn directly; grids at different step
    /// counts are unrelated.
    Independent,
    /// Increments are dyadic sums over a common base grid of `base_steps`
    /// steps, so coarse increments equal the exact sum of the fine ones.
    Bridge { base_steps: usize },
}

/// Brownian increments `dW[l][m] ~ N(0, dt)` for modes `l = 1..=modes` and
/// steps `m = 1..=steps`, row-major by mode.
#[derive(Clone, Debug)]
pub struct IncrementTable {
    modes: usize,
    grid: TimeGrid,
    path_index: u64,
    data: Vec<f64>,
}

fn dyadic_chunk_sum(stream: &NormalStream, scale: f64, lo: u64, len: u64) -> f64 {
    if len == 1 {
        scale * stream.normal_at(lo)
    } else {
        let half = len / 2;
        dyadic_chunk_sum(stream, scale, lo, half) + dyadic_chunk_sum(stream, scale, lo + half, half)
    }
}

/// Draw the full increment table for one path.
pub fn sample_increments(
    spec: &NoiseBasisSpec,
    grid: &TimeGrid,
    master_seed: u64,
    path_index: u64,
    mode: GenMode,
) -> Result<IncrementTable> {
    sample_increment_rows(spec.modes, grid, master_seed, path_index, mode)
}

/// As [`sample_increments`] but with an explicit row count, for solvers that
/// need more or fewer modes than the configured truncation.
pub fn sample_increment_rows(
    modes: usize,
    grid: &TimeGrid,
    master_seed: u64,
    path_index: u64,
    mode: GenMode,
) -> Result<IncrementTable> {
    if modes == 0 {
        return Err(SpdeError::invalid(
            "increment table needs at least one mode",
        ));
    }
    let steps = grid.steps();
    let mut data = vec![0.0; modes * steps];
    match mode {
        GenMode::Independent => {
            let sqrt_dt = grid.dt().sqrt();
            for l in 1..=modes {
                let stream = derive_stream(StreamKey::noise_mode(master_seed, path_index, l));
                let row = &mut data[(l - 1) * steps..l * steps];
                for (m, slot) in row.iter_mut().enumerate() {
                    *slot = sqrt_dt * stream.normal_at(m as u64);
                }
            }
        }
        GenMode::Bridge { base_steps } => {
            if base_steps % steps != 0 || !(base_steps / steps).is_power_of_two() {
                return Err(SpdeError::invalid(format!(
                    "bridge base {base_steps} must be a power-of-two multiple of {steps}"
                )));
            }
            let chunk = (base_steps / steps) as u64;
            let sqrt_dt_base = (grid.horizon() / base_steps as f64).sqrt();
            for l in 1..=modes {
                let stream = derive_stream(StreamKey::noise_mode(master_seed, path_index, l));
                let row = &mut data[(l - 1) * steps..l * steps];
                for (m, slot) in row.iter_mut().enumerate() {
                    *slot = dyadic_chunk_sum(&stream, sqrt_dt_base, m as u64 * chunk, chunk);
                }
            }
        }
    }
    Ok(IncrementTable {
        modes,
        grid: grid.clone(),
        path_index,
        data,
    })
}

impl IncrementTable {
    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn path_index(&self) -> u64 {
        self.path_index
    }

    /// Increments of mode `l` (1-based) over all steps.
    pub fn row(&self, l: usize) -> &[f64] {
        let steps = self.grid.steps();
        &self.data[(l - 1) * steps..l * steps]
    }

    /// Increment of mode `l` over step `m` (both 1-based; step `m` spans
    /// `[t_{m-1}, t_m]`).
    pub fn increment(&self, l: usize, m: usize) -> f64 {
        self.row(l)[m - 1]
    }

    /// Copy the step-`m` increments of modes `1..=count` into `out`.
    pub fn column_into(&self, m: usize, count: usize, out: &mut [f64]) {
        debug_assert!(count <= self.modes && out.len() >= count);
        let steps = self.grid.steps();
        for l in 0..count {
            out[l] = self.data[l * steps + (m - 1)];
        }
    }

    pub fn raw(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn from_parts(
        modes: usize,
        grid: TimeGrid,
        path_index: u64,
        data: Vec<f64>,
    ) -> Self {
        IncrementTable {
            modes,
            grid,
            path_index,
            data,
        }
    }
}

/// Check the exact pairwise-sum identity between a coarse table over `M` steps
/// and a fine table over `2M` steps: `dW_c[l][m] == dW_f[l][2m-1] + dW_f[l][2m]`
/// bit for bit. Holds by construction in bridge mode; fails (returns `false`)
/// for independently generated tables.
pub fn check_refinement_consistency(
    coarse: &IncrementTable,
    fine: &IncrementTable,
) -> Result<bool> {
    if coarse.modes != fine.modes {
        return Err(SpdeError::invalid(
            "refinement check needs identical mode sets",
        ));
    }
    if coarse.grid.horizon() != fine.grid.horizon() {
        return Err(SpdeError::invalid(
            "refinement check needs identical horizons",
        ));
    }
    if fine.grid.steps() != 2 * coarse.grid.steps() {
        return Err(SpdeError::invalid(
            "fine table must have exactly twice as many steps",
        ));
    }
    for l in 1..=coarse.modes {
        let c = coarse.row(l);
        let f = fine.row(l);
        for m in 0..c.len() {
            if c[m] != f[2 * m] + f[2 * m + 1] {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
