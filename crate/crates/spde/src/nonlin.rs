//! Nemytskii drift and diffusion specifications, the built-in nonlinearity
//! catalog, and the ball cutoff used to localize locally Lipschitz problems.
//!
//! A scalar function `f` acts on a state function `u` pointwise:
//! `F(t,u)(x) = f(t, u(x))`. The cutoff at level `m` replaces the argument by
//! `min(1, m / ||u||) u`, which leaves evaluations inside the ball of radius
//! `m` untouched (exactly, not just approximately) and freezes growth outside.

use crate::error::{Result, SpdeError};
use crate::noise::NoiseBasisSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LipschitzKind {
    Global,
    Local,
}

/// Built-in scalar nonlinearities. All are time-independent; the time argument
/// is kept for interface uniformity.
#[derive(Clone, Debug, PartialEq)]
pub enum ScalarFn {
    Zero,
    /// `f(u) = u`
    Identity,
    /// `f(u) = a u + b`
    Affine {
        a: f64,
        b: f64,
    },
    /// `f(u) = sin(u^2)`; locally Lipschitz, globally bounded.
    SinSquare,
    /// `f(u) = c`
    Constant {
        c: f64,
    },
    /// `f(u) = scale * u / (1 + u^2)`; bounded and smooth.
    BoundedRational {
        scale: f64,
    },
}

impl ScalarFn {
    #[inline]
    pub fn eval(&self, _t: f64, u: f64) -> f64 {
        match self {
            ScalarFn::Zero => 0.0,
            ScalarFn::Identity => u,
            ScalarFn::Affine { a, b } => a * u + b,
            ScalarFn::SinSquare => (u * u).sin(),
            ScalarFn::Constant { c } => *c,
            ScalarFn::BoundedRational { scale } => scale * u / (1.0 + u * u),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ScalarFn::Zero)
    }
}

/// Drift specification: the scalar function plus regularity metadata. The
/// smoothness exponent is trusted metadata used for rate predictions, never
/// verified against the function.
#[derive(Clone, Debug)]
pub struct DriftSpec {
    pub f: ScalarFn,
    pub theta_f: f64,
    pub lipschitz: LipschitzKind,
    pub label: String,
}

impl DriftSpec {
    pub fn zero() -> Self {
        DriftSpec {
            f: ScalarFn::Zero,
            theta_f: 0.0,
            lipschitz: LipschitzKind::Global,
            label: "zero".into(),
        }
    }

    pub fn identity() -> Self {
        DriftSpec {
            f: ScalarFn::Identity,
            theta_f: 0.0,
            lipschitz: LipschitzKind::Global,
            label: "identity".into(),
        }
    }

    pub fn affine(a: f64, b: f64) -> Self {
        DriftSpec {
            f: ScalarFn::Affine { a, b },
            theta_f: 0.0,
            lipschitz: LipschitzKind::Global,
            label: format!("affine:{a},{b}"),
        }
    }

    pub fn sin_square() -> Self {
        DriftSpec {
            f: ScalarFn::SinSquare,
            theta_f: 0.0,
            lipschitz: LipschitzKind::Local,
            label: "sin_u2".into(),
        }
    }
}

/// Diffusion specification: scalar factor, noise representation, metadata.
#[derive(Clone, Debug)]
pub struct DiffusionSpec {
    pub g: ScalarFn,
    pub theta_g: f64,
    pub basis: NoiseBasisSpec,
    pub lipschitz: LipschitzKind,
    pub label: String,
}

impl DiffusionSpec {
    /// Additive noise `g == c`: the state does not enter the diffusion.
    pub fn additive(c: f64, basis: NoiseBasisSpec, theta_g: f64) -> Self {
        DiffusionSpec {
            g: ScalarFn::Constant { c },
            theta_g,
            basis,
            lipschitz: LipschitzKind::Global,
            label: format!("additive:{c}"),
        }
    }

    /// Multiplicative identity `g(u) = u`; pairs with the cosine representation
    /// for a closed mode system.
    pub fn identity(basis: NoiseBasisSpec) -> Self {
        DiffusionSpec {
            g: ScalarFn::Identity,
            theta_g: -0.26,
            basis,
            lipschitz: LipschitzKind::Global,
            label: "identity".into(),
        }
    }

    pub fn bounded(scale: f64, basis: NoiseBasisSpec, theta_g: f64) -> Self {
        DiffusionSpec {
            g: ScalarFn::BoundedRational { scale },
            theta_g,
            basis,
            lipschitz: LipschitzKind::Global,
            label: format!("bounded:{scale}"),
        }
    }

    pub fn is_additive(&self) -> bool {
        matches!(self.g, ScalarFn::Constant { .. } | ScalarFn::Zero)
    }

    pub fn additive_factor(&self) -> Option<f64> {
        match self.g {
            ScalarFn::Constant { c } => Some(c),
            ScalarFn::Zero => Some(0.0),
            _ => None,
        }
    }
}

/// Pointwise drift image `f(t, u_i)`. Rejects non-finite input with a
/// diagnostic naming the offending entry.
pub fn apply_drift(spec: &DriftSpec, t: f64, u_values: &[f64]) -> Result<Vec<f64>> {
    if let Some(i) = u_values.iter().position(|v| !v.is_finite()) {
        return Err(SpdeError::invalid(format!(
            "drift input has non-finite value {} at index {i}",
            u_values[i]
        )));
    }
    Ok(u_values.iter().map(|&u| spec.f.eval(t, u)).collect())
}

/// Ball radius for the cutoff transformation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutoffLevel {
    m: f64,
}

impl CutoffLevel {
    pub fn new(m: f64) -> Result<Self> {
        if !m.is_finite() || m <= 0.0 {
            return Err(SpdeError::invalid(format!(
                "cutoff level must be positive, got {m}"
            )));
        }
        Ok(CutoffLevel { m })
    }

    pub fn radius(&self) -> f64 {
        self.m
    }
}

/// The scaling context under which cutoff nonlinearities are evaluated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutoffContext {
    scale: f64,
}

impl CutoffContext {
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Inside the ball the context is exactly the identity, so cutoff and raw
    /// evaluations agree bit for bit.
    pub fn is_identity(&self) -> bool {
        self.scale == 1.0
    }

    pub fn apply(&self, values: &mut [f64]) {
        if !self.is_identity() {
            for v in values.iter_mut() {
                *v *= self.scale;
            }
        }
    }
}

/// Evaluation context for `F(t, min(1, m/||x||) x)`: scale `min(1, m/||x||)`,
/// with the convention that a zero-norm state maps to scale 1.
pub fn cutoff(level: &CutoffLevel, state_norm: f64) -> Result<CutoffContext> {
    if !state_norm.is_finite() || state_norm < 0.0 {
        return Err(SpdeError::invalid(format!(
            "state norm must be >= 0, got {state_norm}"
        )));
    }
    let scale = if state_norm <= level.m {
        1.0
    } else {
        level.m / state_norm
    };
    Ok(CutoffContext { scale })
}

/// First grid index at which the path norm reaches the cutoff level, or `None`
/// when the path stays inside the ball (the exit time is then the horizon).
pub fn first_exit_step(path_norms: &[f64], level: &CutoffLevel) -> Option<usize> {
    path_norms.iter().position(|&n| n >= level.m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn drift_catalog_pointwise() {
        let zero = DriftSpec::zero();
        assert_eq!(
            apply_drift(&zero, 0.0, &[1.0, 2.0]).unwrap(),
            vec![0.0, 0.0]
        );

        let id = DriftSpec::identity();
        assert_eq!(
            apply_drift(&id, 0.3, &[1.0, -2.0, 3.0]).unwrap(),
            vec![1.0, -2.0, 3.0]
        );

        let sin2 = DriftSpec::sin_square();
        let out = apply_drift(&sin2, 0.0, &[0.0, (std::f64::consts::PI / 2.0).sqrt()]).unwrap();
        assert_eq!(out[0], 0.0);
        assert!((out[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn drift_rejects_nan() {
        let id = DriftSpec::identity();
        let err = apply_drift(&id, 0.0, &[1.0, f64::NAN]).unwrap_err();
        assert!(err.to_string().contains("index 1"), "{err}");
    }

    #[test]
    fn cutoff_scale_cases() {
        let level = CutoffLevel::new(2.0).unwrap();
        assert_eq!(cutoff(&level, 1.0).unwrap().scale(), 1.0);
        assert_eq!(cutoff(&level, 4.0).unwrap().scale(), 0.5);
        assert_eq!(cutoff(&level, 0.0).unwrap().scale(), 1.0);
        assert!(cutoff(&level, f64::NAN).is_err());
        assert!(CutoffLevel::new(0.0).is_err());
        assert!(CutoffLevel::new(-1.0).is_err());
    }

    #[test]
    fn exit_step_cases() {
        let level = CutoffLevel::new(1.0).unwrap();
        assert_eq!(first_exit_step(&[0.1, 0.5, 0.9], &level), None);
        assert_eq!(first_exit_step(&[0.1, 0.9, 1.2, 0.8], &level), Some(2));
        assert_eq!(first_exit_step(&[1.0, 0.1], &level), Some(0));
    }

    proptest! {
        // Inside the ball the cutoff is the bitwise identity.
        #[test]
        fn cutoff_identity_inside_ball(
            values in proptest::collection::vec(-10.0f64..10.0, 1..16),
            m in 0.1f64..100.0,
        ) {
            let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
            prop_assume!(norm <= m);
            let ctx = cutoff(&CutoffLevel::new(m).unwrap(), norm).unwrap();
            prop_assert!(ctx.is_identity());
            let mut scaled = values.clone();
            ctx.apply(&mut scaled);
            prop_assert_eq!(scaled, values);
        }

        // After scaling, the effective argument norm never exceeds m (up to
        // one rounding ulp).
        #[test]
        fn cutoff_bounds_argument(
            values in proptest::collection::vec(-100.0f64..100.0, 1..16),
            m in 0.1f64..10.0,
        ) {
            let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
            let ctx = cutoff(&CutoffLevel::new(m).unwrap(), norm).unwrap();
            let mut scaled = values.clone();
            ctx.apply(&mut scaled);
            let scaled_norm = scaled.iter().map(|v| v * v).sum::<f64>().sqrt();
            prop_assert!(scaled_norm <= m * (1.0 + 4.0 * f64::EPSILON) || norm <= m);
        }
    }
}
