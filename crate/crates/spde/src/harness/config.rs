//! Flat `key = value` config files with `[equation]`, `[discretization]` and
//! `[experiment]` sections. No nesting, `#` comments, order-insensitive.

use super::{ReferenceKind, Scheme};
use crate::error::{Result, SpdeError};
use crate::fem::CoefficientFn;
use crate::initial::InitialCondition;
use crate::noise::NoiseBasisSpec;
use crate::nonlin::{DiffusionSpec, DriftSpec};
use crate::spectral::SpectralOperator;
use std::collections::BTreeMap;
use std::path::Path;

/// A fully resolved experiment description, buildable from a config file or
/// assembled directly in code.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub scheme: Scheme,
    pub operator: SpectralOperator,
    pub coefficient: CoefficientFn,
    pub drift: DriftSpec,
    pub diffusion: DiffusionSpec,
    pub initial: InitialCondition,
    pub levels: Vec<usize>,
    pub reference_level: usize,
    pub reference: ReferenceKind,
    pub t_final: f64,
    pub steps: usize,
    pub quadrature: Option<usize>,
    pub paths: usize,
    pub p: f64,
    /// Fractional smoothness driving the predicted rate (`alpha * eta` for the
    /// spectral scheme, `2 eta` for meshes).
    pub eta: f64,
    pub master_seed: u64,
    pub parallel: bool,
    pub cutoffs: Vec<f64>,
}

impl ExperimentConfig {
    /// Rate exponent the chi statistics are computed against.
    pub fn rate_exponent(&self) -> f64 {
        match self.scheme {
            Scheme::Spectral => self.operator.alpha() * self.eta,
            Scheme::Fem => 2.0 * self.eta,
        }
    }

    /// Largest rate the regularity metadata supports at the configured `p`,
    /// or `None` when the constraint admits no positive smoothness.
    pub fn predicted_rate_cap(&self) -> Option<f64> {
        let bound = (1.0 + self.drift.theta_f).min(0.5 + self.diffusion.theta_g - 1.0 / self.p);
        match self.scheme {
            Scheme::Spectral => {
                let eta_cap = (bound - 1.0 / (self.operator.alpha() * self.p)).min(1.0);
                (eta_cap > 0.0).then(|| self.operator.alpha() * eta_cap)
            }
            Scheme::Fem => {
                let eta_cap = (bound - 1.0 / self.p).min(1.0);
                (eta_cap >= 0.5).then_some(2.0 * eta_cap)
            }
        }
    }

    pub fn initial_label(&self) -> String {
        match &self.initial {
            InitialCondition::Zero => "zero".into(),
            InitialCondition::SinPi { scale } => format!("sin_pi:{scale}"),
            InitialCondition::Smooth4 { scale } => format!("smooth4:{scale}"),
            InitialCondition::Modes(c) => format!("modes[{}]", c.len()),
        }
    }

    /// Structural validation plus constraint warnings. The smoothness
    /// constraint ties `eta` to the regularity metadata; a violation does not
    /// invalidate the run, it only means the predicted rate lies outside the
    /// guaranteed regime.
    pub fn validate(&self) -> Result<Vec<String>> {
        if self.levels.is_empty() {
            return Err(SpdeError::invalid("need at least one level"));
        }
        if self.levels.contains(&0) {
            return Err(SpdeError::invalid("levels must be >= 1"));
        }
        let mut sorted = self.levels.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.levels.len() || sorted != self.levels {
            return Err(SpdeError::invalid("levels must be strictly increasing"));
        }
        let max_level = *self.levels.last().unwrap();
        if self.reference_level <= max_level {
            return Err(SpdeError::invalid(format!(
                "reference level {} must exceed the largest tested level {max_level}",
                self.reference_level
            )));
        }
        if self.paths == 0 {
            return Err(SpdeError::invalid("need at least one path"));
        }
        if !(self.p > 2.0) {
            return Err(SpdeError::invalid(format!(
                "moment order p must exceed 2, got {}",
                self.p
            )));
        }
        if !(self.drift.theta_f > -1.0) {
            return Err(SpdeError::invalid(format!(
                "theta_f must exceed -1, got {}",
                self.drift.theta_f
            )));
        }
        if !(self.diffusion.theta_g > -0.5) {
            return Err(SpdeError::invalid(format!(
                "theta_g must exceed -1/2, got {}",
                self.diffusion.theta_g
            )));
        }
        if self.scheme == Scheme::Fem && self.reference == ReferenceKind::SelfScheme {
            for &l in &self.levels {
                if !self.reference_level.is_multiple_of(l) {
                    return Err(SpdeError::invalid(format!(
                        "mesh comparison needs nesting: reference {} not divisible by {l}",
                        self.reference_level
                    )));
                }
            }
        }

        let mut warnings = Vec::new();
        let p = self.p;
        let bound = (1.0 + self.drift.theta_f).min(0.5 + self.diffusion.theta_g - 1.0 / p);
        match self.scheme {
            Scheme::Spectral => {
                let lhs = self.eta + 1.0 / (self.operator.alpha() * p);
                if lhs >= bound {
                    warnings.push(format!(
                        "eta = {} violates eta + 1/(alpha p) < min(1 + theta_f, 1/2 + theta_g - 1/p) \
                         = {bound:.4}; the predicted rate is outside the guaranteed regime",
                        self.eta
                    ));
                }
            }
            Scheme::Fem => {
                let lhs = self.eta + 1.0 / p;
                if lhs < 0.5 || lhs >= bound || self.eta > 1.0 {
                    warnings.push(format!(
                        "eta = {} outside the guaranteed mesh regime 1/2 <= eta + 1/p < {bound:.4}, eta <= 1",
                        self.eta
                    ));
                }
            }
        }
        Ok(warnings)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SpdeError::io(path, e))?;
        Self::from_str_cfg(&text)
    }

    pub fn from_str_cfg(text: &str) -> Result<Self> {
        let raw = RawConfig::parse(text)?;
        build(raw)
    }
}

struct RawConfig {
    entries: BTreeMap<(String, String), String>,
}

impl RawConfig {
    fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        let mut section = String::new();
        for (lineno, raw_line) in text.lines().enumerate() {
            let line = match raw_line.find('#') {
                Some(i) => &raw_line[..i],
                None => raw_line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| {
                        SpdeError::Config(format!("line {}: unterminated section", lineno + 1))
                    })?
                    .trim();
                if !matches!(name, "equation" | "discretization" | "experiment") {
                    return Err(SpdeError::Config(format!(
                        "line {}: unknown section [{name}]",
                        lineno + 1
                    )));
                }
                section = name.to_string();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                SpdeError::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            if section.is_empty() {
                return Err(SpdeError::Config(format!(
                    "line {}: key before any section",
                    lineno + 1
                )));
            }
            entries.insert(
                (section.clone(), key.trim().to_string()),
                value.trim().to_string(),
            );
        }
        Ok(RawConfig { entries })
    }

    fn take(&mut self, section: &str, key: &str) -> Option<String> {
        self.entries.remove(&(section.to_string(), key.to_string()))
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .map_err(|_| SpdeError::Config(format!("{key}: expected a number, got `{v}`")))
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.parse::<usize>()
        .map_err(|_| SpdeError::Config(format!("{key}: expected a count, got `{v}`")))
}

fn parse_u64(key: &str, v: &str) -> Result<u64> {
    v.parse::<u64>()
        .map_err(|_| SpdeError::Config(format!("{key}: expected an integer, got `{v}`")))
}

fn parse_usize_list(key: &str, v: &str) -> Result<Vec<usize>> {
    v.split(',').map(|s| parse_usize(key, s.trim())).collect()
}

fn parse_f64_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|s| parse_f64(key, s.trim())).collect()
}

/// Split `name:arg1,arg2` into the name and its arguments.
fn split_spec(v: &str) -> (&str, Vec<&str>) {
    match v.split_once(':') {
        Some((name, rest)) => (name.trim(), rest.split(',').map(str::trim).collect()),
        None => (v.trim(), Vec::new()),
    }
}

fn build(mut raw: RawConfig) -> Result<ExperimentConfig> {
    // discretization first: defaults elsewhere depend on it
    let scheme = match raw.take("discretization", "scheme").as_deref() {
        None | Some("spectral") => Scheme::Spectral,
        Some("fem") => Scheme::Fem,
        Some(other) => return Err(SpdeError::Config(format!("unknown scheme `{other}`"))),
    };
    let levels = match raw.take("discretization", "levels") {
        Some(v) => parse_usize_list("levels", &v)?,
        None => return Err(SpdeError::Config("missing discretization.levels".into())),
    };
    let max_level = levels.iter().copied().max().unwrap_or(1);
    let reference_level = match raw.take("discretization", "reference_level") {
        Some(v) => parse_usize("reference_level", &v)?,
        None => 4 * max_level,
    };
    let reference = match raw.take("discretization", "reference").as_deref() {
        None | Some("self") => ReferenceKind::SelfScheme,
        Some("spectral") => ReferenceKind::Spectral,
        Some(other) => return Err(SpdeError::Config(format!("unknown reference `{other}`"))),
    };
    let t_final = match raw.take("discretization", "t_final") {
        Some(v) => parse_f64("t_final", &v)?,
        None => 1.0,
    };
    let quadrature = match raw.take("discretization", "quadrature") {
        Some(v) => Some(parse_usize("quadrature", &v)?),
        None => None,
    };

    let operator = match raw.take("equation", "operator") {
        None => SpectralOperator::heat(),
        Some(v) => {
            let (name, args) = split_spec(&v);
            match name {
                "heat" => SpectralOperator::heat(),
                "power" => {
                    if args.len() != 2 {
                        return Err(SpdeError::Config(
                            "operator power needs `power:<c>,<alpha>`".into(),
                        ));
                    }
                    SpectralOperator::power(
                        parse_f64("operator c", args[0])?,
                        parse_f64("operator alpha", args[1])?,
                    )?
                }
                other => return Err(SpdeError::Config(format!("unknown operator `{other}`"))),
            }
        }
    };

    // steps: explicit, else dt <= min(1e-3 T, 1/|lambda_ref|) for the spectral
    // scheme and 1e-3 T for meshes
    let steps = match raw.take("discretization", "steps") {
        Some(v) => parse_usize("steps", &v)?,
        None => {
            let mut dt_cap = 1e-3 * t_final;
            if scheme == Scheme::Spectral {
                dt_cap = dt_cap.min(1.0 / operator.eigenvalue(reference_level)?.abs());
            }
            (t_final / dt_cap).ceil() as usize
        }
    };

    let coefficient = match raw.take("equation", "coefficient") {
        None => CoefficientFn::One,
        Some(v) => {
            let (name, args) = split_spec(&v);
            match name {
                "one" => CoefficientFn::One,
                "affine" => {
                    if args.len() != 2 {
                        return Err(SpdeError::Config(
                            "coefficient affine needs `affine:<base>,<slope>`".into(),
                        ));
                    }
                    CoefficientFn::Affine {
                        base: parse_f64("coefficient base", args[0])?,
                        slope: parse_f64("coefficient slope", args[1])?,
                    }
                }
                other => return Err(SpdeError::Config(format!("unknown coefficient `{other}`"))),
            }
        }
    };

    let noise = match raw.take("equation", "noise") {
        None => NoiseBasisSpec::white((4 * reference_level).max(256))?,
        Some(v) => {
            let (name, args) = split_spec(&v);
            let modes = |args: &[&str], at: usize| -> Result<usize> {
                args.get(at)
                    .ok_or_else(|| {
                        SpdeError::Config(format!("noise `{name}` is missing its mode count"))
                    })
                    .and_then(|s| parse_usize("noise modes", s))
            };
            match name {
                "white" => NoiseBasisSpec::white(modes(&args, 0)?)?,
                "cosine" => NoiseBasisSpec::cosine(modes(&args, 0)?)?,
                "sine" => NoiseBasisSpec::sine(modes(&args, 0)?)?,
                "qwiener" => {
                    if args.len() != 2 {
                        return Err(SpdeError::Config(
                            "noise qwiener needs `qwiener:<rho>,<J>`".into(),
                        ));
                    }
                    NoiseBasisSpec::q_wiener_decay(
                        parse_f64("noise rho", args[0])?,
                        modes(&args, 1)?,
                    )?
                }
                other => return Err(SpdeError::Config(format!("unknown noise `{other}`"))),
            }
        }
    };

    let drift = match raw.take("equation", "drift") {
        None => DriftSpec::zero(),
        Some(v) => {
            let (name, args) = split_spec(&v);
            match name {
                "zero" => DriftSpec::zero(),
                "identity" => DriftSpec::identity(),
                "affine" => {
                    if args.len() != 2 {
                        return Err(SpdeError::Config(
                            "drift affine needs `affine:<a>,<b>`".into(),
                        ));
                    }
                    DriftSpec::affine(
                        parse_f64("drift a", args[0])?,
                        parse_f64("drift b", args[1])?,
                    )
                }
                "sin_u2" => DriftSpec::sin_square(),
                other => return Err(SpdeError::Config(format!("unknown drift `{other}`"))),
            }
        }
    };

    // smooth (trace-class) noise carries positive regularity, rough noise the
    // white-noise exponent; overridable below
    let default_theta_g = if noise.trace_class_intended() == Some(true) {
        0.49
    } else {
        -0.26
    };
    let diffusion = match raw.take("equation", "diffusion") {
        None => DiffusionSpec::additive(1.0, noise, default_theta_g),
        Some(v) => {
            let (name, args) = split_spec(&v);
            match name {
                "additive" => {
                    let c = match args.first() {
                        Some(s) => parse_f64("diffusion scale", s)?,
                        None => 1.0,
                    };
                    DiffusionSpec::additive(c, noise, default_theta_g)
                }
                "identity" => DiffusionSpec::identity(noise),
                "bounded" => {
                    let c = match args.first() {
                        Some(s) => parse_f64("diffusion scale", s)?,
                        None => 1.0,
                    };
                    DiffusionSpec::bounded(c, noise, default_theta_g)
                }
                other => return Err(SpdeError::Config(format!("unknown diffusion `{other}`"))),
            }
        }
    };

    let mut drift = drift;
    if let Some(v) = raw.take("equation", "theta_f") {
        drift.theta_f = parse_f64("theta_f", &v)?;
    }
    let mut diffusion = diffusion;
    if let Some(v) = raw.take("equation", "theta_g") {
        diffusion.theta_g = parse_f64("theta_g", &v)?;
    }

    let initial = match raw.take("equation", "initial") {
        None => InitialCondition::smooth4(),
        Some(v) => {
            let (name, args) = split_spec(&v);
            let scale = match args.first() {
                Some(s) => parse_f64("initial scale", s)?,
                None => 1.0,
            };
            match name {
                "zero" => InitialCondition::Zero,
                "sin_pi" => InitialCondition::SinPi { scale },
                "smooth4" => InitialCondition::Smooth4 { scale },
                other => return Err(SpdeError::Config(format!("unknown initial `{other}`"))),
            }
        }
    };

    let paths = match raw.take("experiment", "paths") {
        Some(v) => parse_usize("paths", &v)?,
        None => 32,
    };
    let p = match raw.take("experiment", "p") {
        Some(v) => parse_f64("p", &v)?,
        None => 4.0,
    };
    let eta = match raw.take("experiment", "eta") {
        Some(v) => parse_f64("eta", &v)?,
        None => match scheme {
            Scheme::Spectral => 0.25,
            Scheme::Fem => 1.0,
        },
    };
    let master_seed = match raw.take("experiment", "seed") {
        Some(v) => parse_u64("seed", &v)?,
        None => 0,
    };
    let parallel = match raw.take("experiment", "parallel").as_deref() {
        None | Some("true") => true,
        Some("false") => false,
        Some(other) => {
            return Err(SpdeError::Config(format!(
                "parallel: expected true/false, got `{other}`"
            )))
        }
    };
    let cutoffs = match raw.take("experiment", "cutoffs") {
        Some(v) => parse_f64_list("cutoffs", &v)?,
        None => Vec::new(),
    };

    if let Some(((section, key), _)) = raw.entries.iter().next() {
        return Err(SpdeError::Config(format!(
            "unknown key `{key}` in section [{section}]"
        )));
    }

    Ok(ExperimentConfig {
        scheme,
        operator,
        coefficient,
        drift,
        diffusion,
        initial,
        levels,
        reference_level,
        reference,
        t_final,
        steps,
        quadrature,
        paths,
        p,
        eta,
        master_seed,
        parallel,
        cutoffs,
    })
}
