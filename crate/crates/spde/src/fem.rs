//! Piecewise-linear finite elements on the unit interval with homogeneous
//! Dirichlet conditions.
//!
//! The mesh is uniform; mass and stiffness matrices are symmetric tridiagonal
//! and assembled exactly for element-wise-constant coefficients (the
//! coefficient is sampled at element midpoints). Time stepping is linearly
//! implicit: backward Euler in the second-order part, explicit in drift and
//! noise, one symmetric positive definite tridiagonal solve per step.
//!
//! `elliptic_defect` measures `||w - w_h||_{L^2}` for the stationary problem,
//! the quantity whose `O(h^2)` decay drives the convergence of the evolution
//! scheme.

use crate::error::{Result, SpdeError};
use crate::grid::TimeGrid;
use crate::initial::InitialCondition;
use crate::modes::ModeVector;
use crate::noise::{sample_increment_rows, GenMode, IncrementTable};
use crate::nonlin::{cutoff, CutoffLevel, DiffusionSpec, DriftSpec};
use std::f64::consts::PI;

/// Uniform mesh of `(0,1)`: nodes `x_i = i / elements`, interior dimension
/// `elements - 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Mesh1D {
    elements: usize,
}

impl Mesh1D {
    pub fn new(elements: usize) -> Result<Self> {
        if elements < 2 {
            return Err(SpdeError::invalid("mesh needs at least two elements"));
        }
        let mesh = Mesh1D { elements };
        // h * elements recovers the unit interval to one rounding ulp
        debug_assert!((mesh.h() * elements as f64 - 1.0).abs() <= f64::EPSILON);
        Ok(mesh)
    }

    pub fn elements(&self) -> usize {
        self.elements
    }

    /// Mesh width `h = 1 / elements`.
    pub fn h(&self) -> f64 {
        1.0 / self.elements as f64
    }

    /// Number of interior nodes.
    pub fn interior(&self) -> usize {
        self.elements - 1
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 / self.elements as f64
    }

    pub fn element_midpoint(&self, e: usize) -> f64 {
        (e as f64 - 0.5) / self.elements as f64
    }
}

/// 3-point Gauss rule on the reference element `[0,1]`; exact to degree 5.
pub const GAUSS3: [(f64, f64); 3] = [
    (0.11270166537925831, 5.0 / 18.0),
    (0.5, 8.0 / 18.0),
    (0.8872983346207417, 5.0 / 18.0),
];

/// 5-point Gauss rule on `[0,1]`; used for error quadrature only.
const GAUSS5: [(f64, f64); 5] = [
    (0.046910077030668004, 0.11846344252809455),
    (0.2307653449471585, 0.23931433524968324),
    (0.5, 0.28444444444444444),
    (0.7692346550528415, 0.23931433524968324),
    (0.9530899229693319, 0.11846344252809455),
];

/// Symmetric tridiagonal matrix stored by diagonal and off-diagonal.
#[derive(Clone, Debug)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn apply(&self, u: &[f64], out: &mut [f64]) {
        let n = self.diag.len();
        debug_assert!(u.len() == n && out.len() == n);
        for i in 0..n {
            let mut v = self.diag[i] * u[i];
            if i > 0 {
                v += self.off[i - 1] * u[i - 1];
            }
            if i + 1 < n {
                v += self.off[i] * u[i + 1];
            }
            out[i] = v;
        }
    }

    pub fn quadratic_form(&self, u: &[f64]) -> f64 {
        let n = self.diag.len();
        let mut acc = 0.0;
        for i in 0..n {
            acc += self.diag[i] * u[i] * u[i];
            if i + 1 < n {
                acc += 2.0 * self.off[i] * u[i] * u[i + 1];
            }
        }
        acc
    }
}

/// LDL^T factorization of a symmetric positive definite tridiagonal matrix.
/// Forward elimination / back substitution solve.
#[derive(Clone, Debug)]
pub struct SpdFactor {
    d: Vec<f64>,
    l: Vec<f64>,
}

impl SpdFactor {
    pub fn new(m: &SymTridiag) -> Result<Self> {
        let n = m.diag.len();
        let mut d = vec![0.0; n];
        let mut l = vec![0.0; n.saturating_sub(1)];
        d[0] = m.diag[0];
        if !(d[0] > 0.0) {
            return Err(SpdeError::Numerical(format!(
                "non-positive pivot {} at row 0",
                d[0]
            )));
        }
        for i in 0..n.saturating_sub(1) {
            l[i] = m.off[i] / d[i];
            d[i + 1] = m.diag[i + 1] - l[i] * m.off[i];
            if !(d[i + 1] > 0.0) {
                return Err(SpdeError::Numerical(format!(
                    "non-positive pivot {} at row {}",
                    d[i + 1],
                    i + 1
                )));
            }
        }
        Ok(SpdFactor { d, l })
    }

    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        let n = self.d.len();
        debug_assert_eq!(rhs.len(), n);
        for i in 1..n {
            rhs[i] -= self.l[i - 1] * rhs[i - 1];
        }
        for i in 0..n {
            rhs[i] /= self.d[i];
        }
        for i in (0..n.saturating_sub(1)).rev() {
            rhs[i] -= self.l[i] * rhs[i + 1];
        }
    }
}

/// Mass and stiffness matrices on the interior nodes.
#[derive(Clone, Debug)]
pub struct FemMatrices {
    pub mass: SymTridiag,
    pub stiffness: SymTridiag,
    h: f64,
}

impl FemMatrices {
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Discrete `L^2` norm `sqrt(u^T M u)`.
    pub fn mass_norm(&self, u: &[f64]) -> f64 {
        self.mass.quadratic_form(u).max(0.0).sqrt()
    }

    /// Dirichlet energy `u^T K u`.
    pub fn energy(&self, u: &[f64]) -> f64 {
        self.stiffness.quadratic_form(u)
    }
}

/// Assemble mass and stiffness for `-(a u')'` with `a` sampled at element
/// midpoints. Exact for element-wise-constant `a`; order two for smooth `a`.
pub fn assemble(mesh: &Mesh1D, a: impl Fn(f64) -> f64) -> Result<FemMatrices> {
    let n = mesh.interior();
    let h = mesh.h();
    let mut a_elem = Vec::with_capacity(mesh.elements());
    for e in 1..=mesh.elements() {
        let v = a(mesh.element_midpoint(e));
        if !(v > 0.0) || !v.is_finite() {
            return Err(SpdeError::invalid(format!(
                "coefficient must be positive, got {v} at element {e}"
            )));
        }
        a_elem.push(v);
    }

    let mut stiff_diag = vec![0.0; n];
    let mut stiff_off = vec![0.0; n.saturating_sub(1)];
    for i in 1..=n {
        stiff_diag[i - 1] = (a_elem[i - 1] + a_elem[i]) / h;
        if i < n {
            stiff_off[i - 1] = -a_elem[i] / h;
        }
    }
    let mass_diag = vec![2.0 * h / 3.0; n];
    let mass_off = vec![h / 6.0; n.saturating_sub(1)];

    Ok(FemMatrices {
        mass: SymTridiag {
            diag: mass_diag,
            off: mass_off,
        },
        stiffness: SymTridiag {
            diag: stiff_diag,
            off: stiff_off,
        },
        h,
    })
}

/// Interior nodal values of a mesh function (boundary values are zero).
#[derive(Clone, Debug, PartialEq)]
pub struct NodalState(pub Vec<f64>);

impl NodalState {
    pub fn zeros(n: usize) -> Self {
        NodalState(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn check_finite(&self, step: usize) -> Result<()> {
        match self.0.iter().position(|v| !v.is_finite()) {
            None => Ok(()),
            Some(i) => Err(SpdeError::NonFiniteState {
                step,
                detail: format!("node {} is {}", i + 1, self.0[i]),
            }),
        }
    }
}

/// Value of the piecewise-linear interpolant at `x` in `[0,1]`.
pub fn eval(mesh: &Mesh1D, state: &NodalState, x: f64) -> f64 {
    debug_assert_eq!(state.len(), mesh.interior());
    let ne = mesh.elements() as f64;
    let s = (x.clamp(0.0, 1.0)) * ne;
    let e = (s.floor() as usize).min(mesh.elements() - 1); // element e spans [x_e, x_{e+1}]
    let t = s - e as f64;
    let left = if e == 0 { 0.0 } else { state.0[e - 1] };
    let right = if e + 1 == mesh.elements() {
        0.0
    } else {
        state.0[e]
    };
    left * (1.0 - t) + right * t
}

/// Hat-function loads `b_i = <f, hat_i>` by 3-point Gauss per element.
pub fn hat_load(mesh: &Mesh1D, f: impl Fn(f64) -> f64) -> Vec<f64> {
    let n = mesh.interior();
    let h = mesh.h();
    let mut b = vec![0.0; n];
    for e in 0..mesh.elements() {
        let x_left = mesh.node(e);
        for (t, w) in GAUSS3 {
            let x = x_left + h * t;
            let fv = f(x);
            if e >= 1 {
                b[e - 1] += h * w * fv * (1.0 - t);
            }
            if e < n {
                b[e] += h * w * fv * t;
            }
        }
    }
    b
}

/// Orthogonal `L^2` projection onto the mesh space: solve `M c = <f, hat_i>`.
pub fn l2_project(mesh: &Mesh1D, mats: &FemMatrices, f: impl Fn(f64) -> f64) -> Result<NodalState> {
    let mut b = hat_load(mesh, f);
    let factor = SpdFactor::new(&mats.mass)?;
    factor.solve_in_place(&mut b);
    Ok(NodalState(b))
}

/// `||state - f||_{L^2(0,1)}` by 5-point Gauss per element.
pub fn l2_error_vs_function(mesh: &Mesh1D, state: &NodalState, f: impl Fn(f64) -> f64) -> f64 {
    let h = mesh.h();
    let mut acc = 0.0;
    for e in 0..mesh.elements() {
        let x_left = mesh.node(e);
        let left = if e == 0 { 0.0 } else { state.0[e - 1] };
        let right = if e + 1 == mesh.elements() {
            0.0
        } else {
            state.0[e]
        };
        for (t, w) in GAUSS5 {
            let x = x_left + h * t;
            let diff = left * (1.0 - t) + right * t - f(x);
            acc += h * w * diff * diff;
        }
    }
    acc.sqrt()
}

/// `||u_fine - u_coarse||_{L^2}` for nested meshes (`fine.elements` a multiple
/// of `coarse.elements`); exact because both are piecewise linear on the fine
/// elements.
pub fn l2_error_nested(
    coarse_mesh: &Mesh1D,
    coarse: &NodalState,
    fine_mesh: &Mesh1D,
    fine: &NodalState,
) -> Result<f64> {
    if !fine_mesh.elements().is_multiple_of(coarse_mesh.elements()) {
        return Err(SpdeError::invalid(
            "meshes must be nested for exact comparison",
        ));
    }
    let h = fine_mesh.h();
    let mut acc = 0.0;
    for e in 0..fine_mesh.elements() {
        let x_left = fine_mesh.node(e);
        let left = if e == 0 { 0.0 } else { fine.0[e - 1] };
        let right = if e + 1 == fine_mesh.elements() {
            0.0
        } else {
            fine.0[e]
        };
        for (t, w) in GAUSS3 {
            let x = x_left + h * t;
            let diff = left * (1.0 - t) + right * t - eval(coarse_mesh, coarse, x);
            acc += h * w * diff * diff;
        }
    }
    Ok(acc.sqrt())
}

/// `||w - w_h||_{L^2}` where `w_h` solves the discrete stationary problem
/// `K w_h = <f, hat_i>` and `w` is the continuous solution: the supplied
/// closed form when available, otherwise a fine reference mesh
/// (`4096` elements).
pub fn elliptic_defect(
    mesh: &Mesh1D,
    mats: &FemMatrices,
    f: impl Fn(f64) -> f64 + Copy,
    exact: Option<&dyn Fn(f64) -> f64>,
) -> Result<f64> {
    let mut b = hat_load(mesh, f);
    let factor = SpdFactor::new(&mats.stiffness)?;
    factor.solve_in_place(&mut b);
    let w_h = NodalState(b);
    match exact {
        Some(w) => Ok(l2_error_vs_function(mesh, &w_h, w)),
        None => {
            let ref_mesh = Mesh1D::new(4096)?;
            let ref_mats = assemble(&ref_mesh, |_| 1.0)?;
            let mut rb = hat_load(&ref_mesh, f);
            let rf = SpdFactor::new(&ref_mats.stiffness)?;
            rf.solve_in_place(&mut rb);
            let w_ref = NodalState(rb);
            l2_error_nested(mesh, &w_h, &ref_mesh, &w_ref)
        }
    }
}

/// Positive diffusion coefficient choices for the second-order term.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CoefficientFn {
    One,
    /// `a(x) = base + slope x`, kept away from zero by validation at assembly.
    Affine {
        base: f64,
        slope: f64,
    },
}

impl CoefficientFn {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            CoefficientFn::One => 1.0,
            CoefficientFn::Affine { base, slope } => base + slope * x,
        }
    }
}

/// A fully specified finite element evolution problem.
#[derive(Clone, Debug)]
pub struct FemRun {
    pub mesh: Mesh1D,
    pub coefficient: CoefficientFn,
    pub drift: DriftSpec,
    pub diffusion: DiffusionSpec,
    pub grid: TimeGrid,
    pub initial: InitialCondition,
    pub cutoff: Option<CutoffLevel>,
}

impl FemRun {
    pub fn noise_modes_needed(&self) -> usize {
        self.diffusion.basis.modes()
    }
}

/// Per-run stepping machinery: the factored implicit matrix, the projected
/// noise loads for additive diffusion, basis values at the quadrature points
/// for multiplicative diffusion.
pub struct FemStepper {
    run: FemRun,
    mats: FemMatrices,
    factor: SpdFactor,
    /// Additive: `noise_load[i][j] = c sqrt(q_j) <e_j, hat_i>`.
    noise_load: Option<Vec<f64>>,
    /// Multiplicative: `sqrt(q_j) e_j` at every element Gauss point, `[j][point]`.
    basis_points: Option<Vec<f64>>,
    rhs: Vec<f64>,
    field: Vec<f64>,
}

impl FemStepper {
    pub fn new(run: &FemRun) -> Result<Self> {
        let mats = assemble(&run.mesh, |x| run.coefficient.eval(x))?;
        let n = run.mesh.interior();
        let dt = run.grid.dt();
        let implicit = SymTridiag {
            diag: mats
                .mass
                .diag
                .iter()
                .zip(&mats.stiffness.diag)
                .map(|(m, k)| m + dt * k)
                .collect(),
            off: mats
                .mass
                .off
                .iter()
                .zip(&mats.stiffness.off)
                .map(|(m, k)| m + dt * k)
                .collect(),
        };
        let factor = SpdFactor::new(&implicit)?;

        let j = run.diffusion.basis.modes();
        let (noise_load, basis_points) = if let Some(c) = run.diffusion.additive_factor() {
            let mut load = vec![0.0; n * j];
            for mode in 1..=j {
                let scale = c * run.diffusion.basis.sqrt_q(mode);
                let b = hat_load(&run.mesh, |x| run.diffusion.basis.basis_value(mode, x));
                for i in 0..n {
                    load[i * j + mode - 1] = scale * b[i];
                }
            }
            (Some(load), None)
        } else {
            let points = run.mesh.elements() * GAUSS3.len();
            let mut vals = vec![0.0; j * points];
            for mode in 1..=j {
                let scale = run.diffusion.basis.sqrt_q(mode);
                for e in 0..run.mesh.elements() {
                    let x_left = run.mesh.node(e);
                    for (gi, (t, _)) in GAUSS3.iter().enumerate() {
                        let x = x_left + run.mesh.h() * t;
                        vals[(mode - 1) * points + e * GAUSS3.len() + gi] =
                            scale * run.diffusion.basis.basis_value(mode, x);
                    }
                }
            }
            (None, Some(vals))
        };

        Ok(FemStepper {
            run: run.clone(),
            mats,
            factor,
            noise_load,
            basis_points,
            rhs: vec![0.0; n],
            field: Vec::new(),
        })
    }

    pub fn matrices(&self) -> &FemMatrices {
        &self.mats
    }

    /// One linearly implicit step: solve `(M + dt K) u+ = M u + dt b_F + b_G dW`.
    pub fn step(
        &mut self,
        state: &NodalState,
        t: f64,
        dw: &[f64],
        step_index: usize,
    ) -> Result<NodalState> {
        let n = self.run.mesh.interior();
        if state.len() != n {
            return Err(SpdeError::invalid(format!(
                "state has {} nodes, mesh has {n} interior nodes",
                state.len()
            )));
        }
        state.check_finite(step_index)?;
        let j = self.run.diffusion.basis.modes();
        if dw.len() < j {
            return Err(SpdeError::invalid(format!(
                "step needs {j} noise increments, got {}",
                dw.len()
            )));
        }
        let dt = self.run.grid.dt();
        let h = self.run.mesh.h();

        self.mats.mass.apply(&state.0, &mut self.rhs);

        let scale = match &self.run.cutoff {
            Some(level) => cutoff(level, self.mats.mass_norm(&state.0))?.scale(),
            None => 1.0,
        };

        // drift load dt <f(t, s u_h), hat_i>
        if !self.run.drift.f.is_zero() {
            for e in 0..self.run.mesh.elements() {
                let left = if e == 0 { 0.0 } else { state.0[e - 1] };
                let right = if e + 1 == self.run.mesh.elements() {
                    0.0
                } else {
                    state.0[e]
                };
                for (tq, w) in GAUSS3 {
                    let u_val = scale * (left * (1.0 - tq) + right * tq);
                    let fv = self.run.drift.f.eval(t, u_val);
                    if e >= 1 {
                        self.rhs[e - 1] += dt * h * w * fv * (1.0 - tq);
                    }
                    if e < n {
                        self.rhs[e] += dt * h * w * fv * tq;
                    }
                }
            }
        }

        // noise load
        if let Some(load) = &self.noise_load {
            for i in 0..n {
                let row = &load[i * j..(i + 1) * j];
                let mut acc = 0.0;
                for (a, b) in row.iter().zip(dw) {
                    acc += a * b;
                }
                self.rhs[i] += acc;
            }
        } else if let Some(points_table) = &self.basis_points {
            let points = self.run.mesh.elements() * GAUSS3.len();
            self.field.clear();
            self.field.resize(points, 0.0);
            for mode in 0..j {
                let w = dw[mode];
                if w == 0.0 {
                    continue;
                }
                let row = &points_table[mode * points..(mode + 1) * points];
                for (fv, bv) in self.field.iter_mut().zip(row) {
                    *fv += w * bv;
                }
            }
            for e in 0..self.run.mesh.elements() {
                let left = if e == 0 { 0.0 } else { state.0[e - 1] };
                let right = if e + 1 == self.run.mesh.elements() {
                    0.0
                } else {
                    state.0[e]
                };
                for (gi, (tq, w)) in GAUSS3.iter().enumerate() {
                    let u_val = scale * (left * (1.0 - tq) + right * tq);
                    let gv =
                        self.run.diffusion.g.eval(t, u_val) * self.field[e * GAUSS3.len() + gi];
                    if e >= 1 {
                        self.rhs[e - 1] += h * w * gv * (1.0 - tq);
                    }
                    if e < n {
                        self.rhs[e] += h * w * gv * tq;
                    }
                }
            }
        }

        self.factor.solve_in_place(&mut self.rhs);
        let next = NodalState(self.rhs.clone());
        next.check_finite(step_index)?;
        Ok(next)
    }
}

/// Single linearly implicit step with machinery built on the fly.
pub fn step_semi_implicit(
    run: &FemRun,
    state: &NodalState,
    t: f64,
    dw: &[f64],
) -> Result<NodalState> {
    FemStepper::new(run)?.step(state, t, dw, 0)
}

/// Full trajectory at the grid nodes, starting from the `L^2` projection of
/// the initial data.
pub fn solve_fem(run: &FemRun, table: &IncrementTable) -> Result<Vec<NodalState>> {
    let j = run.noise_modes_needed();
    if table.modes() < j {
        return Err(SpdeError::invalid(format!(
            "increment table has {} modes, run needs {j}",
            table.modes()
        )));
    }
    if table.grid() != &run.grid {
        return Err(SpdeError::invalid(
            "increment table grid differs from run grid",
        ));
    }
    let mut stepper = FemStepper::new(run)?;
    let initial = l2_project(&run.mesh, stepper.matrices(), |x| run.initial.value(x))?;
    let mut states = Vec::with_capacity(run.grid.steps() + 1);
    let mut dw = vec![0.0; j];
    states.push(initial);
    for m in 1..=run.grid.steps() {
        table.column_into(m, j, &mut dw);
        let t = run.grid.node(m - 1);
        let next = stepper.step(states.last().unwrap(), t, &dw, m)?;
        states.push(next);
    }
    Ok(states)
}

pub fn solve_fem_keyed(run: &FemRun, master_seed: u64, path_index: u64) -> Result<Vec<NodalState>> {
    let table = sample_increment_rows(
        run.noise_modes_needed().max(1),
        &run.grid,
        master_seed,
        path_index,
        GenMode::Independent,
    )?;
    solve_fem(run, &table)
}

/// Deterministic heat benchmark: `L^2` error at `t_final` of the implicit
/// scheme against `exp(-pi^2 t) sin(pi x)`.
pub fn heat_decay_l2_error(elements: usize, steps: usize, t_final: f64) -> Result<f64> {
    let mesh = Mesh1D::new(elements)?;
    let mats = assemble(&mesh, |_| 1.0)?;
    let dt = t_final / steps as f64;
    let implicit = SymTridiag {
        diag: mats
            .mass
            .diag
            .iter()
            .zip(&mats.stiffness.diag)
            .map(|(m, k)| m + dt * k)
            .collect(),
        off: mats
            .mass
            .off
            .iter()
            .zip(&mats.stiffness.off)
            .map(|(m, k)| m + dt * k)
            .collect(),
    };
    let factor = SpdFactor::new(&implicit)?;
    let mut u = l2_project(&mesh, &mats, |x| (PI * x).sin())?;
    let mut rhs = vec![0.0; mesh.interior()];
    for _ in 0..steps {
        mats.mass.apply(&u.0, &mut rhs);
        factor.solve_in_place(&mut rhs);
        u.0.copy_from_slice(&rhs);
    }
    let amp = (-PI * PI * t_final).exp();
    Ok(l2_error_vs_function(&mesh, &u, |x| amp * (PI * x).sin()))
}

/// Plain-text triplet listing (`row col value`, 1-based) of a symmetric
/// tridiagonal matrix for debugging and external inspection.
pub fn triplet_listing(m: &SymTridiag) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    let n = m.diag.len();
    for i in 0..n {
        let _ = writeln!(out, "{} {} {:.16e}", i + 1, i + 1, m.diag[i]);
        if i + 1 < n {
            let _ = writeln!(out, "{} {} {:.16e}", i + 1, i + 2, m.off[i]);
            let _ = writeln!(out, "{} {} {:.16e}", i + 2, i + 1, m.off[i]);
        }
    }
    out
}

/// Orthonormal sine coefficients needed to evaluate a spectral state as a
/// function; used when comparing mesh states against a spectral reference.
pub fn modal_value(coeffs: &ModeVector, x: f64) -> f64 {
    coeffs
        .as_slice()
        .iter()
        .enumerate()
        .map(|(i, c)| c * std::f64::consts::SQRT_2 * ((i + 1) as f64 * PI * x).sin())
        .sum()
}

/// `||state - sum_k c_k phi_k||_{L^2}` by 3-point Gauss per element.
pub fn l2_error_vs_modal(mesh: &Mesh1D, state: &NodalState, coeffs: &ModeVector) -> f64 {
    let h = mesh.h();
    let mut acc = 0.0;
    for e in 0..mesh.elements() {
        let x_left = mesh.node(e);
        let left = if e == 0 { 0.0 } else { state.0[e - 1] };
        let right = if e + 1 == mesh.elements() {
            0.0
        } else {
            state.0[e]
        };
        for (t, w) in GAUSS3 {
            let x = x_left + h * t;
            let diff = left * (1.0 - t) + right * t - modal_value(coeffs, x);
            acc += h * w * diff * diff;
        }
    }
    acc.sqrt()
}
