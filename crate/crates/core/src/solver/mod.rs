//! Stokes and Navier-Stokes solves on the fictitious or the fluid domain.
//!
//! A [`Discretization`] fixes the space, the obstacle indicator and the
//! strong boundary data once; solves for different penalty magnitudes reuse
//! it. Navier-Stokes problems are solved by full Newton iteration, started
//! from the Stokes solution and continued along an increasing ladder of
//! penalty values.

mod lu;

use std::sync::Arc;

use thiserror::Error;

pub use lu::{relative_residual, sparse_lu_solve, RESIDUAL_TOLERANCE};

use crate::assembly::{apply_dirichlet, assemble_convection, assemble_stokes, AssemblyError, LinearSystem};
use crate::mesh::{extract_fluid_submesh, Mesh, MeshError, SubmeshMap};
use crate::par::Execution;
use crate::penalty::{ObstacleSet, PenaltyError, PenaltyField};
use crate::spaces::{
    collect_dirichlet, BcScenario, DirichletError, DirichletSet, InflowProfile, OutflowCondition, TaylorHoodSpace,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// Whole channel, obstacles penalized.
    Penalized,
    /// Fluid region only, no-slip on the obstacles.
    Reference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Equation {
    Stokes,
    NavierStokes,
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("matrix is {rows}x{cols}, not square")]
    NotSquare { rows: usize, cols: usize },
    #[error("numerically singular matrix (row {row})")]
    Singular { row: usize },
    #[error("factorization failed: {0}")]
    Factorization(String),
    #[error("direct solve inaccurate: relative residual {relative_residual:e}")]
    Inaccurate { relative_residual: f64 },
    #[error("newton diverged: residual grew for 3 consecutive iterations ({0})")]
    NewtonDiverged(NewtonReport),
    #[error("newton did not converge within the iteration limit ({0})")]
    NewtonMaxIterations(NewtonReport),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Penalty(#[from] PenaltyError),
    #[error(transparent)]
    Dirichlet(#[from] DirichletError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
}

/// Default continuation ladder `10^0, 10^1, ..., 10^10`.
pub fn decade_ladder(max_exponent: i32) -> Vec<f64> {
    (0..=max_exponent).map(|k| 10f64.powi(k)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub nu: f64,
    /// Peak inflow speed `U`.
    pub peak_speed: f64,
    /// Penalty magnitude `R`.
    pub penalty: f64,
    pub newton_rel_tol: f64,
    pub newton_abs_tol: f64,
    pub newton_max_iters: usize,
    /// Warm-start ladder; values below `penalty` are visited first.
    pub continuation: Vec<f64>,
    pub outflow: OutflowCondition,
    pub execution: Execution,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            nu: 1.0,
            peak_speed: 100.0,
            penalty: 0.0,
            newton_rel_tol: 1e-10,
            newton_abs_tol: 1e-12,
            newton_max_iters: 25,
            continuation: decade_ladder(10),
            outflow: OutflowCondition::DoNothing,
            execution: Execution::default(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolveError> {
        let bad = |m: String| Err(SolveError::InvalidConfig(m));
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return bad(format!("viscosity must be positive, got {}", self.nu));
        }
        if !(self.peak_speed > 0.0 && self.peak_speed.is_finite()) {
            return bad(format!("peak inflow speed must be positive, got {}", self.peak_speed));
        }
        if !(self.penalty >= 0.0 && self.penalty.is_finite()) {
            return bad(format!("penalty must be finite and non-negative, got {}", self.penalty));
        }
        if !(self.newton_rel_tol > 0.0 && self.newton_abs_tol > 0.0) {
            return bad("newton tolerances must be positive".into());
        }
        if self.newton_max_iters == 0 {
            return bad("newton_max_iters must be at least 1".into());
        }
        Ok(())
    }

    /// Penalty values visited on the way to `self.penalty`.
    pub fn ladder(&self) -> Vec<f64> {
        let mut ladder: Vec<f64> = self.continuation.iter().copied().filter(|&r| r < self.penalty).collect();
        ladder.push(self.penalty);
        ladder
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolutionMeta {
    pub nu: f64,
    pub peak_speed: f64,
    pub scenario: Scenario,
    /// `None` for the reference problem.
    pub penalty: Option<f64>,
}

/// Velocity and pressure coefficients on a Taylor-Hood space.
#[derive(Debug, Clone)]
pub struct FlowSolution {
    space: Arc<TaylorHoodSpace>,
    velocity: Vec<f64>,
    pressure: Vec<f64>,
    meta: SolutionMeta,
}

impl FlowSolution {
    pub fn new(
        space: Arc<TaylorHoodSpace>,
        velocity: Vec<f64>,
        pressure: Vec<f64>,
        meta: SolutionMeta,
    ) -> Result<Self, SolveError> {
        if velocity.len() != space.num_velocity_dofs() || pressure.len() != space.num_pressure_dofs() {
            return Err(SolveError::InvalidConfig(format!(
                "solution sizes ({}, {}) do not match the space ({}, {})",
                velocity.len(),
                pressure.len(),
                space.num_velocity_dofs(),
                space.num_pressure_dofs()
            )));
        }
        if let Some(i) = velocity.iter().chain(&pressure).position(|v| !v.is_finite()) {
            return Err(SolveError::InvalidConfig(format!("non-finite solution entry {i}")));
        }
        Ok(FlowSolution { space, velocity, pressure, meta })
    }

    pub fn space(&self) -> &Arc<TaylorHoodSpace> {
        &self.space
    }

    pub fn velocity(&self) -> &[f64] {
        &self.velocity
    }

    pub fn pressure(&self) -> &[f64] {
        &self.pressure
    }

    pub fn meta(&self) -> &SolutionMeta {
        &self.meta
    }

    /// Velocity and pressure stacked as one system vector.
    pub fn to_system_vector(&self) -> Vec<f64> {
        let mut x = self.velocity.clone();
        x.extend_from_slice(&self.pressure);
        x
    }

    pub fn node_velocity(&self, node: usize) -> [f64; 2] {
        [self.velocity[2 * node], self.velocity[2 * node + 1]]
    }

    /// Copy with all coefficients multiplied by `s`.
    pub fn scaled(&self, s: f64) -> FlowSolution {
        FlowSolution {
            space: self.space.clone(),
            velocity: self.velocity.iter().map(|v| s * v).collect(),
            pressure: self.pressure.iter().map(|v| s * v).collect(),
            meta: self.meta,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonReport {
    /// Euclidean norm of the free-dof residual before each update, plus the
    /// final one.
    pub residual_norms: Vec<f64>,
    /// Tolerance the last residual was compared against.
    pub tolerance: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl std::fmt::Display for NewtonReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} iterations, residuals [", self.iterations)?;
        for (i, r) in self.residual_norms.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{r:.3e}")?;
        }
        write!(f, "], tolerance {:.3e}", self.tolerance)
    }
}

/// A problem fixed up to the penalty magnitude.
#[derive(Debug, Clone)]
pub struct Discretization {
    space: Arc<TaylorHoodSpace>,
    indicator: PenaltyField,
    dirichlet: DirichletSet,
    scenario: Scenario,
    submesh: Option<SubmeshMap>,
    pinned_pressure: Option<usize>,
    config: SolverConfig,
}

impl Discretization {
    /// Builds the space and boundary data. The reference scenario runs on the
    /// fluid submesh cut out of `mesh` along the obstacles.
    pub fn new(
        mesh: &Arc<Mesh>,
        obstacles: &ObstacleSet,
        config: &SolverConfig,
        scenario: Scenario,
    ) -> Result<Self, SolveError> {
        config.validate()?;
        let tags = obstacles.classify(mesh)?;
        let (space_mesh, submesh, bc) = match scenario {
            Scenario::Penalized => (mesh.clone(), None, BcScenario::Penalized),
            Scenario::Reference => {
                let tagged = mesh.with_regions(tags.clone())?;
                let (sub, map) = extract_fluid_submesh(&tagged);
                (Arc::new(sub), Some(map), BcScenario::Reference)
            }
        };
        let indicator = match scenario {
            Scenario::Penalized => tags.iter().map(|t| t.is_obstacle()).collect(),
            Scenario::Reference => vec![false; space_mesh.num_triangles()],
        };
        let space = Arc::new(TaylorHoodSpace::new(space_mesh));
        let mut dirichlet =
            collect_dirichlet(&space, bc, InflowProfile::new(config.peak_speed), config.outflow)?;
        let pinned_pressure = match config.outflow {
            OutflowCondition::DoNothing => None,
            OutflowCondition::Poiseuille => {
                let dof = space.num_velocity_dofs();
                dirichlet.insert(dof, 0.0);
                Some(dof)
            }
        };
        Ok(Discretization {
            space,
            indicator: PenaltyField::from_indicator(1.0, indicator),
            dirichlet,
            scenario,
            submesh,
            pinned_pressure,
            config: config.clone(),
        })
    }

    pub fn space(&self) -> &Arc<TaylorHoodSpace> {
        &self.space
    }

    pub fn dirichlet(&self) -> &DirichletSet {
        &self.dirichlet
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    /// Map back to the parent mesh (reference scenario only).
    pub fn submesh_map(&self) -> Option<&SubmeshMap> {
        self.submesh.as_ref()
    }

    pub fn penalty(&self, magnitude: f64) -> Result<PenaltyField, SolveError> {
        let magnitude = match self.scenario {
            Scenario::Penalized => magnitude,
            Scenario::Reference => 0.0,
        };
        Ok(self.indicator.with_magnitude(magnitude)?)
    }

    /// Unreduced Stokes system at penalty `magnitude`.
    pub fn stokes_system(&self, magnitude: f64) -> Result<LinearSystem, SolveError> {
        Ok(assemble_stokes(&self.space, self.config.nu, &self.penalty(magnitude)?, self.config.execution)?)
    }

    /// Stokes solution as a raw system vector (pressure not gauge-shifted).
    pub fn stokes_vector(&self, magnitude: f64) -> Result<Vec<f64>, SolveError> {
        let system = apply_dirichlet(&self.stokes_system(magnitude)?, &self.dirichlet)?;
        sparse_lu_solve(&system)
    }

    pub fn solve_stokes(&self, magnitude: f64) -> Result<FlowSolution, SolveError> {
        let x = self.stokes_vector(magnitude)?;
        self.to_solution(&x, magnitude)
    }

    /// Navier-Stokes residual `K x + c(u)` on all rows (Dirichlet rows
    /// included).
    pub fn navier_stokes_residual(&self, magnitude: f64, x: &[f64]) -> Result<Vec<f64>, SolveError> {
        let k = self.stokes_system(magnitude)?.matrix;
        let nu = self.space.num_velocity_dofs();
        let (c, _) = assemble_convection(&self.space, &x[..nu], self.config.execution)?;
        let mut r = k.mul_vec(x);
        for (ri, ci) in r.iter_mut().zip(&c) {
            *ri += ci;
        }
        Ok(r)
    }

    /// Newton iteration for the penalized Navier-Stokes problem at
    /// `magnitude`, from the system vector `initial`. Dirichlet values of the
    /// initial guess are overwritten. At least one update is always taken.
    ///
    /// Convergence: `||r_k|| <= max(rel_tol ||r_0||, abs_tol, floor_k)` on the
    /// free rows, where `floor_k = 16 eps || |K| |x| + |c(u)| ||` bounds the
    /// rounding error of evaluating the residual itself.
    pub fn newton(&self, magnitude: f64, initial: &[f64]) -> Result<(Vec<f64>, NewtonReport), SolveError> {
        let cfg = &self.config;
        let n = self.space.num_dofs();
        let nu = self.space.num_velocity_dofs();
        assert_eq!(initial.len(), n, "initial guess has the wrong length");
        let k = self.stokes_system(magnitude)?.matrix;
        let mask = self.dirichlet.mask(n);
        let homogeneous = self.dirichlet.homogeneous();

        let mut x = initial.to_vec();
        for (d, v) in self.dirichlet.iter() {
            x[d] = v;
        }
        let mut report = NewtonReport { residual_norms: Vec::new(), tolerance: 0.0, converged: false, iterations: 0 };
        let mut r0 = 0.0;
        let mut growth = 0;
        loop {
            let (c, jc) = assemble_convection(&self.space, &x[..nu], cfg.execution)?;
            let mut r = k.mul_vec(&x);
            let mut magnitude_sum = vec![0.0; n];
            for (i, m) in magnitude_sum.iter_mut().enumerate() {
                *m = k.row(i).map(|(j, a)| (a * x[j]).abs()).sum::<f64>();
            }
            for i in 0..nu {
                r[i] += c[i];
                magnitude_sum[i] += c[i].abs();
            }
            for i in 0..n {
                if mask[i] {
                    r[i] = 0.0;
                    magnitude_sum[i] = 0.0;
                }
            }
            let norm = l2(&r);
            let floor = 16.0 * f64::EPSILON * l2(&magnitude_sum);
            if report.iterations == 0 {
                r0 = norm;
            }
            let tol = (cfg.newton_rel_tol * r0).max(cfg.newton_abs_tol).max(floor);
            if let Some(&prev) = report.residual_norms.last() {
                growth = if norm > prev { growth + 1 } else { 0 };
            }
            report.residual_norms.push(norm);
            report.tolerance = tol;
            if !norm.is_finite() {
                return Err(SolveError::NewtonDiverged(report));
            }
            if report.iterations >= 1 && norm <= tol {
                report.converged = true;
                return Ok((x, report));
            }
            if growth >= 3 {
                return Err(SolveError::NewtonDiverged(report));
            }
            if report.iterations >= cfg.newton_max_iters {
                return Err(SolveError::NewtonMaxIterations(report));
            }

            let jac = k.add_scaled(1.0, &jc);
            let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
            let system = apply_dirichlet(&LinearSystem::new(jac, rhs), &homogeneous)?;
            let dx = sparse_lu_solve(&system)?;
            for (xi, d) in x.iter_mut().zip(&dx) {
                *xi += d;
            }
            report.iterations += 1;
        }
    }

    /// Wraps a raw system vector; pure-Dirichlet pressures are shifted to
    /// zero mean.
    pub fn to_solution(&self, x: &[f64], magnitude: f64) -> Result<FlowSolution, SolveError> {
        let nu = self.space.num_velocity_dofs();
        let velocity = x[..nu].to_vec();
        let mut pressure = x[nu..].to_vec();
        if self.pinned_pressure.is_some() {
            let mean = mean_value(&self.space, &pressure);
            for p in pressure.iter_mut() {
                *p -= mean;
            }
        }
        let meta = SolutionMeta {
            nu: self.config.nu,
            peak_speed: self.config.peak_speed,
            scenario: self.scenario,
            penalty: match self.scenario {
                Scenario::Penalized => Some(magnitude),
                Scenario::Reference => None,
            },
        };
        FlowSolution::new(self.space.clone(), velocity, pressure, meta)
    }
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Mean of a P1 field over the mesh.
fn mean_value(space: &TaylorHoodSpace, p: &[f64]) -> f64 {
    let mesh = space.mesh();
    let (mut integral, mut area) = (0.0, 0.0);
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let a = mesh.triangle_area(t);
        integral += a * (p[tri[0]] + p[tri[1]] + p[tri[2]]) / 3.0;
        area += a;
    }
    integral / area
}

/// Solves the (penalized or reference) Stokes problem at `config.penalty`.
pub fn solve_stokes(
    mesh: &Arc<Mesh>,
    obstacles: &ObstacleSet,
    config: &SolverConfig,
    scenario: Scenario,
) -> Result<FlowSolution, SolveError> {
    Discretization::new(mesh, obstacles, config, scenario)?.solve_stokes(config.penalty)
}

/// Solves the Navier-Stokes problem at `config.penalty`, walking the
/// continuation ladder from a Stokes initial guess. The report covers the
/// last Newton solve.
pub fn solve_navier_stokes(
    mesh: &Arc<Mesh>,
    obstacles: &ObstacleSet,
    config: &SolverConfig,
    scenario: Scenario,
) -> Result<(FlowSolution, NewtonReport), SolveError> {
    let disc = Discretization::new(mesh, obstacles, config, scenario)?;
    let ladder = match scenario {
        Scenario::Penalized => config.ladder(),
        Scenario::Reference => vec![0.0],
    };
    let mut x = disc.stokes_vector(ladder[0])?;
    let mut last = None;
    for &r in &ladder {
        let (next, report) = disc.newton(r, &x)?;
        x = next;
        last = Some(report);
    }
    let solution = disc.to_solution(&x, config.penalty)?;
    Ok((solution, last.expect("ladder is never empty")))
}
