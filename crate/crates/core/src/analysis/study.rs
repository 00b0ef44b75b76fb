//! Penalty sweep: reference solve, then the penalized problem for each `R`.

use std::path::PathBuf;
use std::sync::Arc;

use thiserror::Error;

use super::{h1_seminorm_diff, l2_norm_region, rates, AnalysisError};
use crate::io::table::{write_table, TableFormat};
use crate::mesh::Mesh;
use crate::penalty::ObstacleSet;
use crate::solver::{Discretization, Equation, Scenario, SolveError, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ConvergenceRecord {
    pub r: f64,
    /// `||u_R||_{0,S}`
    pub err_l2_obstacle: f64,
    pub rate_l2: Option<f64>,
    /// `|u - u_R|_1`
    pub err_h1: f64,
    pub rate_h1: Option<f64>,
}

/// Where a study writes `<stem>.csv` and `<stem>.md`.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyOutput {
    pub dir: PathBuf,
    pub stem: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub equation: Equation,
    /// Strictly increasing penalty values.
    pub penalties: Vec<f64>,
    /// Physical parameters, tolerances and warm-start ladder; `penalty` is
    /// ignored.
    pub solver: SolverConfig,
    pub output: Option<StudyOutput>,
}

impl StudyConfig {
    pub fn new(equation: Equation, penalties: Vec<f64>, solver: SolverConfig) -> Self {
        StudyConfig { equation, penalties, solver, output: None }
    }
}

#[derive(Debug, Error)]
pub enum StudyFailure {
    #[error("invalid study configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("writing study output: {0}")]
    Io(#[from] std::io::Error),
}

/// A failed study with the records completed before the failure.
#[derive(Debug, Error)]
#[error("{failure} (after {} completed records)", records.len())]
pub struct StudyError {
    pub records: Vec<ConvergenceRecord>,
    #[source]
    pub failure: StudyFailure,
}

/// `rmin * 10^(k / steps_per_decade)` for `k = 0, 1, ...` up to `rmax`.
pub fn penalty_list(rmin: f64, rmax: f64, steps_per_decade: u32) -> Result<Vec<f64>, String> {
    if !(rmin > 0.0 && rmin.is_finite() && rmax.is_finite() && rmax >= rmin) {
        return Err(format!("need 0 < rmin <= rmax, got rmin={rmin}, rmax={rmax}"));
    }
    if steps_per_decade == 0 {
        return Err("steps per decade must be at least 1".into());
    }
    let decades = (rmax / rmin).log10();
    let count = (decades * steps_per_decade as f64 + 1e-9).floor() as i32;
    Ok((0..=count).map(|k| rmin * 10f64.powf(k as f64 / steps_per_decade as f64)).collect())
}

fn validate(cfg: &StudyConfig) -> Result<(), StudyFailure> {
    if cfg.penalties.is_empty() {
        return Err(StudyFailure::Config("empty penalty list".into()));
    }
    if cfg.penalties.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(StudyFailure::Config("penalties must be finite and positive".into()));
    }
    if cfg.penalties.windows(2).any(|w| w[1] <= w[0]) {
        return Err(StudyFailure::Config("penalties must be strictly increasing".into()));
    }
    cfg.solver.validate()?;
    Ok(())
}

fn attach_rates(records: &mut [ConvergenceRecord]) {
    let r: Vec<f64> = records.iter().map(|c| c.r).collect();
    let l2: Vec<f64> = records.iter().map(|c| c.err_l2_obstacle).collect();
    let h1: Vec<f64> = records.iter().map(|c| c.err_h1).collect();
    for ((rec, a), b) in records.iter_mut().zip(rates(&r, &l2)).zip(rates(&r, &h1)) {
        rec.rate_l2 = a;
        rec.rate_h1 = b;
    }
}

/// Runs the sweep. On failure the error carries the records finished so far
/// (with rates); output files are written only for a complete study.
pub fn run_convergence_study(
    mesh: &Arc<Mesh>,
    obstacles: &ObstacleSet,
    cfg: &StudyConfig,
) -> Result<Vec<ConvergenceRecord>, StudyError> {
    let mut records = Vec::new();
    match sweep(mesh, obstacles, cfg, &mut records) {
        Ok(()) => {
            attach_rates(&mut records);
            if let Some(out) = &cfg.output {
                let written = std::fs::create_dir_all(&out.dir)
                    .and_then(|_| write_table(&records, &out.dir.join(format!("{}.csv", out.stem)), TableFormat::Csv))
                    .and_then(|_| {
                        write_table(&records, &out.dir.join(format!("{}.md", out.stem)), TableFormat::Markdown)
                    });
                if let Err(e) = written {
                    return Err(StudyError { records, failure: e.into() });
                }
            }
            Ok(records)
        }
        Err(failure) => {
            attach_rates(&mut records);
            Err(StudyError { records, failure })
        }
    }
}

fn sweep(
    mesh: &Arc<Mesh>,
    obstacles: &ObstacleSet,
    cfg: &StudyConfig,
    records: &mut Vec<ConvergenceRecord>,
) -> Result<(), StudyFailure> {
    validate(cfg)?;
    let reference = Discretization::new(mesh, obstacles, &cfg.solver, Scenario::Reference)?;
    let penalized = Discretization::new(mesh, obstacles, &cfg.solver, Scenario::Penalized)?;
    let map = reference.submesh_map().expect("reference scenario has a submesh");
    let obstacle_triangles = penalized.penalty(1.0)?.obstacle_triangles();

    let reference_solution = match cfg.equation {
        Equation::Stokes => reference.solve_stokes(0.0)?,
        Equation::NavierStokes => {
            let (x, _) = reference.newton(0.0, &reference.stokes_vector(0.0)?)?;
            reference.to_solution(&x, 0.0)?
        }
    };

    // Navier-Stokes: warm-start ladder below the first requested value
    let first = cfg.penalties[0];
    let mut state = match cfg.equation {
        Equation::Stokes => None,
        Equation::NavierStokes => {
            let ladder: Vec<f64> = cfg.solver.continuation.iter().copied().filter(|&r| r < first).collect();
            let mut x = penalized.stokes_vector(ladder.first().copied().unwrap_or(first))?;
            for &r in &ladder {
                x = penalized.newton(r, &x)?.0;
            }
            Some(x)
        }
    };

    for &r in &cfg.penalties {
        let solution = match state.as_mut() {
            None => penalized.solve_stokes(r)?,
            Some(x) => {
                *x = penalized.newton(r, x)?.0;
                penalized.to_solution(x, r)?
            }
        };
        records.push(ConvergenceRecord {
            r,
            err_l2_obstacle: l2_norm_region(&solution, &obstacle_triangles),
            rate_l2: None,
            err_h1: h1_seminorm_diff(&reference_solution, &solution, map)?,
            rate_h1: None,
        });
    }
    Ok(())
}
