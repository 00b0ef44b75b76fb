//! `brinkman` command-line driver.
//!
//! Exit codes: 0 success, 2 bad arguments or input, 3 solver failure,
//! 4 I/O failure. Failures print one line `error kind=<kind> message=<text>`
//! to stderr.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use brinkman::analysis::{
    flux, l2_norm_region, max_divergence_moment, penalty_list, run_convergence_study, StudyConfig, StudyFailure,
    StudyOutput,
};
use brinkman::io::{format_markdown, write_vtk, MeshManifest, Preset, Problem, RunConfig, VtkField};
use brinkman::mesh::{extract_fluid_submesh, write_msh};
use brinkman::solver::{Discretization, Equation, Scenario, SolveError, SolverConfig};
use brinkman::{BoundaryTag, Execution};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "brinkman", version, about = "Brinkman-penalized Stokes and Navier-Stokes channel flow")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build or read a mesh, validate it and write it with a manifest line.
    Mesh(Common),
    /// Solve one problem and write a VTK file plus diagnostics.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Penalized fictitious domain or the reference problem on the fluid region.
        #[arg(long, value_enum, default_value_t = ScenarioArg::Penalized)]
        scenario: ScenarioArg,
    },
    /// Sweep the penalty and tabulate errors and rates.
    Study(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    Penalized,
    Reference,
}

#[derive(Clone, Copy, ValueEnum)]
enum EquationArg {
    Stokes,
    NavierStokes,
}

#[derive(Args, Clone, Default)]
struct Common {
    #[arg(long, value_enum)]
    equation: Option<EquationArg>,
    /// Penalty magnitude for `solve`.
    #[arg(long = "R")]
    r: Option<f64>,
    #[arg(long)]
    rmin: Option<f64>,
    #[arg(long)]
    rmax: Option<f64>,
    /// Penalty values per decade.
    #[arg(long)]
    rsteps: Option<u32>,
    #[arg(long)]
    nu: Option<f64>,
    /// Peak inflow speed.
    #[arg(long = "U")]
    u: Option<f64>,
    /// Gmsh 2.2 mesh with named physical groups.
    #[arg(long)]
    mesh: Option<PathBuf>,
    /// paper-channel (fixture mesh, both obstacles) or rect-channel (built-in mesher).
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Flat `key = value` file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Solver(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Solver(_) => 3,
            Failure::Io(_) => 4,
        }
    }

    fn line(&self) -> String {
        let (kind, msg) = match self {
            Failure::Usage(m) => ("usage", m),
            Failure::Solver(m) => ("solver", m),
            Failure::Io(m) => ("io", m),
        };
        format!("error kind={kind} message={}", msg.replace('\n', " "))
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::InvalidConfig(m) => Failure::Usage(m),
            SolveError::Mesh(_) | SolveError::Penalty(_) | SolveError::Dirichlet(_) => Failure::Usage(e.to_string()),
            other => Failure::Solver(other.to_string()),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Failure + '_ {
    move |e| Failure::Io(format!("{}: {e}", path.display()))
}

/// Resolved settings shared by all subcommands.
struct Settings {
    equation: Equation,
    problem: Problem,
    h: f64,
    solver: SolverConfig,
    run: RunConfig,
    out: PathBuf,
}

fn resolve(common: Common) -> Result<Settings, Failure> {
    let flags = RunConfig {
        equation: common.equation.map(|e| match e {
            EquationArg::Stokes => Equation::Stokes,
            EquationArg::NavierStokes => Equation::NavierStokes,
        }),
        r: common.r,
        rmin: common.rmin,
        rmax: common.rmax,
        rsteps: common.rsteps,
        nu: common.nu,
        u: common.u,
        mesh: common.mesh,
        preset: common.preset,
        h: common.h,
        out: common.out,
    };
    let run = match &common.config {
        Some(path) => RunConfig::load(path).map_err(|e| Failure::Usage(e.to_string()))?.overridden_by(flags),
        None => flags,
    };
    run.validate().map_err(|e| Failure::Usage(e.to_string()))?;

    let h = run.h.unwrap_or(Preset::DEFAULT_H);
    let problem = match (&run.mesh, &run.preset) {
        (Some(path), _) => Problem::from_msh_file(path).map_err(|e| match e {
            brinkman::io::PresetError::Io { .. } => Failure::Io(e.to_string()),
            other => Failure::Usage(other.to_string()),
        })?,
        (None, preset) => {
            let preset: Preset =
                preset.as_deref().unwrap_or("paper-channel").parse().map_err(|e: brinkman::io::PresetError| {
                    Failure::Usage(e.to_string())
                })?;
            preset.build(h).map_err(|e| Failure::Usage(e.to_string()))?
        }
    };
    let defaults = SolverConfig::default();
    let solver = SolverConfig {
        nu: run.nu.unwrap_or(defaults.nu),
        peak_speed: run.u.unwrap_or(defaults.peak_speed),
        penalty: run.r.unwrap_or(defaults.penalty),
        execution: Execution::from_env(),
        ..defaults
    };
    solver.validate()?;
    Ok(Settings {
        equation: run.equation.unwrap_or(Equation::Stokes),
        problem,
        h,
        solver,
        out: run.out.clone().unwrap_or_else(|| PathBuf::from("out")),
        run,
    })
}

fn mesh_command(s: Settings) -> Result<(), Failure> {
    let mesh = &s.problem.mesh;
    let topo = mesh.check_euler().map_err(|e| Failure::Usage(e.to_string()))?;
    let (fluid, _) = extract_fluid_submesh(mesh);
    let fluid_topo = fluid.check_euler().map_err(|e| Failure::Usage(e.to_string()))?;
    std::fs::create_dir_all(&s.out).map_err(io_err(&s.out))?;
    let msh_path = s.out.join("mesh.msh");
    std::fs::write(&msh_path, write_msh(mesh)).map_err(io_err(&msh_path))?;
    let manifest = MeshManifest {
        file: "mesh.msh".into(),
        h: s.h,
        nodes: mesh.num_vertices(),
        triangles: mesh.num_triangles(),
        boundary_lines: mesh.boundary_facets().len(),
        holes: topo.holes(),
        fluid_holes: fluid_topo.holes(),
        obstacles: mesh.num_obstacles(),
    };
    let manifest_path = s.out.join("manifest.jsonl");
    std::fs::write(&manifest_path, manifest.to_json_line() + "\n").map_err(io_err(&manifest_path))?;
    println!("{}", manifest.to_json_line());
    Ok(())
}

fn solve_command(s: Settings, scenario: ScenarioArg) -> Result<(), Failure> {
    let scenario = match scenario {
        ScenarioArg::Penalized => Scenario::Penalized,
        ScenarioArg::Reference => Scenario::Reference,
    };
    let r = s.solver.penalty;
    let disc = Discretization::new(&s.problem.mesh, &s.problem.obstacles, &s.solver, scenario)?;
    let mut report = String::new();
    let solution = match s.equation {
        Equation::Stokes => disc.solve_stokes(r)?,
        Equation::NavierStokes => {
            let ladder = match scenario {
                Scenario::Penalized => s.solver.ladder(),
                Scenario::Reference => vec![0.0],
            };
            let mut x = disc.stokes_vector(ladder[0])?;
            for &step in &ladder {
                let (next, rep) = disc.newton(step, &x)?;
                let _ = writeln!(report, "newton R={step:e}: {rep}");
                x = next;
            }
            disc.to_solution(&x, r)?
        }
    };
    let field = disc.penalty(r)?;
    let inflow = flux(&solution, BoundaryTag::Inflow);
    let outflow = flux(&solution, BoundaryTag::Outflow);
    let _ = writeln!(report, "flux_inflow = {inflow:e}");
    let _ = writeln!(report, "flux_outflow = {outflow:e}");
    let _ = writeln!(report, "flux_balance = {:e}", (inflow + outflow).abs() / inflow.abs());
    let _ = writeln!(report, "divergence = {:e}", max_divergence_moment(&solution));
    let _ = writeln!(report, "l2_obstacle = {:e}", l2_norm_region(&solution, &field.obstacle_triangles()));

    std::fs::create_dir_all(&s.out).map_err(io_err(&s.out))?;
    let vtk_path = s.out.join("solution.vtk");
    let vtk = VtkField::from_solution(&solution, Some(&field)).map_err(|e| Failure::Solver(e.to_string()))?;
    write_vtk(&vtk, &vtk_path).map_err(|e| Failure::Io(format!("{}: {e}", vtk_path.display())))?;
    let diag_path = s.out.join("diagnostics.txt");
    std::fs::write(&diag_path, &report).map_err(io_err(&diag_path))?;
    print!("{report}");
    println!("wrote {}", vtk_path.display());
    Ok(())
}

fn study_command(s: Settings) -> Result<(), Failure> {
    let rmin = s.run.rmin.unwrap_or(1.0);
    let rmax = s.run.rmax.unwrap_or(1e10);
    let penalties = penalty_list(rmin, rmax, s.run.rsteps.unwrap_or(1)).map_err(Failure::Usage)?;
    let cfg = StudyConfig {
        equation: s.equation,
        penalties,
        solver: s.solver,
        output: Some(StudyOutput { dir: s.out.clone(), stem: "study".into() }),
    };
    match run_convergence_study(&s.problem.mesh, &s.problem.obstacles, &cfg) {
        Ok(records) => {
            print!("{}", format_markdown(&records));
            println!("wrote {}", s.out.join("study.csv").display());
            Ok(())
        }
        Err(err) => {
            if !err.records.is_empty() {
                eprint!("{}", format_markdown(&err.records));
            }
            Err(match err.failure {
                StudyFailure::Config(m) => Failure::Usage(m),
                StudyFailure::Io(e) => Failure::Io(e.to_string()),
                StudyFailure::Solve(e) => e.into(),
                StudyFailure::Analysis(e) => Failure::Solver(e.to_string()),
            })
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("BRINKMAN_THREADS") else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("BRINKMAN_THREADS must be a positive integer, got {raw:?}")))?;
    // the pool may already exist when embedded; the cap is best effort then
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    match cli.command {
        Command::Mesh(common) => mesh_command(resolve(common)?),
        Command::Solve { common, scenario } => solve_command(resolve(common)?, scenario),
        Command::Study(common) => study_command(resolve(common)?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            eprintln!("{}", Failure::Usage(e.kind().to_string()).line());
            let _ = e.print();
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.line());
            ExitCode::from(f.code())
        }
    }
}
