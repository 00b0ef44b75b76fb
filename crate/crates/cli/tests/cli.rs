use std::path::Path;
use std::process::{Command, Output};

use brinkman::io::read_vtk_summary;

fn brinkman(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_brinkman"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_brinkman")).arg("bogus").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error kind=usage"), "{}", stderr(&o));
}

#[test]
fn bad_values_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["study", "--preset", "nope"][..],
        &["study", "--rmin", "10", "--rmax", "1"],
        &["solve", "--preset", "paper-channel", "--h", "0.3"],
        &["solve", "--nu=-1", "--preset", "rect-channel", "--h", "0.1"],
    ] {
        let o = brinkman(args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        assert_eq!(stderr(&o).lines().count(), 1);
    }
}

#[test]
fn missing_mesh_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = brinkman(&["solve", "--mesh", "/nonexistent/mesh.msh"], dir.path());
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).starts_with("error kind=io"));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let o = brinkman(&["study", "--preset", "paper-channel", "--h", "0.2", "--rmax", "10"], &blocker.join("sub"));
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn stokes_study_on_the_paper_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let o = brinkman(&["study", "--equation", "stokes", "--preset", "paper-channel", "--rmax", "1e8"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("study.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 9);
    let md = std::fs::read_to_string(dir.path().join("study.md")).unwrap();
    assert_eq!(md.lines().count(), 2 + 9);
    assert!(String::from_utf8_lossy(&o.stdout).contains("| R |"));
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let mut tables = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(threads);
        let o = Command::new(env!("CARGO_BIN_EXE_brinkman"))
            .args(["study", "--preset", "paper-channel", "--h", "0.2", "--rmax", "1e4", "--equation", "navier-stokes"])
            .arg("--out")
            .arg(&out)
            .env("BRINKMAN_THREADS", threads)
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", stderr(&o));
        tables.push(std::fs::read(out.join("study.csv")).unwrap());
    }
    assert_eq!(tables[0], tables[1]);
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# small run\npreset = paper-channel\nh = 0.2\nrmin = 1\nrmax = 1e3\nequation = stokes\n").unwrap();
    let out = dir.path().join("a");
    let o = brinkman(&["study", "--config", cfg.to_str().unwrap()], &out);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(std::fs::read_to_string(out.join("study.csv")).unwrap().lines().count(), 1 + 4);

    let out = dir.path().join("b");
    let o = brinkman(&["study", "--config", cfg.to_str().unwrap(), "--rmax", "10"], &out);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(std::fs::read_to_string(out.join("study.csv")).unwrap().lines().count(), 1 + 2);
}

#[test]
fn mesh_command_writes_fixture_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = brinkman(&["mesh", "--preset", "rect-channel", "--h", "0.1"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let msh = std::fs::read(dir.path().join("mesh.msh")).unwrap();
    let mesh = brinkman::mesh::msh::parse_msh_named(&msh).unwrap();
    assert_eq!(mesh.num_obstacles(), 1);
    let line = std::fs::read_to_string(dir.path().join("manifest.jsonl")).unwrap();
    assert!(line.contains("\"triangles\":"));
}

#[test]
fn navier_stokes_solve_writes_vtk_and_fluxes() {
    let dir = tempfile::tempdir().unwrap();
    let o = brinkman(&["solve", "--equation", "navier-stokes", "--R", "1e6", "--preset", "paper-channel"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let vtk = std::fs::read_to_string(dir.path().join("solution.vtk")).unwrap();
    let summary = read_vtk_summary(&vtk).unwrap();
    assert!(summary.points > 0 && summary.cells > 0);
    assert!(summary.max_speed >= 100.0 * (1.0 - 1e-9));
    let diag = std::fs::read_to_string(dir.path().join("diagnostics.txt")).unwrap();
    let balance: f64 = diag
        .lines()
        .find_map(|l| l.strip_prefix("flux_balance = "))
        .expect("flux balance reported")
        .parse()
        .unwrap();
    assert!(balance < 1e-8);
    assert!(diag.lines().any(|l| l.starts_with("newton R=1e6: ")));
}
