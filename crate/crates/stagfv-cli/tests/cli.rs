//! End-to-end tests of the `stagfv` binary: output files, exit codes and
//! determinism across runs and thread counts.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use stagfv::mesh::read_mesh;

fn stagfv(args: &[&str]) -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_stagfv"));
    cmd.args(args);
    cmd
}

fn run(args: &[&str]) -> Output {
    stagfv(args).output().expect("binary should spawn")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_tube_config(path: &Path) {
    fs::write(
        path,
        "gamma = 1.4\n\
         t_end = 2e-4\n\
         cfl = 0.4\n\
         scheme.mass = muscl\n\
         nu = 5.0\n\
         output.every = 2\n\
         bc.left = reflexive\n\
         bc.right = dirichlet 3.445333 -411.4744 0 0 4.5e5\n\
         bc.lateral = slip\n",
    )
    .unwrap();
}

#[test]
fn derive_tables_prints_exact_fractions() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("tables.csv");
    let out = run(&["derive-tables", "--out", csv.to_str().unwrap()]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    for keyword in ["TRI", "QUAD", "TET", "HEX", "PRISM", "PYR"] {
        assert!(text.contains(keyword), "missing {keyword} in:\n{text}");
    }
    // Spot values from the six tables.
    assert!(text.contains("1/3") && text.contains("3/8") && text.contains("5/24"));
    assert!(text.contains("least-squares deviation"));

    let table = fs::read_to_string(csv).unwrap();
    assert!(table.starts_with("kind,edge,role,numerator,denominator\n"));
    assert!(table.lines().count() > 100);
}

#[test]
fn mesh_gen_output_is_readable_by_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tube.mesh");
    let out = run(&["mesh-gen", "--kind", "pyramid", "--n", "2", "--out", path.to_str().unwrap()]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let mesh = read_mesh(&path).unwrap();
    // 2^2 layers of 10x10 boxes, six pyramids per box.
    assert_eq!(mesh.n_cells(), 2400);
    assert!(stdout(&out).contains("2400 cells"));
}

#[test]
fn preset_run_writes_snapshots_and_a_diagnostics_table() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let out = run(&[
        "run", "--preset", "shock-tube", "--kind", "prism", "--n", "2",
        "--out", out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));

    let snapshots: Vec<_> = fs::read_dir(&out_dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.starts_with("snapshot_") && n.ends_with(".vtk"))
        .collect();
    assert!(snapshots.len() >= 2, "want initial + final at least, got {snapshots:?}");

    let first = fs::read_to_string(out_dir.join("snapshot_0000.vtk")).unwrap();
    assert!(first.starts_with("# vtk DataFile Version 3.0\n"));
    assert!(first.contains("DATASET UNSTRUCTURED_GRID"));
    assert!(first.contains("SCALARS density double 1"));
    assert!(first.contains("VECTORS velocity double"));

    let diag = fs::read_to_string(out_dir.join("diagnostics.csv")).unwrap();
    let mut lines = diag.lines();
    assert_eq!(
        lines.next().unwrap(),
        "step,t,dt,total_mass,internal_energy,kinetic_energy,total_energy,\
         min_rho,min_e,max_dual_residual,boundary_mass_flux"
    );
    let mut rows = 0;
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 11, "bad row `{line}`");
        for f in &fields[1..] {
            f.parse::<f64>().unwrap_or_else(|_| panic!("bad float `{f}` in `{line}`"));
        }
        rows += 1;
    }
    assert!(rows > 10);
}

#[test]
fn identical_inputs_give_byte_identical_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let mesh_path = dir.path().join("tube.mesh");
    assert!(run(&["mesh-gen", "--kind", "prism", "--n", "2", "--out", mesh_path.to_str().unwrap()])
        .status
        .success());
    let config = dir.path().join("run.cfg");
    write_tube_config(&config);

    let mut outputs: Vec<(Vec<u8>, Vec<u8>)> = Vec::new();
    for (label, threads) in [("a", "1"), ("b", "2"), ("c", "1")] {
        let out_dir = dir.path().join(label);
        let status = stagfv(&[
            "run", "--config", config.to_str().unwrap(), "--mesh", mesh_path.to_str().unwrap(),
            "--init", "1.292", "0", "0", "0", "1e5", "--out", out_dir.to_str().unwrap(),
        ])
        .env("STAGFV_THREADS", threads)
        .status()
        .unwrap();
        assert!(status.success());
        outputs.push((
            fs::read(out_dir.join("diagnostics.csv")).unwrap(),
            fs::read(out_dir.join("snapshot_0001.vtk")).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1], "one vs two threads");
    assert_eq!(outputs[0], outputs[2], "repeat run");
}

#[test]
fn invalid_inputs_exit_with_the_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let mesh_path = dir.path().join("tube.mesh");
    assert!(run(&["mesh-gen", "--kind", "prism", "--n", "1", "--out", mesh_path.to_str().unwrap()])
        .status
        .success());

    // Config missing the time-step policy: named in the message.
    let config = dir.path().join("bad.cfg");
    fs::write(&config, "gamma = 1.4\nt_end = 1e-4\nbc.left = outlet\n").unwrap();
    let out = run(&[
        "run", "--config", config.to_str().unwrap(), "--mesh", mesh_path.to_str().unwrap(),
        "--init", "1", "0", "0", "0", "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("dt") && err.contains("cfl"), "unhelpful error: {err}");

    // Unknown preset.
    let out = run(&["run", "--preset", "warp-drive"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("warp-drive"));

    // Clap usage errors (unknown flag, conflicting selectors, short --init).
    assert_eq!(run(&["run", "--bogus"]).status.code(), Some(1));
    let out = run(&[
        "run", "--preset", "shock-tube", "--config", config.to_str().unwrap(),
        "--mesh", mesh_path.to_str().unwrap(), "--init", "1", "0", "0", "0", "1",
    ]);
    assert_eq!(out.status.code(), Some(1));

    // lw-check needs at least two levels.
    let out = run(&["lw-check", "--levels", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("at least 2"));

    // Help and version are not failures.
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
}

#[test]
fn oversized_fixed_steps_abort_with_the_cfl_code_and_flush_state() {
    let dir = tempfile::tempdir().unwrap();
    let mesh_path = dir.path().join("tube.mesh");
    assert!(run(&["mesh-gen", "--kind", "prism", "--n", "2", "--out", mesh_path.to_str().unwrap()])
        .status
        .success());
    let config = dir.path().join("cfl.cfg");
    fs::write(
        &config,
        "gamma = 1.4\nt_end = 0.05\ndt = 0.005\n\
         bc.left = reflexive\nbc.right = dirichlet 3.445333 -411.4744 0 0 4.5e5\nbc.lateral = slip\n",
    )
    .unwrap();
    let out_dir = dir.path().join("run");
    let out = run(&[
        "run", "--config", config.to_str().unwrap(), "--mesh", mesh_path.to_str().unwrap(),
        "--init", "1.292", "0", "0", "0", "1e5", "--out", out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
    let err = stderr(&out);
    assert!(err.contains("CFL") && err.contains("retry with dt <="), "{err}");
    // The last valid state is still on disk, alongside the initial one.
    assert!(out_dir.join("snapshot_0000.vtk").exists());
    assert!(out_dir.join("snapshot_0001.vtk").exists());
    assert!(fs::read_to_string(out_dir.join("diagnostics.csv")).unwrap().lines().count() >= 1);
}

#[test]
fn convergence_writes_the_study_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "convergence", "--kind", "prism", "--nmin", "1", "--nmax", "2",
        "--out", dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("convergence_prism.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "time,n,h,dt,e_p,e_rho,e_u,order_p,order_rho,order_u");
    // Two evaluation times, two levels each.
    assert_eq!(lines.len(), 5);
    assert!(lines[1].ends_with(",,,"), "coarsest level has no orders: {}", lines[1]);
    assert!(!lines[2].ends_with(",,,"), "finer level reports orders: {}", lines[2]);
    assert!(stdout(&out).contains("orders"));
}

#[test]
fn lw_check_reports_decaying_residuals() {
    let out = run(&["lw-check", "--kind", "quad", "--levels", "2"]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let residuals: Vec<f64> = text
        .lines()
        .filter_map(|l| {
            let fields: Vec<&str> = l.split_whitespace().collect();
            (fields.len() == 5 && fields[0].parse::<u32>().is_ok())
                .then(|| fields[3].parse::<f64>().unwrap())
        })
        .collect();
    assert_eq!(residuals.len(), 2, "table rows in:\n{text}");
    assert!(residuals[1] < residuals[0] / 1.4, "{residuals:?}");

    let out = run(&["lw-check", "--kind", "tri", "--levels", "2", "--constant"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for line in text.lines().filter(|l| {
        l.split_whitespace().next().is_some_and(|w| w.parse::<u32>().is_ok())
    }) {
        let res: f64 = line.split_whitespace().nth(3).unwrap().parse().unwrap();
        assert!(res.abs() <= 1e-10, "constant fields should vanish: {line}");
    }
}
