//! Command-line front end for the staggered finite-volume Euler solver.
//!
//! Subcommands: `mesh-gen` (shock-tube meshes in the native plain-text
//! format), `derive-tables` (dual-flux coefficient tables as exact
//! fractions, re-derived by least squares), `run` (simulate from a config
//! file and mesh, or from a named preset, with VTK snapshots and a
//! per-step diagnostics CSV), `convergence` (refinement study of the
//! shock-reflection tube) and `lw-check` (weak-consistency residual of the
//! momentum convection operator on refined grids).
//!
//! Exit codes: 0 success, 1 validation/configuration error, 2 CFL abort
//! (the last valid snapshot is still flushed), 3 coefficient-table
//! mismatch.

mod vtk;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use stagfv::dualflux::{derive_table_least_squares, table_csv, table_of_kind, DualFluxError};
use stagfv::geom::Vec3;
use stagfv::mesh::{
    gen_column_mesh, read_mesh, unit_grid_2d, unit_grid_3d, write_mesh, CellKind, Mesh,
    ShockTubeKind, ALL_KINDS,
};
use stagfv::operators::FaceScheme;
use stagfv::solver::{
    parse_config, BoundarySet, Config, InitialData, Solver, SolverError, TimeStep, UniformState,
};
use stagfv::verify::{
    lw_weak_residual, mach10_column_setup, shock_tube_study, tube_mesh, FlowFields, ShockSetup,
    StudyParams, TestFunction, VerifyError,
};

const EXIT_VALIDATION: u8 = 1;
const EXIT_CFL: u8 = 2;
const EXIT_TABLE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "stagfv",
    version,
    about = "Staggered finite-volume solver for the compressible Euler equations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a shock-tube mesh and write it in the native plain-text format.
    MeshGen(MeshGenArgs),
    /// Print the dual-flux coefficient tables and re-derive them by least squares.
    DeriveTables(DeriveTablesArgs),
    /// Run a simulation from a config file and mesh, or from a preset.
    Run(RunArgs),
    /// Refinement study of the shock-reflection tube.
    Convergence(ConvergenceArgs),
    /// Weak-consistency residual of the momentum convection operator.
    LwCheck(LwCheckArgs),
}

#[derive(Args)]
struct MeshGenArgs {
    /// Tube cell mixture: prism, pyramid or hybrid.
    #[arg(long, default_value = "prism")]
    kind: String,
    /// Refinement exponent; the tube gets 2^n layers along its axis.
    #[arg(long, default_value_t = 5)]
    n: u32,
    /// Output mesh file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DeriveTablesArgs {
    /// Also write the tables as CSV to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Named preset: shock-tube or mach10-column.
    #[arg(long, conflicts_with_all = ["config", "mesh", "init"])]
    preset: Option<String>,
    /// Config file (requires --mesh and --init).
    #[arg(long, requires = "mesh", requires = "init")]
    config: Option<PathBuf>,
    /// Mesh file in the native plain-text format.
    #[arg(long, requires = "config")]
    mesh: Option<PathBuf>,
    /// Uniform initial state for config runs.
    #[arg(long, num_args = 5, value_names = ["RHO", "U", "V", "W", "P"], allow_negative_numbers = true)]
    init: Option<Vec<f64>>,
    /// Tube cell mixture for the shock-tube preset: prism, pyramid or hybrid.
    #[arg(long, default_value = "prism")]
    kind: String,
    /// Tube refinement exponent for the shock-tube preset.
    #[arg(long, default_value_t = 5)]
    n: u32,
    /// Output directory for snapshots and the diagnostics CSV.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct ConvergenceArgs {
    /// Tube cell mixture: prism, pyramid or hybrid.
    #[arg(long, default_value = "prism")]
    kind: String,
    /// Coarsest refinement exponent.
    #[arg(long, default_value_t = 5)]
    nmin: u32,
    /// Finest refinement exponent.
    #[arg(long, default_value_t = 8)]
    nmax: u32,
    /// Face scheme: upwind, centered or muscl.
    #[arg(long, default_value = "muscl")]
    scheme: String,
    /// Output directory for the study CSV.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct LwCheckArgs {
    /// Grid cell kind: quad, tri, hex, prism, pyramid or tet.
    #[arg(long, default_value = "quad")]
    kind: String,
    /// Number of refinement levels (at least 2).
    #[arg(long, default_value_t = 3)]
    levels: u32,
    /// Use constant fields (residual should vanish to round-off).
    #[arg(long)]
    constant: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests land here too; only real usage
            // errors are failures.
            let failed = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if failed { EXIT_VALIDATION } else { 0 });
        }
    };
    let run = init_threads().and_then(|()| dispatch(cli.command));
    match run {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_VALIDATION)
        }
    }
}

/// Honors STAGFV_THREADS; the default pool size is left to rayon otherwise.
/// Results are bitwise identical for any thread count.
fn init_threads() -> Result<()> {
    match std::env::var("STAGFV_THREADS") {
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .ok()
                .filter(|&n| n > 0)
                .with_context(|| format!("STAGFV_THREADS must be a positive integer, got `{v}`"))?;
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .context("failed to initialize the thread pool")?;
            Ok(())
        }
        Err(_) => Ok(()),
    }
}

fn dispatch(command: Command) -> Result<u8> {
    match command {
        Command::MeshGen(args) => cmd_mesh_gen(args),
        Command::DeriveTables(args) => cmd_derive_tables(args),
        Command::Run(args) => cmd_run(args),
        Command::Convergence(args) => cmd_convergence(args),
        Command::LwCheck(args) => cmd_lw_check(args),
    }
}

fn parse_tube_kind(s: &str) -> Result<ShockTubeKind> {
    ShockTubeKind::parse(s)
        .ok_or_else(|| anyhow!("unknown tube kind `{s}` (expected prism, pyramid or hybrid)"))
}

fn cmd_mesh_gen(args: MeshGenArgs) -> Result<u8> {
    let kind = parse_tube_kind(&args.kind)?;
    let mesh = tube_mesh(kind, args.n)?;
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    write_mesh(&args.out, &mesh)?;
    let q = mesh.quality();
    println!(
        "wrote {} ({} n={}): {} cells, {} faces, h={:.6e}",
        args.out.display(),
        kind.name(),
        args.n,
        mesh.n_cells(),
        mesh.n_faces(),
        mesh.h_max()
    );
    println!(
        "quality: theta1={:.3}, theta2={:.3}, max faces/cell={}",
        q.theta1, q.theta2, q.max_face_count
    );
    Ok(0)
}

fn cmd_derive_tables(args: DeriveTablesArgs) -> Result<u8> {
    for &kind in ALL_KINDS.iter() {
        let table = table_of_kind(kind);
        println!(
            "{} ({} faces, {} dual edges, max |alpha| = {}):",
            kind.keyword(),
            kind.face_count(),
            kind.dual_edge_count(),
            table.max_abs()
        );
        for (e, &(from, to)) in kind.dual_edge_template().iter().enumerate() {
            let row: Vec<String> = table.row(e).iter().map(|q| q.to_string()).collect();
            println!("  edge {from}|{to}: [{}]", row.join(", "));
        }
        match derive_table_least_squares(kind) {
            Ok((_, dev)) => println!("  least-squares deviation: {dev:.3e}"),
            Err(e @ DualFluxError::DerivationMismatch { .. }) => {
                eprintln!("error: {e}");
                return Ok(EXIT_TABLE);
            }
            Err(e) => return Err(e.into()),
        }
    }
    if let Some(path) = args.out {
        fs::write(&path, table_csv())?;
        println!("wrote {}", path.display());
    }
    Ok(0)
}

fn cmd_run(args: RunArgs) -> Result<u8> {
    let (mesh, config, bcs, init, label) = match (&args.preset, &args.config, &args.mesh) {
        (Some(name), None, None) => preset_run(name, &args)?,
        (None, Some(config_path), Some(mesh_path)) => {
            let (config, bcs) = parse_config(config_path)?;
            let mesh = read_mesh(mesh_path)
                .with_context(|| format!("failed to read mesh {}", mesh_path.display()))?;
            let v = args
                .init
                .as_ref()
                .ok_or_else(|| anyhow!("--init RHO U V W P is required with --config"))?;
            let state = UniformState::new(v[0], Vec3::new(v[1], v[2], v[3]), v[4]);
            let label = format!("config {}", config_path.display());
            (mesh, config, bcs, InitialData::uniform(state), label)
        }
        _ => bail!("pass either --preset NAME, or --config FILE --mesh FILE --init RHO U V W P"),
    };
    fs::create_dir_all(&args.out)?;
    println!(
        "{label}: {} cells, {} faces, t_end={:.6e}",
        mesh.n_cells(),
        mesh.n_faces(),
        config.t_end
    );
    let mut solver = Solver::new(&mesh, config, &bcs, &init)?;
    drive(&mut solver, &args.out)
}

fn preset_run(
    name: &str,
    args: &RunArgs,
) -> Result<(Mesh, Config, BoundarySet, InitialData, String)> {
    match name {
        "shock-tube" => {
            let kind = parse_tube_kind(&args.kind)?;
            let setup = ShockSetup::preset();
            let mesh = tube_mesh(kind, args.n)?;
            let mut config = Config::new(setup.gamma, 0.015, TimeStep::Cfl(0.45))
                .with_schemes(FaceScheme::MusclMinmod);
            config.nu = setup.nu();
            config.output_every = 50;
            let label = format!("shock-tube ({} n={})", kind.name(), args.n);
            Ok((mesh, config, setup.boundary_conditions(), setup.initial_data(), label))
        }
        "mach10-column" => {
            let setup = mach10_column_setup();
            let mesh = gen_column_mesh(CellKind::Prism, 6, 10, 16)?;
            let mut config = Config::new(setup.gamma, 0.026, TimeStep::Cfl(0.45));
            config.output_every = 200;
            let label = "mach10-column".to_string();
            Ok((mesh, config, setup.boundary_conditions(), setup.initial_data(), label))
        }
        other => bail!("unknown preset `{other}` (expected shock-tube or mach10-column)"),
    }
}

/// Steps the solver to `t_end`, streaming one diagnostics row per step and
/// writing numbered snapshots (initial state, every `output.every`-th step,
/// final state). On a CFL violation the last valid state is still flushed
/// and the exit code is 2.
fn drive(solver: &mut Solver, out: &Path) -> Result<u8> {
    let mut diag = std::io::BufWriter::new(fs::File::create(out.join("diagnostics.csv"))?);
    writeln!(
        diag,
        "step,t,dt,total_mass,internal_energy,kinetic_energy,total_energy,\
         min_rho,min_e,max_dual_residual,boundary_mass_flux"
    )?;

    let every = solver.config().output_every;
    let t_end = solver.config().t_end;
    let policy = solver.config().time_step;
    let eps = 1e-12 * t_end.abs().max(1.0);
    let initial_mass: f64 = total_mass(solver);
    let mut boundary_loss = 0.0f64;
    let mut snapshots = 0usize;

    let flush_snapshot = |solver: &Solver, snapshots: &mut usize| -> Result<PathBuf> {
        let path = out.join(format!("snapshot_{:04}.vtk", *snapshots));
        vtk::write_snapshot(&path, solver.mesh(), solver.state())?;
        *snapshots += 1;
        Ok(path)
    };

    flush_snapshot(solver, &mut snapshots)?;
    let mut last_written = Some(solver.state().step);

    let clock = Instant::now();
    loop {
        let t = solver.state().t;
        if t >= t_end - eps {
            break;
        }
        let dt = match policy {
            TimeStep::Fixed(dt) => dt,
            TimeStep::Cfl(cfl) => solver.stable_dt(cfl),
        }
        .min(t_end - t);
        match solver.step(dt) {
            Ok(d) => {
                writeln!(
                    diag,
                    "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                    d.step,
                    d.t,
                    d.dt,
                    d.total_mass,
                    d.internal_energy,
                    d.kinetic_energy,
                    d.total_energy,
                    d.min_rho,
                    d.min_e,
                    d.max_dual_residual,
                    d.boundary_mass_flux
                )?;
                boundary_loss += d.dt * d.boundary_mass_flux;
                if every > 0 && d.step % every == 0 {
                    flush_snapshot(solver, &mut snapshots)?;
                    last_written = Some(d.step);
                }
            }
            Err(e @ SolverError::CflViolation { .. }) => {
                diag.flush()?;
                let path = flush_snapshot(solver, &mut snapshots)?;
                eprintln!("error: {e}");
                eprintln!(
                    "aborted at step {} (t={:.6e}); last valid state flushed to {}",
                    solver.state().step,
                    solver.state().t,
                    path.display()
                );
                return Ok(EXIT_CFL);
            }
            Err(e) => return Err(e.into()),
        }
    }
    if last_written != Some(solver.state().step) {
        flush_snapshot(solver, &mut snapshots)?;
    }
    diag.flush()?;

    let drift = (total_mass(solver) - initial_mass + boundary_loss) / initial_mass;
    println!(
        "completed {} steps to t={:.6e} in {:.1}s; {} snapshots; flux-accounted mass drift {:.3e}",
        solver.state().step,
        solver.state().t,
        clock.elapsed().as_secs_f64(),
        snapshots,
        drift
    );
    Ok(0)
}

fn total_mass(solver: &Solver) -> f64 {
    let mesh = solver.mesh();
    let rho = &solver.state().rho;
    (0..mesh.n_cells()).map(|c| mesh.cell_volume(c) * rho[c]).sum()
}

fn cmd_convergence(args: ConvergenceArgs) -> Result<u8> {
    let kind = parse_tube_kind(&args.kind)?;
    if args.nmin < 1 || args.nmax < args.nmin {
        bail!("--nmin/--nmax must satisfy 1 <= nmin <= nmax");
    }
    let scheme = FaceScheme::parse(&args.scheme)
        .ok_or_else(|| anyhow!("unknown scheme `{}` (expected upwind, centered or muscl)", args.scheme))?;
    let mut params = StudyParams::new(kind, args.nmin..=args.nmax);
    params.scheme = scheme;
    if scheme == FaceScheme::Upwind {
        params.nu = 0.0;
    }
    println!(
        "refinement study: {} tube, n={}..={}, {} faces, nu={:.4}",
        kind.name(),
        args.nmin,
        args.nmax,
        scheme.name(),
        params.nu
    );
    let clock = Instant::now();
    let result = match shock_tube_study(&params) {
        Ok(r) => r,
        Err(VerifyError::Solver(e @ SolverError::CflViolation { .. })) => {
            eprintln!("error: {e}");
            return Ok(EXIT_CFL);
        }
        Err(e) => return Err(e.into()),
    };
    fs::create_dir_all(&args.out)?;
    let path = args.out.join(format!("convergence_{}.csv", kind.name()));
    fs::write(&path, result.csv())?;

    for (ti, &t) in result.times.iter().enumerate() {
        println!("errors at t={t:.4e}:");
        let orders = result.orders_at(ti);
        for (li, level) in result.levels.iter().enumerate() {
            let r = &level.reports[ti];
            let fmt = |o: Option<f64>| o.map_or("    -".to_string(), |v| format!("{v:5.2}"));
            let tail = if li == 0 {
                String::new()
            } else {
                let o = &orders[li - 1];
                format!("   orders p={} rho={} u={}", fmt(o.p), fmt(o.rho), fmt(o.u))
            };
            println!(
                "  n={} h={:.4e}  e_p={:.4e} e_rho={:.4e} e_u={:.4e}{}",
                level.n, r.h, r.p.value, r.rho.value, r.u.value, tail
            );
        }
    }
    println!("wrote {} in {:.1}s", path.display(), clock.elapsed().as_secs_f64());
    Ok(0)
}

fn parse_grid_kind(s: &str) -> Result<CellKind> {
    Ok(match s {
        "tri" => CellKind::Triangle,
        "quad" => CellKind::Quadrangle,
        "tet" => CellKind::Tetrahedron,
        "hex" => CellKind::Hexahedron,
        "prism" => CellKind::Prism,
        "pyramid" => CellKind::Pyramid,
        other => bail!("unknown cell kind `{other}` (expected tri, quad, tet, hex, prism or pyramid)"),
    })
}

fn cmd_lw_check(args: LwCheckArgs) -> Result<u8> {
    if args.levels < 2 {
        bail!("--levels must be at least 2");
    }
    let kind = parse_grid_kind(&args.kind)?;
    let is_3d = matches!(
        kind,
        CellKind::Tetrahedron | CellKind::Hexahedron | CellKind::Prism | CellKind::Pyramid
    );
    let max_levels = if is_3d { 4 } else { 7 };
    if args.levels > max_levels {
        bail!("--levels for {} grids is capped at {max_levels}", args.kind);
    }
    let (n0, center, radius) = if is_3d {
        (6u32, Vec3::new(0.5, 0.5, 0.5), 0.25)
    } else {
        (8u32, Vec3::new(0.5, 0.5, 0.0), 0.3)
    };
    let t_end = 0.5;
    let phi = TestFunction::new(center, radius, 0.4);
    let fields = if args.constant {
        FlowFields::constant(1.3, Vec3::new(0.7, -0.4, if is_3d { 0.5 } else { 0.0 }))
    } else {
        manufactured_fields(is_3d)
    };
    println!(
        "weak-consistency check: {} grid, {} fields, {} levels",
        args.kind,
        if args.constant { "constant" } else { "smooth" },
        args.levels
    );
    println!("{:>6} {:>12} {:>12} {:>14} {:>8}", "n", "h", "dt", "residual", "ratio");
    let mut previous: Option<f64> = None;
    for level in 0..args.levels {
        let n = n0 << level;
        let mesh = if is_3d {
            unit_grid_3d(kind, n as usize, n as usize, n as usize, 1.0, 1.0, 1.0)?
        } else {
            unit_grid_2d(kind, n as usize, n as usize, 1.0, 1.0)?
        };
        let dt = 0.5 / f64::from(n);
        let report = lw_weak_residual(&mesh, &fields, &phi, t_end, dt)?;
        let ratio = previous.map_or("-".to_string(), |p| {
            format!("{:8.2}", p / report.max_residual)
        });
        println!(
            "{n:>6} {:>12.4e} {:>12.4e} {:>14.6e} {ratio:>8}",
            report.h, report.dt, report.max_residual
        );
        previous = Some(report.max_residual);
    }
    Ok(0)
}

/// Smooth divergence-bearing fields for the weak-consistency study.
fn manufactured_fields(is_3d: bool) -> FlowFields {
    let zfactor = if is_3d { 1.0 } else { 0.0 };
    FlowFields::new(
        move |x: Vec3, t: f64| {
            1.5 + 0.4 * (3.0 * x.x).sin() * (2.0 * x.y).cos() / (1.0 + 0.5 * t)
                + zfactor * 0.2 * (2.0 * x.z).sin()
        },
        move |x: Vec3, t: f64| {
            Vec3::new(
                0.6 + 0.25 * (3.0 * x.x).sin() * (3.0 * x.y + 0.5 * t).cos(),
                -0.3 + 0.25 * (3.0 * x.x + t).cos() * (2.0 * x.y).sin(),
                zfactor * 0.2 * (2.0 * x.z + t).cos(),
            )
        },
    )
}
