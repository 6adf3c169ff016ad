//! `hjconv`: run builtin or config-defined Hamilton-Jacobi problems, print error tables
//! and export solutions.
//!
//! Exit codes: 0 success, 1 output could not be written, 2 configuration error,
//! 3 solver abort.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use hjconv::expr::Expr;
use hjconv::output::{write_cell_diagnostics, write_convergence_csv, write_step_diagnostics};
use hjconv::study::{parse_mesh_list, parse_quadrature, parse_switch, Prepared};
use hjconv::{
    export_solution, parse_config, CflRule2D, ConvergenceRow, FieldData, Flux2D, HjError, Mesh,
    MeshKind, OutputFormat, ProblemSource, RunSpec, SolverOutput, BUILTIN_NAMES,
};

#[derive(Parser, Debug)]
#[command(
    name = "hjconv",
    version,
    about = "Kernel-based solver for Hamilton-Jacobi equations"
)]
struct Cli {
    /// Builtin problem name (see --list).
    #[arg(long)]
    problem: Option<String>,
    /// Key-value run file; flags given alongside override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scheme order, 1 to 3.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    cfl: Option<String>,
    /// Cells per direction, comma separated (e.g. 20,40,80).
    #[arg(long)]
    n: Option<String>,
    /// uniform or perturbed.
    #[arg(long)]
    mesh: Option<String>,
    #[arg(long)]
    perturb_rho: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Final time; expressions such as 0.5/pi^2 are accepted.
    #[arg(long)]
    tfinal: Option<String>,
    /// linear or weno.
    #[arg(long)]
    quadrature: Option<String>,
    /// on or off.
    #[arg(long)]
    filter: Option<String>,
    /// Solution file of the finest mesh.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or svg-lines.
    #[arg(long)]
    format: Option<String>,
    /// Per-step diagnostics CSV of the finest mesh; per-cell WENO data goes next to it
    /// with a `.cells.csv` suffix.
    #[arg(long)]
    diagnostics: Option<PathBuf>,
    /// Error table as CSV.
    #[arg(long)]
    table: Option<PathBuf>,
    /// 2D time step rule: sum or max.
    #[arg(long)]
    cfl_rule: Option<String>,
    /// 2D flux dissipation: global or local.
    #[arg(long)]
    flux_2d: Option<String>,
    /// Count inflow roots chosen by distance to the extrapolated guess.
    #[arg(long)]
    log_root_ties: bool,
    /// Print the builtin problem names and exit.
    #[arg(long)]
    list: bool,
}

enum Failure {
    Config(HjError),
    Solver(HjError),
    Output(HjError),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Output(_) => 1,
            Failure::Config(_) => 2,
            Failure::Solver(_) => 3,
        }
    }

    fn error(&self) -> &HjError {
        match self {
            Failure::Config(e) | Failure::Solver(e) | Failure::Output(e) => e,
        }
    }
}

fn number(s: &str) -> hjconv::Result<f64> {
    let v = Expr::parse(s, &[])?.eval(&[]);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(HjError::InvalidConfig(format!(
            "`{s}` is not a finite number"
        )))
    }
}

fn build_spec(cli: &Cli) -> hjconv::Result<RunSpec> {
    let mut spec = match (&cli.config, &cli.problem) {
        (Some(path), _) => parse_config(path)?,
        (None, Some(name)) => RunSpec::builtin(name),
        (None, None) => {
            return Err(HjError::InvalidConfig("give --problem or --config".into()));
        }
    };
    if let (Some(_), Some(name)) = (&cli.config, &cli.problem) {
        spec.problem = ProblemSource::Builtin(name.clone());
    }
    if let Some(k) = cli.k {
        spec.k = k;
    }
    if let Some(b) = &cli.beta {
        spec.beta = Some(number(b)?);
    }
    if let Some(c) = &cli.cfl {
        spec.cfl = number(c)?;
    }
    if let Some(n) = &cli.n {
        spec.meshes = parse_mesh_list(n)?;
    }
    if spec.meshes.is_empty() {
        spec.meshes = vec![40];
    }
    let (mut rho, mut seed, mut perturbed) = match spec.mesh {
        MeshKind::Uniform => (0.2, 0, false),
        MeshKind::Perturbed { rho, seed } => (rho, seed, true),
    };
    if let Some(m) = &cli.mesh {
        perturbed = match m.trim().to_ascii_lowercase().as_str() {
            "uniform" => false,
            "perturbed" => true,
            other => {
                return Err(HjError::InvalidConfig(format!(
                    "mesh must be uniform or perturbed, got `{other}`"
                )))
            }
        };
    }
    if let Some(r) = &cli.perturb_rho {
        rho = number(r)?;
        perturbed |= cli.mesh.is_none();
    }
    if let Some(s) = cli.seed {
        seed = s;
    }
    spec.mesh = if perturbed {
        MeshKind::Perturbed { rho, seed }
    } else {
        MeshKind::Uniform
    };
    if let Some(t) = &cli.tfinal {
        spec.t_final = Some(number(t)?);
    }
    if let Some(q) = &cli.quadrature {
        spec.quadrature = Some(parse_quadrature(q)?);
    }
    if let Some(f) = &cli.filter {
        spec.filter = Some(parse_switch(f)?);
    }
    if let Some(o) = &cli.out {
        spec.out = Some(o.clone());
    }
    if let Some(f) = &cli.format {
        spec.format = OutputFormat::parse(f)?;
    }
    if let Some(d) = &cli.diagnostics {
        spec.diagnostics = Some(d.clone());
    }
    if let Some(r) = &cli.cfl_rule {
        spec.cfl_rule_2d = CflRule2D::parse(r)?;
    }
    if let Some(f) = &cli.flux_2d {
        spec.flux_2d = Flux2D::parse(f)?;
    }
    spec.log_root_ties |= cli.log_root_ties;
    Ok(spec)
}

fn print_header(spec: &RunSpec, prepared: &Prepared) {
    let cfg = &prepared.config;
    let mesh = match spec.mesh {
        MeshKind::Uniform => "uniform".to_string(),
        MeshKind::Perturbed { rho, seed } => format!("perturbed rho={rho} seed={seed}"),
    };
    println!(
        "{}: k={} beta={} cfl={} T={} quadrature={:?} filter={} mesh={mesh}",
        prepared.problem.name(),
        cfg.k,
        cfg.beta,
        cfg.cfl,
        prepared.t_final,
        cfg.quadrature,
        if cfg.filter { "on" } else { "off" },
    );
}

fn print_table(rows: &[ConvergenceRow]) {
    println!(
        "{:>9}  {:>12}  {:>7}  {:>7}  {:>9}",
        "N", "error", "order", "steps", "wall_s"
    );
    for r in rows {
        let order = r
            .order
            .map(|o| format!("{o:.3}"))
            .unwrap_or_else(|| "--".into());
        println!(
            "{:>9}  {:>12.4e}  {:>7}  {:>7}  {:>9.3}",
            r.mesh_label(),
            r.error,
            order,
            r.steps,
            r.wall_seconds
        );
    }
}

fn max_abs(field: &FieldData) -> f64 {
    let v = match field {
        FieldData::OneD(f) => &f.values,
        FieldData::TwoD(f) => &f.values,
    };
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn write_with(
    path: &Path,
    f: impl FnOnce(&mut BufWriter<File>) -> hjconv::Result<()>,
) -> hjconv::Result<()> {
    let file = File::create(path).map_err(|e| HjError::Io(format!("{}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

fn write_outputs(
    spec: &RunSpec,
    prepared: &Prepared,
    mesh: &Mesh,
    out: &SolverOutput,
) -> Result<(), Failure> {
    if let Some(path) = &spec.out {
        export_solution(&out.field, mesh, spec.format, path).map_err(Failure::Output)?;
    }
    if let Some(path) = &spec.diagnostics {
        write_with(path, |w| write_step_diagnostics(&out.diagnostics, w))
            .map_err(Failure::Output)?;
        let cells = prepared
            .cell_diagnostics(mesh, out)
            .map_err(Failure::Output)?;
        let cell_path = path.with_extension("cells.csv");
        write_with(&cell_path, |w| write_cell_diagnostics(&cells, w)).map_err(Failure::Output)?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let spec = build_spec(cli).map_err(Failure::Config)?;
    let prepared = spec.prepare().map_err(Failure::Config)?;
    for w in &prepared.warnings {
        eprintln!("warning: {w}");
    }
    print_header(&spec, &prepared);
    let finest = *spec
        .meshes
        .iter()
        .max()
        .expect("mesh list is validated nonempty");
    let wants_field = spec.out.is_some() || spec.diagnostics.is_some();
    if prepared.problem.has_exact() {
        let rows = prepared
            .convergence(&spec.meshes)
            .map_err(Failure::Solver)?;
        print_table(&rows);
        if let Some(path) = &cli.table {
            write_with(path, |w| write_convergence_csv(&rows, w)).map_err(Failure::Output)?;
        }
        if wants_field {
            let (mesh, out) = prepared.run(finest).map_err(Failure::Solver)?;
            write_outputs(&spec, &prepared, &mesh, &out)?;
        }
    } else {
        if cli.table.is_some() {
            return Err(Failure::Config(HjError::MissingExactSolution(
                prepared.problem.name().to_string(),
            )));
        }
        println!(
            "{:>9}  {:>7}  {:>9}  {:>12}",
            "N", "steps", "wall_s", "max|phi|"
        );
        let mut last = None;
        for &n in &spec.meshes {
            let start = Instant::now();
            let (mesh, out) = prepared.run(n).map_err(Failure::Solver)?;
            let label = if prepared.problem.dimension() == 2 {
                format!("{n}x{n}")
            } else {
                n.to_string()
            };
            println!(
                "{label:>9}  {:>7}  {:>9.3}  {:>12.6}",
                out.diagnostics.len(),
                start.elapsed().as_secs_f64(),
                max_abs(&out.field)
            );
            if n == finest {
                last = Some((mesh, out));
            }
        }
        if let Some((mesh, out)) = last {
            write_outputs(&spec, &prepared, &mesh, &out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.list {
        for name in BUILTIN_NAMES {
            println!("{name}");
        }
        return ExitCode::SUCCESS;
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let kind = match f {
                Failure::Config(_) => "configuration error",
                Failure::Solver(_) => "solver aborted",
                Failure::Output(_) => "output error",
            };
            eprintln!("hjconv: {kind}: {}", f.error());
            ExitCode::from(f.code())
        }
    }
}
