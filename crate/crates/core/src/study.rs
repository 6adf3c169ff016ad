//! Run specifications, config files and convergence studies.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{HjError, Result};
use crate::expr::Expr;
use crate::grid::{Grid1D, Grid2D, MIN_CELLS_QUADRATURE};
use crate::problem::{builtin_problem, CustomSpec, Problem, SideSpec};
use crate::quadrature::{CellDiagnostics, LineRules, QuadratureMode};
use crate::scheme::{run_solver, CflRule2D, FieldData, Flux2D, Mesh, SchemeConfig, SolverOutput};

/// Where the problem definition comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSource {
    Builtin(String),
    Custom(Box<CustomSpec>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeshKind {
    Uniform,
    /// Interior nodes jittered by up to `rho` cell widths. In 2D the `y` axis uses `seed + 1`.
    Perturbed {
        rho: f64,
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    SvgLines,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "svg-lines" | "svg_lines" | "svg" => Ok(Self::SvgLines),
            other => Err(HjError::InvalidConfig(format!(
                "unknown format `{other}` (csv or svg-lines)"
            ))),
        }
    }
}

pub fn parse_quadrature(s: &str) -> Result<QuadratureMode> {
    match s.trim().to_ascii_lowercase().as_str() {
        "linear" => Ok(QuadratureMode::Linear),
        "weno" => Ok(QuadratureMode::Weno),
        other => Err(HjError::InvalidConfig(format!(
            "unknown quadrature `{other}` (linear or weno)"
        ))),
    }
}

pub fn parse_switch(s: &str) -> Result<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "on" | "true" | "yes" | "1" => Ok(true),
        "off" | "false" | "no" | "0" => Ok(false),
        other => Err(HjError::InvalidConfig(format!(
            "expected on or off, got `{other}`"
        ))),
    }
}

/// Parses a comma separated list of mesh sizes.
pub fn parse_mesh_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| HjError::InvalidConfig(format!("bad mesh size `{}`", p.trim())))
        })
        .collect()
}

/// Everything needed to run one problem on one or more meshes.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub problem: ProblemSource,
    pub k: usize,
    /// `None` picks the default for `k` and the dimension.
    pub beta: Option<f64>,
    pub cfl: f64,
    /// Cells per direction.
    pub meshes: Vec<usize>,
    pub mesh: MeshKind,
    /// `None` uses the problem's own final time.
    pub t_final: Option<f64>,
    /// `None` follows the problem (WENO only where it is needed).
    pub quadrature: Option<QuadratureMode>,
    pub filter: Option<bool>,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub diagnostics: Option<PathBuf>,
    pub cfl_rule_2d: CflRule2D,
    pub flux_2d: Flux2D,
    pub log_root_ties: bool,
}

impl RunSpec {
    pub fn new(problem: ProblemSource) -> Self {
        Self {
            problem,
            k: 3,
            beta: None,
            cfl: 0.5,
            meshes: Vec::new(),
            mesh: MeshKind::Uniform,
            t_final: None,
            quadrature: None,
            filter: None,
            out: None,
            format: OutputFormat::Csv,
            diagnostics: None,
            cfl_rule_2d: CflRule2D::default(),
            flux_2d: Flux2D::default(),
            log_root_ties: false,
        }
    }

    pub fn builtin(name: &str) -> Self {
        Self::new(ProblemSource::Builtin(name.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.meshes.is_empty() {
            return Err(HjError::InvalidConfig("mesh list is empty".into()));
        }
        if let Some(&n) = self.meshes.iter().find(|&&n| n < MIN_CELLS_QUADRATURE) {
            return Err(HjError::InvalidConfig(format!(
                "mesh size {n} is below the minimum of {MIN_CELLS_QUADRATURE} cells"
            )));
        }
        if let Some(t) = self.t_final {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(HjError::InvalidConfig(format!(
                    "final time must be non-negative, got {t}"
                )));
            }
        }
        if let MeshKind::Perturbed { rho, .. } = self.mesh {
            if !(0.0..0.5).contains(&rho) {
                return Err(HjError::InvalidConfig(format!(
                    "perturbation must lie in [0, 0.5), got {rho}"
                )));
            }
        }
        Ok(())
    }

    /// Builds the problem, the scheme configuration and the stability warnings.
    pub fn prepare(&self) -> Result<Prepared> {
        self.validate()?;
        let problem = match &self.problem {
            ProblemSource::Builtin(name) => builtin_problem(name)?,
            ProblemSource::Custom(c) => c.build()?,
        };
        let mut cfg = SchemeConfig::for_problem(&problem, self.k)?;
        if let Some(b) = self.beta {
            cfg.beta = b;
        }
        cfg.cfl = self.cfl;
        if let Some(q) = self.quadrature {
            cfg.quadrature = q;
        }
        if let Some(f) = self.filter {
            cfg.filter = f;
        }
        cfg.cfl_rule_2d = self.cfl_rule_2d;
        cfg.flux_2d = self.flux_2d;
        cfg.log_root_ties = self.log_root_ties;
        let warnings = cfg.validate()?;
        let t_final = self.t_final.unwrap_or(problem.t_final());
        Ok(Prepared {
            problem,
            config: cfg,
            t_final,
            mesh: self.mesh,
            warnings,
        })
    }
}

/// A validated run: problem, scheme settings and final time.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub problem: Problem,
    pub config: SchemeConfig,
    pub t_final: f64,
    pub mesh: MeshKind,
    pub warnings: Vec<String>,
}

impl Prepared {
    /// Grid with `n` cells per direction on the problem's domain.
    pub fn mesh_for(&self, n: usize) -> Result<Mesh> {
        let axis = |(a, b): (f64, f64), seed_offset: u64| match self.mesh {
            MeshKind::Uniform => Grid1D::uniform(a, b, n),
            MeshKind::Perturbed { rho, seed } => {
                Grid1D::perturbed(a, b, n, rho, seed.wrapping_add(seed_offset))
            }
        };
        Ok(match &self.problem {
            Problem::OneD(p) => Mesh::OneD(axis(p.domain, 0)?),
            Problem::TwoD(p) => Mesh::TwoD(Grid2D::new(axis(p.domain_x, 0)?, axis(p.domain_y, 1)?)),
        })
    }

    /// Solves on `n` cells per direction. Errors carry the mesh size.
    pub fn run(&self, n: usize) -> Result<(Mesh, SolverOutput)> {
        let annotate = |e: HjError| HjError::AtMesh {
            n,
            source: Box::new(e),
        };
        let mesh = self.mesh_for(n).map_err(annotate)?;
        let out = run_solver(&self.problem, &mesh, &self.config, self.t_final).map_err(annotate)?;
        Ok((mesh, out))
    }

    /// Largest nodal deviation from the exact solution at the field's time.
    pub fn max_error(&self, mesh: &Mesh, field: &FieldData) -> Result<f64> {
        let missing = || HjError::MissingExactSolution(self.problem.name().to_string());
        match (&self.problem, mesh, field) {
            (Problem::OneD(p), Mesh::OneD(g), FieldData::OneD(f)) => {
                let exact = p.exact.as_ref().ok_or_else(missing)?;
                Ok(g.nodes()
                    .iter()
                    .zip(&f.values)
                    .map(|(&x, &v)| (v - exact(x, f.time)).abs())
                    .fold(0.0, f64::max))
            }
            (Problem::TwoD(p), Mesh::TwoD(g), FieldData::TwoD(f)) => {
                let exact = p.exact.as_ref().ok_or_else(missing)?;
                let nx1 = g.x.len();
                Ok(f.values
                    .iter()
                    .enumerate()
                    .map(|(idx, &v)| {
                        (v - exact(g.x.nodes()[idx % nx1], g.y.nodes()[idx / nx1], f.time)).abs()
                    })
                    .fold(0.0, f64::max))
            }
            _ => Err(HjError::InvalidConfig(
                "field, mesh and problem dimensions differ".into(),
            )),
        }
    }

    /// WENO data of the left integrals of the final field, using the kernel of the last
    /// step. In 2D this is the `x` line through the middle row.
    pub fn cell_diagnostics(
        &self,
        mesh: &Mesh,
        out: &SolverOutput,
    ) -> Result<Vec<CellDiagnostics>> {
        let gamma = out
            .diagnostics
            .last()
            .and_then(|d| d.gamma.first().copied())
            .filter(|g| *g > 0.0)
            .unwrap_or(1.0);
        match (&self.problem, mesh, &out.field) {
            (Problem::OneD(p), Mesh::OneD(g), FieldData::OneD(f)) => {
                let rules = LineRules::new(g, gamma, p.boundary.is_periodic())?;
                Ok(rules.left_diagnostics(&f.values))
            }
            (Problem::TwoD(p), Mesh::TwoD(g), FieldData::TwoD(f)) => {
                let nx1 = g.x.len();
                let mid = g.y.len() / 2;
                let rules = LineRules::new(&g.x, gamma, p.boundary_x.is_periodic())?;
                Ok(rules.left_diagnostics(&f.values[mid * nx1..(mid + 1) * nx1]))
            }
            _ => Err(HjError::InvalidConfig(
                "field, mesh and problem dimensions differ".into(),
            )),
        }
    }

    /// One row per mesh size, in the order given. Meshes are solved concurrently.
    pub fn convergence(&self, meshes: &[usize]) -> Result<Vec<ConvergenceRow>> {
        if !self.problem.has_exact() {
            return Err(HjError::MissingExactSolution(
                self.problem.name().to_string(),
            ));
        }
        let results: Vec<Result<(usize, f64, f64, usize)>> = meshes
            .par_iter()
            .map(|&n| {
                let start = Instant::now();
                let (mesh, out) = self.run(n)?;
                let wall = start.elapsed().as_secs_f64();
                let err = self.max_error(&mesh, &out.field)?;
                Ok((n, err, wall, out.diagnostics.len()))
            })
            .collect();
        let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(meshes.len());
        for r in results {
            let (n, error, wall_seconds, steps) = r?;
            let order = rows
                .last()
                .and_then(|prev| observed_order(prev.error, error, prev.n, n));
            rows.push(ConvergenceRow {
                n,
                dimension: self.problem.dimension(),
                error,
                order,
                wall_seconds,
                steps,
            });
        }
        Ok(rows)
    }
}

/// One line of an error table.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    /// Cells per direction.
    pub n: usize,
    pub dimension: usize,
    pub error: f64,
    /// Empty on the first row and whenever an error is zero.
    pub order: Option<f64>,
    pub wall_seconds: f64,
    pub steps: usize,
}

impl ConvergenceRow {
    /// `N` in 1D, `NxN` in 2D.
    pub fn mesh_label(&self) -> String {
        if self.dimension == 2 {
            format!("{0}x{0}", self.n)
        } else {
            self.n.to_string()
        }
    }
}

/// `ln(e_prev / e) / ln(n / n_prev)`; `None` when either error is not positive.
pub fn observed_order(e_prev: f64, e: f64, n_prev: usize, n: usize) -> Option<f64> {
    if !(e_prev > 0.0 && e > 0.0 && e_prev.is_finite() && e.is_finite()) || n == n_prev {
        return None;
    }
    Some((e_prev / e).ln() / (n as f64 / n_prev as f64).ln())
}

pub fn run_convergence_study(spec: &RunSpec) -> Result<Vec<ConvergenceRow>> {
    spec.prepare()?.convergence(&spec.meshes)
}

const KEYS: &[&str] = &[
    "problem",
    "k",
    "beta",
    "cfl",
    "n",
    "mesh",
    "perturb_rho",
    "seed",
    "t",
    "tfinal",
    "quadrature",
    "filter",
    "out",
    "format",
    "diagnostics",
    "cfl_rule",
    "flux_2d",
    "log_root_ties",
    "name",
    "dimension",
    "hamiltonian",
    "initial",
    "domain",
    "domain_x",
    "domain_y",
    "left",
    "right",
    "bottom",
    "top",
    "boundary_x",
    "boundary_y",
    "exact",
    "alpha",
    "needs_weno",
];

const CUSTOM_KEYS: &[&str] = &[
    "dimension",
    "hamiltonian",
    "initial",
    "domain",
    "domain_x",
    "domain_y",
    "left",
    "right",
    "bottom",
    "top",
    "boundary_x",
    "boundary_y",
    "exact",
    "alpha",
    "needs_weno",
];

fn number(s: &str) -> Result<f64> {
    let v = Expr::parse(s, &[])?.eval(&[]);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(HjError::InvalidConfig(format!(
            "`{s}` is not a finite number"
        )))
    }
}

fn numbers(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(number).collect()
}

fn interval(s: &str) -> Result<(f64, f64)> {
    match numbers(s)?.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err(HjError::InvalidConfig(format!(
            "expected `a, b`, got `{s}`"
        ))),
    }
}

/// Reads a `key = value` run description; see [`parse_config_str`].
pub fn parse_config(path: &Path) -> Result<RunSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| HjError::Io(format!("{}: {e}", path.display())))?;
    parse_config_str(&text)
}

/// Parses one `key = value` pair per line. `#` starts a comment, keys are
/// case-insensitive (`N`/`n`, `T`/`tfinal`), unknown and repeated keys are rejected.
/// Numeric values may be expressions such as `0.5/pi^2`.
///
/// A file containing `hamiltonian` describes a custom problem; `problem` then only names it.
pub fn parse_config_str(text: &str) -> Result<RunSpec> {
    let mut pairs: Vec<(usize, String, String)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(HjError::ConfigParse {
                line: line_no,
                message: format!("expected `key = value`, got `{line}`"),
            });
        };
        let key = k.trim().to_ascii_lowercase().replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(HjError::ConfigParse {
                line: line_no,
                message: format!("unknown key `{}`", k.trim()),
            });
        }
        let canonical = if key == "tfinal" {
            "t".to_string()
        } else {
            key
        };
        if pairs.iter().any(|(_, seen, _)| *seen == canonical) {
            return Err(HjError::ConfigParse {
                line: line_no,
                message: format!("`{}` given twice", k.trim()),
            });
        }
        pairs.push((line_no, canonical, v.trim().to_string()));
    }

    let custom = pairs
        .iter()
        .any(|(_, k, _)| CUSTOM_KEYS.contains(&k.as_str()));
    let mut spec = RunSpec::builtin("");
    let mut cs = CustomSpec::default();
    let mut problem_name: Option<String> = None;
    let mut rho: Option<f64> = None;
    let mut seed: Option<u64> = None;
    let mut perturbed = false;

    for (line, key, value) in &pairs {
        let at = |e: HjError| HjError::ConfigParse {
            line: *line,
            message: e.to_string(),
        };
        let v = value.as_str();
        match key.as_str() {
            "problem" | "name" => problem_name = Some(v.to_string()),
            "k" => {
                spec.k = v.parse().map_err(|_| {
                    at(HjError::InvalidConfig(format!(
                        "k must be an integer, got `{v}`"
                    )))
                })?
            }
            "beta" => spec.beta = Some(number(v).map_err(at)?),
            "cfl" => spec.cfl = number(v).map_err(at)?,
            "n" => spec.meshes = parse_mesh_list(v).map_err(at)?,
            "mesh" => match v.to_ascii_lowercase().as_str() {
                "uniform" => perturbed = false,
                "perturbed" => perturbed = true,
                _ => {
                    return Err(at(HjError::InvalidConfig(format!(
                        "mesh must be uniform or perturbed, got `{v}`"
                    ))))
                }
            },
            "perturb_rho" => rho = Some(number(v).map_err(at)?),
            "seed" => {
                seed = Some(v.parse().map_err(|_| {
                    at(HjError::InvalidConfig(format!(
                        "seed must be an unsigned integer, got `{v}`"
                    )))
                })?)
            }
            "t" => spec.t_final = Some(number(v).map_err(at)?),
            "quadrature" => spec.quadrature = Some(parse_quadrature(v).map_err(at)?),
            "filter" => spec.filter = Some(parse_switch(v).map_err(at)?),
            "needs_weno" => cs.needs_weno = parse_switch(v).map_err(at)?,
            "cfl_rule" => spec.cfl_rule_2d = CflRule2D::parse(v).map_err(at)?,
            "flux_2d" => spec.flux_2d = Flux2D::parse(v).map_err(at)?,
            "log_root_ties" => spec.log_root_ties = parse_switch(v).map_err(at)?,
            "out" => spec.out = Some(PathBuf::from(v)),
            "format" => spec.format = OutputFormat::parse(v).map_err(at)?,
            "diagnostics" => spec.diagnostics = Some(PathBuf::from(v)),
            "dimension" => {
                cs.dimension = v.parse().map_err(|_| {
                    at(HjError::InvalidConfig(format!(
                        "dimension must be 1 or 2, got `{v}`"
                    )))
                })?
            }
            "hamiltonian" => cs.hamiltonian = v.to_string(),
            "initial" => cs.initial = v.to_string(),
            "exact" => cs.exact = Some(v.to_string()),
            "domain" => {
                let d = interval(v).map_err(at)?;
                cs.domain_x = d;
                cs.domain_y = d;
            }
            "domain_x" => cs.domain_x = interval(v).map_err(at)?,
            "domain_y" => cs.domain_y = interval(v).map_err(at)?,
            "alpha" => cs.alpha = Some(numbers(v).map_err(at)?),
            "left" => cs.left = SideSpec::parse(v).map_err(at)?,
            "right" => cs.right = SideSpec::parse(v).map_err(at)?,
            "bottom" => cs.bottom = SideSpec::parse(v).map_err(at)?,
            "top" => cs.top = SideSpec::parse(v).map_err(at)?,
            "boundary_x" => {
                let s = SideSpec::parse(v).map_err(at)?;
                cs.left = s.clone();
                cs.right = s;
            }
            "boundary_y" => {
                let s = SideSpec::parse(v).map_err(at)?;
                cs.bottom = s.clone();
                cs.top = s;
            }
            _ => unreachable!("key list checked above"),
        }
    }

    if perturbed || rho.is_some() {
        spec.mesh = MeshKind::Perturbed {
            rho: rho.unwrap_or(0.2),
            seed: seed.unwrap_or(0),
        };
    }
    if custom {
        if let Some(n) = problem_name {
            cs.name = n;
        }
        cs.t_final = spec.t_final.ok_or_else(|| {
            HjError::InvalidConfig("custom problem needs a final time `T`".into())
        })?;
        spec.problem = ProblemSource::Custom(Box::new(cs));
    } else {
        let name = problem_name
            .ok_or_else(|| HjError::InvalidConfig("config names no `problem`".into()))?;
        spec.problem = ProblemSource::Builtin(name);
    }
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_diagnostics_cover_every_cell() {
        let mut spec = RunSpec::builtin("burgers_1d");
        spec.meshes = vec![20];
        let p = spec.prepare().unwrap();
        let (mesh, out) = p.run(20).unwrap();
        let cells = p.cell_diagnostics(&mesh, &out).unwrap();
        assert!(!cells.is_empty() && cells.len() <= 20);
        assert!(cells.iter().all(|c| c.xi > 0.0 && c.xi <= 1.0));
        let mut spec = RunSpec::builtin("burgers_2d");
        spec.meshes = vec![12];
        let p = spec.prepare().unwrap();
        let (mesh, out) = p.run(12).unwrap();
        assert!(!p.cell_diagnostics(&mesh, &out).unwrap().is_empty());
    }

    #[test]
    fn minimal_config_fills_defaults() {
        let spec = parse_config_str("problem = burgers_1d\nN = 40\nT = 0.0506606\n").unwrap();
        assert_eq!(spec.problem, ProblemSource::Builtin("burgers_1d".into()));
        assert_eq!(spec.meshes, vec![40]);
        assert_eq!(spec.t_final, Some(0.0506606));
        let p = spec.prepare().unwrap();
        assert_eq!(p.config.k, 3);
        assert_eq!(p.config.beta, 1.2);
        assert_eq!(p.config.cfl, 0.5);
        assert_eq!(p.config.quadrature, QuadratureMode::Linear);
        assert!(!p.config.filter);
        assert!(p.warnings.is_empty());
    }

    #[test]
    fn malformed_line_cites_line_number() {
        let err = parse_config_str("problem = burgers_1d\n\n  this is not a pair\n").unwrap_err();
        assert!(matches!(err, HjError::ConfigParse { line: 3, .. }), "{err}");
    }

    #[test]
    fn unknown_and_repeated_keys_rejected() {
        let err = parse_config_str("problem = burgers_1d\ncolour = red\n").unwrap_err();
        assert!(matches!(err, HjError::ConfigParse { line: 2, .. }));
        let err = parse_config_str("T = 1\ntfinal = 2\nproblem = burgers_1d").unwrap_err();
        assert!(matches!(err, HjError::ConfigParse { line: 2, .. }));
    }

    #[test]
    fn bad_value_cites_line() {
        let err = parse_config_str("problem = burgers_1d\nk = three\n").unwrap_err();
        assert!(matches!(err, HjError::ConfigParse { line: 2, .. }));
        let err = parse_config_str("problem = burgers_1d\nquadrature = spline\n").unwrap_err();
        assert!(matches!(err, HjError::ConfigParse { line: 2, .. }));
    }

    #[test]
    fn expressions_and_comments() {
        let spec = parse_config_str(
            "# header\nproblem = linear_advection  # trailing\nT = 0.5/pi^2\nn = 20, 40,80\nmesh = perturbed\nseed = 7\n",
        )
        .unwrap();
        assert!((spec.t_final.unwrap() - 0.5 / (std::f64::consts::PI.powi(2))).abs() < 1e-15);
        assert_eq!(spec.meshes, vec![20, 40, 80]);
        assert_eq!(spec.mesh, MeshKind::Perturbed { rho: 0.2, seed: 7 });
    }

    #[test]
    fn beta_above_max_warns() {
        let mut spec = RunSpec::builtin("burgers_1d");
        spec.meshes = vec![40];
        spec.beta = Some(5.0);
        let p = spec.prepare().unwrap();
        assert_eq!(p.warnings.len(), 1);
    }

    #[test]
    fn invariants_named() {
        let spec = RunSpec::builtin("burgers_1d");
        assert!(spec.validate().unwrap_err().to_string().contains("empty"));
        let mut spec = RunSpec::builtin("burgers_1d");
        spec.meshes = vec![40, 3];
        assert!(spec.validate().unwrap_err().to_string().contains("minimum"));
    }

    #[test]
    fn custom_problem_from_config() {
        let spec = parse_config_str(
            "name = shifted\nhamiltonian = u\ninitial = sin(pi*x)\nexact = sin(pi*(x - t))\ndomain = -1, 1\nboundary_x = periodic\nT = 0.25\nalpha = 1\nn = 40, 80\n",
        )
        .unwrap();
        let rows = run_convergence_study(&spec).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[1].error < rows[0].error);
        assert!(rows[1].order.unwrap() > 2.5, "{rows:?}");
    }

    #[test]
    fn custom_needs_final_time() {
        let err = parse_config_str("hamiltonian = u\ninitial = x\nn = 10\n").unwrap_err();
        assert!(err.to_string().contains("final time"));
    }

    #[test]
    fn order_of_synthetic_sequences() {
        for k in 1..=5 {
            let ns = [20usize, 40, 80, 160, 300, 640];
            let e: Vec<f64> = ns.iter().map(|&n| 3.7 * (n as f64).powi(-k)).collect();
            for w in 1..ns.len() {
                let o = observed_order(e[w - 1], e[w], ns[w - 1], ns[w]).unwrap();
                assert!((o - k as f64).abs() < 1e-12, "{o}");
            }
        }
        assert_eq!(observed_order(0.0, 0.0, 10, 20), None);
    }

    #[test]
    fn zero_time_study_is_exact() {
        for name in ["linear_advection", "burgers_1d", "nonconvex_2d"] {
            let mut spec = RunSpec::builtin(name);
            spec.meshes = vec![20, 40];
            spec.t_final = Some(0.0);
            let rows = run_convergence_study(&spec).unwrap();
            assert!(rows.iter().all(|r| r.error <= 1e-14), "{name}: {rows:?}");
            assert!(rows[0].order.is_none());
        }
    }

    #[test]
    fn missing_exact_solution() {
        let mut spec = RunSpec::builtin("riemann_nonconvex_1d");
        spec.meshes = vec![20];
        assert!(matches!(
            run_convergence_study(&spec),
            Err(HjError::MissingExactSolution(_))
        ));
    }

    #[test]
    fn abort_is_annotated_with_mesh() {
        let spec = parse_config_str(
            "hamiltonian = u\ninitial = 1/x\ndomain = -1, 1\nboundary_x = periodic\nT = 0.1\nalpha = 1\nexact = 0\nn = 10\n",
        )
        .unwrap();
        let err = run_convergence_study(&spec).unwrap_err();
        assert!(matches!(err, HjError::AtMesh { n: 10, .. }), "{err}");
    }

    #[test]
    fn perturbed_2d_axes_differ() {
        let mut spec = RunSpec::builtin("burgers_2d");
        spec.meshes = vec![20];
        spec.mesh = MeshKind::Perturbed { rho: 0.2, seed: 3 };
        let p = spec.prepare().unwrap();
        let Mesh::TwoD(g) = p.mesh_for(20).unwrap() else {
            panic!()
        };
        assert_ne!(g.x.nodes(), g.y.nodes());
        assert_eq!(p.mesh_for(20).unwrap(), Mesh::TwoD(g));
    }
}
