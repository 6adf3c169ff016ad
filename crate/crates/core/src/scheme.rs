//! Semi-discrete right-hand sides, time stepping and the 1D/2D drivers.

mod config;
mod flux;
mod rk;
mod solver1d;
mod solver2d;
mod timestep;

use crate::error::{HjError, Result};
use crate::grid::{Field1D, Field2D, Grid1D, Grid2D};
use crate::problem::Problem;

pub use config::{beta_max, default_beta, SchemeConfig};
pub use flux::{llf_flux_1d, llf_flux_2d, Flux2D};
pub use rk::ssp_rk_step;
pub use solver1d::{Solution1D, Solver1D};
pub use solver2d::{Solution2D, Solver2D};
pub use timestep::{
    gamma_for, gammas_2d, land_on, select_timestep_1d, select_timestep_2d, select_timestep_2d_with,
    CflRule2D,
};

/// Per-step record of the driver. Vectors hold one entry per dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDiagnostics {
    pub step: usize,
    /// Time at the end of the step.
    pub t: f64,
    pub dt: f64,
    /// Kernel parameters; zero when the step needed no kernel (flat Hamiltonian).
    pub gamma: Vec<f64>,
    /// Wave speeds used for `dt` and `gamma`.
    pub alpha: Vec<f64>,
    /// `[min, max]` of the one-sided derivatives seen during the step.
    pub derivative_range: Vec<[f64; 2]>,
    pub max_change: f64,
    /// Nodes where the filter value fell below 0.99, summed over stages and directions.
    pub filter_activations: usize,
    /// Inflow roots chosen by distance to the extrapolated guess.
    pub root_ties: usize,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Mesh {
    OneD(Grid1D),
    TwoD(Grid2D),
}

#[derive(Debug, Clone, PartialEq)]
pub enum FieldData {
    OneD(Field1D),
    TwoD(Field2D),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOutput {
    pub field: FieldData,
    pub diagnostics: Vec<StepDiagnostics>,
}

/// Advances `problem` from its initial data to `t_final` on `mesh`.
pub fn run_solver(
    problem: &Problem,
    mesh: &Mesh,
    cfg: &SchemeConfig,
    t_final: f64,
) -> Result<SolverOutput> {
    match (problem, mesh) {
        (Problem::OneD(p), Mesh::OneD(g)) => {
            let s = Solver1D::new(p, g, *cfg)?.solve(t_final)?;
            Ok(SolverOutput {
                field: FieldData::OneD(s.field),
                diagnostics: s.diagnostics,
            })
        }
        (Problem::TwoD(p), Mesh::TwoD(g)) => {
            let s = Solver2D::new(p, g, *cfg)?.solve(t_final)?;
            Ok(SolverOutput {
                field: FieldData::TwoD(s.field),
                diagnostics: s.diagnostics,
            })
        }
        _ => Err(HjError::InvalidConfig(format!(
            "mesh dimension does not match {}D problem `{}`",
            problem.dimension(),
            problem.name()
        ))),
    }
}

/// Running `[min, max]` of derivative values.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Range(pub [f64; 2]);

impl Range {
    pub fn empty() -> Self {
        Range([f64::INFINITY, f64::NEG_INFINITY])
    }

    pub fn add_all(&mut self, values: &[f64]) {
        for &v in values {
            self.0[0] = self.0[0].min(v);
            self.0[1] = self.0[1].max(v);
        }
    }

    pub fn merge(&mut self, o: Range) {
        self.0[0] = self.0[0].min(o.0[0]);
        self.0[1] = self.0[1].max(o.0[1]);
    }

    pub fn is_empty(&self) -> bool {
        self.0[0] > self.0[1]
    }

    /// Widened by 10% of its width on each side.
    pub fn widened(&self) -> [f64; 2] {
        let pad = 0.1 * (self.0[1] - self.0[0]);
        [self.0[0] - pad, self.0[1] + pad]
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.0[0] + self.0[1])
    }
}

pub(crate) fn check_domain(grid: &Grid1D, domain: (f64, f64), what: &str) -> Result<()> {
    let tol = 1e-12 * (domain.1 - domain.0).abs().max(1.0);
    if (grid.a() - domain.0).abs() > tol || (grid.b() - domain.1).abs() > tol {
        return Err(HjError::InvalidGrid(format!(
            "{what} grid spans [{}, {}] but the problem domain is [{}, {}]",
            grid.a(),
            grid.b(),
            domain.0,
            domain.1
        )));
    }
    Ok(())
}

/// One-sided differences of nodal data along a line.
pub(crate) fn difference_range(grid: &Grid1D, phi: &[f64], range: &mut Range) {
    for (i, w) in phi.windows(2).enumerate() {
        let d = (w[1] - w[0]) / grid.width(i + 1);
        range.add_all(&[d]);
    }
}

/// A stage that blew up aborts the step instead of surfacing as a boundary or quadrature error.
pub(crate) fn stage_guard(p: &[f64], step: usize, t: f64) -> Result<()> {
    if p.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(HjError::SolverAbort { step, t })
    }
}

/// Boundary data the solver built itself is only missing when it overflowed.
pub(crate) fn overflowed(e: HjError, step: usize, t: f64) -> HjError {
    match e {
        HjError::MissingBoundaryDerivatives(_) | HjError::NonFinite { .. } => {
            HjError::SolverAbort { step, t }
        }
        e => e,
    }
}

pub(crate) fn max_change(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}
