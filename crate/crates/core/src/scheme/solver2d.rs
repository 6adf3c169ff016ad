use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use super::flux::{llf_flux_2d, Flux2D};
use super::rk::ssp_rk_step;
use super::timestep::{gammas_2d, land_on, select_timestep_2d_with};
use super::{
    check_domain, difference_range, max_change, overflowed, stage_guard, Range, SchemeConfig,
    StepDiagnostics,
};
use crate::boundary::{
    derivative_guess, extrapolate_derivatives, ilw_dirichlet_2d, ilw_neumann_2d, Edge,
    EdgeGeometry, SelectionReason,
};
use crate::error::{HjError, Result};
use crate::grid::{check_finite, Field2D, Grid1D, Grid2D, MIN_CELLS_QUADRATURE};
use crate::operators::{
    reconstruct, BoundaryDerivatives, DerivativePair, LineBoundary, ReconstructOptions,
};
use crate::problem::{AxisBoundary, EdgeCondition, Problem2D};
use crate::quadrature::LineRules;

#[derive(Debug, Clone, PartialEq)]
pub struct Solution2D {
    pub field: Field2D,
    pub diagnostics: Vec<StepDiagnostics>,
}

#[derive(Debug)]
struct StageStats {
    filter_activations: usize,
    root_ties: usize,
    range: [Range; 2],
    seen: bool,
}

impl Default for StageStats {
    fn default() -> Self {
        Self {
            filter_activations: 0,
            root_ties: 0,
            range: [Range::empty(), Range::empty()],
            seen: false,
        }
    }
}

/// Dimension-by-dimension driver for a 2D problem on a tensor grid.
///
/// Rows (`x`-lines) and columns (`y`-lines) are reconstructed in parallel.
pub struct Solver2D<'a> {
    problem: &'a Problem2D,
    grid: &'a Grid2D,
    cfg: SchemeConfig,
    opts: ReconstructOptions,
    cache: Vec<([f64; 2], Arc<[LineRules; 2]>)>,
}

/// What the edges of one axis need.
struct AxisSetup<'g> {
    boundary: &'g AxisBoundary,
    normal: &'g Grid1D,
    tangent: &'g Grid1D,
    tangent_periodic: bool,
    edges: [Edge; 2],
}

impl<'a> Solver2D<'a> {
    pub fn new(problem: &'a Problem2D, grid: &'a Grid2D, cfg: SchemeConfig) -> Result<Self> {
        cfg.validate()?;
        if cfg.dimension != 2 {
            return Err(HjError::InvalidConfig(
                "2D solver needs a 2D configuration".into(),
            ));
        }
        grid.x.ensure_fits(MIN_CELLS_QUADRATURE)?;
        grid.y.ensure_fits(MIN_CELLS_QUADRATURE)?;
        check_domain(&grid.x, problem.domain_x, "x")?;
        check_domain(&grid.y, problem.domain_y, "y")?;
        if let Some(a) = problem.alpha {
            if !(a.iter().all(|v| *v >= 0.0 && v.is_finite()) && a[0].max(a[1]) > 0.0) {
                return Err(HjError::InvalidConfig(format!(
                    "wave speeds must be non-negative and not both zero, got {a:?}"
                )));
            }
        }
        Ok(Self {
            problem,
            grid,
            opts: cfg.reconstruct_options(),
            cfg,
            cache: Vec::new(),
        })
    }

    pub fn initial(&self) -> Vec<f64> {
        let (nx1, ny1) = self.grid.shape();
        let mut phi = vec![0.0; nx1 * ny1];
        for j in 0..ny1 {
            for i in 0..nx1 {
                phi[j * nx1 + i] =
                    (self.problem.initial)(self.grid.x.nodes()[i], self.grid.y.nodes()[j]);
            }
        }
        self.wrap(&mut phi);
        phi
    }

    /// Copies the first row/column onto the duplicated last one on periodic axes.
    fn wrap(&self, phi: &mut [f64]) {
        let (nx1, ny1) = self.grid.shape();
        if self.problem.boundary_x.is_periodic() {
            for j in 0..ny1 {
                phi[j * nx1 + nx1 - 1] = phi[j * nx1];
            }
        }
        if self.problem.boundary_y.is_periodic() {
            for i in 0..nx1 {
                phi[(ny1 - 1) * nx1 + i] = phi[i];
            }
        }
    }

    fn rules(&mut self, gamma: [f64; 2]) -> Result<Arc<[LineRules; 2]>> {
        if let Some((_, r)) = self.cache.iter().find(|(g, _)| *g == gamma) {
            return Ok(r.clone());
        }
        let r = Arc::new([
            LineRules::new(
                &self.grid.x,
                gamma[0],
                self.problem.boundary_x.is_periodic(),
            )?,
            LineRules::new(
                &self.grid.y,
                gamma[1],
                self.problem.boundary_y.is_periodic(),
            )?,
        ]);
        if self.cache.len() >= 4 {
            self.cache.remove(0);
        }
        self.cache.push((gamma, r.clone()));
        Ok(r)
    }

    /// Nodal `d phi / dt` at time `t` with kernel parameters `[gamma_x, gamma_y]`.
    pub fn rhs(&mut self, phi: &[f64], t: f64, gamma: [f64; 2]) -> Result<Vec<f64>> {
        let rules = self.rules(gamma)?;
        self.rhs_with(&rules, phi, t, &mut StageStats::default())
    }

    fn axis(&self, x_axis: bool) -> AxisSetup<'_> {
        if x_axis {
            AxisSetup {
                boundary: &self.problem.boundary_x,
                normal: &self.grid.x,
                tangent: &self.grid.y,
                tangent_periodic: self.problem.boundary_y.is_periodic(),
                edges: [Edge::Left, Edge::Right],
            }
        } else {
            AxisSetup {
                boundary: &self.problem.boundary_y,
                normal: &self.grid.y,
                tangent: &self.grid.x,
                tangent_periodic: self.problem.boundary_x.is_periodic(),
                edges: [Edge::Bottom, Edge::Top],
            }
        }
    }

    fn edge_derivatives(
        &self,
        setup: &AxisSetup,
        cond: &EdgeCondition,
        edge: Edge,
        lines: &[&[f64]],
        t: f64,
        stats: &mut StageStats,
    ) -> Result<Vec<BoundaryDerivatives>> {
        let side = edge.side();
        let normal_coord = match side {
            crate::boundary::Side::Left => setup.normal.a(),
            crate::boundary::Side::Right => setup.normal.b(),
        };
        let geom = EdgeGeometry {
            edge,
            normal_coord,
            tangent: setup.tangent.nodes(),
            tangent_periodic: setup.tangent_periodic,
        };
        let h = self.problem.hamiltonian.as_ref();
        match cond {
            EdgeCondition::Outflow => lines
                .iter()
                .map(|l| extrapolate_derivatives(l, setup.normal, side, self.cfg.k))
                .collect(),
            EdgeCondition::Dirichlet(data) => {
                let guesses = lines
                    .iter()
                    .map(|l| derivative_guess(l, setup.normal, side))
                    .collect::<Result<Vec<f64>>>()?;
                let out = ilw_dirichlet_2d(h, &geom, data, t, &guesses)?;
                let mut ders = Vec::with_capacity(out.len());
                for (j, (d, sel)) in out.into_iter().enumerate() {
                    if sel.reason == SelectionReason::NearestToExtrapolation {
                        stats.root_ties += 1;
                        if self.cfg.log_root_ties {
                            eprintln!(
                                "root tie: {edge:?} edge node {j}, t = {t}, candidates {:?}, guess {}, chose {}",
                                sel.candidates, sel.guess, sel.root
                            );
                        }
                    }
                    ders.push(d);
                }
                Ok(ders)
            }
            EdgeCondition::Neumann(data) => {
                let edge_phi: Vec<f64> = lines
                    .iter()
                    .map(|l| match side {
                        crate::boundary::Side::Left => l[0],
                        crate::boundary::Side::Right => l[l.len() - 1],
                    })
                    .collect();
                ilw_neumann_2d(h, &geom, data, t, &edge_phi)
            }
        }
    }

    fn reconstruct_axis(
        &self,
        x_axis: bool,
        rules: &LineRules,
        lines: &[&[f64]],
        t: f64,
        stats: &mut StageStats,
    ) -> Result<Vec<DerivativePair>> {
        let setup = self.axis(x_axis);
        let bounds = match setup.boundary {
            AxisBoundary::Periodic => None,
            AxisBoundary::Sides { lo, hi } => Some((
                self.edge_derivatives(&setup, lo, setup.edges[0], lines, t, stats)?,
                self.edge_derivatives(&setup, hi, setup.edges[1], lines, t, stats)?,
            )),
        };
        let opts = self.opts;
        lines
            .par_iter()
            .enumerate()
            .map(|(j, line)| {
                let b = match &bounds {
                    None => LineBoundary::Periodic,
                    Some((lo, hi)) => LineBoundary::Bounded {
                        left: lo[j],
                        right: hi[j],
                    },
                };
                reconstruct(rules, line, &opts, &b)
            })
            .collect()
    }

    fn rhs_with(
        &self,
        rules: &[LineRules; 2],
        phi: &[f64],
        t: f64,
        stats: &mut StageStats,
    ) -> Result<Vec<f64>> {
        let (nx1, ny1) = self.grid.shape();
        if phi.len() != nx1 * ny1 {
            return Err(HjError::LengthMismatch {
                expected: nx1 * ny1,
                got: phi.len(),
            });
        }
        let rows: Vec<&[f64]> = phi.chunks(nx1).collect();
        let cols_owned: Vec<Vec<f64>> = (0..nx1)
            .map(|i| (0..ny1).map(|j| phi[j * nx1 + i]).collect())
            .collect();
        let cols: Vec<&[f64]> = cols_owned.iter().map(|c| c.as_slice()).collect();

        let xp = self.reconstruct_axis(true, &rules[0], &rows, t, stats)?;
        let yp = self.reconstruct_axis(false, &rules[1], &cols, t, stats)?;

        let mut ur = Range::empty();
        let mut vr = Range::empty();
        for p in &xp {
            stats.filter_activations += p.filter_activations;
            ur.add_all(&p.minus);
            ur.add_all(&p.plus);
        }
        for p in &yp {
            stats.filter_activations += p.filter_activations;
            vr.add_all(&p.minus);
            vr.add_all(&p.plus);
        }
        stats.range[0].merge(ur);
        stats.range[1].merge(vr);
        stats.seen = true;

        let h = self.problem.hamiltonian.as_ref();
        let (xs, ys) = (self.grid.x.nodes(), self.grid.y.nodes());
        let flux = self.cfg.flux_2d;
        let mut out = vec![0.0; nx1 * ny1];
        out.par_chunks_mut(nx1).enumerate().for_each(|(j, row)| {
            for (i, r) in row.iter_mut().enumerate() {
                let u = [xp[j].minus[i], xp[j].plus[i]];
                let v = [yp[i].minus[j], yp[i].plus[j]];
                let (ru, rv) = match flux {
                    Flux2D::Global => (ur.0, vr.0),
                    Flux2D::NodeLocal => (
                        [u[0].min(u[1]), u[0].max(u[1])],
                        [v[0].min(v[1]), v[0].max(v[1])],
                    ),
                };
                *r = -llf_flux_2d(h, xs[i], ys[j], u, v, ru, rv);
            }
        });
        self.pin_dirichlet(&mut out, t);
        Ok(out)
    }

    /// Dirichlet edge nodes follow the data, `d phi / dt = f_t`.
    fn pin_dirichlet(&self, out: &mut [f64], t: f64) {
        self.dirichlet_nodes(out, t, 1);
    }

    /// Writes `d_t^order f` onto Dirichlet edge nodes. Where two Dirichlet edges
    /// meet, the `x` edge is applied last.
    fn dirichlet_nodes(&self, out: &mut [f64], t: f64, order: usize) {
        let (nx1, ny1) = self.grid.shape();
        let (xs, ys) = (self.grid.x.nodes(), self.grid.y.nodes());
        if let AxisBoundary::Sides { lo, hi } = &self.problem.boundary_y {
            for (cond, j) in [(lo, 0), (hi, ny1 - 1)] {
                if let EdgeCondition::Dirichlet(f) = cond {
                    for i in 0..nx1 {
                        out[j * nx1 + i] = f(xs[i], t).get(order, 0);
                    }
                }
            }
        }
        if let AxisBoundary::Sides { lo, hi } = &self.problem.boundary_x {
            for (cond, i) in [(lo, 0), (hi, nx1 - 1)] {
                if let EdgeCondition::Dirichlet(f) = cond {
                    for j in 0..ny1 {
                        out[j * nx1 + i] = f(ys[j], t).get(order, 0);
                    }
                }
            }
        }
    }

    fn rhs_flat(&self, phi: &[f64], t: f64, u: f64, v: f64) -> Vec<f64> {
        let (nx1, _) = self.grid.shape();
        let (xs, ys) = (self.grid.x.nodes(), self.grid.y.nodes());
        let h = self.problem.hamiltonian.as_ref();
        let mut out: Vec<f64> = (0..phi.len())
            .map(|n| -h.h(xs[n % nx1], ys[n / nx1], u, v))
            .collect();
        self.pin_dirichlet(&mut out, t);
        out
    }

    /// `[alpha_x, alpha_y]` over the box at every node (once if `H` is autonomous).
    fn lagged_speeds(&self, bu: [f64; 2], bv: [f64; 2]) -> [f64; 2] {
        let h = self.problem.hamiltonian.as_ref();
        if !h.spatially_varying() {
            return h.speeds(0.0, 0.0, bu, bv);
        }
        let (xs, ys) = (self.grid.x.nodes(), self.grid.y.nodes());
        ys.par_iter()
            .map(|&y| {
                xs.iter().fold([0.0f64; 2], |m, &x| {
                    let s = h.speeds(x, y, bu, bv);
                    [m[0].max(s[0]), m[1].max(s[1])]
                })
            })
            .reduce(|| [0.0; 2], |a, b| [a[0].max(b[0]), a[1].max(b[1])])
    }

    pub fn solve(&mut self, t_final: f64) -> Result<Solution2D> {
        if !(t_final >= 0.0 && t_final.is_finite()) {
            return Err(HjError::InvalidConfig(format!(
                "final time must be non-negative, got {t_final}"
            )));
        }
        let mut phi = self.initial();
        check_finite(&phi)?;
        let (nx1, ny1) = self.grid.shape();
        let mut range = [Range::empty(), Range::empty()];
        for row in phi.chunks(nx1) {
            difference_range(&self.grid.x, row, &mut range[0]);
        }
        for i in 0..nx1 {
            let col: Vec<f64> = (0..ny1).map(|j| phi[j * nx1 + i]).collect();
            difference_range(&self.grid.y, &col, &mut range[1]);
        }
        let spacing = [self.grid.x.mean_width(), self.grid.y.mean_width()];
        let (beta, cfl, k) = (self.cfg.beta, self.cfg.cfl, self.cfg.k);
        let mut diagnostics = Vec::new();
        let mut t = 0.0;
        let mut step = 0;
        while t < t_final {
            let start = Instant::now();
            let alpha = match self.problem.alpha {
                Some(a) => a,
                None => self.lagged_speeds(range[0].widened(), range[1].widened()),
            };
            let mut stats = StageStats::default();
            let (dt, gamma, next) = if alpha[0].max(alpha[1]) > 1e-14 {
                let (dt_nominal, _) =
                    select_timestep_2d_with(self.cfg.cfl_rule_2d, cfl, beta, spacing, alpha)?;
                let (dt, _) = land_on(t, dt_nominal, t_final);
                let gamma = gammas_2d(beta, alpha, dt);
                let rules = self.rules(gamma)?;
                let next = ssp_rk_step(&phi, t, dt, k, |p, ts| {
                    stage_guard(p, step + 1, ts)?;
                    self.rhs_with(&rules, p, ts, &mut stats)
                        .map_err(|e| overflowed(e, step + 1, ts))
                })?;
                (dt, gamma, next)
            } else {
                let dt = t_final - t;
                let (u, v) = (range[0].mid(), range[1].mid());
                let next = ssp_rk_step(&phi, t, dt, k, |p, ts| Ok(self.rhs_flat(p, ts, u, v)))?;
                (dt, [0.0; 2], next)
            };
            step += 1;
            let (_, last) = land_on(t, dt, t_final);
            let t_next = if last { t_final } else { t + dt };
            if next.iter().any(|v| !v.is_finite()) {
                return Err(HjError::SolverAbort { step, t: t_next });
            }
            let mut next = next;
            // Reset after the full step so the edge value carries no time-integration error.
            self.dirichlet_nodes(&mut next, t_next, 0);
            self.wrap(&mut next);
            if stats.seen && !stats.range[0].is_empty() && !stats.range[1].is_empty() {
                range = stats.range;
            }
            diagnostics.push(StepDiagnostics {
                step,
                t: t_next,
                dt,
                gamma: gamma.to_vec(),
                alpha: alpha.to_vec(),
                derivative_range: vec![range[0].0, range[1].0],
                max_change: max_change(&phi, &next),
                filter_activations: stats.filter_activations,
                root_ties: stats.root_ties,
                wall_seconds: start.elapsed().as_secs_f64(),
            });
            phi = next;
            t = t_next;
        }
        Ok(Solution2D {
            field: Field2D::new(self.grid, phi, t)?,
            diagnostics,
        })
    }
}
