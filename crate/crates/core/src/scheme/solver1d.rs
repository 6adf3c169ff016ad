use std::sync::Arc;
use std::time::Instant;

use super::flux::llf_flux_1d;
use super::rk::ssp_rk_step;
use super::timestep::{gamma_for, land_on, select_timestep_1d};
use super::{
    check_domain, difference_range, max_change, overflowed, stage_guard, Range, SchemeConfig,
    StepDiagnostics,
};
use crate::boundary::{side_derivatives_1d, SelectionReason, Side, SideOutcome};
use crate::error::{HjError, Result};
use crate::grid::{check_finite, Field1D, Grid1D, MIN_CELLS_QUADRATURE};
use crate::operators::{reconstruct_bounded, reconstruct_periodic, ReconstructOptions};
use crate::problem::{Boundary1D, Problem1D, SideCondition1D};
use crate::quadrature::LineRules;

#[derive(Debug, Clone, PartialEq)]
pub struct Solution1D {
    pub field: Field1D,
    pub diagnostics: Vec<StepDiagnostics>,
}

#[derive(Debug, Default)]
struct StageStats {
    filter_activations: usize,
    root_ties: usize,
    range: Option<Range>,
}

impl StageStats {
    fn range(&mut self) -> &mut Range {
        self.range.get_or_insert_with(Range::empty)
    }
}

/// Method-of-lines driver for a 1D problem on a fixed grid.
pub struct Solver1D<'a> {
    problem: &'a Problem1D,
    grid: &'a Grid1D,
    cfg: SchemeConfig,
    opts: ReconstructOptions,
    cache: Vec<(f64, Arc<LineRules>)>,
}

impl<'a> Solver1D<'a> {
    pub fn new(problem: &'a Problem1D, grid: &'a Grid1D, cfg: SchemeConfig) -> Result<Self> {
        cfg.validate()?;
        if cfg.dimension != 1 {
            return Err(HjError::InvalidConfig(
                "1D solver needs a 1D configuration".into(),
            ));
        }
        grid.ensure_fits(MIN_CELLS_QUADRATURE)?;
        check_domain(grid, problem.domain, "x")?;
        if let Some(a) = problem.alpha {
            if !(a > 0.0 && a.is_finite()) {
                return Err(HjError::InvalidConfig(format!(
                    "wave speed must be positive, got {a}"
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

    fn periodic(&self) -> bool {
        self.problem.boundary.is_periodic()
    }

    pub fn initial(&self) -> Vec<f64> {
        let mut phi: Vec<f64> = self
            .grid
            .nodes()
            .iter()
            .map(|&x| (self.problem.initial)(x))
            .collect();
        if self.periodic() {
            let n = phi.len() - 1;
            phi[n] = phi[0];
        }
        phi
    }

    fn rules(&mut self, gamma: f64) -> Result<Arc<LineRules>> {
        if let Some((_, r)) = self.cache.iter().find(|(g, _)| *g == gamma) {
            return Ok(r.clone());
        }
        let r = Arc::new(LineRules::new(self.grid, gamma, self.periodic())?);
        if self.cache.len() >= 4 {
            self.cache.remove(0);
        }
        self.cache.push((gamma, r.clone()));
        Ok(r)
    }

    /// Nodal `d phi / dt` at time `t` with kernel parameter `gamma`.
    pub fn rhs(&mut self, phi: &[f64], t: f64, gamma: f64) -> Result<Vec<f64>> {
        let rules = self.rules(gamma)?;
        self.rhs_with(&rules, phi, t, &mut StageStats::default())
    }

    fn side(
        &self,
        cond: &SideCondition1D,
        side: Side,
        t: f64,
        phi: &[f64],
        stats: &mut StageStats,
    ) -> Result<SideOutcome> {
        let out = side_derivatives_1d(
            cond,
            self.problem.hamiltonian.as_ref(),
            side,
            t,
            phi,
            self.grid,
            self.cfg.k,
        )?;
        if let Some(sel) = &out.selection {
            if sel.reason == SelectionReason::NearestToExtrapolation {
                stats.root_ties += 1;
                if self.cfg.log_root_ties {
                    eprintln!(
                        "root tie: {side:?} boundary, t = {t}, candidates {:?}, guess {}, chose {}",
                        sel.candidates, sel.guess, sel.root
                    );
                }
            }
        }
        Ok(out)
    }

    fn rhs_with(
        &self,
        rules: &LineRules,
        phi: &[f64],
        t: f64,
        stats: &mut StageStats,
    ) -> Result<Vec<f64>> {
        if phi.len() != self.grid.len() {
            return Err(HjError::LengthMismatch {
                expected: self.grid.len(),
                got: phi.len(),
            });
        }
        let pair = match &self.problem.boundary {
            Boundary1D::Periodic => reconstruct_periodic(rules, phi, &self.opts)?,
            Boundary1D::Sides { left, right } => {
                let lo = self.side(left, Side::Left, t, phi, stats)?;
                let hi = self.side(right, Side::Right, t, phi, stats)?;
                reconstruct_bounded(rules, phi, &self.opts, &lo.derivatives, &hi.derivatives)?
            }
        };
        stats.filter_activations += pair.filter_activations;
        stats.range().add_all(&pair.minus);
        stats.range().add_all(&pair.plus);
        let h = self.problem.hamiltonian.as_ref();
        let mut out: Vec<f64> = pair
            .minus
            .iter()
            .zip(&pair.plus)
            .map(|(&um, &up)| -llf_flux_1d(h, um, up))
            .collect();
        self.pin_dirichlet(&mut out, t);
        Ok(out)
    }

    /// Dirichlet nodes follow the data: `d phi / dt = f'(t)`.
    fn pin_dirichlet(&self, out: &mut [f64], t: f64) {
        if let Boundary1D::Sides { left, right } = &self.problem.boundary {
            let n = out.len() - 1;
            if let SideCondition1D::Dirichlet(f) = left {
                out[0] = f(t)[1];
            }
            if let SideCondition1D::Dirichlet(f) = right {
                out[n] = f(t)[1];
            }
        }
    }

    /// Resets Dirichlet nodes to the data after a full step, so the boundary value
    /// carries no time-integration error.
    fn set_dirichlet(&self, phi: &mut [f64], t: f64) {
        if let Boundary1D::Sides { left, right } = &self.problem.boundary {
            let n = phi.len() - 1;
            if let SideCondition1D::Dirichlet(f) = left {
                phi[0] = f(t)[0];
            }
            if let SideCondition1D::Dirichlet(f) = right {
                phi[n] = f(t)[0];
            }
        }
    }

    /// Right-hand side when `H'` vanishes on the whole derivative range: `H` is constant there.
    fn rhs_flat(&self, phi: &[f64], t: f64, u: f64) -> Vec<f64> {
        let mut out = vec![-self.problem.hamiltonian.h(u); phi.len()];
        self.pin_dirichlet(&mut out, t);
        out
    }

    pub fn solve(&mut self, t_final: f64) -> Result<Solution1D> {
        if !(t_final >= 0.0 && t_final.is_finite()) {
            return Err(HjError::InvalidConfig(format!(
                "final time must be non-negative, got {t_final}"
            )));
        }
        let mut phi = self.initial();
        check_finite(&phi)?;
        let mut diagnostics = Vec::new();
        let mut t = 0.0;
        let spacing = self.grid.mean_width();
        let mut range = Range::empty();
        difference_range(self.grid, &phi, &mut range);
        let h = self.problem.hamiltonian.clone();
        let k = self.cfg.k;
        let (beta, cfl) = (self.cfg.beta, self.cfg.cfl);
        let mut step = 0;
        while t < t_final {
            let start = Instant::now();
            let alpha = match self.problem.alpha {
                Some(a) => a,
                None => {
                    let [lo, hi] = range.widened();
                    h.wave_speed(lo, hi)
                }
            };
            let mut stats = StageStats::default();
            let (dt, gamma, next) = if alpha > 1e-14 {
                let (dt_nominal, _) = select_timestep_1d(cfl, beta, spacing, alpha)?;
                let (dt, _) = land_on(t, dt_nominal, t_final);
                let gamma = gamma_for(beta, alpha, dt);
                let rules = self.rules(gamma)?;
                let next = ssp_rk_step(&phi, t, dt, k, |p, ts| {
                    stage_guard(p, step + 1, ts)?;
                    self.rhs_with(&rules, p, ts, &mut stats)
                        .map_err(|e| overflowed(e, step + 1, ts))
                })?;
                (dt, gamma, next)
            } else {
                let dt = t_final - t;
                let u = range.mid();
                let next = ssp_rk_step(&phi, t, dt, k, |p, ts| Ok(self.rhs_flat(p, ts, u)))?;
                (dt, 0.0, next)
            };
            step += 1;
            let (_, last) = land_on(t, dt, t_final);
            let t_next = if last { t_final } else { t + dt };
            if next.iter().any(|v| !v.is_finite()) {
                return Err(HjError::SolverAbort { step, t: t_next });
            }
            let mut next = next;
            self.set_dirichlet(&mut next, t_next);
            if self.periodic() {
                let n = next.len() - 1;
                next[n] = next[0];
            }
            if let Some(r) = stats.range {
                if !r.is_empty() {
                    range = r;
                }
            }
            diagnostics.push(StepDiagnostics {
                step,
                t: t_next,
                dt,
                gamma: vec![gamma],
                alpha: vec![alpha],
                derivative_range: vec![range.0],
                max_change: max_change(&phi, &next),
                filter_activations: stats.filter_activations,
                root_ties: stats.root_ties,
                wall_seconds: start.elapsed().as_secs_f64(),
            });
            phi = next;
            t = t_next;
        }
        Ok(Solution1D {
            field: Field1D::new(self.grid, phi, t)?,
            diagnostics,
        })
    }
}
