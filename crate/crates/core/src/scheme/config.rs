//! Scheme parameters and their defaults.

use crate::error::{HjError, Result};
use crate::operators::{FilterOptions, ReconstructOptions, SigmaExponent};
use crate::problem::Problem;
use crate::quadrature::QuadratureMode;

use super::flux::Flux2D;
use super::timestep::CflRule2D;

const BETA_DEFAULT_1D: [f64; 3] = [2.0, 1.0, 1.2];
const BETA_MAX_1D: [f64; 3] = [2.0, 1.0, 1.243];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    /// Order of the partial sums and of the SSP Runge-Kutta method.
    pub k: usize,
    pub beta: f64,
    pub cfl: f64,
    pub quadrature: QuadratureMode,
    /// Nonlinear filter on the higher partial-sum terms (needs WENO quadrature).
    pub filter: bool,
    pub sigma_exponent: SigmaExponent,
    pub filter_d0: bool,
    pub dimension: usize,
    /// How `alpha_x / dx` and `alpha_y / dy` combine into the 2D time step.
    pub cfl_rule_2d: CflRule2D,
    pub flux_2d: Flux2D,
    /// Print a line to standard error whenever an inflow root is picked by distance to the guess.
    pub log_root_ties: bool,
}

impl SchemeConfig {
    /// Defaults for order `k`: tabulated `beta`, CFL 0.5, linear quadrature, no filter.
    pub fn new(k: usize, dimension: usize) -> Result<Self> {
        if !(1..=3).contains(&k) {
            return Err(HjError::UnsupportedOrder(k));
        }
        if !(1..=2).contains(&dimension) {
            return Err(HjError::InvalidConfig(format!(
                "dimension must be 1 or 2, got {dimension}"
            )));
        }
        Ok(Self {
            k,
            beta: default_beta(k, dimension),
            cfl: 0.5,
            quadrature: QuadratureMode::Linear,
            filter: false,
            sigma_exponent: SigmaExponent::PMinus2,
            filter_d0: true,
            dimension,
            cfl_rule_2d: CflRule2D::Sum,
            flux_2d: Flux2D::Global,
            log_root_ties: false,
        })
    }

    /// Defaults for a problem; WENO and the filter are switched on where the problem asks for them.
    pub fn for_problem(p: &Problem, k: usize) -> Result<Self> {
        let mut cfg = Self::new(k, p.dimension())?;
        if p.needs_weno() {
            cfg.quadrature = QuadratureMode::Weno;
            cfg.filter = true;
        }
        Ok(cfg)
    }

    /// Rejects unusable values; returns warnings for usable but questionable ones.
    pub fn validate(&self) -> Result<Vec<String>> {
        if !(1..=3).contains(&self.k) {
            return Err(HjError::UnsupportedOrder(self.k));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(HjError::InvalidConfig(format!(
                "beta must be positive, got {}",
                self.beta
            )));
        }
        if !(self.cfl > 0.0 && self.cfl.is_finite()) {
            return Err(HjError::InvalidConfig(format!(
                "CFL must be positive, got {}",
                self.cfl
            )));
        }
        let mut warnings = Vec::new();
        let max = beta_max(self.k, self.dimension);
        if self.beta > max {
            warnings.push(format!(
                "beta = {} exceeds the stability limit {max} for k = {} in {}D; the scheme may be unstable",
                self.beta, self.k, self.dimension
            ));
        }
        if self.filter && self.quadrature == QuadratureMode::Linear {
            warnings.push("the filter has no effect with linear quadrature".into());
        }
        Ok(warnings)
    }

    pub fn reconstruct_options(&self) -> ReconstructOptions {
        ReconstructOptions {
            k: self.k,
            mode: self.quadrature,
            filter: FilterOptions {
                enabled: self.filter,
                exponent: self.sigma_exponent,
                filter_d0: self.filter_d0,
            },
        }
    }
}

/// `beta` used when none is given: `(2, 1, 1.2)` in 1D, half in 2D.
pub fn default_beta(k: usize, dimension: usize) -> f64 {
    scale(BETA_DEFAULT_1D[k.clamp(1, 3) - 1], dimension)
}

/// Largest `beta` of unconditional stability: `(2, 1, 1.243)` in 1D, half in 2D.
pub fn beta_max(k: usize, dimension: usize) -> f64 {
    scale(BETA_MAX_1D[k.clamp(1, 3) - 1], dimension)
}

fn scale(b: f64, dimension: usize) -> f64 {
    if dimension == 2 {
        0.5 * b
    } else {
        b
    }
}
