//! Local Lax-Friedrichs numerical Hamiltonians.

use crate::error::{HjError, Result};
use crate::problem::{Hamiltonian1D, Hamiltonian2D};

/// Which range of the other derivative enters each directional dissipation coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Flux2D {
    /// `alpha_x` maximizes over `I(u-, u+) x [C, D]`; monotone.
    #[default]
    Global,
    /// `alpha_x` maximizes over `I(u-, u+) x I(v-, v+)`. Less dissipative, not guaranteed monotone.
    NodeLocal,
}

impl Flux2D {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "global" => Ok(Self::Global),
            "local" | "node-local" | "node_local" => Ok(Self::NodeLocal),
            other => Err(HjError::InvalidConfig(format!(
                "unknown 2D flux `{other}` (global or local)"
            ))),
        }
    }
}

/// `H(avg) - alpha (u+ - u-) / 2`, `alpha = max |H'|` between `u-` and `u+`.
pub fn llf_flux_1d(h: &dyn Hamiltonian1D, um: f64, up: f64) -> f64 {
    let alpha = h.wave_speed(um.min(up), um.max(up));
    h.h(0.5 * (um + up)) - 0.5 * alpha * (up - um)
}

/// 2D flux at `(x, y)`. `u_range` and `v_range` are the global ranges `[A, B]`, `[C, D]`
/// of the one-sided derivatives.
pub fn llf_flux_2d(
    h: &dyn Hamiltonian2D,
    x: f64,
    y: f64,
    u: [f64; 2],
    v: [f64; 2],
    u_range: [f64; 2],
    v_range: [f64; 2],
) -> f64 {
    let iu = [u[0].min(u[1]), u[0].max(u[1])];
    let iv = [v[0].min(v[1]), v[0].max(v[1])];
    let ax = h.speeds(x, y, iu, v_range)[0];
    let ay = h.speeds(x, y, u_range, iv)[1];
    h.h(x, y, 0.5 * (u[0] + u[1]), 0.5 * (v[0] + v[1]))
        - 0.5 * ax * (u[1] - u[0])
        - 0.5 * ay * (v[1] - v[0])
}
