//! Time step and kernel parameter selection.

use crate::error::{HjError, Result};

/// `dt = CFL h / alpha` and `gamma = beta / (alpha dt)`.
pub fn select_timestep_1d(cfl: f64, beta: f64, spacing: f64, alpha: f64) -> Result<(f64, f64)> {
    check_alpha(alpha)?;
    let dt = cfl * spacing / alpha;
    Ok((dt, gamma_for(beta, alpha, dt)))
}

/// How the two directional CFL ratios combine into one 2D time step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CflRule2D {
    /// `dt = CFL / max(alpha_x / dx, alpha_y / dy)`.
    Max,
    /// `dt = CFL / (alpha_x / dx + alpha_y / dy)`. For a diagonal wave on a square
    /// grid this gives the same `dt` as the 1D problem along the diagonal.
    #[default]
    Sum,
}

impl CflRule2D {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "max" => Ok(Self::Max),
            "sum" => Ok(Self::Sum),
            other => Err(HjError::InvalidConfig(format!(
                "unknown CFL rule `{other}` (max or sum)"
            ))),
        }
    }
}

/// `dt = CFL / max(alpha_x / dx, alpha_y / dy)`, `gamma_d = beta / (alpha_d dt)`.
pub fn select_timestep_2d(
    cfl: f64,
    beta: f64,
    spacing: [f64; 2],
    alpha: [f64; 2],
) -> Result<(f64, [f64; 2])> {
    select_timestep_2d_with(CflRule2D::Max, cfl, beta, spacing, alpha)
}

pub fn select_timestep_2d_with(
    rule: CflRule2D,
    cfl: f64,
    beta: f64,
    spacing: [f64; 2],
    alpha: [f64; 2],
) -> Result<(f64, [f64; 2])> {
    check_alpha(alpha[0].max(alpha[1]))?;
    let (rx, ry) = (alpha[0] / spacing[0], alpha[1] / spacing[1]);
    let dt = match rule {
        CflRule2D::Max => cfl / rx.max(ry),
        CflRule2D::Sum => cfl / (rx + ry),
    };
    Ok((dt, gammas_2d(beta, alpha, dt)))
}

pub fn gamma_for(beta: f64, alpha: f64, dt: f64) -> f64 {
    beta / (alpha * dt)
}

/// A direction with no wave speed borrows the other's, so both kernels stay finite.
pub fn gammas_2d(beta: f64, alpha: [f64; 2], dt: f64) -> [f64; 2] {
    let top = alpha[0].max(alpha[1]);
    let eff = |a: f64| if a > 1e-12 * top { a } else { top };
    [
        gamma_for(beta, eff(alpha[0]), dt),
        gamma_for(beta, eff(alpha[1]), dt),
    ]
}

/// Shortens `dt` so the step ends exactly on `t_final`; returns `(dt, is_last)`.
pub fn land_on(t: f64, dt: f64, t_final: f64) -> (f64, bool) {
    let rest = t_final - t;
    if dt >= rest * (1.0 - 1e-12) {
        (rest, true)
    } else {
        (dt, false)
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(HjError::InvalidConfig(format!(
            "wave speed must be positive, got {alpha}"
        )))
    }
}
