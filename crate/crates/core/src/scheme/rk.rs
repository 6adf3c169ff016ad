//! Strong-stability-preserving Runge-Kutta steps of order 1 to 3.

use crate::error::{HjError, Result};

/// Advances `phi` by `dt`. `rhs(state, stage_time)` is evaluated at `t`, `t + dt`
/// and (third order) `t + dt / 2`.
pub fn ssp_rk_step<F>(phi: &[f64], t: f64, dt: f64, order: usize, mut rhs: F) -> Result<Vec<f64>>
where
    F: FnMut(&[f64], f64) -> Result<Vec<f64>>,
{
    let euler = |base: &[f64], l: &[f64]| -> Vec<f64> {
        base.iter().zip(l).map(|(p, d)| p + dt * d).collect()
    };
    match order {
        1 => {
            let l0 = rhs(phi, t)?;
            Ok(euler(phi, &l0))
        }
        2 => {
            let l0 = rhs(phi, t)?;
            let p1 = euler(phi, &l0);
            let l1 = rhs(&p1, t + dt)?;
            Ok(phi
                .iter()
                .zip(p1.iter().zip(&l1))
                .map(|(p, (q, d))| 0.5 * p + 0.5 * (q + dt * d))
                .collect())
        }
        3 => {
            let l0 = rhs(phi, t)?;
            let p1 = euler(phi, &l0);
            let l1 = rhs(&p1, t + dt)?;
            let p2: Vec<f64> = phi
                .iter()
                .zip(p1.iter().zip(&l1))
                .map(|(p, (q, d))| 0.75 * p + 0.25 * (q + dt * d))
                .collect();
            let l2 = rhs(&p2, t + 0.5 * dt)?;
            Ok(phi
                .iter()
                .zip(p2.iter().zip(&l2))
                .map(|(p, (q, d))| p / 3.0 + 2.0 / 3.0 * (q + dt * d))
                .collect())
        }
        k => Err(HjError::UnsupportedOrder(k)),
    }
}
