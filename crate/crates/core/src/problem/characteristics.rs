//! Exact smooth solutions of `phi_t + H(phi_x) = 0` by the method of characteristics.
//!
//! Along a characteristic `x = x0 + H'(u0) t` with `u0 = phi0'(x0)` the gradient is
//! constant and `phi = phi0(x0) + t (u0 H'(u0) - H(u0))`. Before gradients cross, the
//! foot map `x0 -> x` is increasing, so `x0` is found by safeguarded Newton.

use std::sync::Arc;

type F = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct Characteristics {
    pub phi0: F,
    pub dphi0: F,
    pub d2phi0: F,
    pub h: F,
    pub dh: F,
    pub d2h: F,
    /// Bound on `|H'(phi0')|`, used to bracket the foot point.
    pub speed: f64,
}

impl Characteristics {
    /// Foot of the characteristic through `(x, t)`.
    pub fn foot(&self, x: f64, t: f64) -> f64 {
        if t == 0.0 {
            return x;
        }
        let g = |x0: f64| x0 + (self.dh)((self.dphi0)(x0)) * t - x;
        let reach = self.speed * t.abs() * 1.000_001 + 1e-14;
        let (mut lo, mut hi) = (x - reach, x + reach);
        if g(lo) > 0.0 || g(hi) < 0.0 {
            // The speed bound was too small; fall back to unguarded Newton.
            lo = f64::NEG_INFINITY;
            hi = f64::INFINITY;
        }
        let mut x0 = x - (self.dh)((self.dphi0)(x)) * t;
        if !(x0 > lo && x0 < hi) {
            x0 = 0.5 * (lo + hi);
        }
        for _ in 0..200 {
            let gx = g(x0);
            if gx == 0.0 {
                return x0;
            }
            if gx < 0.0 {
                lo = x0;
            } else {
                hi = x0;
            }
            let u0 = (self.dphi0)(x0);
            let dg = 1.0 + (self.d2h)(u0) * (self.d2phi0)(x0) * t;
            let mut next = x0 - gx / dg;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            if (next - x0).abs() <= 1e-16 * (1.0 + x0.abs()) {
                return next;
            }
            if (hi - lo).abs() <= 2e-16 * (1.0 + x0.abs()) {
                return next;
            }
            x0 = next;
        }
        x0
    }

    pub fn solution(&self, x: f64, t: f64) -> f64 {
        if t == 0.0 {
            return (self.phi0)(x);
        }
        let x0 = self.foot(x, t);
        let u0 = (self.dphi0)(x0);
        (self.phi0)(x0) + t * (u0 * (self.dh)(u0) - (self.h)(u0))
    }
}
