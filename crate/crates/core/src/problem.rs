//! Hamilton-Jacobi problem definitions: Hamiltonians, initial and boundary data,
//! exact solutions where known.

mod builtin;
mod characteristics;
mod custom;

use std::fmt;
use std::sync::Arc;

use crate::error::{HjError, Result};

pub use builtin::{builtin_problem, BUILTIN_NAMES};
pub use characteristics::Characteristics;
pub use custom::{CustomSpec, SideSpec};

/// Samples used when a Hamiltonian has no analytic wave-speed bound.
pub const SPEED_SAMPLES: usize = 64;

/// Scalar Hamiltonian `H(u)` of a 1D problem.
pub trait Hamiltonian1D: Send + Sync {
    fn h(&self, u: f64) -> f64;
    fn dh(&self, u: f64) -> f64;
    fn d2h(&self, u: f64) -> f64;

    /// Upper bound of `|H'(u)|` over `[lo, hi]`.
    fn wave_speed(&self, lo: f64, hi: f64) -> f64 {
        sampled_max(|u| self.dh(u).abs(), lo, hi)
    }
}

/// Hamiltonian `H(x, y, u, v)` of a 2D problem, `u = phi_x`, `v = phi_y`.
pub trait Hamiltonian2D: Send + Sync {
    fn h(&self, x: f64, y: f64, u: f64, v: f64) -> f64;

    /// `[H_1, H_2]`, the partials in `u` and `v`.
    fn grad(&self, x: f64, y: f64, u: f64, v: f64) -> [f64; 2];

    /// `[H_11, H_12, H_22]`.
    fn hessian(&self, x: f64, y: f64, u: f64, v: f64) -> [f64; 3] {
        let hu = 1e-5 * (1.0 + u.abs());
        let hv = 1e-5 * (1.0 + v.abs());
        let gu = |d: f64| self.grad(x, y, u + d, v);
        let gv = |d: f64| self.grad(x, y, u, v + d);
        let (up, um) = (gu(hu), gu(-hu));
        let (vp, vm) = (gv(hv), gv(-hv));
        [
            (up[0] - um[0]) / (2.0 * hu),
            0.5 * ((up[1] - um[1]) / (2.0 * hu) + (vp[0] - vm[0]) / (2.0 * hv)),
            (vp[1] - vm[1]) / (2.0 * hv),
        ]
    }

    /// `[max |H_1|, max |H_2|]` over the box `u in [u_lo, u_hi]`, `v in [v_lo, v_hi]` at `(x, y)`.
    fn speeds(&self, x: f64, y: f64, u: [f64; 2], v: [f64; 2]) -> [f64; 2] {
        const S: usize = 9;
        let mut out = [0.0f64; 2];
        for a in 0..S {
            let uu = u[0] + (u[1] - u[0]) * a as f64 / (S - 1) as f64;
            for b in 0..S {
                let vv = v[0] + (v[1] - v[0]) * b as f64 / (S - 1) as f64;
                let g = self.grad(x, y, uu, vv);
                out[0] = out[0].max(g[0].abs());
                out[1] = out[1].max(g[1].abs());
            }
        }
        out
    }

    /// Whether `H` depends on `(x, y)`; boundary cascades need it not to.
    fn spatially_varying(&self) -> bool {
        false
    }
}

/// Maximum of `f` over `[lo, hi]` by dense sampling, endpoints included.
pub fn sampled_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    if lo == hi {
        return f(lo);
    }
    let mut m = f(lo).max(f(hi));
    for s in 1..SPEED_SAMPLES {
        m = m.max(f(lo + (hi - lo) * s as f64 / SPEED_SAMPLES as f64));
    }
    m
}

/// `[f, f', f'', f''']` of boundary data at time `t`.
pub type TimeData = Arc<dyn Fn(f64) -> [f64; 4] + Send + Sync>;

/// Mixed partials of edge data `f(s, t)`: `d[i][j] = ∂_t^i ∂_s^j f` for `i + j <= 3`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EdgePartials {
    pub d: [[f64; 4]; 4],
}

impl EdgePartials {
    /// `∂_t^i ∂_s^j f`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i][j]
    }
}

/// Edge data as a function of the tangential coordinate `s` and time.
pub type EdgeData = Arc<dyn Fn(f64, f64) -> EdgePartials + Send + Sync>;

/// Scalar field of one variable (initial data).
pub type Field1Fn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
/// Scalar field of two variables.
pub type Field2Fn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
/// Space-time field in 1D, `(x, t)`.
pub type Exact1Fn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
/// Space-time field in 2D, `(x, y, t)`.
pub type Exact2Fn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum SideCondition1D {
    /// `phi = f(t)`.
    Dirichlet(TimeData),
    /// `phi_x = g(t)`.
    Neumann(TimeData),
    /// Characteristics leave the domain; derivatives are extrapolated.
    Outflow,
}

impl fmt::Debug for SideCondition1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SideCondition1D::Dirichlet(_) => "Dirichlet",
            SideCondition1D::Neumann(_) => "Neumann",
            SideCondition1D::Outflow => "Outflow",
        })
    }
}

#[derive(Clone, Debug)]
pub enum Boundary1D {
    Periodic,
    Sides {
        left: SideCondition1D,
        right: SideCondition1D,
    },
}

impl Boundary1D {
    pub fn is_periodic(&self) -> bool {
        matches!(self, Boundary1D::Periodic)
    }
}

#[derive(Clone)]
pub enum EdgeCondition {
    /// `phi = f(s, t)` along the edge.
    Dirichlet(EdgeData),
    /// Outward-independent normal derivative `phi_n = g(s, t)` (`phi_x` or `phi_y`).
    Neumann(EdgeData),
    Outflow,
}

impl fmt::Debug for EdgeCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgeCondition::Dirichlet(_) => "Dirichlet",
            EdgeCondition::Neumann(_) => "Neumann",
            EdgeCondition::Outflow => "Outflow",
        })
    }
}

/// Boundary treatment along one axis of a rectangle.
#[derive(Clone, Debug)]
pub enum AxisBoundary {
    Periodic,
    /// `lo` is the left (x) or bottom (y) edge.
    Sides {
        lo: EdgeCondition,
        hi: EdgeCondition,
    },
}

impl AxisBoundary {
    pub fn is_periodic(&self) -> bool {
        matches!(self, AxisBoundary::Periodic)
    }
}

#[derive(Clone)]
pub struct Problem1D {
    pub name: String,
    pub domain: (f64, f64),
    pub hamiltonian: Arc<dyn Hamiltonian1D>,
    pub initial: Field1Fn,
    pub boundary: Boundary1D,
    pub t_final: f64,
    /// Global wave speed used for the time step; `None` means lagged derivative bounds.
    pub alpha: Option<f64>,
    pub exact: Option<Exact1Fn>,
    /// Whether WENO quadrature and the filter are on by default.
    pub needs_weno: bool,
}

impl fmt::Debug for Problem1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem1D")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("boundary", &self.boundary)
            .field("t_final", &self.t_final)
            .field("alpha", &self.alpha)
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

#[derive(Clone)]
pub struct Problem2D {
    pub name: String,
    pub domain_x: (f64, f64),
    pub domain_y: (f64, f64),
    pub hamiltonian: Arc<dyn Hamiltonian2D>,
    pub initial: Field2Fn,
    pub boundary_x: AxisBoundary,
    pub boundary_y: AxisBoundary,
    pub t_final: f64,
    /// `[alpha_x, alpha_y]`.
    pub alpha: Option<[f64; 2]>,
    pub exact: Option<Exact2Fn>,
    pub needs_weno: bool,
}

impl fmt::Debug for Problem2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem2D")
            .field("name", &self.name)
            .field("domain_x", &self.domain_x)
            .field("domain_y", &self.domain_y)
            .field("boundary_x", &self.boundary_x)
            .field("boundary_y", &self.boundary_y)
            .field("t_final", &self.t_final)
            .field("alpha", &self.alpha)
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

#[derive(Clone, Debug)]
pub enum Problem {
    OneD(Problem1D),
    TwoD(Problem2D),
}

impl Problem {
    pub fn name(&self) -> &str {
        match self {
            Problem::OneD(p) => &p.name,
            Problem::TwoD(p) => &p.name,
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Problem::OneD(_) => 1,
            Problem::TwoD(_) => 2,
        }
    }

    pub fn t_final(&self) -> f64 {
        match self {
            Problem::OneD(p) => p.t_final,
            Problem::TwoD(p) => p.t_final,
        }
    }

    pub fn needs_weno(&self) -> bool {
        match self {
            Problem::OneD(p) => p.needs_weno,
            Problem::TwoD(p) => p.needs_weno,
        }
    }

    pub fn has_exact(&self) -> bool {
        match self {
            Problem::OneD(p) => p.exact.is_some(),
            Problem::TwoD(p) => p.exact.is_some(),
        }
    }

    pub fn as_1d(&self) -> Result<&Problem1D> {
        match self {
            Problem::OneD(p) => Ok(p),
            Problem::TwoD(p) => Err(HjError::InvalidConfig(format!(
                "`{}` is a 2D problem",
                p.name
            ))),
        }
    }

    pub fn as_2d(&self) -> Result<&Problem2D> {
        match self {
            Problem::TwoD(p) => Ok(p),
            Problem::OneD(p) => Err(HjError::InvalidConfig(format!(
                "`{}` is a 1D problem",
                p.name
            ))),
        }
    }
}

/// `max |H'|` over the interval spanned by `lo` and `hi`.
pub fn wave_speed_1d(p: &Problem1D, lo: f64, hi: f64) -> f64 {
    let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    p.hamiltonian.wave_speed(lo, hi)
}
