//! The benchmark problems, addressable by name.

use std::f64::consts::PI;
use std::sync::Arc;

use super::{
    AxisBoundary, Boundary1D, Characteristics, Hamiltonian1D, Hamiltonian2D, Problem, Problem1D,
    Problem2D, SideCondition1D,
};
use crate::error::{HjError, Result};

pub const BUILTIN_NAMES: [&str; 9] = [
    "linear_advection",
    "burgers_1d",
    "nonconvex_1d",
    "riemann_nonconvex_1d",
    "burgers_2d",
    "nonconvex_2d",
    "riemann_nonconvex_2d",
    "control_2d",
    "surface_flat",
];

/// `max |sin|` over `[lo, hi]`.
fn max_abs_sin(lo: f64, hi: f64) -> f64 {
    if hi - lo >= PI {
        return 1.0;
    }
    // a peak of |sin| sits at pi/2 + m pi
    let m = ((lo - PI / 2.0) / PI).ceil();
    if PI / 2.0 + m * PI <= hi {
        return 1.0;
    }
    lo.sin().abs().max(hi.sin().abs())
}

fn max_abs_cos(lo: f64, hi: f64) -> f64 {
    max_abs_sin(lo + PI / 2.0, hi + PI / 2.0)
}

struct Linear;

impl Hamiltonian1D for Linear {
    fn h(&self, u: f64) -> f64 {
        u
    }
    fn dh(&self, _: f64) -> f64 {
        1.0
    }
    fn d2h(&self, _: f64) -> f64 {
        0.0
    }
    fn wave_speed(&self, _: f64, _: f64) -> f64 {
        1.0
    }
}

/// `(u + 1)^2 / 2`.
struct Burgers;

impl Hamiltonian1D for Burgers {
    fn h(&self, u: f64) -> f64 {
        0.5 * (u + 1.0) * (u + 1.0)
    }
    fn dh(&self, u: f64) -> f64 {
        u + 1.0
    }
    fn d2h(&self, _: f64) -> f64 {
        1.0
    }
    fn wave_speed(&self, lo: f64, hi: f64) -> f64 {
        (lo + 1.0).abs().max((hi + 1.0).abs())
    }
}

/// `-cos(u + 1)`.
struct NegCos;

impl Hamiltonian1D for NegCos {
    fn h(&self, u: f64) -> f64 {
        -(u + 1.0).cos()
    }
    fn dh(&self, u: f64) -> f64 {
        (u + 1.0).sin()
    }
    fn d2h(&self, u: f64) -> f64 {
        (u + 1.0).cos()
    }
    fn wave_speed(&self, lo: f64, hi: f64) -> f64 {
        max_abs_sin(lo + 1.0, hi + 1.0)
    }
}

/// `(u^2 - 1)(u^2 - 4) / 4`.
struct Quartic;

impl Hamiltonian1D for Quartic {
    fn h(&self, u: f64) -> f64 {
        0.25 * (u * u - 1.0) * (u * u - 4.0)
    }
    fn dh(&self, u: f64) -> f64 {
        u * u * u - 2.5 * u
    }
    fn d2h(&self, u: f64) -> f64 {
        3.0 * u * u - 2.5
    }
    fn wave_speed(&self, lo: f64, hi: f64) -> f64 {
        let c = (5.0f64 / 6.0).sqrt();
        let mut m = self.dh(lo).abs().max(self.dh(hi).abs());
        for z in [-c, c] {
            if lo <= z && z <= hi {
                m = m.max(self.dh(z).abs());
            }
        }
        m
    }
}

/// `(u + v + 1)^2 / 2`.
struct Burgers2;

impl Hamiltonian2D for Burgers2 {
    fn h(&self, _: f64, _: f64, u: f64, v: f64) -> f64 {
        0.5 * (u + v + 1.0) * (u + v + 1.0)
    }
    fn grad(&self, _: f64, _: f64, u: f64, v: f64) -> [f64; 2] {
        [u + v + 1.0, u + v + 1.0]
    }
    fn hessian(&self, _: f64, _: f64, _: f64, _: f64) -> [f64; 3] {
        [1.0; 3]
    }
    fn speeds(&self, _: f64, _: f64, u: [f64; 2], v: [f64; 2]) -> [f64; 2] {
        let m = (u[0] + v[0] + 1.0).abs().max((u[1] + v[1] + 1.0).abs());
        [m, m]
    }
}

/// `-cos(u + v + 1)`.
struct NegCos2;

impl Hamiltonian2D for NegCos2 {
    fn h(&self, _: f64, _: f64, u: f64, v: f64) -> f64 {
        -(u + v + 1.0).cos()
    }
    fn grad(&self, _: f64, _: f64, u: f64, v: f64) -> [f64; 2] {
        let s = (u + v + 1.0).sin();
        [s, s]
    }
    fn hessian(&self, _: f64, _: f64, u: f64, v: f64) -> [f64; 3] {
        [(u + v + 1.0).cos(); 3]
    }
    fn speeds(&self, _: f64, _: f64, u: [f64; 2], v: [f64; 2]) -> [f64; 2] {
        let m = max_abs_sin(u[0] + v[0] + 1.0, u[1] + v[1] + 1.0);
        [m, m]
    }
}

/// `sin(u + v)`.
struct Sin2;

impl Hamiltonian2D for Sin2 {
    fn h(&self, _: f64, _: f64, u: f64, v: f64) -> f64 {
        (u + v).sin()
    }
    fn grad(&self, _: f64, _: f64, u: f64, v: f64) -> [f64; 2] {
        let c = (u + v).cos();
        [c, c]
    }
    fn hessian(&self, _: f64, _: f64, u: f64, v: f64) -> [f64; 3] {
        [-(u + v).sin(); 3]
    }
    fn speeds(&self, _: f64, _: f64, u: [f64; 2], v: [f64; 2]) -> [f64; 2] {
        let m = max_abs_cos(u[0] + v[0], u[1] + v[1]);
        [m, m]
    }
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `sin(y) u + (sin(x) + sign(v)) v - sin(y)^2 / 2 - (1 - cos(x))`.
struct Control;

impl Hamiltonian2D for Control {
    fn h(&self, x: f64, y: f64, u: f64, v: f64) -> f64 {
        y.sin() * u + (x.sin() + sign(v)) * v - 0.5 * y.sin().powi(2) - (1.0 - x.cos())
    }
    fn grad(&self, x: f64, y: f64, _: f64, v: f64) -> [f64; 2] {
        [y.sin(), x.sin() + sign(v)]
    }
    fn hessian(&self, _: f64, _: f64, _: f64, _: f64) -> [f64; 3] {
        [0.0; 3]
    }
    fn speeds(&self, x: f64, y: f64, _: [f64; 2], _: [f64; 2]) -> [f64; 2] {
        [y.sin().abs(), x.sin().abs() + 1.0]
    }
    fn spatially_varying(&self) -> bool {
        true
    }
}

/// `-sqrt(u^2 + v^2 + 1)`.
struct Surface;

impl Hamiltonian2D for Surface {
    fn h(&self, _: f64, _: f64, u: f64, v: f64) -> f64 {
        -(u * u + v * v + 1.0).sqrt()
    }
    fn grad(&self, _: f64, _: f64, u: f64, v: f64) -> [f64; 2] {
        let r = (u * u + v * v + 1.0).sqrt();
        [-u / r, -v / r]
    }
    fn hessian(&self, _: f64, _: f64, u: f64, v: f64) -> [f64; 3] {
        let r2 = u * u + v * v + 1.0;
        let r3 = r2 * r2.sqrt();
        [-(1.0 + v * v) / r3, u * v / r3, -(1.0 + u * u) / r3]
    }
    fn speeds(&self, _: f64, _: f64, u: [f64; 2], v: [f64; 2]) -> [f64; 2] {
        // |H_1| grows with |u| and shrinks with |v|
        let big = |r: [f64; 2]| r[0].abs().max(r[1].abs());
        let small = |r: [f64; 2]| {
            if r[0] <= 0.0 && 0.0 <= r[1] {
                0.0
            } else {
                r[0].abs().min(r[1].abs())
            }
        };
        let f = |a: f64, b: f64| a / (a * a + b * b + 1.0).sqrt();
        [f(big(u), small(v)), f(big(v), small(u))]
    }
}

fn dirichlet_const(c: f64) -> SideCondition1D {
    SideCondition1D::Dirichlet(Arc::new(move |_| [c, 0.0, 0.0, 0.0]))
}

/// Exact solution of a problem that depends on `x + y` only: `phi(x, y, t) = psi(x + y, t)`
/// with `psi_t + h(2 psi_s) = 0`.
fn diagonal_exact(
    h: impl Fn(f64) -> f64 + Send + Sync + 'static,
    dh: impl Fn(f64) -> f64 + Send + Sync + 'static,
    d2h: impl Fn(f64) -> f64 + Send + Sync + 'static,
    speed: f64,
) -> Characteristics {
    Characteristics {
        phi0: Arc::new(|s| -(PI * s / 2.0).cos()),
        dphi0: Arc::new(|s| PI / 2.0 * (PI * s / 2.0).sin()),
        d2phi0: Arc::new(|s| PI * PI / 4.0 * (PI * s / 2.0).cos()),
        h: Arc::new(move |q| h(2.0 * q)),
        dh: Arc::new(move |q| 2.0 * dh(2.0 * q)),
        d2h: Arc::new(move |q| 4.0 * d2h(2.0 * q)),
        speed,
    }
}

fn cosine_1d(h: Arc<dyn Hamiltonian1D>, speed: f64) -> Characteristics {
    let (h1, h2, h3) = (h.clone(), h.clone(), h);
    Characteristics {
        phi0: Arc::new(|x| -(PI * x).cos()),
        dphi0: Arc::new(|x| PI * (PI * x).sin()),
        d2phi0: Arc::new(|x| PI * PI * (PI * x).cos()),
        h: Arc::new(move |u| h1.h(u)),
        dh: Arc::new(move |u| h2.dh(u)),
        d2h: Arc::new(move |u| h3.d2h(u)),
        speed,
    }
}

/// Looks up a benchmark problem by name.
pub fn builtin_problem(name: &str) -> Result<Problem> {
    let smooth_t = 0.5 / (PI * PI);
    Ok(match name {
        "linear_advection" => Problem::OneD(Problem1D {
            name: name.into(),
            domain: (-PI, PI),
            hamiltonian: Arc::new(Linear),
            initial: Arc::new(|x: f64| x.sin()),
            boundary: Boundary1D::Sides {
                left: SideCondition1D::Dirichlet(Arc::new(|t: f64| {
                    let s = -PI - t;
                    [s.sin(), -s.cos(), -s.sin(), s.cos()]
                })),
                right: SideCondition1D::Outflow,
            },
            t_final: 20.0,
            alpha: Some(1.0),
            exact: Some(Arc::new(|x: f64, t: f64| (x - t).sin())),
            needs_weno: false,
        }),
        "burgers_1d" | "nonconvex_1d" => {
            let (ham, alpha): (Arc<dyn Hamiltonian1D>, f64) = if name == "burgers_1d" {
                (Arc::new(Burgers), PI + 1.0)
            } else {
                (Arc::new(NegCos), 1.0)
            };
            let ch = cosine_1d(ham.clone(), alpha);
            Problem::OneD(Problem1D {
                name: name.into(),
                domain: (-1.0, 1.0),
                hamiltonian: ham,
                initial: Arc::new(|x: f64| -(PI * x).cos()),
                boundary: Boundary1D::Periodic,
                t_final: smooth_t,
                alpha: Some(alpha),
                exact: Some(Arc::new(move |x, t| ch.solution(x, t))),
                needs_weno: false,
            })
        }
        "riemann_nonconvex_1d" => Problem::OneD(Problem1D {
            name: name.into(),
            domain: (-1.0, 1.0),
            hamiltonian: Arc::new(Quartic),
            initial: Arc::new(|x: f64| -2.0 * x.abs()),
            boundary: Boundary1D::Sides {
                left: dirichlet_const(-2.0),
                right: dirichlet_const(-2.0),
            },
            t_final: 1.0,
            alpha: None,
            exact: None,
            needs_weno: true,
        }),
        "burgers_2d" | "nonconvex_2d" => {
            let (ham, ch, alpha): (Arc<dyn Hamiltonian2D>, Characteristics, f64) =
                if name == "burgers_2d" {
                    (
                        Arc::new(Burgers2),
                        diagonal_exact(
                            |w| 0.5 * (w + 1.0) * (w + 1.0),
                            |w| w + 1.0,
                            |_| 1.0,
                            2.0 * (PI + 1.0),
                        ),
                        PI + 1.0,
                    )
                } else {
                    (
                        Arc::new(NegCos2),
                        diagonal_exact(
                            |w| -(w + 1.0).cos(),
                            |w| (w + 1.0).sin(),
                            |w| (w + 1.0).cos(),
                            2.0,
                        ),
                        1.0,
                    )
                };
            Problem::TwoD(Problem2D {
                name: name.into(),
                domain_x: (-2.0, 2.0),
                domain_y: (-2.0, 2.0),
                hamiltonian: ham,
                initial: Arc::new(|x: f64, y: f64| -(PI * (x + y) / 2.0).cos()),
                boundary_x: AxisBoundary::Periodic,
                boundary_y: AxisBoundary::Periodic,
                t_final: smooth_t,
                alpha: Some([alpha, alpha]),
                exact: Some(Arc::new(move |x, y, t| ch.solution(x + y, t))),
                needs_weno: false,
            })
        }
        "riemann_nonconvex_2d" => Problem::TwoD(Problem2D {
            name: name.into(),
            domain_x: (-1.0, 1.0),
            domain_y: (-1.0, 1.0),
            hamiltonian: Arc::new(Sin2),
            initial: Arc::new(|x: f64, y: f64| PI * (y.abs() - x.abs())),
            boundary_x: outflow_axis(),
            boundary_y: outflow_axis(),
            t_final: 1.0,
            alpha: Some([1.0, 1.0]),
            exact: None,
            needs_weno: true,
        }),
        "control_2d" => Problem::TwoD(Problem2D {
            name: name.into(),
            domain_x: (-PI, PI),
            domain_y: (-PI, PI),
            hamiltonian: Arc::new(Control),
            initial: Arc::new(|_, _| 0.0),
            boundary_x: AxisBoundary::Periodic,
            boundary_y: AxisBoundary::Periodic,
            t_final: 1.0,
            alpha: Some([1.0, 2.0]),
            exact: None,
            needs_weno: false,
        }),
        "surface_flat" => Problem::TwoD(Problem2D {
            name: name.into(),
            domain_x: (0.0, 1.0),
            domain_y: (0.0, 1.0),
            hamiltonian: Arc::new(Surface),
            initial: Arc::new(|x: f64, y: f64| {
                1.0 - 0.25 * ((2.0 * PI * x).cos() - 1.0) * ((2.0 * PI * y).cos() - 1.0)
            }),
            boundary_x: AxisBoundary::Periodic,
            boundary_y: AxisBoundary::Periodic,
            t_final: 0.9,
            alpha: Some([1.0, 1.0]),
            exact: None,
            needs_weno: false,
        }),
        _ => return Err(HjError::UnknownProblem(name.to_string())),
    })
}

fn outflow_axis() -> AxisBoundary {
    AxisBoundary::Sides {
        lo: super::EdgeCondition::Outflow,
        hi: super::EdgeCondition::Outflow,
    }
}
