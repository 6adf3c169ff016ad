//! Problems assembled from expression strings.

use std::sync::Arc;

use super::{
    AxisBoundary, Boundary1D, EdgeCondition, Hamiltonian1D, Hamiltonian2D, Problem, Problem1D,
    Problem2D, SideCondition1D,
};
use crate::error::{HjError, Result};
use crate::expr::Expr;

/// Boundary kind of one side as written in a config file.
#[derive(Debug, Clone, PartialEq)]
pub enum SideSpec {
    Periodic,
    Outflow,
    /// `phi = f(t)`, expression in `t`.
    Dirichlet(String),
    /// `phi_x = g(t)`, expression in `t`.
    Neumann(String),
}

impl SideSpec {
    /// Parses `periodic`, `outflow`, `dirichlet:<expr>` or `neumann:<expr>`.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if t.eq_ignore_ascii_case("periodic") {
            return Ok(SideSpec::Periodic);
        }
        if t.eq_ignore_ascii_case("outflow") {
            return Ok(SideSpec::Outflow);
        }
        if let Some((kind, body)) = t.split_once(':') {
            match kind.trim().to_ascii_lowercase().as_str() {
                "dirichlet" => return Ok(SideSpec::Dirichlet(body.trim().to_string())),
                "neumann" => return Ok(SideSpec::Neumann(body.trim().to_string())),
                _ => {}
            }
        }
        Err(HjError::InvalidConfig(format!(
            "boundary `{t}` is not one of periodic, outflow, dirichlet:<expr>, neumann:<expr>"
        )))
    }
}

/// A user-defined problem. Expressions use `u` (1D) or `u, v, x, y` (2D) for `H`,
/// `x` (or `x, y`) for the initial data, `t` for 1D boundary data and `x, t`
/// (or `x, y, t`) for an optional exact solution.
#[derive(Debug, Clone, PartialEq)]
pub struct CustomSpec {
    pub name: String,
    pub dimension: usize,
    pub hamiltonian: String,
    pub initial: String,
    pub domain_x: (f64, f64),
    pub domain_y: (f64, f64),
    /// 1D: left and right. 2D: both entries of the x axis.
    pub left: SideSpec,
    pub right: SideSpec,
    /// 2D only: bottom and top.
    pub bottom: SideSpec,
    pub top: SideSpec,
    pub exact: Option<String>,
    pub t_final: f64,
    pub alpha: Option<Vec<f64>>,
    pub needs_weno: bool,
}

impl Default for CustomSpec {
    fn default() -> Self {
        Self {
            name: "custom".into(),
            dimension: 1,
            hamiltonian: String::new(),
            initial: String::new(),
            domain_x: (-1.0, 1.0),
            domain_y: (-1.0, 1.0),
            left: SideSpec::Periodic,
            right: SideSpec::Periodic,
            bottom: SideSpec::Periodic,
            top: SideSpec::Periodic,
            exact: None,
            t_final: 1.0,
            alpha: None,
            needs_weno: false,
        }
    }
}

struct ExprH1(Expr);

impl Hamiltonian1D for ExprH1 {
    fn h(&self, u: f64) -> f64 {
        self.0.eval(&[u])
    }
    fn dh(&self, u: f64) -> f64 {
        self.0.derivatives(&[u], 0)[1]
    }
    fn d2h(&self, u: f64) -> f64 {
        self.0.derivatives(&[u], 0)[2]
    }
}

struct ExprH2 {
    e: Expr,
    varying: bool,
}

impl Hamiltonian2D for ExprH2 {
    fn h(&self, x: f64, y: f64, u: f64, v: f64) -> f64 {
        self.e.eval(&[u, v, x, y])
    }
    fn grad(&self, x: f64, y: f64, u: f64, v: f64) -> [f64; 2] {
        let a = [u, v, x, y];
        [self.e.derivatives(&a, 0)[1], self.e.derivatives(&a, 1)[1]]
    }
    fn hessian(&self, x: f64, y: f64, u: f64, v: f64) -> [f64; 3] {
        let a = [u, v, x, y];
        [
            self.e.derivatives(&a, 0)[2],
            self.e.mixed_second(&a, 0, 1),
            self.e.derivatives(&a, 1)[2],
        ]
    }
    fn spatially_varying(&self) -> bool {
        self.varying
    }
}

fn time_data(src: &str) -> Result<super::TimeData> {
    let e = Expr::parse(src, &["t"])?;
    Ok(Arc::new(move |t| e.derivatives(&[t], 0)))
}

fn side_1d(s: &SideSpec) -> Result<SideCondition1D> {
    Ok(match s {
        SideSpec::Outflow => SideCondition1D::Outflow,
        SideSpec::Dirichlet(src) => SideCondition1D::Dirichlet(time_data(src)?),
        SideSpec::Neumann(src) => SideCondition1D::Neumann(time_data(src)?),
        SideSpec::Periodic => unreachable!("handled by caller"),
    })
}

fn axis_2d(lo: &SideSpec, hi: &SideSpec, axis: &str) -> Result<AxisBoundary> {
    match (lo, hi) {
        (SideSpec::Periodic, SideSpec::Periodic) => Ok(AxisBoundary::Periodic),
        (SideSpec::Outflow, SideSpec::Outflow) => Ok(AxisBoundary::Sides {
            lo: EdgeCondition::Outflow,
            hi: EdgeCondition::Outflow,
        }),
        (SideSpec::Periodic, _) | (_, SideSpec::Periodic) => Err(HjError::InvalidConfig(format!(
            "{axis}: periodic must be set on both sides"
        ))),
        _ => Err(HjError::InvalidConfig(format!(
            "{axis}: custom 2D problems support periodic or outflow edges only"
        ))),
    }
}

fn check_domain(d: (f64, f64), what: &str) -> Result<()> {
    if d.0.is_finite() && d.1.is_finite() && d.0 < d.1 {
        Ok(())
    } else {
        Err(HjError::InvalidConfig(format!(
            "{what} must satisfy a < b, got {d:?}"
        )))
    }
}

impl CustomSpec {
    pub fn build(&self) -> Result<Problem> {
        if self.hamiltonian.trim().is_empty() {
            return Err(HjError::InvalidConfig(
                "custom problem needs `hamiltonian`".into(),
            ));
        }
        if self.initial.trim().is_empty() {
            return Err(HjError::InvalidConfig(
                "custom problem needs `initial`".into(),
            ));
        }
        if !(self.t_final >= 0.0) {
            return Err(HjError::InvalidConfig(
                "final time must be non-negative".into(),
            ));
        }
        check_domain(self.domain_x, "domain")?;
        match self.dimension {
            1 => self.build_1d(),
            2 => self.build_2d(),
            d => Err(HjError::InvalidConfig(format!(
                "dimension must be 1 or 2, got {d}"
            ))),
        }
    }

    fn build_1d(&self) -> Result<Problem> {
        let h = Expr::parse(&self.hamiltonian, &["u"])?;
        let init = Expr::parse(&self.initial, &["x"])?;
        let boundary = match (&self.left, &self.right) {
            (SideSpec::Periodic, SideSpec::Periodic) => Boundary1D::Periodic,
            (SideSpec::Periodic, _) | (_, SideSpec::Periodic) => {
                return Err(HjError::InvalidConfig(
                    "periodic must be set on both sides".into(),
                ))
            }
            (l, r) => Boundary1D::Sides {
                left: side_1d(l)?,
                right: side_1d(r)?,
            },
        };
        let exact = match &self.exact {
            Some(src) => {
                let e = Expr::parse(src, &["x", "t"])?;
                Some(Arc::new(move |x, t| e.eval(&[x, t])) as super::Exact1Fn)
            }
            None => None,
        };
        let alpha = match &self.alpha {
            None => None,
            Some(v) if v.len() == 1 && v[0] > 0.0 => Some(v[0]),
            Some(v) => {
                return Err(HjError::InvalidConfig(format!(
                    "1D alpha must be one positive value, got {v:?}"
                )))
            }
        };
        Ok(Problem::OneD(Problem1D {
            name: self.name.clone(),
            domain: self.domain_x,
            hamiltonian: Arc::new(ExprH1(h)),
            initial: Arc::new(move |x| init.eval(&[x])),
            boundary,
            t_final: self.t_final,
            alpha,
            exact,
            needs_weno: self.needs_weno,
        }))
    }

    fn build_2d(&self) -> Result<Problem> {
        check_domain(self.domain_y, "domain_y")?;
        let h = Expr::parse(&self.hamiltonian, &["u", "v", "x", "y"])?;
        let varying = h.uses(2) || h.uses(3);
        let init = Expr::parse(&self.initial, &["x", "y"])?;
        let exact = match &self.exact {
            Some(src) => {
                let e = Expr::parse(src, &["x", "y", "t"])?;
                Some(Arc::new(move |x, y, t| e.eval(&[x, y, t])) as super::Exact2Fn)
            }
            None => None,
        };
        let alpha = match &self.alpha {
            None => None,
            Some(v) if v.len() == 2 && v.iter().all(|&a| a > 0.0) => Some([v[0], v[1]]),
            Some(v) if v.len() == 1 && v[0] > 0.0 => Some([v[0], v[0]]),
            Some(v) => {
                return Err(HjError::InvalidConfig(format!(
                    "2D alpha must be one or two positive values, got {v:?}"
                )))
            }
        };
        Ok(Problem::TwoD(Problem2D {
            name: self.name.clone(),
            domain_x: self.domain_x,
            domain_y: self.domain_y,
            hamiltonian: Arc::new(ExprH2 { e: h, varying }),
            initial: Arc::new(move |x, y| init.eval(&[x, y])),
            boundary_x: axis_2d(&self.left, &self.right, "x")?,
            boundary_y: axis_2d(&self.bottom, &self.top, "y")?,
            t_final: self.t_final,
            alpha,
            exact,
            needs_weno: self.needs_weno,
        }))
    }
}
