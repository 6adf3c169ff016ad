//! Boundary derivatives for bounded lines: inverse Lax-Wendroff cascades at inflow
//! boundaries and polynomial extrapolation at outflow boundaries.

use crate::error::{HjError, Result};
use crate::grid::Grid1D;
use crate::operators::{BoundaryDerivatives, Provenance};
use crate::problem::{EdgeData, Hamiltonian1D, Hamiltonian2D, SideCondition1D};

/// Which end of a line a boundary quantity refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    /// `+1` where inflow needs `H' > 0`, `-1` where it needs `H' < 0`.
    pub fn inflow_sign(self) -> f64 {
        match self {
            Side::Left => 1.0,
            Side::Right => -1.0,
        }
    }
}

/// Below this `|H'|` an inflow characteristic counts as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;
/// Samples of the bracketing scan.
pub const SCAN_SAMPLES: usize = 512;
/// Bisection stops once the bracket is this narrow.
pub const ROOT_TOL: f64 = 1e-13;

/// Finite-difference weights at `z` for derivatives `0..=m` on the nodes `x`.
///
/// `c[d][j]` multiplies `f(x[j])` in the approximation of the `d`-th derivative.
pub fn fornberg_weights(z: f64, x: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    if n == 0 {
        return c;
    }
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for d in (1..=mn).rev() {
                    c[d][i] = c1 * (d as f64 * c[d - 1][i - 1] - c5 * c[d][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for d in (1..=mn).rev() {
                c[d][j] = (c4 * c[d][j] - d as f64 * c[d - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

fn end_stencil<'a>(
    phi: &'a [f64],
    grid: &'a Grid1D,
    side: Side,
    count: usize,
) -> Result<(&'a [f64], &'a [f64], f64)> {
    if phi.len() != grid.len() {
        return Err(HjError::LengthMismatch {
            expected: grid.len(),
            got: phi.len(),
        });
    }
    if grid.len() < count {
        return Err(HjError::InsufficientNodes {
            needed: count,
            have: grid.len(),
        });
    }
    let x = grid.nodes();
    Ok(match side {
        Side::Left => (&x[..count], &phi[..count], grid.a()),
        Side::Right => (&x[x.len() - count..], &phi[phi.len() - count..], grid.b()),
    })
}

/// `∂_x^m phi` at the boundary for `m = 1..=k`, from the degree-`k+1` interpolant
/// through the `k + 2` nodes nearest that end.
pub fn extrapolate_derivatives(
    phi: &[f64],
    grid: &Grid1D,
    side: Side,
    k: usize,
) -> Result<BoundaryDerivatives> {
    if !(1..=3).contains(&k) {
        return Err(HjError::UnsupportedOrder(k));
    }
    let (x, v, z) = end_stencil(phi, grid, side, k + 2)?;
    let c = fornberg_weights(z, x, k);
    let mut values = [0.0; 3];
    for m in 1..=k {
        values[m - 1] = c[m].iter().zip(v).map(|(w, f)| w * f).sum();
    }
    Ok(BoundaryDerivatives::new(
        side,
        values,
        Provenance::Extrapolation,
    ))
}

/// Extrapolated `phi_x` at the boundary from the cubic through the four nearest nodes.
/// Serves as the initial guess of inflow root solves.
pub fn derivative_guess(phi: &[f64], grid: &Grid1D, side: Side) -> Result<f64> {
    let (x, v, z) = end_stencil(phi, grid, side, 4)?;
    let c = fornberg_weights(z, x, 1);
    Ok(c[1].iter().zip(v).map(|(w, f)| w * f).sum())
}

/// How an inflow root was picked among the candidates of the scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionReason {
    /// The scan found a single root.
    Unique,
    /// Several roots, one with the inflow sign of `H'`.
    SignOfDerivative,
    /// Several roots with the inflow sign; the one nearest the extrapolated guess.
    NearestToExtrapolation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RootSelection {
    pub candidates: Vec<f64>,
    pub root: f64,
    pub reason: SelectionReason,
    pub guess: f64,
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut flo: f64) -> f64 {
    while hi - lo > ROOT_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Roots of `f` found by sign changes on a uniform scan of `[guess - R, guess + R]`,
/// `R = 10 (1 + |guess|)`, each refined by bisection.
pub fn scan_roots(f: impl Fn(f64) -> f64, guess: f64) -> Vec<f64> {
    let r = 10.0 * (1.0 + guess.abs());
    let lo = guess - r;
    let step = 2.0 * r / SCAN_SAMPLES as f64;
    let mut roots: Vec<f64> = Vec::new();
    let push = |z: f64, roots: &mut Vec<f64>| {
        if roots
            .last()
            .is_none_or(|&l| (z - l).abs() > 1e-10 * (1.0 + z.abs()))
        {
            roots.push(z);
        }
    };
    let mut a = lo;
    let mut fa = f(a);
    for s in 1..=SCAN_SAMPLES {
        let b = if s == SCAN_SAMPLES {
            guess + r
        } else {
            lo + s as f64 * step
        };
        let fb = f(b);
        if fa == 0.0 {
            push(a, &mut roots);
        } else if fa.is_finite() && fb.is_finite() && fb != 0.0 && (fa < 0.0) != (fb < 0.0) {
            push(bisect(&f, a, b, fa), &mut roots);
        }
        a = b;
        fa = fb;
    }
    if fa == 0.0 {
        push(a, &mut roots);
    }
    roots
}

/// Solves `f(u) = 0` for the inflow root at `side`: `df(root)` must carry the side's
/// sign and exceed [`DEGENERACY_TOL`] in magnitude.
pub fn solve_inflow_root(
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    side: Side,
    guess: f64,
    t: f64,
    node: Option<usize>,
) -> Result<RootSelection> {
    let guess = if guess.is_finite() { guess } else { 0.0 };
    let candidates = scan_roots(&f, guess);
    let sign = side.inflow_sign();
    let passing: Vec<f64> = candidates
        .iter()
        .copied()
        .filter(|&u| sign * df(u) > DEGENERACY_TOL)
        .collect();
    if passing.is_empty() {
        if let Some(&u) = candidates.iter().find(|&&u| df(u).abs() <= DEGENERACY_TOL) {
            return Err(HjError::DegenerateCharacteristic {
                side,
                t,
                slope: df(u).abs(),
                node,
            });
        }
        return Err(HjError::NoInflowRoot { side, t, node });
    }
    let (root, reason) = if candidates.len() == 1 {
        (passing[0], SelectionReason::Unique)
    } else if passing.len() == 1 {
        (passing[0], SelectionReason::SignOfDerivative)
    } else {
        let best = passing
            .iter()
            .copied()
            .min_by(|a, b| (a - guess).abs().total_cmp(&(b - guess).abs()))
            .unwrap();
        (best, SelectionReason::NearestToExtrapolation)
    };
    Ok(RootSelection {
        candidates,
        root,
        reason,
        guess,
    })
}

fn check_slope(slope: f64, side: Side, t: f64, node: Option<usize>) -> Result<()> {
    if slope.abs() < DEGENERACY_TOL || !slope.is_finite() {
        Err(HjError::DegenerateCharacteristic {
            side,
            t,
            slope: slope.abs(),
            node,
        })
    } else {
        Ok(())
    }
}

/// Inflow Dirichlet data `phi = f(t)`: `data = [f, f', f'', f''']` at time `t`.
pub fn ilw_dirichlet_1d(
    h: &dyn Hamiltonian1D,
    side: Side,
    data: [f64; 4],
    t: f64,
    guess: f64,
) -> Result<(BoundaryDerivatives, RootSelection)> {
    let [_, f1, f2, f3] = data;
    let sel = solve_inflow_root(|u| h.h(u) + f1, |u| h.dh(u), side, guess, t, None)?;
    let p = sel.root;
    let d1 = h.dh(p);
    check_slope(d1, side, t, None)?;
    let d2 = h.d2h(p);
    let pxx = f2 / (d1 * d1);
    let pxxx = -(f3 + 3.0 * d2 * d1 * d1 * pxx * pxx) / (d1 * d1 * d1);
    Ok((
        BoundaryDerivatives::new(side, [p, pxx, pxxx], Provenance::Ilw),
        sel,
    ))
}

/// Inflow Neumann data `phi_x = g(t)`: `data = [g, g', g'', g''']` at time `t`.
pub fn ilw_neumann_1d(
    h: &dyn Hamiltonian1D,
    side: Side,
    data: [f64; 4],
    t: f64,
) -> Result<BoundaryDerivatives> {
    let [g, g1, g2, _] = data;
    let d1 = h.dh(g);
    check_slope(d1, side, t, None)?;
    let d2 = h.d2h(g);
    let pxx = -g1 / d1;
    let pxxt = -g2 / d1 + g1 * g1 * d2 / (d1 * d1);
    let pxxx = -(pxxt + d2 * pxx * pxx) / d1;
    Ok(BoundaryDerivatives::new(
        side,
        [g, pxx, pxxx],
        Provenance::Ilw,
    ))
}

/// Boundary derivatives of one side of a 1D problem, with the root selection if one was made.
#[derive(Debug, Clone, PartialEq)]
pub struct SideOutcome {
    pub derivatives: BoundaryDerivatives,
    pub selection: Option<RootSelection>,
}

/// Dispatches on the side condition: ILW for Dirichlet and Neumann, extrapolation for outflow.
pub fn side_derivatives_1d(
    cond: &SideCondition1D,
    h: &dyn Hamiltonian1D,
    side: Side,
    t: f64,
    phi: &[f64],
    grid: &Grid1D,
    k: usize,
) -> Result<SideOutcome> {
    match cond {
        SideCondition1D::Dirichlet(f) => {
            let guess = derivative_guess(phi, grid, side)?;
            let (derivatives, sel) = ilw_dirichlet_1d(h, side, f(t), t, guess)?;
            Ok(SideOutcome {
                derivatives,
                selection: Some(sel),
            })
        }
        SideCondition1D::Neumann(g) => Ok(SideOutcome {
            derivatives: ilw_neumann_1d(h, side, g(t), t)?,
            selection: None,
        }),
        SideCondition1D::Outflow => Ok(SideOutcome {
            derivatives: extrapolate_derivatives(phi, grid, side, k)?,
            selection: None,
        }),
    }
}

/// An edge of a rectangle. Left/right edges have normal `x`, bottom/top normal `y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    Left,
    Right,
    Bottom,
    Top,
}

impl Edge {
    /// End of the normal line the edge sits on.
    pub fn side(self) -> Side {
        match self {
            Edge::Left | Edge::Bottom => Side::Left,
            Edge::Right | Edge::Top => Side::Right,
        }
    }

    pub fn normal_is_x(self) -> bool {
        matches!(self, Edge::Left | Edge::Right)
    }
}

/// Position of an edge: fixed normal coordinate and the tangential node coordinates.
#[derive(Debug, Clone, Copy)]
pub struct EdgeGeometry<'a> {
    pub edge: Edge,
    pub normal_coord: f64,
    pub tangent: &'a [f64],
    /// Whether the tangential axis wraps; then the last node repeats the first.
    pub tangent_periodic: bool,
}

impl EdgeGeometry<'_> {
    fn point(&self, j: usize) -> (f64, f64) {
        if self.edge.normal_is_x() {
            (self.normal_coord, self.tangent[j])
        } else {
            (self.tangent[j], self.normal_coord)
        }
    }
}

/// `H` in edge coordinates, `G(p_n, p_s)`.
struct Oriented<'a> {
    h: &'a dyn Hamiltonian2D,
    x: f64,
    y: f64,
    normal_x: bool,
}

impl Oriented<'_> {
    fn args(&self, pn: f64, ps: f64) -> (f64, f64) {
        if self.normal_x {
            (pn, ps)
        } else {
            (ps, pn)
        }
    }

    fn value(&self, pn: f64, ps: f64) -> f64 {
        let (u, v) = self.args(pn, ps);
        self.h.h(self.x, self.y, u, v)
    }

    /// `[G_n, G_s]`.
    fn grad(&self, pn: f64, ps: f64) -> [f64; 2] {
        let (u, v) = self.args(pn, ps);
        let g = self.h.grad(self.x, self.y, u, v);
        if self.normal_x {
            g
        } else {
            [g[1], g[0]]
        }
    }

    /// `[G_nn, G_ns, G_ss]`.
    fn hessian(&self, pn: f64, ps: f64) -> [f64; 3] {
        let (u, v) = self.args(pn, ps);
        let h = self.h.hessian(self.x, self.y, u, v);
        if self.normal_x {
            h
        } else {
            [h[2], h[1], h[0]]
        }
    }
}

/// Normal derivative `p` and its edge partials, with the tangential derivative `q`.
struct EdgeState {
    p: f64,
    p_s: f64,
    p_t: f64,
    p_ss: f64,
    p_ts: f64,
    p_tt: f64,
    q: f64,
    q_s: f64,
    q_t: f64,
}

/// `phi_nn` and `phi_nnn` from `phi_t + G(phi_n, phi_s) = 0` differentiated along the normal.
fn normal_cascade(g: &Oriented, e: &EdgeState) -> (f64, f64) {
    let [g1, g2] = g.grad(e.p, e.q);
    let [g11, g12, g22] = g.hessian(e.p, e.q);
    let m = -(e.p_t + g2 * e.p_s);
    let pnn = m / g1;

    let (g1_s, g2_s) = (g11 * e.p_s + g12 * e.q_s, g12 * e.p_s + g22 * e.q_s);
    let (g1_t, g2_t) = (g11 * e.p_t + g12 * e.q_t, g12 * e.p_t + g22 * e.q_t);
    let m_t = -(e.p_tt + g2_t * e.p_s + g2 * e.p_ts);
    let m_s = -(e.p_ts + g2_s * e.p_s + g2 * e.p_ss);
    let pnn_t = (m_t * g1 - m * g1_t) / (g1 * g1);
    let pnn_s = (m_s * g1 - m * g1_s) / (g1 * g1);
    let (g1_n, g2_n) = (g11 * pnn + g12 * e.p_s, g12 * pnn + g22 * e.p_s);
    let pnnn = -(pnn_t + g1_n * pnn + g2_n * e.p_s + g2 * pnn_s) / g1;
    (pnn, pnnn)
}

fn require_autonomous(h: &dyn Hamiltonian2D) -> Result<()> {
    if h.spatially_varying() {
        Err(HjError::InvalidConfig(
            "inflow edges need a Hamiltonian independent of (x, y)".into(),
        ))
    } else {
        Ok(())
    }
}

/// Inflow Dirichlet edge `phi = f(s, t)`: per-node normal derivatives and root selections.
/// `guesses[j]` is the extrapolated normal derivative at node `j`.
pub fn ilw_dirichlet_2d(
    h: &dyn Hamiltonian2D,
    geom: &EdgeGeometry,
    data: &EdgeData,
    t: f64,
    guesses: &[f64],
) -> Result<Vec<(BoundaryDerivatives, RootSelection)>> {
    require_autonomous(h)?;
    if guesses.len() != geom.tangent.len() {
        return Err(HjError::LengthMismatch {
            expected: geom.tangent.len(),
            got: guesses.len(),
        });
    }
    let side = geom.edge.side();
    let mut out = Vec::with_capacity(guesses.len());
    for (j, &s) in geom.tangent.iter().enumerate() {
        let (x, y) = geom.point(j);
        let g = Oriented {
            h,
            x,
            y,
            normal_x: geom.edge.normal_is_x(),
        };
        let d = data(s, t);
        let f = |i, k| d.get(i, k);
        let q = f(0, 1);
        let sel = solve_inflow_root(
            |p| g.value(p, q) + f(1, 0),
            |p| g.grad(p, q)[0],
            side,
            guesses[j],
            t,
            Some(j),
        )?;
        let p = sel.root;
        let [g1, g2] = g.grad(p, q);
        check_slope(g1, side, t, Some(j))?;
        let [g11, g12, g22] = g.hessian(p, q);
        let (q_s, q_t) = (f(0, 2), f(1, 1));
        let p_s = -(f(1, 1) + g2 * f(0, 2)) / g1;
        let p_t = -(f(2, 0) + g2 * f(1, 1)) / g1;
        let (g1_s, g2_s) = (g11 * p_s + g12 * q_s, g12 * p_s + g22 * q_s);
        let (g1_t, g2_t) = (g11 * p_t + g12 * q_t, g12 * p_t + g22 * q_t);
        let p_ss = -(f(1, 2) + g1_s * p_s + g2_s * f(0, 2) + g2 * f(0, 3)) / g1;
        let p_ts = -(f(2, 1) + g1_t * p_s + g2_t * f(0, 2) + g2 * f(1, 2)) / g1;
        let p_tt = -(f(3, 0) + g1_t * p_t + g2_t * f(1, 1) + g2 * f(2, 1)) / g1;
        let state = EdgeState {
            p,
            p_s,
            p_t,
            p_ss,
            p_ts,
            p_tt,
            q,
            q_s,
            q_t,
        };
        let (pnn, pnnn) = normal_cascade(&g, &state);
        out.push((
            BoundaryDerivatives::new(side, [p, pnn, pnnn], Provenance::Ilw),
            sel,
        ));
    }
    Ok(out)
}

/// First and second tangential derivatives of edge values by five-point differencing,
/// centred where possible and one-sided near the ends of a non-periodic edge.
pub fn tangential_derivatives(
    values: &[f64],
    coords: &[f64],
    periodic: bool,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = values.len();
    if coords.len() != n {
        return Err(HjError::LengthMismatch {
            expected: coords.len(),
            got: n,
        });
    }
    if n < 5 {
        return Err(HjError::InsufficientNodes { needed: 5, have: n });
    }
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    let mut xs = [0.0; 5];
    let mut vs = [0.0; 5];
    for j in 0..n {
        if periodic {
            let cells = n - 1;
            let period = coords[cells] - coords[0];
            for (o, off) in (-2isize..=2).enumerate() {
                let idx = j as isize + off;
                let wraps = idx.div_euclid(cells as isize);
                let r = idx.rem_euclid(cells as isize) as usize;
                xs[o] = coords[r] + wraps as f64 * period;
                vs[o] = values[r];
            }
        } else {
            let start = j.saturating_sub(2).min(n - 5);
            xs.copy_from_slice(&coords[start..start + 5]);
            vs.copy_from_slice(&values[start..start + 5]);
        }
        let c = fornberg_weights(coords[j], &xs, 2);
        d1[j] = c[1].iter().zip(&vs).map(|(w, v)| w * v).sum();
        d2[j] = c[2].iter().zip(&vs).map(|(w, v)| w * v).sum();
    }
    Ok((d1, d2))
}

/// Inflow Neumann edge `phi_n = g(s, t)`. Tangential derivatives of `phi` come from
/// differencing `edge_phi`, the current nodal values along the edge.
pub fn ilw_neumann_2d(
    h: &dyn Hamiltonian2D,
    geom: &EdgeGeometry,
    data: &EdgeData,
    t: f64,
    edge_phi: &[f64],
) -> Result<Vec<BoundaryDerivatives>> {
    require_autonomous(h)?;
    let (qs, qss) = tangential_derivatives(edge_phi, geom.tangent, geom.tangent_periodic)?;
    let side = geom.edge.side();
    let mut out = Vec::with_capacity(edge_phi.len());
    for (j, &s) in geom.tangent.iter().enumerate() {
        let (x, y) = geom.point(j);
        let g = Oriented {
            h,
            x,
            y,
            normal_x: geom.edge.normal_is_x(),
        };
        let d = data(s, t);
        let p = d.get(0, 0);
        let (q, q_s) = (qs[j], qss[j]);
        let [g1, g2] = g.grad(p, q);
        check_slope(g1, side, t, Some(j))?;
        let p_s = d.get(0, 1);
        let state = EdgeState {
            p,
            p_s,
            p_t: d.get(1, 0),
            p_ss: d.get(0, 2),
            p_ts: d.get(1, 1),
            p_tt: d.get(2, 0),
            q,
            q_s,
            q_t: -(g1 * p_s + g2 * q_s),
        };
        let (pnn, pnnn) = normal_cascade(&g, &state);
        out.push(BoundaryDerivatives::new(
            side,
            [p, pnn, pnnn],
            Provenance::Ilw,
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;
    use crate::problem::{Characteristics, EdgePartials};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;
    use std::sync::Arc;

    struct Poly1(Vec<f64>);

    impl Hamiltonian1D for Poly1 {
        fn h(&self, u: f64) -> f64 {
            self.0.iter().rev().fold(0.0, |acc, c| acc * u + c)
        }
        fn dh(&self, u: f64) -> f64 {
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (i, c)| acc * u + i as f64 * c)
        }
        fn d2h(&self, u: f64) -> f64 {
            self.0
                .iter()
                .enumerate()
                .skip(2)
                .rev()
                .fold(0.0, |acc, (i, c)| acc * u + (i * (i - 1)) as f64 * c)
        }
    }

    fn burgers() -> Poly1 {
        // 1/2 (u + 1)^2
        Poly1(vec![0.5, 1.0, 0.5])
    }

    fn quartic() -> Poly1 {
        // 1/4 (u^2 - 1)(u^2 - 4)
        Poly1(vec![1.0, 0.0, -1.25, 0.0, 0.25])
    }

    #[test]
    fn fornberg_reproduces_polynomials() {
        let x = [0.0, 0.3, 0.7, 1.2, 1.5];
        let c = fornberg_weights(0.1, &x, 3);
        let f = |z: f64| 2.0 - z + 3.0 * z * z - 0.5 * z.powi(3) + 0.25 * z.powi(4);
        let exact = [
            f(0.1),
            -1.0 + 6.0 * 0.1 - 1.5 * 0.01 + 0.001,
            6.0 - 3.0 * 0.1 + 3.0 * 0.01,
            -3.0 + 6.0 * 0.1,
        ];
        for d in 0..=3 {
            let got: f64 = c[d].iter().zip(&x).map(|(w, &z)| w * f(z)).sum();
            assert!(
                (got - exact[d]).abs() < 1e-10,
                "d{d}: {got} vs {}",
                exact[d]
            );
        }
    }

    #[test]
    fn extrapolation_of_quadratic_and_constant() {
        let g = Grid1D::uniform(0.0, 1.0, 10).unwrap();
        let phi: Vec<f64> = g.nodes().iter().map(|x| x * x).collect();
        let d = extrapolate_derivatives(&phi, &g, Side::Left, 2).unwrap();
        assert!(d.d(1).abs() < 1e-10 && (d.d(2) - 2.0).abs() < 1e-10);
        assert_eq!(d.provenance, Provenance::Extrapolation);
        let d = extrapolate_derivatives(&phi, &g, Side::Right, 2).unwrap();
        assert!((d.d(1) - 2.0).abs() < 1e-10 && (d.d(2) - 2.0).abs() < 1e-10);

        let c = vec![3.5; g.len()];
        for side in [Side::Left, Side::Right] {
            let d = extrapolate_derivatives(&c, &g, side, 3).unwrap();
            for m in 1..=3 {
                assert!(d.d(m).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn extrapolation_convergence_on_sine() {
        let errs = |n: usize| {
            let g = Grid1D::uniform(0.0, 1.0, n).unwrap();
            let phi: Vec<f64> = g.nodes().iter().map(|x| x.sin()).collect();
            let d = extrapolate_derivatives(&phi, &g, Side::Right, 3).unwrap();
            let b = 1f64;
            [
                (d.d(1) - b.cos()).abs(),
                (d.d(2) + b.sin()).abs(),
                (d.d(3) + b.cos()).abs(),
            ]
        };
        let (e40, e80) = (errs(40), errs(80));
        for m in 1..=3 {
            let order = (e40[m - 1] / e80[m - 1]).log2();
            let design = (3 + 2 - m) as f64;
            assert!(order > design - 0.3, "m={m}: order {order}");
        }
    }

    #[test]
    fn extrapolation_needs_enough_nodes_and_matching_lengths() {
        let g = Grid1D::uniform(0.0, 1.0, 4).unwrap();
        assert!(matches!(
            extrapolate_derivatives(&[0.0; 4], &g, Side::Left, 3),
            Err(HjError::LengthMismatch { .. })
        ));
        assert!(extrapolate_derivatives(&[0.0; 5], &g, Side::Left, 3).is_ok());
        assert!(matches!(
            extrapolate_derivatives(&[0.0; 5], &g, Side::Left, 4),
            Err(HjError::UnsupportedOrder(4))
        ));
    }

    proptest! {
        #[test]
        fn extrapolation_is_exact_on_design_degree(
            k in 1usize..=3,
            coeffs in prop::collection::vec(-2.0f64..2.0, 5),
            seed in 0u64..1000,
            right in any::<bool>(),
        ) {
            let g = Grid1D::perturbed(-1.0, 1.0, 12, 0.3, seed).unwrap();
            let deg = k + 1;
            let p = |x: f64| (0..=deg).map(|i| coeffs[i] * x.powi(i as i32)).sum::<f64>();
            let dp = |x: f64, m: usize| -> f64 {
                (m..=deg)
                    .map(|i| {
                        let fall: f64 = (0..m).map(|r| (i - r) as f64).product();
                        coeffs[i] * fall * x.powi((i - m) as i32)
                    })
                    .sum()
            };
            let phi: Vec<f64> = g.nodes().iter().map(|&x| p(x)).collect();
            let side = if right { Side::Right } else { Side::Left };
            let z = if right { 1.0 } else { -1.0 };
            let d = extrapolate_derivatives(&phi, &g, side, k).unwrap();
            for m in 1..=k {
                prop_assert!((d.d(m) - dp(z, m)).abs() < 1e-8 * (1.0 + dp(z, m).abs()));
            }
        }
    }

    #[test]
    fn linear_dirichlet_cascade_is_explicit() {
        let h = Poly1(vec![0.0, 1.0]);
        for &t in &[0.0, 0.4, 3.7] {
            let s = -PI - t;
            let data = [s.sin(), -s.cos(), -s.sin(), s.cos()];
            let (d, sel) = ilw_dirichlet_1d(&h, Side::Left, data, t, 0.0).unwrap();
            assert_eq!(sel.reason, SelectionReason::Unique);
            assert!((d.d(1) - s.cos()).abs() < 1e-10);
            assert!((d.d(2) + s.sin()).abs() < 1e-10);
            assert!((d.d(3) + s.cos()).abs() < 1e-10);
        }
        assert!(matches!(
            ilw_dirichlet_1d(&h, Side::Right, [0.0, -1.0, 0.0, 0.0], 0.5, 0.0),
            Err(HjError::NoInflowRoot {
                side: Side::Right,
                ..
            })
        ));
    }

    #[test]
    fn burgers_root_selection() {
        let h = burgers();
        let (d, sel) = ilw_dirichlet_1d(&h, Side::Left, [0.0, -0.5, 0.0, 0.0], 0.0, -1.5).unwrap();
        assert!(d.d(1).abs() < 1e-12);
        assert_eq!(sel.reason, SelectionReason::SignOfDerivative);
        assert_eq!(sel.candidates.len(), 2);
        let (d, _) = ilw_dirichlet_1d(&h, Side::Right, [0.0, -0.5, 0.0, 0.0], 0.0, 0.0).unwrap();
        assert!((d.d(1) + 2.0).abs() < 1e-12);
        // f' = 0 gives a double root where H' = 0: no transversal inflow root exists.
        assert!(ilw_dirichlet_1d(&h, Side::Left, [0.0, 0.0, 0.0, 0.0], 0.0, 0.0).is_err());
    }

    #[test]
    fn quartic_root_selection_prefers_guess() {
        let h = quartic();
        let cases = [
            (Side::Left, 1.8, 2.0),
            (Side::Left, -0.8, -1.0),
            (Side::Left, 0.4, -1.0),
            (Side::Right, 0.9, 1.0),
            (Side::Right, -1.7, -2.0),
        ];
        for (side, guess, want) in cases {
            let (d, sel) = ilw_dirichlet_1d(&h, side, [-2.0, 0.0, 0.0, 0.0], 1.0, guess).unwrap();
            assert_eq!(sel.candidates.len(), 4);
            assert_eq!(sel.reason, SelectionReason::NearestToExtrapolation);
            assert!(
                (d.d(1) - want).abs() < 1e-12,
                "{side:?} {guess}: {}",
                d.d(1)
            );
            assert_eq!(d.d(2), 0.0);
        }
    }

    #[test]
    fn random_roots_honour_the_sign_contract() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut solved = 0;
        for _ in 0..1000 {
            let deg = rng.random_range(1..=4);
            let coeffs: Vec<f64> = (0..=deg).map(|_| rng.random_range(-2.0..2.0)).collect();
            let h = Poly1(coeffs);
            let side = if rng.random_bool(0.5) {
                Side::Left
            } else {
                Side::Right
            };
            let f1 = rng.random_range(-3.0..3.0);
            let guess = rng.random_range(-3.0..3.0);
            match ilw_dirichlet_1d(&h, side, [0.0, f1, 0.3, -0.2], 0.0, guess) {
                Ok((d, sel)) => {
                    solved += 1;
                    let u = d.d(1);
                    assert!(side.inflow_sign() * h.dh(u) > DEGENERACY_TOL);
                    assert!((h.h(u) + f1).abs() < 1e-9 * (1.0 + h.dh(u).abs() * (1.0 + u.abs())));
                    let sign_ok: Vec<f64> = sel
                        .candidates
                        .iter()
                        .copied()
                        .filter(|&c| side.inflow_sign() * h.dh(c) > DEGENERACY_TOL)
                        .collect();
                    for c in sign_ok {
                        assert!((u - guess).abs() <= (c - guess).abs());
                    }
                }
                Err(HjError::NoInflowRoot { .. })
                | Err(HjError::DegenerateCharacteristic { .. }) => {}
                Err(e) => panic!("unexpected error {e}"),
            }
        }
        assert!(solved > 300, "only {solved} solvable cases");
    }

    /// `phi = (x - t)^2 / (2 (t + 1)) - t / 2` solves `phi_t + (phi_x + 1)^2 / 2 = 0`.
    fn burgers_quadratic() -> Expr {
        Expr::parse("(x - t)^2 / (2*(t + 1)) - t/2", &["x", "t"]).unwrap()
    }

    #[test]
    fn dirichlet_and_neumann_agree_with_exact_quadratic() {
        let h = burgers();
        let e = burgers_quadratic();
        for &(side, a) in &[(Side::Left, 0.5), (Side::Right, -3.0)] {
            for &t in &[0.0, 0.2, 0.9] {
                let f = e.derivatives(&[a, t], 1);
                let g = Expr::parse(&format!("({a} - t)/(t + 1)"), &["t"])
                    .unwrap()
                    .derivatives(&[t], 0);
                let want = [(a - t) / (t + 1.0), 1.0 / (t + 1.0), 0.0];
                let (dd, _) = ilw_dirichlet_1d(&h, side, f, t, want[0] + 0.3).unwrap();
                let dn = ilw_neumann_1d(&h, side, g, t).unwrap();
                for m in 1..=3 {
                    assert!(
                        (dd.d(m) - want[m - 1]).abs() < 1e-10,
                        "{side:?} t={t} m={m}"
                    );
                    assert!((dn.d(m) - want[m - 1]).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn neumann_linear_examples() {
        let h = Poly1(vec![0.0, 1.0]);
        let d = ilw_neumann_1d(&h, Side::Left, [2.0, 0.0, 0.0, 0.0], 0.3).unwrap();
        assert_eq!(d.values, [2.0, 0.0, 0.0]);
        // phi = x t - t^2/2 has phi_x = t on every line.
        let d = ilw_neumann_1d(&h, Side::Left, [0.7, 1.0, 0.0, 0.0], 0.7).unwrap();
        assert_eq!(d.values, [0.7, -1.0, 0.0]);
        let flat = Poly1(vec![1.0]);
        assert!(matches!(
            ilw_neumann_1d(&flat, Side::Left, [0.0; 4], 0.0),
            Err(HjError::DegenerateCharacteristic { .. })
        ));
    }

    /// Smooth Burgers solution with sinusoidal data and its exact `x`-derivatives.
    fn sine_burgers() -> (Characteristics, impl Fn(f64, f64) -> [f64; 3]) {
        let ch = Characteristics {
            phi0: Arc::new(|x: f64| 0.3 * x.sin()),
            dphi0: Arc::new(|x: f64| 0.3 * x.cos()),
            d2phi0: Arc::new(|x: f64| -0.3 * x.sin()),
            h: Arc::new(|u| 0.5 * (u + 1.0) * (u + 1.0)),
            dh: Arc::new(|u| u + 1.0),
            d2h: Arc::new(|_| 1.0),
            speed: 1.3,
        };
        let c2 = ch.clone();
        let derivs = move |x: f64, t: f64| {
            let x0 = c2.foot(x, t);
            let j = 1.0 + t * -0.3 * x0.sin();
            [
                0.3 * x0.cos(),
                -0.3 * x0.sin() / j,
                -0.3 * x0.cos() / j.powi(3),
            ]
        };
        (ch, derivs)
    }

    #[test]
    fn nonlinear_cascade_matches_characteristics() {
        let h = burgers();
        let (ch, exact) = sine_burgers();
        let a = 0.4;
        let t = 0.3;
        // time derivatives of the boundary trace by sixth-order differences
        let dt = 2e-3;
        let f = |s: f64| ch.solution(a, s);
        let v: Vec<f64> = (-3..=3).map(|i| f(t + i as f64 * dt)).collect();
        let f1 = (-v[0] + 9.0 * v[1] - 45.0 * v[2] + 45.0 * v[4] - 9.0 * v[5] + v[6]) / (60.0 * dt);
        let f2 = (2.0 * v[0] - 27.0 * v[1] + 270.0 * v[2] - 490.0 * v[3] + 270.0 * v[4]
            - 27.0 * v[5]
            + 2.0 * v[6])
            / (180.0 * dt * dt);
        let f3 = (v[0] - 8.0 * v[1] + 13.0 * v[2] - 13.0 * v[4] + 8.0 * v[5] - v[6])
            / (8.0 * dt.powi(3));
        let (d, _) = ilw_dirichlet_1d(&h, Side::Left, [v[3], f1, f2, f3], t, 0.0).unwrap();
        let want = exact(a, t);
        for m in 1..=3 {
            assert!(
                (d.d(m) - want[m - 1]).abs() < 1e-6,
                "m={m}: {} vs {}",
                d.d(m),
                want[m - 1]
            );
        }
    }

    // ---- 2D ----

    /// `H(u, v) = (u^2 + v^2) / 2`.
    struct Eikonalish;

    impl Hamiltonian2D for Eikonalish {
        fn h(&self, _: f64, _: f64, u: f64, v: f64) -> f64 {
            0.5 * (u * u + v * v)
        }
        fn grad(&self, _: f64, _: f64, u: f64, v: f64) -> [f64; 2] {
            [u, v]
        }
        fn hessian(&self, _: f64, _: f64, _: f64, _: f64) -> [f64; 3] {
            [1.0, 0.0, 1.0]
        }
    }

    struct Linear2(f64);

    impl Hamiltonian2D for Linear2 {
        fn h(&self, _: f64, _: f64, u: f64, v: f64) -> f64 {
            self.0 * (u + v)
        }
        fn grad(&self, _: f64, _: f64, _: f64, _: f64) -> [f64; 2] {
            [self.0, self.0]
        }
        fn hessian(&self, _: f64, _: f64, _: f64, _: f64) -> [f64; 3] {
            [0.0; 3]
        }
    }

    /// Edge data of `sin(x + y + c t)` on an edge at `normal`, all partials analytic.
    fn sine_plane_data(normal: f64, c: f64) -> EdgeData {
        Arc::new(move |s, t| {
            let z = normal + s + c * t;
            let ds = [z.sin(), z.cos(), -z.sin(), -z.cos()];
            let mut d = [[0.0; 4]; 4];
            for i in 0..4 {
                for j in 0..4 - i {
                    d[i][j] = c.powi(i as i32) * ds[(i + j) % 4];
                }
            }
            EdgePartials { d }
        })
    }

    #[test]
    fn linear_2d_dirichlet_on_all_edges() {
        let ys: Vec<f64> = (0..=8).map(|j| -1.0 + 0.25 * j as f64).collect();
        let t = 0.35;
        for (hsign, edges_ok, edges_bad) in [
            (1.0, [Edge::Left, Edge::Bottom], [Edge::Right, Edge::Top]),
            (-1.0, [Edge::Right, Edge::Top], [Edge::Left, Edge::Bottom]),
        ] {
            let h = Linear2(hsign);
            let c = -2.0 * hsign;
            let data = sine_plane_data(0.5, c);
            for edge in edges_ok {
                let geom = EdgeGeometry {
                    edge,
                    normal_coord: 0.5,
                    tangent: &ys,
                    tangent_periodic: false,
                };
                let out = ilw_dirichlet_2d(&h, &geom, &data, t, &vec![0.0; ys.len()]).unwrap();
                for (j, (d, sel)) in out.iter().enumerate() {
                    let z = 0.5 + ys[j] + c * t;
                    assert_eq!(sel.reason, SelectionReason::Unique);
                    assert!((d.d(1) - z.cos()).abs() < 1e-10);
                    assert!((d.d(2) + z.sin()).abs() < 1e-10);
                    assert!((d.d(3) + z.cos()).abs() < 1e-10);
                }
            }
            for edge in edges_bad {
                let geom = EdgeGeometry {
                    edge,
                    normal_coord: 0.5,
                    tangent: &ys,
                    tangent_periodic: false,
                };
                assert!(matches!(
                    ilw_dirichlet_2d(&h, &geom, &data, t, &vec![0.0; ys.len()]),
                    Err(HjError::NoInflowRoot { node: Some(0), .. })
                ));
            }
        }
    }

    /// `phi(x, y, t) = psi(x cos th + y sin th, t)` with `psi_t + psi_s^2 / 2 = 0`.
    /// Returns `psi` partials `[∂_t^i ∂_s^j]` for `i + j <= 4` (entries past order 3 unused).
    struct RotatedBurgers {
        ch: Characteristics,
        theta: f64,
    }

    impl RotatedBurgers {
        fn new() -> Self {
            Self {
                ch: Characteristics {
                    phi0: Arc::new(|s: f64| 2.0 * s + 0.3 * s.sin()),
                    dphi0: Arc::new(|s: f64| 2.0 + 0.3 * s.cos()),
                    d2phi0: Arc::new(|s: f64| -0.3 * s.sin()),
                    h: Arc::new(|u| 0.5 * u * u),
                    dh: Arc::new(|u| u),
                    d2h: Arc::new(|_| 1.0),
                    speed: 2.3,
                },
                theta: 0.6,
            }
        }

        /// `psi`, `psi_s`, ... with mixed time derivatives from the 1D PDE.
        fn psi(&self, s: f64, t: f64) -> [[f64; 5]; 5] {
            let x0 = self.ch.foot(s, t);
            let j = 1.0 - 0.3 * t * x0.sin();
            let u = 2.0 + 0.3 * x0.cos();
            let uss = -0.3 * x0.sin() / j;
            let usss = -0.3 * x0.cos() / j.powi(3);
            let mut p = [[0.0; 5]; 5];
            p[0][0] = self.ch.solution(s, t);
            p[0][1] = u;
            p[0][2] = uss;
            p[0][3] = usss;
            p[1][0] = -0.5 * u * u;
            p[1][1] = -u * uss;
            p[1][2] = -(uss * uss + u * usss);
            p[2][0] = u * u * uss;
            p[2][1] = 2.0 * u * uss * uss + u * u * usss;
            p[3][0] = -3.0 * u * u * uss * uss - u.powi(3) * usss;
            p
        }

        fn coord(&self, edge: Edge, normal: f64, s: f64) -> f64 {
            let (c, sn) = (self.theta.cos(), self.theta.sin());
            if edge.normal_is_x() {
                normal * c + s * sn
            } else {
                s * c + normal * sn
            }
        }

        /// (normal, tangential) direction cosines.
        fn dirs(&self, edge: Edge) -> (f64, f64) {
            let (c, sn) = (self.theta.cos(), self.theta.sin());
            if edge.normal_is_x() {
                (c, sn)
            } else {
                (sn, c)
            }
        }
    }

    fn rotated_dirichlet(rb: Arc<RotatedBurgers>, edge: Edge, normal: f64) -> EdgeData {
        Arc::new(move |s, t| {
            let p = rb.psi(rb.coord(edge, normal, s), t);
            let (_, ts) = rb.dirs(edge);
            let mut d = [[0.0; 4]; 4];
            for i in 0..4 {
                for j in 0..4 - i {
                    d[i][j] = ts.powi(j as i32) * p[i][j];
                }
            }
            EdgePartials { d }
        })
    }

    fn rotated_neumann(rb: Arc<RotatedBurgers>, edge: Edge, normal: f64) -> EdgeData {
        Arc::new(move |s, t| {
            let p = rb.psi(rb.coord(edge, normal, s), t);
            let (tn, ts) = rb.dirs(edge);
            let mut d = [[0.0; 4]; 4];
            for i in 0..3 {
                for j in 0..3 - i {
                    d[i][j] = tn * ts.powi(j as i32) * p[i][j + 1];
                }
            }
            EdgePartials { d }
        })
    }

    #[test]
    fn nonlinear_2d_dirichlet_matches_rotated_solution() {
        let rb = Arc::new(RotatedBurgers::new());
        let ss: Vec<f64> = (0..=10).map(|j| -1.0 + 0.2 * j as f64).collect();
        let t = 0.25;
        for edge in [Edge::Left, Edge::Bottom] {
            let data = rotated_dirichlet(rb.clone(), edge, -0.7);
            let geom = EdgeGeometry {
                edge,
                normal_coord: -0.7,
                tangent: &ss,
                tangent_periodic: false,
            };
            let out = ilw_dirichlet_2d(&Eikonalish, &geom, &data, t, &vec![1.0; ss.len()]).unwrap();
            let (tn, _) = rb.dirs(edge);
            for (j, (d, sel)) in out.iter().enumerate() {
                let p = rb.psi(rb.coord(edge, -0.7, ss[j]), t);
                assert_eq!(sel.reason, SelectionReason::SignOfDerivative);
                for m in 1..=3 {
                    let want = tn.powi(m as i32) * p[0][m];
                    assert!(
                        (d.d(m) - want).abs() < 1e-9,
                        "{edge:?} node {j} m={m}: {} vs {want}",
                        d.d(m)
                    );
                }
            }
        }
    }

    #[test]
    fn nonlinear_2d_neumann_converges_at_fourth_order() {
        let rb = Arc::new(RotatedBurgers::new());
        let t = 0.25;
        let err = |n: usize| {
            let ss: Vec<f64> = (0..=n).map(|j| -1.0 + 2.0 * j as f64 / n as f64).collect();
            let edge = Edge::Left;
            let phi: Vec<f64> = ss
                .iter()
                .map(|&s| rb.psi(rb.coord(edge, -0.7, s), t)[0][0])
                .collect();
            let data = rotated_neumann(rb.clone(), edge, -0.7);
            let geom = EdgeGeometry {
                edge,
                normal_coord: -0.7,
                tangent: &ss,
                tangent_periodic: false,
            };
            let out = ilw_neumann_2d(&Eikonalish, &geom, &data, t, &phi).unwrap();
            let (tn, _) = rb.dirs(edge);
            let mut e = 0.0f64;
            for (j, d) in out.iter().enumerate() {
                let p = rb.psi(rb.coord(edge, -0.7, ss[j]), t);
                assert!((d.d(1) - tn * p[0][1]).abs() < 1e-14);
                e = e.max((d.d(2) - tn * tn * p[0][2]).abs());
            }
            e
        };
        let (e1, e2) = (err(40), err(80));
        assert!(e2 < 1e-7, "{e2}");
        assert!((e1 / e2).log2() > 3.5, "order {}", (e1 / e2).log2());
    }

    #[test]
    fn neumann_with_exact_tangential_data_matches_dirichlet() {
        // fine tangential grid: differencing error well below the tolerance
        let rb = Arc::new(RotatedBurgers::new());
        let t = 0.1;
        let edge = Edge::Bottom;
        let ss: Vec<f64> = (0..=400).map(|j| -1.0 + 0.005 * j as f64).collect();
        let phi: Vec<f64> = ss
            .iter()
            .map(|&s| rb.psi(rb.coord(edge, 0.2, s), t)[0][0])
            .collect();
        let geom = EdgeGeometry {
            edge,
            normal_coord: 0.2,
            tangent: &ss,
            tangent_periodic: false,
        };
        let n = ilw_neumann_2d(
            &Eikonalish,
            &geom,
            &rotated_neumann(rb.clone(), edge, 0.2),
            t,
            &phi,
        )
        .unwrap();
        let d = ilw_dirichlet_2d(
            &Eikonalish,
            &geom,
            &rotated_dirichlet(rb, edge, 0.2),
            t,
            &vec![1.0; ss.len()],
        )
        .unwrap();
        for j in (0..ss.len()).step_by(37) {
            for m in 1..=3 {
                assert!((n[j].d(m) - d[j].0.d(m)).abs() < 1e-7, "node {j} m={m}");
            }
        }
    }

    #[test]
    fn constant_edge_reduces_to_scalar_roots() {
        struct Quartic2;
        impl Hamiltonian2D for Quartic2 {
            fn h(&self, _: f64, _: f64, u: f64, v: f64) -> f64 {
                0.25 * (u * u - 1.0) * (u * u - 4.0) + 0.25 * (v * v - 1.0) * (v * v - 4.0) - 1.0
            }
            fn grad(&self, _: f64, _: f64, u: f64, v: f64) -> [f64; 2] {
                [u.powi(3) - 2.5 * u, v.powi(3) - 2.5 * v]
            }
        }
        let data: EdgeData = Arc::new(|_, _| EdgePartials::default());
        let ss: Vec<f64> = (0..=6).map(|j| j as f64).collect();
        let geom = EdgeGeometry {
            edge: Edge::Left,
            normal_coord: 0.0,
            tangent: &ss,
            tangent_periodic: false,
        };
        // H(p, 0) = 0 ⇔ (p^2 - 1)(p^2 - 4) = 0, same as the 1D quartic.
        let out = ilw_dirichlet_2d(
            &Quartic2,
            &geom,
            &data,
            0.0,
            &[1.7, -0.9, 0.1, 2.5, -3.0, 1.4, 1.6],
        )
        .unwrap();
        let want = [2.0, -1.0, -1.0, 2.0, -1.0, 2.0, 2.0];
        for (j, (d, _)) in out.iter().enumerate() {
            assert!((d.d(1) - want[j]).abs() < 1e-12, "node {j}");
        }
    }

    #[test]
    fn tangential_differencing_periodic_and_bounded() {
        let n = 64;
        let xs: Vec<f64> = (0..=n).map(|j| 2.0 * PI * j as f64 / n as f64).collect();
        let v: Vec<f64> = xs.iter().map(|x| x.sin()).collect();
        let (d1, d2) = tangential_derivatives(&v, &xs, true).unwrap();
        let (b1, b2) = tangential_derivatives(&v, &xs, false).unwrap();
        for j in 0..=n {
            assert!((d1[j] - xs[j].cos()).abs() < 1e-5);
            assert!((d2[j] + xs[j].sin()).abs() < 1e-5);
            assert!((b1[j] - xs[j].cos()).abs() < 1e-4);
            assert!((b2[j] + xs[j].sin()).abs() < 2e-3);
        }
        assert!(matches!(
            tangential_derivatives(&v[..4], &xs[..4], false),
            Err(HjError::InsufficientNodes { .. })
        ));
    }

    #[test]
    fn spatially_varying_hamiltonian_is_rejected_at_inflow_edges() {
        struct Varying;
        impl Hamiltonian2D for Varying {
            fn h(&self, x: f64, _: f64, u: f64, _: f64) -> f64 {
                x * u
            }
            fn grad(&self, x: f64, _: f64, _: f64, _: f64) -> [f64; 2] {
                [x, 0.0]
            }
            fn spatially_varying(&self) -> bool {
                true
            }
        }
        let data: EdgeData = Arc::new(|_, _| EdgePartials::default());
        let ss = [0.0, 1.0, 2.0, 3.0, 4.0];
        let geom = EdgeGeometry {
            edge: Edge::Left,
            normal_coord: 1.0,
            tangent: &ss,
            tangent_periodic: false,
        };
        assert!(matches!(
            ilw_dirichlet_2d(&Varying, &geom, &data, 0.0, &[0.0; 5]),
            Err(HjError::InvalidConfig(_))
        ));
    }

    #[test]
    fn side_dispatch_uses_condition() {
        let g = Grid1D::uniform(0.0, 1.0, 10).unwrap();
        let phi: Vec<f64> = g.nodes().iter().map(|x| x * x).collect();
        let h = Poly1(vec![0.0, 1.0]);
        let out = side_derivatives_1d(&SideCondition1D::Outflow, &h, Side::Right, 0.0, &phi, &g, 2)
            .unwrap();
        assert!((out.derivatives.d(1) - 2.0).abs() < 1e-10 && out.selection.is_none());
        let dir = SideCondition1D::Dirichlet(Arc::new(|t| [t, 1.0, 0.0, 0.0]));
        let out = side_derivatives_1d(&dir, &h, Side::Left, 0.0, &phi, &g, 3).unwrap();
        assert!((out.derivatives.d(1) + 1.0).abs() < 1e-12);
        assert_eq!(out.derivatives.provenance, Provenance::Ilw);
        assert!(out.selection.is_some());
    }
}
