//! Exponentially weighted cell integrals and the O(N) recursive sweeps.
//!
//! For a line with nodes `x_0 < ... < x_N` and a kernel rate `gamma`, the left and
//! right cell integrals are
//!
//! ```text
//! J^L_i = gamma * ∫_{x_{i-1}}^{x_i}   v(y) exp(-gamma (x_i - y)) dy,   i = 1..N
//! J^R_i = gamma * ∫_{x_i}^{x_{i+1}}   v(y) exp(-gamma (y - x_i)) dy,   i = 0..N-1
//! ```
//!
//! and the running convolutions follow from
//! `I^L_i = exp(-gamma dx_i) I^L_{i-1} + J^L_i` (left to right) and its mirror.
//!
//! Every cell integral is evaluated in a local coordinate `t` in which the cell is
//! `[0, 1]` and the kernel is `nu * exp(-nu (1 - t))`, `nu = gamma * dx`. The right
//! integral is the left one seen through the reflection `t = (x_{i+1} - y) / dx_{i+1}`,
//! so one set of rules serves both directions.

use crate::error::{HjError, Result};
use crate::grid::{Grid1D, MIN_CELLS_QUADRATURE};

/// Highest monomial degree whose exponential moment is tabulated.
pub const MAX_MOMENT: usize = 5;

/// WENO-Z regularisation.
pub const WENO_EPS: f64 = 1e-6;

const SERIES_THRESHOLD: f64 = 2.0;
const SERIES_MAX_TERMS: usize = 80;
const UNIFORM_TOL: f64 = 1e-12;

/// Moments of the exponential kernel over the unit cell.
///
/// `toward_end[m] = ∫_0^1 exp(-nu (1 - s)) s^m ds` and
/// `toward_start[m] = ∫_0^1 exp(-nu s) s^m ds`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpMoments {
    pub nu: f64,
    pub toward_end: [f64; MAX_MOMENT + 1],
    pub toward_start: [f64; MAX_MOMENT + 1],
}

impl ExpMoments {
    /// Small `nu` uses the alternating Taylor series (no `1 - exp(-nu)` cancellation);
    /// larger `nu` uses the integration-by-parts recurrences, which are stable there.
    pub fn new(nu: f64) -> Self {
        debug_assert!(nu >= 0.0);
        let mut toward_end = [0.0; MAX_MOMENT + 1];
        let mut toward_start = [0.0; MAX_MOMENT + 1];
        if nu < SERIES_THRESHOLD {
            for m in 0..=MAX_MOMENT {
                // sum_n (-nu)^n m! / (m + n + 1)!
                let mut term = 1.0 / (m as f64 + 1.0);
                let mut sum = term;
                // sum_n (-nu)^n / (n! (m + n + 1))
                let mut c = 1.0;
                let mut sum_start = 1.0 / (m as f64 + 1.0);
                for n in 1..SERIES_MAX_TERMS {
                    term *= -nu / (m + n + 1) as f64;
                    sum += term;
                    c *= -nu / n as f64;
                    let t2 = c / (m + n + 1) as f64;
                    sum_start += t2;
                    if term.abs() < 1e-18 * sum.abs() && t2.abs() < 1e-18 * sum_start.abs() {
                        break;
                    }
                }
                toward_end[m] = sum;
                toward_start[m] = sum_start;
            }
        } else {
            let e = (-nu).exp();
            let m0 = -(-nu).exp_m1() / nu;
            toward_end[0] = m0;
            toward_start[0] = m0;
            for m in 1..=MAX_MOMENT {
                toward_end[m] = (1.0 - m as f64 * toward_end[m - 1]) / nu;
                toward_start[m] = (m as f64 * toward_start[m - 1] - e) / nu;
            }
        }
        Self {
            nu,
            toward_end,
            toward_start,
        }
    }
}

/// Free-function form of [`ExpMoments::new`]; entries above `m_max` are left at zero.
pub fn exp_moments(nu: f64, m_max: usize) -> ExpMoments {
    let mut out = ExpMoments::new(nu);
    for m in (m_max + 1)..=MAX_MOMENT {
        out.toward_end[m] = 0.0;
        out.toward_start[m] = 0.0;
    }
    out
}

/// Coefficients (lowest degree first) of the Lagrange basis polynomial for node `j`.
/// Stencils have at most six nodes; unused trailing entries are zero.
fn lagrange_coefficients(t: &[f64], j: usize) -> Result<[f64; 6]> {
    debug_assert!(t.len() <= 6);
    let mut coeffs = [0.0; 6];
    coeffs[0] = 1.0;
    let mut degree = 0;
    let mut denom = 1.0;
    for (l, &tl) in t.iter().enumerate() {
        if l == j {
            continue;
        }
        degree += 1;
        for d in (0..=degree).rev() {
            let up = if d > 0 { coeffs[d - 1] } else { 0.0 };
            coeffs[d] = up - coeffs[d] * tl;
        }
        denom *= t[j] - tl;
    }
    if denom == 0.0 || !denom.is_finite() {
        return Err(HjError::SingularQuadrature(j));
    }
    for c in coeffs.iter_mut() {
        *c /= denom;
    }
    Ok(coeffs)
}

/// Nodal weights of `nu ∫_0^1 p(t) exp(-nu (1 - t)) dt` where `p` interpolates at `t`.
fn moment_weights<const N: usize>(t: &[f64; N], moments: &ExpMoments) -> Result<[f64; N]> {
    let mut w = [0.0; N];
    for (j, wj) in w.iter_mut().enumerate() {
        let c = lagrange_coefficients(t, j)?;
        *wj = moments.nu
            * c.iter()
                .zip(&moments.toward_end)
                .map(|(a, b)| a * b)
                .sum::<f64>();
    }
    Ok(w)
}

/// WENO sub-stencil rules for one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct WenoWeights {
    /// Quadrature weights of the three four-point sub-stencils `S_r`, which cover
    /// stencil positions `r..r+4`.
    pub sub: [[f64; 4]; 3],
    /// Linear weights `d_r`; `sum_r d_r * sub[r]` equals the six-point rule.
    pub linear: [f64; 3],
    /// Local coordinates of the six stencil nodes.
    pub coords: [f64; 6],
    /// Whether the stencil is uniform (closed-form smoothness indicators apply).
    pub uniform: bool,
}

/// Per-cell weights mapping six stencil values to a cell integral.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureWeights {
    /// Global node indices of the stencil in local-coordinate order. Indices may fall
    /// outside `0..=N` on periodic lines; they are wrapped when values are read.
    pub nodes: [isize; 6],
    pub weights: [f64; 6],
    /// `None` when the cell uses the linear rule only (boundary-shifted stencil or
    /// a cell whose linear weights would be negative).
    pub weno: Option<WenoWeights>,
    /// Set when WENO was requested but `d_r < 0` forced the linear rule.
    pub negative_linear_weights: bool,
}

impl QuadratureWeights {
    pub fn apply(&self, v: &[f64], wrap: usize) -> f64 {
        let mut s = 0.0;
        for k in 0..6 {
            s += self.weights[k] * v[wrap_index(self.nodes[k], wrap)];
        }
        s
    }
}

#[inline]
fn wrap_index(j: isize, wrap: usize) -> usize {
    if wrap == 0 {
        j as usize
    } else {
        j.rem_euclid(wrap as isize) as usize
    }
}

/// Direction of the cell integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Direction {
    Left,
    Right,
}

/// Physical coordinate of a (possibly ghost) node on a periodic line.
fn node_coord(grid: &Grid1D, j: isize, periodic: bool) -> f64 {
    let n = grid.cells() as isize;
    if periodic {
        let k = j.rem_euclid(n);
        let shift = (j - k) / n;
        grid.nodes()[k as usize] + shift as f64 * grid.length()
    } else {
        grid.nodes()[j as usize]
    }
}

/// Stencil of one cell integral: node indices, local coordinates and `nu = gamma dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Stencil {
    nodes: [isize; 6],
    coords: [f64; 6],
    nu: f64,
    shifted: bool,
}

impl Stencil {
    /// Same weights: every input of the weight computation is bitwise equal.
    fn same_shape(&self, other: &Stencil) -> bool {
        self.shifted == other.shifted
            && self.nu.to_bits() == other.nu.to_bits()
            && self
                .coords
                .iter()
                .zip(&other.coords)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

fn build_rule(
    grid: &Grid1D,
    cell: usize,
    gamma: f64,
    periodic: bool,
    direction: Direction,
) -> Result<QuadratureWeights> {
    grid.ensure_fits(MIN_CELLS_QUADRATURE)?;
    rule_for(&stencil(grid, cell, gamma, periodic, direction))
}

fn stencil(
    grid: &Grid1D,
    cell: usize,
    gamma: f64,
    periodic: bool,
    direction: Direction,
) -> Stencil {
    let n = grid.cells();
    // Cell [x_lo, x_hi] with the kernel peaked at `peak`.
    let (lo, hi) = match direction {
        Direction::Left => (cell as isize - 1, cell as isize),
        Direction::Right => (cell as isize, cell as isize + 1),
    };
    let mut shifted = false;
    // Natural stencil in local order: for J^L it is x_{i-3}..x_{i+2}; for J^R the
    // mirror x_{i+3}..x_{i-2}.
    let mut nodes = [0isize; 6];
    match direction {
        Direction::Left => {
            let mut start = cell as isize - 3;
            if !periodic {
                let clamped = start.clamp(0, n as isize - 5);
                shifted = clamped != start;
                start = clamped;
            }
            for (k, node) in nodes.iter_mut().enumerate() {
                *node = start + k as isize;
            }
        }
        Direction::Right => {
            let mut top = cell as isize + 3;
            if !periodic {
                let clamped = top.clamp(5, n as isize);
                shifted = clamped != top;
                top = clamped;
            }
            for (k, node) in nodes.iter_mut().enumerate() {
                *node = top - k as isize;
            }
        }
    }
    let x_lo = node_coord(grid, lo, periodic);
    let x_hi = node_coord(grid, hi, periodic);
    let dx = x_hi - x_lo;
    let nu = gamma * dx;
    let mut coords = [0.0; 6];
    for k in 0..6 {
        let x = node_coord(grid, nodes[k], periodic);
        coords[k] = match direction {
            Direction::Left => (x - x_lo) / dx,
            Direction::Right => (x_hi - x) / dx,
        };
    }
    // On uniform stretches the coordinates are integers up to round-off; exact values
    // make neighbouring stencils identical so their rules can be shared.
    let h = grid.mean_width();
    let (mut coords, mut nu) = (coords, nu);
    if ((dx - h) / h).abs() < UNIFORM_TOL
        && coords.iter().all(|c| (c - c.round()).abs() < UNIFORM_TOL)
    {
        coords = coords.map(f64::round);
        nu = gamma * h;
    }
    Stencil {
        nodes,
        coords,
        nu,
        shifted,
    }
}

fn rule_for(st: &Stencil) -> Result<QuadratureWeights> {
    let Stencil {
        nodes,
        coords,
        nu,
        shifted,
    } = *st;
    let moments = ExpMoments::new(nu);
    let weights = moment_weights(&coords, &moments)?;

    let mut negative_linear_weights = false;
    let weno = if shifted {
        None
    } else {
        let mut sub = [[0.0; 4]; 3];
        for (r, s) in sub.iter_mut().enumerate() {
            let t: [f64; 4] = [coords[r], coords[r + 1], coords[r + 2], coords[r + 3]];
            *s = moment_weights(&t, &moments)?;
        }
        // Node 0 only appears in S_0 and node 5 only in S_2.
        let d0 = weights[0] / sub[0][0];
        let d2 = weights[5] / sub[2][3];
        let d1 = 1.0 - d0 - d2;
        let linear = [d0, d1, d2];
        if linear.iter().any(|d| !(*d >= 0.0)) {
            negative_linear_weights = true;
            None
        } else {
            let uniform = coords
                .iter()
                .enumerate()
                .all(|(k, &c)| (c - (k as f64 - 2.0)).abs() < UNIFORM_TOL);
            Some(WenoWeights {
                sub,
                linear,
                coords,
                uniform,
            })
        }
    };
    Ok(QuadratureWeights {
        nodes,
        weights,
        weno,
        negative_linear_weights,
    })
}

/// Linear six-point rule for `J^L_i` (cell `[x_{i-1}, x_i]`), exact for degree <= 5.
pub fn linear_weights_jl(
    grid: &Grid1D,
    i: usize,
    gamma: f64,
    periodic: bool,
) -> Result<QuadratureWeights> {
    if i == 0 || i > grid.cells() {
        return Err(HjError::InvalidConfig(format!(
            "J^L cell index {i} out of range"
        )));
    }
    build_rule(grid, i, gamma, periodic, Direction::Left)
}

/// Linear six-point rule for `J^R_i` (cell `[x_i, x_{i+1}]`).
pub fn linear_weights_jr(
    grid: &Grid1D,
    i: usize,
    gamma: f64,
    periodic: bool,
) -> Result<QuadratureWeights> {
    if i >= grid.cells() {
        return Err(HjError::InvalidConfig(format!(
            "J^R cell index {i} out of range"
        )));
    }
    build_rule(grid, i, gamma, periodic, Direction::Right)
}

/// Smoothness indicators and the derived filter quantity for one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothnessData {
    pub beta: [f64; 3],
    pub tau5: f64,
    pub beta_max: f64,
    pub beta_min: f64,
    /// `beta_min / beta_max`, in `(0, 1]`.
    pub xi: f64,
}

impl SmoothnessData {
    pub fn from_indicators(beta: [f64; 3]) -> Self {
        let tau5 = (beta[0] - beta[2]).abs();
        let lo = beta[0].min(beta[2]);
        let hi = beta[0].max(beta[2]);
        let beta_max = 1.0 + (tau5 / (WENO_EPS + lo)).powi(2);
        let beta_min = 1.0 + (tau5 / (WENO_EPS + hi)).powi(2);
        Self {
            beta,
            tau5,
            beta_max,
            beta_min,
            xi: beta_min / beta_max,
        }
    }

    /// Smooth-data placeholder (`xi = 1`).
    pub fn smooth() -> Self {
        Self::from_indicators([0.0; 3])
    }
}

/// Closed-form indicators on a uniform six-point stencil (values in local order).
pub fn uniform_indicators(v: &[f64; 6]) -> [f64; 3] {
    let b0 = 13.0 / 12.0 * (-v[0] + 3.0 * v[1] - 3.0 * v[2] + v[3]).powi(2)
        + 0.25 * (v[0] - 5.0 * v[1] + 7.0 * v[2] - 3.0 * v[3]).powi(2);
    let b1 = 13.0 / 12.0 * (-v[1] + 3.0 * v[2] - 3.0 * v[3] + v[4]).powi(2)
        + 0.25 * (v[1] - v[2] - v[3] + v[4]).powi(2);
    let b2 = 13.0 / 12.0 * (-v[2] + 3.0 * v[3] - 3.0 * v[4] + v[5]).powi(2)
        + 0.25 * (-3.0 * v[2] + 7.0 * v[3] - 5.0 * v[4] + v[5]).powi(2);
    [b0, b1, b2]
}

/// `∫_0^1 (q'')^2 + (q''')^2 dt` for the cubic `q` interpolating four points in local
/// coordinates (the cell-width scaling is absorbed by the coordinates).
pub fn cubic_indicator(t: &[f64; 4], v: &[f64; 4]) -> f64 {
    let mut c = [0.0; 4];
    for j in 0..4 {
        // t is strictly distinct on valid stencils
        let basis = lagrange_coefficients(t, j).expect("distinct stencil nodes");
        for (d, b) in basis.iter().take(4).enumerate() {
            c[d] += v[j] * b;
        }
    }
    let (c2, c3) = (c[2], c[3]);
    4.0 * c2 * c2 + 12.0 * c2 * c3 + 48.0 * c3 * c3
}

fn indicators(w: &WenoWeights, v: &[f64; 6]) -> [f64; 3] {
    if w.uniform {
        uniform_indicators(v)
    } else {
        let mut beta = [0.0; 3];
        for (r, b) in beta.iter_mut().enumerate() {
            let t = [
                w.coords[r],
                w.coords[r + 1],
                w.coords[r + 2],
                w.coords[r + 3],
            ];
            let vv = [v[r], v[r + 1], v[r + 2], v[r + 3]];
            *b = cubic_indicator(&t, &vv);
        }
        beta
    }
}

/// Result of one WENO-Z cell integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WenoCell {
    pub value: f64,
    pub omega: [f64; 3],
    pub smoothness: SmoothnessData,
}

/// WENO-Z combination of the three sub-stencil integrals for six values in local order.
pub fn weno_combine(w: &WenoWeights, v: &[f64; 6]) -> WenoCell {
    let beta = indicators(w, v);
    let smoothness = SmoothnessData::from_indicators(beta);
    let mut omega = [0.0; 3];
    let mut total = 0.0;
    for r in 0..3 {
        omega[r] = w.linear[r] * (1.0 + smoothness.tau5 / (WENO_EPS + beta[r]));
        total += omega[r];
    }
    let mut value = 0.0;
    for r in 0..3 {
        omega[r] /= total;
        let jr: f64 = (0..4).map(|k| w.sub[r][k] * v[r + k]).sum();
        value += omega[r] * jr;
    }
    WenoCell {
        value,
        omega,
        smoothness,
    }
}

/// WENO-Z approximation of `J^L_i` from the stencil values `v_{i-3}..v_{i+2}`.
///
/// Returns the integral and `xi_i`. Cells whose linear weights go negative fall back
/// to the linear rule with `xi = 1`.
pub fn weno_jl(
    values: &[f64; 6],
    grid: &Grid1D,
    i: usize,
    gamma: f64,
    periodic: bool,
) -> Result<(f64, f64)> {
    let rule = linear_weights_jl(grid, i, gamma, periodic)?;
    Ok(match &rule.weno {
        Some(w) => {
            let c = weno_combine(w, values);
            (c.value, c.smoothness.xi)
        }
        None => (
            rule.weights.iter().zip(values).map(|(a, b)| a * b).sum(),
            1.0,
        ),
    })
}

/// `I^L_0 = 0`, `I^L_i = exp(-gamma dx_i) I^L_{i-1} + J^L_i`. `j[0]` is ignored.
pub fn sweep_il(j: &[f64], grid: &Grid1D, gamma: f64) -> Result<Vec<f64>> {
    check_len(j.len(), grid.len())?;
    let decay: Vec<f64> = grid.widths().map(|w| (-gamma * w).exp()).collect();
    let mut out = vec![0.0; grid.len()];
    sweep_left_into(j, &decay, &mut out);
    Ok(out)
}

/// `I^R_N = 0`, `I^R_i = exp(-gamma dx_{i+1}) I^R_{i+1} + J^R_i`. `j[N]` is ignored.
pub fn sweep_ir(j: &[f64], grid: &Grid1D, gamma: f64) -> Result<Vec<f64>> {
    check_len(j.len(), grid.len())?;
    let decay: Vec<f64> = grid.widths().map(|w| (-gamma * w).exp()).collect();
    let mut out = vec![0.0; grid.len()];
    sweep_right_into(j, &decay, &mut out);
    Ok(out)
}

/// `I^0 = (I^L + I^R) / 2`.
pub fn compose_i0(il: &[f64], ir: &[f64]) -> Result<Vec<f64>> {
    check_len(ir.len(), il.len())?;
    Ok(il.iter().zip(ir).map(|(l, r)| 0.5 * (l + r)).collect())
}

fn check_len(got: usize, expected: usize) -> Result<()> {
    if got != expected {
        return Err(HjError::LengthMismatch { expected, got });
    }
    Ok(())
}

/// `decay[i-1] = exp(-gamma dx_i)`.
fn sweep_left_into(j: &[f64], decay: &[f64], out: &mut [f64]) {
    out[0] = 0.0;
    for i in 1..out.len() {
        out[i] = decay[i - 1] * out[i - 1] + j[i];
    }
}

fn sweep_right_into(j: &[f64], decay: &[f64], out: &mut [f64]) {
    let n = out.len() - 1;
    out[n] = 0.0;
    for i in (0..n).rev() {
        out[i] = decay[i] * out[i + 1] + j[i];
    }
}

/// Which quadrature evaluates the first-power operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QuadratureMode {
    #[default]
    Linear,
    Weno,
}

/// Cached cell rules for one line and one `gamma`.
///
/// Rules depend only on the node positions and `gamma`; they are reused across RK
/// stages and across all rows (or columns) of a tensor grid.
#[derive(Debug, Clone)]
pub struct LineRules {
    gamma: f64,
    periodic: bool,
    cells: usize,
    decay: Vec<f64>,
    left: Vec<QuadratureWeights>,
    right: Vec<QuadratureWeights>,
    /// Cells where WENO was dropped because some `d_r < 0`.
    pub negative_weight_cells: usize,
}

/// Per-cell WENO data gathered while evaluating a line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellDiagnostics {
    pub cell: usize,
    pub beta: [f64; 3],
    pub omega: [f64; 3],
    pub xi: f64,
}

impl LineRules {
    pub fn new(grid: &Grid1D, gamma: f64, periodic: bool) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(HjError::InvalidConfig(format!(
                "gamma must be positive, got {gamma}"
            )));
        }
        grid.ensure_fits(MIN_CELLS_QUADRATURE)?;
        let n = grid.cells();
        let decay: Vec<f64> = grid.widths().map(|w| (-gamma * w).exp()).collect();
        let mut negative = 0;
        let mut build = |cells: std::ops::Range<usize>,
                         direction: Direction|
         -> Result<Vec<QuadratureWeights>> {
            let mut out: Vec<QuadratureWeights> = Vec::with_capacity(n);
            let mut prev: Option<Stencil> = None;
            for i in cells {
                let st = stencil(grid, i, gamma, periodic, direction);
                // Interior cells of a uniform grid share one rule up to the node indices.
                let r = match (prev, out.last()) {
                    (Some(p), Some(last)) if p.same_shape(&st) => QuadratureWeights {
                        nodes: st.nodes,
                        ..last.clone()
                    },
                    _ => rule_for(&st)?,
                };
                negative += r.negative_linear_weights as usize;
                out.push(r);
                prev = Some(st);
            }
            Ok(out)
        };
        let left = build(1..n + 1, Direction::Left)?;
        let right = build(0..n, Direction::Right)?;
        Ok(Self {
            gamma,
            periodic,
            cells: n,
            decay,
            left,
            right,
            negative_weight_cells: negative,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn periodic(&self) -> bool {
        self.periodic
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    /// `exp(-gamma (b - a))`.
    pub fn mu(&self) -> f64 {
        self.decay.iter().product()
    }

    /// `exp(-gamma (x_i - a))` for every node.
    pub fn decay_from_left(&self) -> Vec<f64> {
        let mut out = vec![1.0; self.cells + 1];
        for i in 1..=self.cells {
            out[i] = out[i - 1] * self.decay[i - 1];
        }
        out
    }

    /// `exp(-gamma (b - x_i))` for every node.
    pub fn decay_from_right(&self) -> Vec<f64> {
        let mut out = vec![1.0; self.cells + 1];
        for i in (0..self.cells).rev() {
            out[i] = out[i + 1] * self.decay[i];
        }
        out
    }

    pub fn left_rule(&self, i: usize) -> &QuadratureWeights {
        &self.left[i - 1]
    }

    pub fn right_rule(&self, i: usize) -> &QuadratureWeights {
        &self.right[i]
    }

    fn wrap(&self) -> usize {
        if self.periodic {
            self.cells
        } else {
            0
        }
    }

    /// Left cell integrals into `out[1..=N]` (`out[0] = 0`). In WENO mode `xi[i]`
    /// receives `xi` of cell `i` (`xi[0]` mirrors the last cell on periodic lines,
    /// else it copies cell 1).
    pub fn cell_integrals_left(
        &self,
        v: &[f64],
        mode: QuadratureMode,
        out: &mut [f64],
        xi: Option<&mut [f64]>,
    ) {
        let wrap = self.wrap();
        out[0] = 0.0;
        match (mode, xi) {
            (QuadratureMode::Weno, Some(xi)) => {
                for i in 1..=self.cells {
                    let (val, x) = self.eval_weno(&self.left[i - 1], v, wrap);
                    out[i] = val;
                    xi[i] = x;
                }
                xi[0] = if self.periodic { xi[self.cells] } else { xi[1] };
            }
            (QuadratureMode::Weno, None) => {
                for i in 1..=self.cells {
                    out[i] = self.eval_weno(&self.left[i - 1], v, wrap).0;
                }
            }
            (QuadratureMode::Linear, xi) => {
                for i in 1..=self.cells {
                    out[i] = self.left[i - 1].apply(v, wrap);
                }
                if let Some(xi) = xi {
                    xi.fill(1.0);
                }
            }
        }
    }

    /// Right cell integrals into `out[0..N]` (`out[N] = 0`). `xi[N]` mirrors cell 0 on
    /// periodic lines, else copies cell `N - 1`.
    pub fn cell_integrals_right(
        &self,
        v: &[f64],
        mode: QuadratureMode,
        out: &mut [f64],
        xi: Option<&mut [f64]>,
    ) {
        let wrap = self.wrap();
        let n = self.cells;
        out[n] = 0.0;
        match (mode, xi) {
            (QuadratureMode::Weno, Some(xi)) => {
                for i in 0..n {
                    let (val, x) = self.eval_weno(&self.right[i], v, wrap);
                    out[i] = val;
                    xi[i] = x;
                }
                xi[n] = if self.periodic { xi[0] } else { xi[n - 1] };
            }
            (QuadratureMode::Weno, None) => {
                for i in 0..n {
                    out[i] = self.eval_weno(&self.right[i], v, wrap).0;
                }
            }
            (QuadratureMode::Linear, xi) => {
                for i in 0..n {
                    out[i] = self.right[i].apply(v, wrap);
                }
                if let Some(xi) = xi {
                    xi.fill(1.0);
                }
            }
        }
    }

    fn stencil_values(rule: &QuadratureWeights, v: &[f64], wrap: usize) -> [f64; 6] {
        let mut s = [0.0; 6];
        for k in 0..6 {
            s[k] = v[wrap_index(rule.nodes[k], wrap)];
        }
        s
    }

    fn eval_weno(&self, rule: &QuadratureWeights, v: &[f64], wrap: usize) -> (f64, f64) {
        match &rule.weno {
            Some(w) => {
                let c = weno_combine(w, &Self::stencil_values(rule, v, wrap));
                (c.value, c.smoothness.xi)
            }
            None => (rule.apply(v, wrap), 1.0),
        }
    }

    /// Per-cell WENO data for the left integrals of `v`.
    pub fn left_diagnostics(&self, v: &[f64]) -> Vec<CellDiagnostics> {
        let wrap = self.wrap();
        (1..=self.cells)
            .map(|i| {
                let rule = &self.left[i - 1];
                match &rule.weno {
                    Some(w) => {
                        let c = weno_combine(w, &Self::stencil_values(rule, v, wrap));
                        CellDiagnostics {
                            cell: i,
                            beta: c.smoothness.beta,
                            omega: c.omega,
                            xi: c.smoothness.xi,
                        }
                    }
                    None => CellDiagnostics {
                        cell: i,
                        beta: [0.0; 3],
                        omega: [f64::NAN; 3],
                        xi: 1.0,
                    },
                }
            })
            .collect()
    }

    pub fn sweep_left(&self, j: &[f64], out: &mut [f64]) {
        sweep_left_into(j, &self.decay, out);
    }

    pub fn sweep_right(&self, j: &[f64], out: &mut [f64]) {
        sweep_right_into(j, &self.decay, out);
    }
}
