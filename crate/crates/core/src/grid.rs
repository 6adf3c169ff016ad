//! Orthogonal, possibly nonuniform, 1D and 2D node sets and the nodal fields living on them.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{HjError, Result};

/// Smallest number of cells accepted by any constructor.
pub const MIN_CELLS: usize = 4;

/// Cells needed for the six-point quadrature stencil to fit inside a line.
pub const MIN_CELLS_QUADRATURE: usize = 6;

/// Strictly increasing nodes `x_0 < x_1 < ... < x_N` on `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    nodes: Vec<f64>,
}

impl Grid1D {
    /// Builds a grid from explicit nodes after validating monotonicity.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < MIN_CELLS + 1 {
            return Err(HjError::InvalidGrid(format!(
                "need at least {} nodes, got {}",
                MIN_CELLS + 1,
                nodes.len()
            )));
        }
        for (i, w) in nodes.windows(2).enumerate() {
            if !(w[1] > w[0]) || !w[0].is_finite() || !w[1].is_finite() {
                return Err(HjError::InvalidGrid(format!(
                    "nodes must be finite and strictly increasing (violated at {})",
                    i + 1
                )));
            }
        }
        Ok(Self { nodes })
    }

    /// `n + 1` equally spaced nodes on `[a, b]`.
    pub fn uniform(a: f64, b: f64, n: usize) -> Result<Self> {
        check_interval(a, b, n)?;
        let h = (b - a) / n as f64;
        let mut nodes: Vec<f64> = (0..=n).map(|i| a + i as f64 * h).collect();
        nodes[n] = b;
        Self::from_nodes(nodes)
    }

    /// Uniform nodes with interior points jittered by `rho * dx * u_i`, `u_i ~ U[-1, 1]`.
    ///
    /// Endpoints stay fixed. The generator is ChaCha8 seeded with `seed`, so equal
    /// arguments give bit-identical grids on every platform.
    pub fn perturbed(a: f64, b: f64, n: usize, rho: f64, seed: u64) -> Result<Self> {
        check_interval(a, b, n)?;
        if !(0.0..0.5).contains(&rho) {
            return Err(HjError::InvalidGrid(format!(
                "perturbation fraction must lie in [0, 0.5), got {rho}"
            )));
        }
        let h = (b - a) / n as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut nodes = Vec::with_capacity(n + 1);
        nodes.push(a);
        for i in 1..n {
            let u: f64 = rng.random_range(-1.0..=1.0);
            nodes.push(a + i as f64 * h + rho * h * u);
        }
        nodes.push(b);
        Self::from_nodes(nodes)
    }

    /// Rejects grids too coarse for a stencil spanning `cells` cells.
    pub fn ensure_fits(&self, cells: usize) -> Result<()> {
        if self.cells() < cells {
            return Err(HjError::InvalidGrid(format!(
                "{} cells cannot hold a stencil needing {} cells",
                self.cells(),
                cells
            )));
        }
        Ok(())
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Number of cells `N`; there are `N + 1` nodes.
    pub fn cells(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn a(&self) -> f64 {
        self.nodes[0]
    }

    pub fn b(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn length(&self) -> f64 {
        self.b() - self.a()
    }

    /// Width of cell `i`, i.e. `x_i - x_{i-1}` for `1 <= i <= N`.
    pub fn width(&self, i: usize) -> f64 {
        self.nodes[i] - self.nodes[i - 1]
    }

    pub fn widths(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.windows(2).map(|w| w[1] - w[0])
    }

    pub fn min_width(&self) -> f64 {
        self.widths().fold(f64::INFINITY, f64::min)
    }

    pub fn max_width(&self) -> f64 {
        self.widths().fold(0.0, f64::max)
    }

    /// `(b - a) / N`.
    pub fn mean_width(&self) -> f64 {
        self.length() / self.cells() as f64
    }

    /// One node per line, 17 significant digits.
    pub fn to_node_list(&self) -> String {
        let mut out = String::with_capacity(self.nodes.len() * 24);
        for x in &self.nodes {
            let _ = writeln!(out, "{x:.16e}");
        }
        out
    }

    pub fn parse_node_list(text: &str) -> Result<Self> {
        let mut nodes = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let x = line.parse::<f64>().map_err(|e| HjError::ConfigParse {
                line: lineno + 1,
                message: e.to_string(),
            })?;
            nodes.push(x);
        }
        Self::from_nodes(nodes)
    }
}

fn check_interval(a: f64, b: f64, n: usize) -> Result<()> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(HjError::InvalidGrid(format!(
            "need finite a < b, got [{a}, {b}]"
        )));
    }
    if n < MIN_CELLS {
        return Err(HjError::InvalidGrid(format!(
            "need at least {MIN_CELLS} cells, got {n}"
        )));
    }
    Ok(())
}

/// Tensor product of an x-axis and a y-axis grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2D {
    pub x: Grid1D,
    pub y: Grid1D,
}

impl Grid2D {
    pub fn new(x: Grid1D, y: Grid1D) -> Self {
        Self { x, y }
    }

    pub fn uniform(ax: f64, bx: f64, nx: usize, ay: f64, by: f64, ny: usize) -> Result<Self> {
        Ok(Self::new(
            Grid1D::uniform(ax, bx, nx)?,
            Grid1D::uniform(ay, by, ny)?,
        ))
    }

    /// Node counts `(N_x + 1, N_y + 1)`.
    pub fn shape(&self) -> (usize, usize) {
        (self.x.len(), self.y.len())
    }

    pub fn node_count(&self) -> usize {
        self.x.len() * self.y.len()
    }

    /// Row-major index: `x` varies fastest.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.x.len() + i
    }
}

/// Nodal values on a [`Grid1D`] at a given time.
#[derive(Debug, Clone, PartialEq)]
pub struct Field1D {
    pub values: Vec<f64>,
    pub time: f64,
}

impl Field1D {
    pub fn new(grid: &Grid1D, values: Vec<f64>, time: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(HjError::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        check_finite(&values)?;
        Ok(Self { values, time })
    }

    pub fn sample(grid: &Grid1D, time: f64, f: impl Fn(f64) -> f64) -> Self {
        Self {
            values: grid.nodes().iter().map(|&x| f(x)).collect(),
            time,
        }
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.values)
    }
}

/// Nodal values on a [`Grid2D`], row-major with `x` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Field2D {
    pub values: Vec<f64>,
    pub time: f64,
}

impl Field2D {
    pub fn new(grid: &Grid2D, values: Vec<f64>, time: f64) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(HjError::LengthMismatch {
                expected: grid.node_count(),
                got: values.len(),
            });
        }
        check_finite(&values)?;
        Ok(Self { values, time })
    }

    pub fn sample(grid: &Grid2D, time: f64, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.node_count());
        for &y in grid.y.nodes() {
            for &x in grid.x.nodes() {
                values.push(f(x, y));
            }
        }
        Self { values, time }
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.values)
    }
}

pub(crate) fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(HjError::NonFinite { index }),
        None => Ok(()),
    }
}

pub(crate) fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m, v| m.max(v.abs()))
}
