//! CSV and SVG writers for fields, error tables and diagnostics.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{HjError, Result};
use crate::grid::check_finite;
use crate::quadrature::CellDiagnostics;
use crate::scheme::{FieldData, Mesh, StepDiagnostics};
use crate::study::{ConvergenceRow, OutputFormat};

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

fn checked<'a>(field: &'a FieldData, mesh: &Mesh) -> Result<&'a [f64]> {
    let (values, expected) = match (field, mesh) {
        (FieldData::OneD(f), Mesh::OneD(g)) => (&f.values, g.len()),
        (FieldData::TwoD(f), Mesh::TwoD(g)) => (&f.values, g.node_count()),
        _ => {
            return Err(HjError::InvalidConfig(
                "field and mesh dimensions differ".into(),
            ))
        }
    };
    if values.len() != expected {
        return Err(HjError::LengthMismatch {
            expected,
            got: values.len(),
        });
    }
    check_finite(values)?;
    Ok(values)
}

/// Header `x,phi` or `x,y,phi`. 2D rows are row-major: `x` varies fastest, `y` slowest.
pub fn write_csv(field: &FieldData, mesh: &Mesh, w: &mut impl Write) -> Result<()> {
    let values = checked(field, mesh)?;
    match mesh {
        Mesh::OneD(g) => {
            writeln!(w, "x,phi")?;
            for (x, v) in g.nodes().iter().zip(values) {
                writeln!(w, "{},{}", fmt17(*x), fmt17(*v))?;
            }
        }
        Mesh::TwoD(g) => {
            writeln!(w, "x,y,phi")?;
            let nx1 = g.x.len();
            for (idx, v) in values.iter().enumerate() {
                writeln!(
                    w,
                    "{},{},{}",
                    fmt17(g.x.nodes()[idx % nx1]),
                    fmt17(g.y.nodes()[idx / nx1]),
                    fmt17(*v)
                )?;
            }
        }
    }
    Ok(())
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN: f64 = 40.0;
const CONTOUR_LEVELS: usize = 15;

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        let pad = if y.1 > y.0 { 0.0 } else { 0.5 };
        Self {
            x0: x.0,
            x1: x.1,
            y0: y.0 - pad,
            y1: y.1 + pad,
        }
    }

    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let px = MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN);
        let py = HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN);
        (px, py)
    }
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
            (a.min(x), b.max(x))
        })
}

/// A 1D curve as one polyline, or 2D level sets as one path per contour level.
pub fn write_svg_lines(field: &FieldData, mesh: &Mesh, w: &mut impl Write) -> Result<()> {
    let values = checked(field, mesh)?;
    writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    )?;
    writeln!(
        w,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="gray"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    )?;
    match mesh {
        Mesh::OneD(g) => {
            let frame = Frame::new((g.a(), g.b()), min_max(values));
            let pts: Vec<String> = g
                .nodes()
                .iter()
                .zip(values)
                .map(|(&x, &v)| {
                    let (px, py) = frame.map(x, v);
                    format!("{px:.3},{py:.3}")
                })
                .collect();
            writeln!(
                w,
                r#"<polyline fill="none" stroke="black" points="{}"/>"#,
                pts.join(" ")
            )?;
        }
        Mesh::TwoD(g) => {
            let frame = Frame::new((g.x.a(), g.x.b()), (g.y.a(), g.y.b()));
            let (lo, hi) = min_max(values);
            let nx1 = g.x.len();
            for l in 1..=CONTOUR_LEVELS {
                let level = lo + (hi - lo) * l as f64 / (CONTOUR_LEVELS + 1) as f64;
                let segs = contour_segments(g.x.nodes(), g.y.nodes(), values, nx1, level);
                if segs.is_empty() {
                    continue;
                }
                let mut d = String::new();
                for ((ax, ay), (bx, by)) in segs {
                    let (p0, q0) = frame.map(ax, ay);
                    let (p1, q1) = frame.map(bx, by);
                    d.push_str(&format!("M{p0:.3} {q0:.3}L{p1:.3} {q1:.3}"));
                }
                writeln!(
                    w,
                    r#"<path data-level="{}" fill="none" stroke="black" stroke-width="0.8" d="{d}"/>"#,
                    fmt17(level)
                )?;
            }
        }
    }
    writeln!(w, "</svg>")?;
    Ok(())
}

type Point = (f64, f64);

/// Marching squares on a tensor grid. Saddle cells pair crossings in edge order.
pub fn contour_segments(
    x: &[f64],
    y: &[f64],
    values: &[f64],
    nx1: usize,
    level: f64,
) -> Vec<(Point, Point)> {
    let mut segs = Vec::new();
    let cross = |p: Point, q: Point, a: f64, b: f64| -> Option<Point> {
        if (a < level) == (b < level) {
            return None;
        }
        let s = (level - a) / (b - a);
        Some((p.0 + s * (q.0 - p.0), p.1 + s * (q.1 - p.1)))
    };
    for j in 0..y.len() - 1 {
        for i in 0..x.len() - 1 {
            let c = [
                (x[i], y[j]),
                (x[i + 1], y[j]),
                (x[i + 1], y[j + 1]),
                (x[i], y[j + 1]),
            ];
            let v = [
                values[j * nx1 + i],
                values[j * nx1 + i + 1],
                values[(j + 1) * nx1 + i + 1],
                values[(j + 1) * nx1 + i],
            ];
            let pts: Vec<Point> = (0..4)
                .filter_map(|e| cross(c[e], c[(e + 1) % 4], v[e], v[(e + 1) % 4]))
                .collect();
            for pair in pts.chunks_exact(2) {
                segs.push((pair[0], pair[1]));
            }
        }
    }
    segs
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| HjError::Io(format!("{}: {e}", path.display())))
}

pub fn export_solution(
    field: &FieldData,
    mesh: &Mesh,
    format: OutputFormat,
    path: &Path,
) -> Result<()> {
    let mut w = create(path)?;
    match format {
        OutputFormat::Csv => write_csv(field, mesh, &mut w)?,
        OutputFormat::SvgLines => write_svg_lines(field, mesh, &mut w)?,
    }
    w.flush()?;
    Ok(())
}

/// Columns `N,error,order,wall_seconds,steps`; the first order is empty.
pub fn write_convergence_csv(rows: &[ConvergenceRow], w: &mut impl Write) -> Result<()> {
    writeln!(w, "N,error,order,wall_seconds,steps")?;
    for r in rows {
        let order = r.order.map(fmt17).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{:.6},{}",
            r.mesh_label(),
            fmt17(r.error),
            order,
            r.wall_seconds,
            r.steps
        )?;
    }
    Ok(())
}

/// One row per time step. 2D columns carry an `_x` and `_y` pair; 1D leaves `_y` empty.
pub fn write_step_diagnostics(diags: &[StepDiagnostics], w: &mut impl Write) -> Result<()> {
    writeln!(
        w,
        "step,t,dt,gamma_x,gamma_y,alpha_x,alpha_y,dmin_x,dmax_x,dmin_y,dmax_y,max_change,filter_activations,root_ties,wall_seconds"
    )?;
    let get = |v: &[f64], i: usize| v.get(i).map(|x| fmt17(*x)).unwrap_or_default();
    for d in diags {
        let range = |i: usize, k: usize| {
            d.derivative_range
                .get(i)
                .map(|r| fmt17(r[k]))
                .unwrap_or_default()
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{:.6}",
            d.step,
            fmt17(d.t),
            fmt17(d.dt),
            get(&d.gamma, 0),
            get(&d.gamma, 1),
            get(&d.alpha, 0),
            get(&d.alpha, 1),
            range(0, 0),
            range(0, 1),
            range(1, 0),
            range(1, 1),
            fmt17(d.max_change),
            d.filter_activations,
            d.root_ties,
            d.wall_seconds
        )?;
    }
    Ok(())
}

/// Per-cell WENO data: smoothness indicators, nonlinear weights and the filter input.
pub fn write_cell_diagnostics(cells: &[CellDiagnostics], w: &mut impl Write) -> Result<()> {
    writeln!(w, "cell,beta0,beta1,beta2,omega0,omega1,omega2,xi")?;
    for c in cells {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            c.cell,
            fmt17(c.beta[0]),
            fmt17(c.beta[1]),
            fmt17(c.beta[2]),
            fmt17(c.omega[0]),
            fmt17(c.omega[1]),
            fmt17(c.omega[2]),
            fmt17(c.xi)
        )?;
    }
    Ok(())
}
