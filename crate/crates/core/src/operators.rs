//! Successive-convolution operators `D_L`, `D_R`, `D_0` and the partial sums that
//! turn them into left- and right-biased approximations of `phi_x`.
//!
//! `D_L[v] = v - I^L[v] - A_L exp(-gamma (x - a))`, with `A_L` fixed by the closure;
//! `D_R` is the mirror image and `D_0` uses the symmetric kernel `I^0 = (I^L + I^R)/2`.

use crate::boundary::Side;
use crate::error::{HjError, Result};
use crate::grid::check_finite;
use crate::quadrature::{LineRules, QuadratureMode};

/// How the boundary constants of an operator are chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Closure {
    /// The result is periodic on `[a, b]`.
    Periodic,
    /// The result takes the value `ca` at `a` (`D_L`, `D_0`) and `cb` at `b` (`D_R`, `D_0`).
    Prescribed { ca: f64, cb: f64 },
}

impl Closure {
    pub const ZERO: Closure = Closure::Prescribed { ca: 0.0, cb: 0.0 };
}

fn check_input(rules: &LineRules, v: &[f64]) -> Result<()> {
    let expected = rules.cells() + 1;
    if v.len() != expected {
        return Err(HjError::LengthMismatch {
            expected,
            got: v.len(),
        });
    }
    check_finite(v)
}

/// Applies `D_L`. In WENO mode `xi` (length `N + 1`) receives per-cell smoothness.
pub fn apply_dl(
    rules: &LineRules,
    v: &[f64],
    mode: QuadratureMode,
    closure: Closure,
    xi: Option<&mut [f64]>,
) -> Result<Vec<f64>> {
    check_input(rules, v)?;
    let n = rules.cells();
    let mut j = vec![0.0; n + 1];
    let mut il = vec![0.0; n + 1];
    rules.cell_integrals_left(v, mode, &mut j, xi);
    rules.sweep_left(&j, &mut il);
    let decay = rules.decay_from_left();
    let a_l = match closure {
        Closure::Periodic => il[n] / (1.0 - rules.mu()),
        Closure::Prescribed { ca, .. } => v[0] - ca,
    };
    Ok((0..=n).map(|i| v[i] - il[i] - a_l * decay[i]).collect())
}

/// Applies `D_R`. In WENO mode `xi` receives per-cell smoothness of the right integrals.
pub fn apply_dr(
    rules: &LineRules,
    v: &[f64],
    mode: QuadratureMode,
    closure: Closure,
    xi: Option<&mut [f64]>,
) -> Result<Vec<f64>> {
    check_input(rules, v)?;
    let n = rules.cells();
    let mut j = vec![0.0; n + 1];
    let mut ir = vec![0.0; n + 1];
    rules.cell_integrals_right(v, mode, &mut j, xi);
    rules.sweep_right(&j, &mut ir);
    let decay = rules.decay_from_right();
    let b_r = match closure {
        Closure::Periodic => ir[0] / (1.0 - rules.mu()),
        Closure::Prescribed { cb, .. } => v[n] - cb,
    };
    Ok((0..=n).map(|i| v[i] - ir[i] - b_r * decay[i]).collect())
}

/// Applies `D_0` (always with the linear quadrature).
pub fn apply_d0(rules: &LineRules, v: &[f64], closure: Closure) -> Result<Vec<f64>> {
    check_input(rules, v)?;
    let n = rules.cells();
    let mut jl = vec![0.0; n + 1];
    let mut jr = vec![0.0; n + 1];
    let mut il = vec![0.0; n + 1];
    let mut ir = vec![0.0; n + 1];
    rules.cell_integrals_left(v, QuadratureMode::Linear, &mut jl, None);
    rules.cell_integrals_right(v, QuadratureMode::Linear, &mut jr, None);
    rules.sweep_left(&jl, &mut il);
    rules.sweep_right(&jr, &mut ir);
    let i0: Vec<f64> = il.iter().zip(&ir).map(|(l, r)| 0.5 * (l + r)).collect();
    let mu = rules.mu();
    let (a0, b0) = match closure {
        Closure::Periodic => (i0[n] / (1.0 - mu), i0[0] / (1.0 - mu)),
        Closure::Prescribed { ca, cb } => {
            let ea = i0[0] - v[0] + ca;
            let eb = i0[n] - v[n] + cb;
            let den = 1.0 - mu * mu;
            ((mu * eb - ea) / den, (mu * ea - eb) / den)
        }
    };
    let dl = rules.decay_from_left();
    let dr = rules.decay_from_right();
    Ok((0..=n)
        .map(|i| v[i] - i0[i] - a0 * dl[i] - b0 * dr[i])
        .collect())
}

/// Where a set of boundary derivatives came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Ilw,
    Extrapolation,
    Given,
}

/// `∂_x^m phi` at one end of a line, `values[m - 1]` for `m = 1..=3`.
///
/// Entries above the scheme order are ignored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryDerivatives {
    pub side: Side,
    pub values: [f64; 3],
    pub provenance: Provenance,
}

impl BoundaryDerivatives {
    pub fn new(side: Side, values: [f64; 3], provenance: Provenance) -> Self {
        Self {
            side,
            values,
            provenance,
        }
    }

    pub fn given(side: Side, values: [f64; 3]) -> Self {
        Self::new(side, values, Provenance::Given)
    }

    /// `∂_x^m phi` for `m >= 1`.
    pub fn d(&self, m: usize) -> f64 {
        self.values[m - 1]
    }

    fn validate(&self, k: usize) -> Result<()> {
        if self.values[..k].iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(HjError::MissingBoundaryDerivatives(self.side))
        }
    }
}

/// Exponent applied to the filter for the `p`-th operator power.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SigmaExponent {
    /// `sigma^(p-2)`: the `p = 2` term is never damped.
    #[default]
    PMinus2,
    /// `sigma^(p-1)`.
    PMinus1,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterOptions {
    pub enabled: bool,
    pub exponent: SigmaExponent,
    /// Multiply the `k = 3` `D_0` correction by `sigma`.
    pub filter_d0: bool,
}

impl Default for FilterOptions {
    fn default() -> Self {
        Self {
            enabled: false,
            exponent: SigmaExponent::PMinus2,
            filter_d0: true,
        }
    }
}

impl FilterOptions {
    pub fn on() -> Self {
        Self {
            enabled: true,
            ..Self::default()
        }
    }

    fn power(&self, p: usize) -> i32 {
        match self.exponent {
            SigmaExponent::PMinus2 => p as i32 - 2,
            SigmaExponent::PMinus1 => p as i32 - 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructOptions {
    pub k: usize,
    pub mode: QuadratureMode,
    pub filter: FilterOptions,
}

impl ReconstructOptions {
    pub fn linear(k: usize) -> Self {
        Self {
            k,
            mode: QuadratureMode::Linear,
            filter: FilterOptions::default(),
        }
    }

    pub fn weno_filtered(k: usize) -> Self {
        Self {
            k,
            mode: QuadratureMode::Weno,
            filter: FilterOptions::on(),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.k) {
            return Err(HjError::UnsupportedOrder(self.k));
        }
        Ok(())
    }

    fn filtering(&self) -> bool {
        self.filter.enabled && self.mode == QuadratureMode::Weno
    }
}

/// Left- and right-biased nodal approximations of `phi_x`.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativePair {
    pub minus: Vec<f64>,
    pub plus: Vec<f64>,
    /// Nodes where a filter value dropped below 0.99 (both sides counted).
    pub filter_activations: usize,
}

/// Boundary treatment of one line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LineBoundary {
    Periodic,
    Bounded {
        left: BoundaryDerivatives,
        right: BoundaryDerivatives,
    },
}

/// `sigma_{i,L} = min(xi_{i-1}, xi_i)`, with `xi[i]` the smoothness of cell `[x_{i-1}, x_i]`.
fn sigma_left(xi: &[f64], periodic: bool) -> Vec<f64> {
    let n = xi.len() - 1;
    let mut s = vec![1.0; n + 1];
    for i in 1..=n {
        s[i] = xi[i - 1].min(xi[i]);
    }
    s[0] = if periodic {
        xi[n - 1].min(xi[n])
    } else {
        xi[1]
    };
    s
}

/// `sigma_{i,R} = min(xi_i, xi_{i+1})`, with `xi[i]` the smoothness of cell `[x_i, x_{i+1}]`.
fn sigma_right(xi: &[f64], periodic: bool) -> Vec<f64> {
    let n = xi.len() - 1;
    let mut s = vec![1.0; n + 1];
    for i in 0..n {
        s[i] = xi[i].min(xi[i + 1]);
    }
    s[n] = if periodic {
        xi[0].min(xi[1])
    } else {
        xi[n - 1]
    };
    s
}

fn weight(sigma: Option<&[f64]>, i: usize, power: i32) -> f64 {
    match sigma {
        Some(s) if power > 0 => s[i].powi(power),
        _ => 1.0,
    }
}

/// Approximates `phi_x^-` and `phi_x^+` on one line.
pub fn reconstruct(
    rules: &LineRules,
    phi: &[f64],
    opts: &ReconstructOptions,
    boundary: &LineBoundary,
) -> Result<DerivativePair> {
    match boundary {
        LineBoundary::Periodic => reconstruct_periodic(rules, phi, opts),
        LineBoundary::Bounded { left, right } => reconstruct_bounded(rules, phi, opts, left, right),
    }
}

/// Partial sums for periodic data.
pub fn reconstruct_periodic(
    rules: &LineRules,
    phi: &[f64],
    opts: &ReconstructOptions,
) -> Result<DerivativePair> {
    opts.validate()?;
    let n = rules.cells();
    let gamma = rules.gamma();
    let filtering = opts.filtering();
    let mut xi_l = vec![1.0; n + 1];
    let mut xi_r = vec![1.0; n + 1];

    let mut powers_l = vec![apply_dl(
        rules,
        phi,
        opts.mode,
        Closure::Periodic,
        Some(&mut xi_l),
    )?];
    let mut powers_r = vec![apply_dr(
        rules,
        phi,
        opts.mode,
        Closure::Periodic,
        Some(&mut xi_r),
    )?];
    for _ in 1..opts.k {
        let next_l = apply_dl(
            rules,
            powers_l.last().unwrap(),
            QuadratureMode::Linear,
            Closure::Periodic,
            None,
        )?;
        let next_r = apply_dr(
            rules,
            powers_r.last().unwrap(),
            QuadratureMode::Linear,
            Closure::Periodic,
            None,
        )?;
        powers_l.push(next_l);
        powers_r.push(next_r);
    }
    let (d0_l, d0_r) = if opts.k == 3 {
        (
            Some(apply_d0(rules, &powers_l[1], Closure::Periodic)?),
            Some(apply_d0(rules, &powers_r[1], Closure::Periodic)?),
        )
    } else {
        (None, None)
    };
    let sig_l = filtering.then(|| sigma_left(&xi_l, true));
    let sig_r = filtering.then(|| sigma_right(&xi_r, true));
    Ok(assemble(
        gamma, opts, &powers_l, &powers_r, d0_l, d0_r, sig_l, sig_r,
    ))
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    gamma: f64,
    opts: &ReconstructOptions,
    terms_l: &[Vec<f64>],
    terms_r: &[Vec<f64>],
    d0_l: Option<Vec<f64>>,
    d0_r: Option<Vec<f64>>,
    sig_l: Option<Vec<f64>>,
    sig_r: Option<Vec<f64>>,
) -> DerivativePair {
    let len = terms_l[0].len();
    let mut minus = vec![0.0; len];
    let mut plus = vec![0.0; len];
    let d0_power = if opts.filter.filter_d0 { 1 } else { 0 };
    for i in 0..len {
        let mut m = 0.0;
        let mut p = 0.0;
        for (idx, (tl, tr)) in terms_l.iter().zip(terms_r).enumerate() {
            let pw = if idx == 0 {
                0
            } else {
                opts.filter.power(idx + 1)
            };
            m += weight(sig_l.as_deref(), i, pw) * tl[i];
            p += weight(sig_r.as_deref(), i, pw) * tr[i];
        }
        if let Some(d) = &d0_l {
            m -= weight(sig_l.as_deref(), i, d0_power) * d[i];
        }
        if let Some(d) = &d0_r {
            p -= weight(sig_r.as_deref(), i, d0_power) * d[i];
        }
        minus[i] = gamma * m;
        plus[i] = -gamma * p;
    }
    let count = |s: &Option<Vec<f64>>| {
        s.as_ref()
            .map_or(0, |s| s.iter().filter(|&&x| x < 0.99).count())
    };
    DerivativePair {
        minus,
        plus,
        filter_activations: count(&sig_l) + count(&sig_r),
    }
}

/// Modified partial sums for a bounded line with known boundary derivatives.
///
/// The first operator in each cascade is pinned so that the result collocates the
/// supplied `phi_x` at its own boundary; later ones vanish there.
pub fn reconstruct_bounded(
    rules: &LineRules,
    phi: &[f64],
    opts: &ReconstructOptions,
    left: &BoundaryDerivatives,
    right: &BoundaryDerivatives,
) -> Result<DerivativePair> {
    opts.validate()?;
    left.validate(opts.k)?;
    right.validate(opts.k)?;
    let n = rules.cells();
    let k = opts.k;
    let gamma = rules.gamma();
    let filtering = opts.filtering();
    let el = rules.decay_from_left();
    let er = rules.decay_from_right();

    let mut xi_l = vec![1.0; n + 1];
    let mut xi_r = vec![1.0; n + 1];

    // Left cascade: terms_l[p-1] = D_L[phi_{1,p}].
    let mut terms_l = Vec::with_capacity(k);
    terms_l.push(apply_dl(
        rules,
        phi,
        opts.mode,
        Closure::Prescribed {
            ca: left.d(1) / gamma,
            cb: 0.0,
        },
        Some(&mut xi_l),
    )?);
    let mut phi_1p: Option<Vec<f64>> = None;
    for p in 2..=k {
        // p = 2 subtracts sum (-1/gamma)^m phi^(m)(a); p = 3 adds (m - 1) times it.
        let mut corr = 0.0;
        for m in 2..=k {
            let c = (-1.0 / gamma).powi(m as i32) * left.d(m);
            corr += if p == 2 { -c } else { (m as f64 - 1.0) * c };
        }
        let prev = terms_l.last().unwrap();
        let next: Vec<f64> = (0..=n).map(|i| prev[i] + corr * el[i]).collect();
        terms_l.push(apply_dl(
            rules,
            &next,
            QuadratureMode::Linear,
            Closure::ZERO,
            None,
        )?);
        phi_1p = Some(next);
    }

    let mut terms_r = Vec::with_capacity(k);
    terms_r.push(apply_dr(
        rules,
        phi,
        opts.mode,
        Closure::Prescribed {
            ca: 0.0,
            cb: -right.d(1) / gamma,
        },
        Some(&mut xi_r),
    )?);
    let mut phi_2p: Option<Vec<f64>> = None;
    for p in 2..=k {
        let mut corr = 0.0;
        for m in 2..=k {
            let c = (1.0 / gamma).powi(m as i32) * right.d(m);
            corr += if p == 2 { -c } else { (m as f64 - 1.0) * c };
        }
        let prev = terms_r.last().unwrap();
        let next: Vec<f64> = (0..=n).map(|i| prev[i] + corr * er[i]).collect();
        terms_r.push(apply_dr(
            rules,
            &next,
            QuadratureMode::Linear,
            Closure::ZERO,
            None,
        )?);
        phi_2p = Some(next);
    }

    let (d0_l, d0_r) = if k == 3 {
        (
            Some(apply_d0(rules, phi_1p.as_ref().unwrap(), Closure::ZERO)?),
            Some(apply_d0(rules, phi_2p.as_ref().unwrap(), Closure::ZERO)?),
        )
    } else {
        (None, None)
    };
    let sig_l = filtering.then(|| sigma_left(&xi_l, false));
    let sig_r = filtering.then(|| sigma_right(&xi_r, false));
    Ok(assemble(
        gamma, opts, &terms_l, &terms_r, d0_l, d0_r, sig_l, sig_r,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;
    use std::f64::consts::PI;

    fn rules(a: f64, b: f64, n: usize, gamma: f64, periodic: bool) -> (Grid1D, LineRules) {
        let g = Grid1D::uniform(a, b, n).unwrap();
        let r = LineRules::new(&g, gamma, periodic).unwrap();
        (g, r)
    }

    /// Adaptive Simpson.
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        #[allow(clippy::too_many_arguments)]
        fn rec(
            f: &dyn Fn(f64) -> f64,
            a: f64,
            b: f64,
            fa: f64,
            fm: f64,
            fb: f64,
            whole: f64,
            tol: f64,
            depth: u32,
        ) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                left + right + (left + right - whole) / 15.0
            } else {
                rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                    + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
            }
        }
        if b <= a {
            return 0.0;
        }
        let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        rec(f, a, b, fa, fm, fb, whole, tol, 50)
    }

    #[test]
    fn constants_are_annihilated() {
        let (g, r) = rules(0.0, 1.0, 40, 30.0, true);
        let v = vec![3.7; g.len()];
        for out in [
            apply_dl(&r, &v, QuadratureMode::Linear, Closure::Periodic, None).unwrap(),
            apply_dr(&r, &v, QuadratureMode::Weno, Closure::Periodic, None).unwrap(),
            apply_d0(&r, &v, Closure::Periodic).unwrap(),
        ] {
            assert!(out.iter().all(|x| x.abs() < 1e-13), "{out:?}");
        }
        let (g, r) = rules(0.0, 1.0, 40, 30.0, false);
        let v = vec![3.7; g.len()];
        let dl = apply_dl(&r, &v, QuadratureMode::Linear, Closure::ZERO, None).unwrap();
        assert!(dl.iter().all(|x| x.abs() < 1e-13));
        let dl1 = apply_dl(
            &r,
            &v,
            QuadratureMode::Linear,
            Closure::Prescribed { ca: 1.0, cb: 0.0 },
            None,
        )
        .unwrap();
        assert_eq!(dl1[0], 1.0);
        for (i, &x) in g.nodes().iter().enumerate() {
            assert!((dl1[i] - (-30.0 * x).exp()).abs() < 1e-13);
        }
        let d0 = apply_d0(&r, &v, Closure::ZERO).unwrap();
        assert!(d0[0].abs() < 1e-15 && d0[40].abs() < 1e-15);
        assert!(d0.iter().all(|x| x.abs() < 1e-13));
    }

    #[test]
    fn periodic_dl_of_sine_matches_fourier_symbol() {
        // D_L e^{ix} = (i/gamma)/(1 + i/gamma) e^{ix}
        let gamma = 50.0;
        let (g, r) = rules(-PI, PI, 400, gamma, true);
        let v: Vec<f64> = g.nodes().iter().map(|x| x.sin()).collect();
        let dl = apply_dl(&r, &v, QuadratureMode::Linear, Closure::Periodic, None).unwrap();
        let dr = apply_dr(&r, &v, QuadratureMode::Linear, Closure::Periodic, None).unwrap();
        let d0 = apply_d0(&r, &v, Closure::Periodic).unwrap();
        let s = 1.0 / gamma;
        // symbol z = i s / (1 + i s) = (s^2 + i s) / (1 + s^2)
        let (zr, zi) = (s * s / (1.0 + s * s), s / (1.0 + s * s));
        // D_R symbol: -i s / (1 - i s) = (s^2 - i s)/(1 + s^2); D_0: s^2 / (1 + s^2)
        for (i, &x) in g.nodes().iter().enumerate() {
            let el = zr * x.sin() + zi * x.cos();
            let er = zr * x.sin() - zi * x.cos();
            let e0 = zr * x.sin();
            assert!((dl[i] - el).abs() < 1e-12, "x={x}");
            assert!((dr[i] - er).abs() < 1e-12, "x={x}");
            assert!((d0[i] - e0).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn lemma_expansion_for_left_and_right() {
        let gamma = 50.0;
        let (a, b) = (-PI, PI);
        let (g, r) = rules(a, b, 600, gamma, false);
        let f = |x: f64| (x - 0.3).sin();
        // derivatives of sin(x - 0.3): d^p = sin(x - 0.3 + p pi/2)
        let d = |p: i32, x: f64| (x - 0.3 + p as f64 * PI / 2.0).sin();
        let v: Vec<f64> = g.nodes().iter().map(|&x| f(x)).collect();
        let (ca, cb) = (0.37, -0.81);
        let dl = apply_dl(
            &r,
            &v,
            QuadratureMode::Linear,
            Closure::Prescribed { ca, cb },
            None,
        )
        .unwrap();
        let dr = apply_dr(
            &r,
            &v,
            QuadratureMode::Linear,
            Closure::Prescribed { ca, cb },
            None,
        )
        .unwrap();
        let k = 3;
        for (i, &x) in g.nodes().iter().enumerate().step_by(13) {
            let ea = (-gamma * (x - a)).exp();
            let eb = (-gamma * (b - x)).exp();
            let mut el = ca * ea;
            let mut er = cb * eb;
            for p in 1..=k {
                el -= (-1.0 / gamma).powi(p) * (d(p, x) - d(p, a) * ea);
                er -= (1.0 / gamma).powi(p) * (d(p, x) - d(p, b) * eb);
            }
            let il = simpson(
                &|y| gamma * (-gamma * (x - y)).exp() * d(k + 1, y),
                a,
                x,
                1e-14,
            );
            let ir = simpson(
                &|y| gamma * (-gamma * (y - x)).exp() * d(k + 1, y),
                x,
                b,
                1e-14,
            );
            el -= (-1.0 / gamma).powi(k + 1) * il;
            er -= (1.0 / gamma).powi(k + 1) * ir;
            assert!((dl[i] - el).abs() < 1e-8, "D_L at x={x}: {} vs {el}", dl[i]);
            assert!((dr[i] - er).abs() < 1e-8, "D_R at x={x}: {} vs {er}", dr[i]);
        }
    }

    #[test]
    fn lemma_expansion_for_d0() {
        let gamma = 50.0;
        let (a, b) = (-1.0, 2.0);
        let (g, r) = rules(a, b, 600, gamma, false);
        let d = |p: i32, x: f64| (x + 0.2 + p as f64 * PI / 2.0).sin();
        let v: Vec<f64> = g.nodes().iter().map(|&x| d(0, x)).collect();
        let (ca, cb) = (0.1, 0.25);
        let d0 = apply_d0(&r, &v, Closure::Prescribed { ca, cb }).unwrap();
        let mu = (-gamma * (b - a)).exp();
        let den = 1.0 - mu * mu;
        let k = 1;
        let i0 = |x: f64| {
            0.5 * simpson(
                &|y| gamma * (-gamma * (x - y).abs()).exp() * d(2 * k + 2, y),
                a,
                x,
                1e-14,
            ) + 0.5
                * simpson(
                    &|y| gamma * (-gamma * (x - y).abs()).exp() * d(2 * k + 2, y),
                    x,
                    b,
                    1e-14,
                )
        };
        let (i0a, i0b) = (i0(a), i0(b));
        for (i, &x) in g.nodes().iter().enumerate().step_by(17) {
            let ea = (-gamma * (x - a)).exp();
            let eb = (-gamma * (b - x)).exp();
            let mut e = 0.0;
            for p in 1..=k {
                let q = 2 * p;
                e -= (1.0 / gamma).powi(q)
                    * (d(q, x)
                        + (mu * d(q, b) - d(q, a)) / den * ea
                        + (mu * d(q, a) - d(q, b)) / den * eb);
            }
            e -= (mu * cb - ca) / den * ea + (mu * ca - cb) / den * eb;
            let q = 2 * k + 2;
            e -= (1.0 / gamma).powi(q)
                * (i0(x) + (mu * i0b - i0a) / den * ea + (mu * i0a - i0b) / den * eb);
            assert!((d0[i] - e).abs() < 1e-8, "x={x}: {} vs {e}", d0[i]);
        }
        assert!((d0[0] - ca).abs() < 1e-14 && (d0[600] - cb).abs() < 1e-14);
    }

    #[test]
    fn periodic_reconstruction_order() {
        let mut errs = Vec::new();
        for &n in &[64usize, 128, 256] {
            let g = Grid1D::uniform(-PI, PI, n).unwrap();
            let dt = 0.5 * g.mean_width();
            let gamma = 1.0 / dt;
            let r = LineRules::new(&g, gamma, true).unwrap();
            let phi: Vec<f64> = g.nodes().iter().map(|x| x.sin()).collect();
            let d = reconstruct_periodic(&r, &phi, &ReconstructOptions::linear(2)).unwrap();
            let e = g
                .nodes()
                .iter()
                .enumerate()
                .map(|(i, x)| {
                    (d.minus[i] - x.cos())
                        .abs()
                        .max((d.plus[i] - x.cos()).abs())
                })
                .fold(0.0, f64::max);
            errs.push(e);
        }
        let r1 = errs[0] / errs[1];
        let r2 = errs[1] / errs[2];
        assert!((r1 - 4.0).abs() < 0.4 && (r2 - 4.0).abs() < 0.4, "{errs:?}");
    }

    #[test]
    fn unit_filter_changes_nothing() {
        let g = Grid1D::uniform(0.0, 2.0 * PI, 80).unwrap();
        let r = LineRules::new(&g, 20.0, true).unwrap();
        let phi: Vec<f64> = g
            .nodes()
            .iter()
            .map(|x| x.sin() + 0.3 * (2.0 * x).cos())
            .collect();
        for k in 1..=3 {
            let lin = reconstruct_periodic(&r, &phi, &ReconstructOptions::linear(k)).unwrap();
            // Linear quadrature with the filter flag on: sigma is identically one.
            let opts = ReconstructOptions {
                k,
                mode: QuadratureMode::Linear,
                filter: FilterOptions::on(),
            };
            let same = reconstruct_periodic(&r, &phi, &opts).unwrap();
            assert_eq!(lin, same);
            let weno =
                reconstruct_periodic(&r, &phi, &ReconstructOptions::weno_filtered(k)).unwrap();
            let diff = (0..g.len())
                .map(|i| (weno.minus[i] - lin.minus[i]).abs())
                .fold(0.0, f64::max);
            // The filter may engage near inflection points even on smooth data.
            assert!(diff < 1e-4, "k={k}: {diff:e}");
        }
    }

    #[test]
    fn bounded_exact_on_linears_and_collocates() {
        let (a, b) = (-1.0, 2.0);
        let g = Grid1D::perturbed(a, b, 60, 0.2, 4).unwrap();
        let r = LineRules::new(&g, 40.0, false).unwrap();
        let phi: Vec<f64> = g.nodes().to_vec();
        let left = BoundaryDerivatives::given(Side::Left, [1.0, 0.0, 0.0]);
        let right = BoundaryDerivatives::given(Side::Right, [1.0, 0.0, 0.0]);
        for k in 1..=3 {
            let d = reconstruct_bounded(&r, &phi, &ReconstructOptions::linear(k), &left, &right)
                .unwrap();
            assert!(
                d.minus
                    .iter()
                    .chain(&d.plus)
                    .all(|x| (x - 1.0).abs() < 1e-12),
                "k={k}"
            );
        }
        let f = |x: f64| (x - 0.3).sin();
        let phi: Vec<f64> = g.nodes().iter().map(|&x| f(x)).collect();
        let dl = |x: f64| [(x - 0.3).cos(), -(x - 0.3).sin(), -(x - 0.3).cos()];
        let left = BoundaryDerivatives::given(Side::Left, dl(a));
        let right = BoundaryDerivatives::given(Side::Right, dl(b));
        for k in 1..=3 {
            for opts in [
                ReconstructOptions::linear(k),
                ReconstructOptions::weno_filtered(k),
            ] {
                let d = reconstruct_bounded(&r, &phi, &opts, &left, &right).unwrap();
                assert!((d.minus[0] - dl(a)[0]).abs() < 1e-12, "k={k}");
                assert!((d.plus[60] - dl(b)[0]).abs() < 1e-12, "k={k}");
            }
        }
        let zero = vec![2.0; g.len()];
        let zl = BoundaryDerivatives::given(Side::Left, [0.0; 3]);
        let zr = BoundaryDerivatives::given(Side::Right, [0.0; 3]);
        let d = reconstruct_bounded(&r, &zero, &ReconstructOptions::linear(3), &zl, &zr).unwrap();
        assert!(d.minus.iter().chain(&d.plus).all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn bounded_order_k3() {
        let (a, b) = (-PI, PI);
        let f = |x: f64| (x - 0.3).sin();
        let ders = |x: f64| [(x - 0.3).cos(), -(x - 0.3).sin(), -(x - 0.3).cos()];
        let mut errs = Vec::new();
        for &n in &[80usize, 160, 320] {
            let g = Grid1D::uniform(a, b, n).unwrap();
            let gamma = 1.2 / (0.5 * g.mean_width());
            let r = LineRules::new(&g, gamma, false).unwrap();
            let phi: Vec<f64> = g.nodes().iter().map(|&x| f(x)).collect();
            let left = BoundaryDerivatives::given(Side::Left, ders(a));
            let right = BoundaryDerivatives::given(Side::Right, ders(b));
            let d = reconstruct_bounded(&r, &phi, &ReconstructOptions::linear(3), &left, &right)
                .unwrap();
            let e = g
                .nodes()
                .iter()
                .enumerate()
                .map(|(i, &x)| {
                    (d.minus[i] - ders(x)[0])
                        .abs()
                        .max((d.plus[i] - ders(x)[0]).abs())
                })
                .fold(0.0, f64::max);
            errs.push(e);
        }
        let o1 = (errs[0] / errs[1]).log2();
        let o2 = (errs[1] / errs[2]).log2();
        assert!(o1 > 2.75 && o2 > 2.75, "{errs:?}");
    }

    #[test]
    fn rejects_bad_order_and_missing_data() {
        let (g, r) = rules(0.0, 1.0, 20, 10.0, false);
        let phi = vec![0.0; g.len()];
        assert!(matches!(
            reconstruct_periodic(&r, &phi, &ReconstructOptions::linear(4)),
            Err(HjError::UnsupportedOrder(4))
        ));
        let left = BoundaryDerivatives::given(Side::Left, [1.0, f64::NAN, 0.0]);
        let right = BoundaryDerivatives::given(Side::Right, [0.0; 3]);
        assert!(
            reconstruct_bounded(&r, &phi, &ReconstructOptions::linear(1), &left, &right).is_ok()
        );
        assert!(matches!(
            reconstruct_bounded(&r, &phi, &ReconstructOptions::linear(2), &left, &right),
            Err(HjError::MissingBoundaryDerivatives(Side::Left))
        ));
        let mut bad = phi.clone();
        bad[3] = f64::INFINITY;
        assert!(apply_dl(&r, &bad, QuadratureMode::Linear, Closure::ZERO, None).is_err());
        assert!(apply_d0(&r, &phi[1..], Closure::ZERO).is_err());
    }

    mod props {
        use super::super::*;
        use crate::grid::Grid1D;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]
            #[test]
            fn constants_map_to_zero(c in -100.0f64..100.0, k in 1usize..=3, gamma in 1.0f64..500.0, weno in any::<bool>()) {
                let g = Grid1D::uniform(0.0, 1.0, 32).unwrap();
                let r = LineRules::new(&g, gamma, true).unwrap();
                let phi = vec![c; g.len()];
                let opts = if weno { ReconstructOptions::weno_filtered(k) } else { ReconstructOptions::linear(k) };
                let d = reconstruct_periodic(&r, &phi, &opts).unwrap();
                let tol = 1e-12 * gamma * (1.0 + c.abs());
                prop_assert!(d.minus.iter().chain(&d.plus).all(|x| x.abs() < tol));
            }

            #[test]
            fn collocation_holds(vals in proptest::collection::vec(-1.0f64..1.0, 25), ders in proptest::array::uniform6(-3.0f64..3.0), k in 1usize..=3) {
                let g = Grid1D::uniform(0.0, 1.0, 24).unwrap();
                let r = LineRules::new(&g, 60.0, false).unwrap();
                let left = BoundaryDerivatives::given(Side::Left, [ders[0], ders[1], ders[2]]);
                let right = BoundaryDerivatives::given(Side::Right, [ders[3], ders[4], ders[5]]);
                let d = reconstruct_bounded(&r, &vals, &ReconstructOptions::weno_filtered(k), &left, &right).unwrap();
                prop_assert!((d.minus[0] - ders[0]).abs() < 1e-12);
                prop_assert!((d.plus[24] - ders[3]).abs() < 1e-12);
            }
        }
    }
}
