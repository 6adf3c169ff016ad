//! Fixtures shared by the kernel benchmarks.

use hjconv::quadrature::LineRules;
use hjconv::{Grid1D, RunSpec};

/// A periodic line of `n` cells on `[-pi, pi]` with smooth data and its kernel rules.
pub struct LineFixture {
    pub grid: Grid1D,
    pub rules: LineRules,
    pub values: Vec<f64>,
}

pub fn line_fixture(n: usize, gamma: f64) -> LineFixture {
    let grid = Grid1D::uniform(-std::f64::consts::PI, std::f64::consts::PI, n).expect("valid grid");
    let rules = LineRules::new(&grid, gamma, true).expect("valid rules");
    let values = grid
        .nodes()
        .iter()
        .map(|x| x.sin() + 0.3 * (3.0 * x).cos())
        .collect();
    LineFixture {
        grid,
        rules,
        values,
    }
}

/// A builtin problem on one mesh, ready to solve.
pub fn solve_spec(name: &str, n: usize) -> RunSpec {
    let mut spec = RunSpec::builtin(name);
    spec.meshes = vec![n];
    spec
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_consistent() {
        let f = line_fixture(64, 20.0);
        assert_eq!(f.values.len(), f.grid.len());
        assert_eq!(f.rules.cells(), 64);
        let spec = solve_spec("burgers_1d", 32);
        assert!(spec.prepare().unwrap().run(32).is_ok());
    }
}
