//! Error norms against a reference solution, over/undershoot, and fitted
//! convergence rates.

use crate::analytic::{exact_1d, exact_1d_derivative, exact_2d_with_gradient, SeriesParams};
use crate::assembly::CellGeometry;
use crate::elements::quadrature;
use crate::error::{Error, Result};
use crate::solver::Solution;
use crate::Point;

/// Dirichlet data range of both presets.
pub const DEFAULT_DATA_RANGE: (f64, f64) = (0.0, 1.0);

/// Something that can be compared against a discrete solution.
pub trait ExactSolution {
    fn value(&self, x: Point) -> Result<f64>;
    fn gradient(&self, x: Point) -> Result<[f64; 2]>;

    fn value_and_gradient(&self, x: Point) -> Result<(f64, [f64; 2])> {
        Ok((self.value(x)?, self.gradient(x)?))
    }
}

/// The closed-form 1D solution with convection `b`.
#[derive(Debug, Clone, Copy)]
pub struct Exact1d {
    pub b: f64,
}

impl ExactSolution for Exact1d {
    fn value(&self, x: Point) -> Result<f64> {
        exact_1d(x[0], self.b)
    }

    fn gradient(&self, x: Point) -> Result<[f64; 2]> {
        Ok([exact_1d_derivative(x[0], self.b)?, 0.0])
    }
}

/// The 2D series solution. Boundary points return the Dirichlet data
/// (with `0.5` at the two discontinuous corners) instead of summing.
#[derive(Debug, Clone, Copy)]
pub struct Exact2d {
    pub params: SeriesParams,
}

/// Term cap of [`Exact2d::new`]. High-order quadrature rules put points
/// within `1e-5` of the discontinuous corners, where the gradient series
/// needs several hundred thousand terms.
pub const METRICS_TERM_CAP: usize = 2_000_000;

impl Exact2d {
    pub fn new(b: f64) -> Self {
        Exact2d { params: SeriesParams { n_max: METRICS_TERM_CAP, ..SeriesParams::new(b) } }
    }

    fn boundary_value(x: Point) -> Option<f64> {
        let [x, y] = x;
        let low = x == 0.0 || y == 0.0;
        let high = x == 1.0 || y == 1.0;
        match (low, high) {
            (true, true) => Some(0.5),
            (true, false) => Some(1.0),
            (false, true) => Some(0.0),
            _ => None,
        }
    }
}

impl ExactSolution for Exact2d {
    fn value(&self, x: Point) -> Result<f64> {
        match Self::boundary_value(x) {
            Some(v) if (0.0..=1.0).contains(&x[0]) && (0.0..=1.0).contains(&x[1]) => Ok(v),
            _ => crate::analytic::exact_2d(x[0], x[1], &self.params),
        }
    }

    fn gradient(&self, x: Point) -> Result<[f64; 2]> {
        exact_2d_with_gradient(x[0], x[1], &self.params).map(|(_, g)| g)
    }

    fn value_and_gradient(&self, x: Point) -> Result<(f64, [f64; 2])> {
        exact_2d_with_gradient(x[0], x[1], &self.params)
    }
}

/// Any pair of closures.
pub struct FnSolution<V, G> {
    pub value: V,
    pub gradient: G,
}

impl<V, G> ExactSolution for FnSolution<V, G>
where
    V: Fn(Point) -> f64,
    G: Fn(Point) -> [f64; 2],
{
    fn value(&self, x: Point) -> Result<f64> {
        Ok((self.value)(x))
    }

    fn gradient(&self, x: Point) -> Result<[f64; 2]> {
        Ok((self.gradient)(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub l2: f64,
    /// Maximum error over the DOF points (not a true sup-norm).
    pub linf: f64,
    pub h1_semi: f64,
    pub overshoot: f64,
    pub undershoot: f64,
    pub dof_count: usize,
    pub h_max: f64,
}

/// L2 and H1-seminorm errors by element quadrature of degree `2p + 2`,
/// nodal max error, and over/undershoot against [`DEFAULT_DATA_RANGE`].
pub fn error_norms(solution: &Solution, exact: &dyn ExactSolution) -> Result<ErrorReport> {
    let mesh = solution.mesh();
    let p = solution.degree();
    let rule = quadrature(mesh.cell_type(), (2 * p + 2).min(crate::elements::MAX_QUADRATURE_DEGREE))?;
    let mut l2 = 0.0;
    let mut h1 = 0.0;
    for c in 0..mesh.cell_count() {
        let geo = CellGeometry::new(mesh, c);
        for (q, &r) in rule.points.iter().enumerate() {
            let w = rule.weights[q] * geo.det.abs();
            let (uh, gh) = solution.eval_in_cell(c, r);
            let (u, g) = exact.value_and_gradient(geo.map(r))?;
            l2 += w * (uh - u) * (uh - u);
            let (dx, dy) = (gh[0] - g[0], gh[1] - g[1]);
            h1 += w * (dx * dx + dy * dy);
        }
    }
    let mut linf: f64 = 0.0;
    for (&x, &uh) in solution.coords().iter().zip(solution.values()) {
        linf = linf.max((uh - exact.value(x)?).abs());
    }
    let (overshoot, undershoot) = oscillation_indicator(solution.values(), DEFAULT_DATA_RANGE.0, DEFAULT_DATA_RANGE.1);
    Ok(ErrorReport {
        l2: l2.sqrt(),
        linf,
        h1_semi: h1.sqrt(),
        overshoot,
        undershoot,
        dof_count: solution.values().len(),
        h_max: mesh.stats().h_max,
    })
}

/// `(max(0, max u - data_max), max(0, data_min - min u))`.
pub fn oscillation_indicator(values: &[f64], data_min: f64, data_max: f64) -> (f64, f64) {
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    ((hi - data_max).max(0.0), (data_min - lo).max(0.0))
}

/// Least-squares slope of `log(error)` against `log(h)`.
pub fn convergence_rates(pairs: &[(f64, f64)]) -> Result<f64> {
    if pairs.len() < 2 {
        return Err(Error::Degenerate(format!("need at least 2 (h, error) pairs, got {}", pairs.len())));
    }
    for w in pairs.windows(2) {
        if !(w[1].0 < w[0].0) {
            return Err(Error::Degenerate("mesh sizes must be strictly decreasing".into()));
        }
    }
    if let Some(&(h, e)) = pairs.iter().find(|(h, e)| !(*h > 0.0 && *e > 0.0 && h.is_finite() && e.is_finite())) {
        return Err(Error::Degenerate(format!("h and error must be positive and finite, got ({h}, {e})")));
    }
    let n = pairs.len() as f64;
    let xs: Vec<f64> = pairs.iter().map(|(h, _)| h.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|(_, e)| e.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}
