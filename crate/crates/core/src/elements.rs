//! Nodal Lagrange elements on the reference interval `[0,1]` and the
//! reference triangle `(0,0), (1,0), (0,1)`, and Gauss quadrature rules.
//!
//! Basis functions are stored as coefficient rows over the monomials of total
//! degree `<= p`, obtained by inverting the Vandermonde matrix at an
//! equispaced node lattice.
//!
//! Local node ordering is vertices first, then the interior nodes of each
//! edge (triangle edge `k` runs from vertex `k` to vertex `k+1 mod 3`), then
//! cell-interior nodes. In 1D the cell interior nodes follow the two vertices
//! in increasing `x`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::mesh::CellType;
use crate::Point;

pub const MAX_DEGREE: usize = 5;
pub const MAX_QUADRATURE_DEGREE: usize = 12;

const REFERENCE_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct ReferenceElement {
    cell_type: CellType,
    degree: usize,
    nodes: Vec<Point>,
    exponents: Vec<(i32, i32)>,
    // row i holds the monomial coefficients of basis function i
    coeffs: Vec<f64>,
}

/// Values, reference gradients and reference Hessians of every basis
/// function at a single point.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisEval {
    pub values: Vec<f64>,
    pub gradients: Vec<[f64; 2]>,
    pub hessians: Vec<[[f64; 2]; 2]>,
}

pub fn node_count(cell_type: CellType, p: usize) -> usize {
    match cell_type {
        CellType::Interval => p + 1,
        CellType::Triangle => (p + 1) * (p + 2) / 2,
    }
}

fn lattice(cell_type: CellType, p: usize) -> Vec<Point> {
    let t = |k: usize| k as f64 / p as f64;
    match cell_type {
        CellType::Interval => {
            let mut nodes = vec![[0.0, 0.0], [1.0, 0.0]];
            nodes.extend((1..p).map(|k| [t(k), 0.0]));
            nodes
        }
        CellType::Triangle => {
            let verts = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
            let mut nodes = verts.to_vec();
            for k in 0..3 {
                let (a, b) = (verts[k], verts[(k + 1) % 3]);
                for m in 1..p {
                    let s = t(m);
                    nodes.push([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]);
                }
            }
            for j in 1..p {
                for i in 1..p {
                    if i + j < p {
                        nodes.push([t(i), t(j)]);
                    }
                }
            }
            nodes
        }
    }
}

fn monomial_exponents(cell_type: CellType, p: usize) -> Vec<(i32, i32)> {
    match cell_type {
        CellType::Interval => (0..=p as i32).map(|k| (k, 0)).collect(),
        CellType::Triangle => {
            let mut e = Vec::new();
            for d in 0..=p as i32 {
                for j in 0..=d {
                    e.push((d - j, j));
                }
            }
            e
        }
    }
}

fn ipow(x: f64, k: i32) -> f64 {
    if k <= 0 {
        1.0
    } else {
        x.powi(k)
    }
}

/// Builds the degree-`p` nodal Lagrange element on the given reference cell.
pub fn reference_lagrange(cell_type: CellType, p: usize) -> Result<ReferenceElement> {
    if !(1..=MAX_DEGREE).contains(&p) {
        return Err(Error::UnsupportedDegree(p));
    }
    let nodes = lattice(cell_type, p);
    let exponents = monomial_exponents(cell_type, p);
    let n = nodes.len();
    debug_assert_eq!(n, exponents.len());

    let vandermonde = DMatrix::from_fn(n, n, |i, k| {
        let (ex, ey) = exponents[k];
        ipow(nodes[i][0], ex) * ipow(nodes[i][1], ey)
    });
    let inv = vandermonde
        .try_inverse()
        .ok_or_else(|| Error::Internal(format!("singular Vandermonde for degree {p}")))?;
    // V c_i = e_i, so basis i takes column i of V^{-1}
    let mut coeffs = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            coeffs[i * n + k] = inv[(k, i)];
        }
    }
    Ok(ReferenceElement { cell_type, degree: p, nodes, exponents, coeffs })
}

impl ReferenceElement {
    pub fn cell_type(&self) -> CellType {
        self.cell_type
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn dof_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn contains(&self, pt: Point) -> bool {
        let tol = REFERENCE_TOL;
        match self.cell_type {
            CellType::Interval => pt[0] >= -tol && pt[0] <= 1.0 + tol,
            CellType::Triangle => pt[0] >= -tol && pt[1] >= -tol && pt[0] + pt[1] <= 1.0 + tol,
        }
    }

    /// Values and gradients of all basis functions at a reference point.
    pub fn eval_basis(&self, pt: Point) -> Result<(Vec<f64>, Vec<[f64; 2]>)> {
        let e = self.eval(pt)?;
        Ok((e.values, e.gradients))
    }

    /// Values, gradients and Hessians at a reference point.
    pub fn eval(&self, pt: Point) -> Result<BasisEval> {
        if !self.contains(pt) {
            return Err(Error::Domain { point: pt, domain: "reference cell" });
        }
        Ok(self.eval_unchecked(pt))
    }

    pub(crate) fn eval_unchecked(&self, pt: Point) -> BasisEval {
        let [x, y] = pt;
        let n = self.nodes.len();
        // monomial values and derivatives
        let mut m = vec![0.0; n];
        let mut mx = vec![0.0; n];
        let mut my = vec![0.0; n];
        let mut mxx = vec![0.0; n];
        let mut mxy = vec![0.0; n];
        let mut myy = vec![0.0; n];
        for (k, &(ex, ey)) in self.exponents.iter().enumerate() {
            let (fx, fy) = (ex as f64, ey as f64);
            let px = ipow(x, ex);
            let py = ipow(y, ey);
            m[k] = px * py;
            if ex >= 1 {
                mx[k] = fx * ipow(x, ex - 1) * py;
            }
            if ey >= 1 {
                my[k] = fy * px * ipow(y, ey - 1);
            }
            if ex >= 2 {
                mxx[k] = fx * (fx - 1.0) * ipow(x, ex - 2) * py;
            }
            if ex >= 1 && ey >= 1 {
                mxy[k] = fx * fy * ipow(x, ex - 1) * ipow(y, ey - 1);
            }
            if ey >= 2 {
                myy[k] = fy * (fy - 1.0) * px * ipow(y, ey - 2);
            }
        }
        let mut out = BasisEval {
            values: vec![0.0; n],
            gradients: vec![[0.0; 2]; n],
            hessians: vec![[[0.0; 2]; 2]; n],
        };
        for i in 0..n {
            let row = &self.coeffs[i * n..(i + 1) * n];
            let dot = |v: &[f64]| row.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
            out.values[i] = dot(&m);
            out.gradients[i] = [dot(&mx), dot(&my)];
            let xy = dot(&mxy);
            out.hessians[i] = [[dot(&mxx), xy], [xy, dot(&myy)]];
        }
        out
    }
}

/// Quadrature rule on a reference cell.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    pub exactness_degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..m {
        // Chebyshev-like initial guess, then Newton on P_m
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=m {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = m as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    // ascending order
    x.reverse();
    w.reverse();
    (x, w)
}

fn gauss_on_unit(m: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(m);
    (x.iter().map(|z| 0.5 * (z + 1.0)).collect(), w.iter().map(|v| 0.5 * v).collect())
}

/// Quadrature rule exact for polynomials of total degree `required_degree`.
///
/// Intervals use Gauss-Legendre with `ceil((d+1)/2)` points. Triangles use
/// the centroid rule for `d <= 1`, the three-point interior rule for `d = 2`
/// and a collapsed (Duffy) tensor Gauss rule above that.
pub fn quadrature(cell_type: CellType, required_degree: usize) -> Result<QuadratureRule> {
    if required_degree > MAX_QUADRATURE_DEGREE {
        return Err(Error::UnsupportedQuadrature(required_degree));
    }
    let d = required_degree;
    match cell_type {
        CellType::Interval => {
            let m = (d + 2) / 2;
            let (x, w) = gauss_on_unit(m);
            Ok(QuadratureRule {
                points: x.iter().map(|&t| [t, 0.0]).collect(),
                weights: w,
                exactness_degree: 2 * m - 1,
            })
        }
        CellType::Triangle if d <= 1 => Ok(QuadratureRule {
            points: vec![[1.0 / 3.0, 1.0 / 3.0]],
            weights: vec![0.5],
            exactness_degree: 1,
        }),
        CellType::Triangle if d == 2 => Ok(QuadratureRule {
            points: vec![[1.0 / 6.0, 1.0 / 6.0], [2.0 / 3.0, 1.0 / 6.0], [1.0 / 6.0, 2.0 / 3.0]],
            weights: vec![1.0 / 6.0; 3],
            exactness_degree: 2,
        }),
        CellType::Triangle => {
            // the Jacobian (1 - v) raises the degree in v by one
            let m = (d + 3) / 2;
            let (t, w) = gauss_on_unit(m);
            let mut points = Vec::with_capacity(m * m);
            let mut weights = Vec::with_capacity(m * m);
            for (&v, &wv) in t.iter().zip(&w) {
                for (&u, &wu) in t.iter().zip(&w) {
                    points.push([u * (1.0 - v), v]);
                    weights.push(wu * wv * (1.0 - v));
                }
            }
            Ok(QuadratureRule { points, weights, exactness_degree: 2 * m - 2 })
        }
    }
}
