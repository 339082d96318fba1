//! Degree-of-freedom numbering, global assembly of the weak form, and
//! Dirichlet elimination.
//!
//! The assembled operator is
//!
//! ```text
//! (eps a + eps_add) (grad u, grad v) + (b . grad u, v) + (c u, v)
//!     + sum_K tau_K (b . grad v, -eps a lap u + b . grad u + c u)_K
//! ```
//!
//! with load `(S, v) + sum_K tau_K (b . grad v, S)_K`; zero-flux Neumann
//! sides are natural and contribute nothing.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::elements::{quadrature, reference_lagrange, BasisEval, ReferenceElement, MAX_DEGREE};
use crate::error::{Error, Result};
use crate::linsolve::CsrMatrix;
use crate::mesh::{BoundaryMarker, CellType, MarkerSet, Mesh};
use crate::stabilization::StabilizationConfig;
use crate::Point;

pub type ScalarFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;

/// A scalar function of position.
#[derive(Clone)]
pub enum ScalarField {
    Constant(f64),
    Function(ScalarFn),
}

impl ScalarField {
    pub fn eval(&self, p: Point) -> f64 {
        match self {
            ScalarField::Constant(v) => *v,
            ScalarField::Function(f) => f(p),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ScalarField::Constant(v) if *v == 0.0)
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, ScalarField::Constant(_))
    }
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarField::Constant(v) => write!(f, "Constant({v})"),
            ScalarField::Function(_) => f.write_str("Function(..)"),
        }
    }
}

impl From<f64> for ScalarField {
    fn from(v: f64) -> Self {
        ScalarField::Constant(v)
    }
}

#[derive(Debug, Clone)]
pub enum BoundaryCondition {
    Dirichlet(ScalarField),
    /// Zero normal flux.
    Neumann,
}

/// Coefficients and boundary data of
/// `-eps div(a grad u) + b . grad u + c u = S`.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub dim: usize,
    pub eps: f64,
    pub a: f64,
    /// Constant convection; `b[1]` is ignored in 1D.
    pub b: [f64; 2],
    pub c: f64,
    pub source: ScalarField,
    pub boundary: BTreeMap<BoundaryMarker, BoundaryCondition>,
    /// Values for DOFs sitting exactly at these points, used where two
    /// Dirichlet sides meet with different data.
    pub corner_values: Vec<(Point, f64)>,
}

impl ProblemSpec {
    /// `u'' - b u' = 0` on `[0,1]` with `u(0) = 1`, `u(1) = 0`, assembled as
    /// `-u'' + b u' = 0`.
    pub fn paper_1d(b: f64) -> Self {
        let mut boundary = BTreeMap::new();
        boundary.insert(BoundaryMarker::Left, BoundaryCondition::Dirichlet(1.0.into()));
        boundary.insert(BoundaryMarker::Right, BoundaryCondition::Dirichlet(0.0.into()));
        ProblemSpec {
            dim: 1,
            eps: 1.0,
            a: 1.0,
            b: [b, 0.0],
            c: 0.0,
            source: 0.0.into(),
            boundary,
            corner_values: Vec::new(),
        }
    }

    /// `lap u - b (u_x + u_y) = 0` on the unit square, `u = 1` on the bottom
    /// and left sides, `u = 0` on the top and right sides, and `0.5` at the
    /// corners `(0,1)` and `(1,0)`.
    pub fn paper_2d(b: f64) -> Self {
        let mut boundary = BTreeMap::new();
        boundary.insert(BoundaryMarker::Bottom, BoundaryCondition::Dirichlet(1.0.into()));
        boundary.insert(BoundaryMarker::Left, BoundaryCondition::Dirichlet(1.0.into()));
        boundary.insert(BoundaryMarker::Top, BoundaryCondition::Dirichlet(0.0.into()));
        boundary.insert(BoundaryMarker::Right, BoundaryCondition::Dirichlet(0.0.into()));
        ProblemSpec {
            dim: 2,
            eps: 1.0,
            a: 1.0,
            b: [b, b],
            c: 0.0,
            source: 0.0.into(),
            boundary,
            corner_values: vec![([0.0, 1.0], 0.5), ([1.0, 0.0], 0.5)],
        }
    }

    pub fn markers(&self) -> &'static [BoundaryMarker] {
        if self.dim == 1 {
            &[BoundaryMarker::Left, BoundaryMarker::Right]
        } else {
            &BoundaryMarker::ALL
        }
    }

    pub fn convection(&self) -> [f64; 2] {
        if self.dim == 1 {
            [self.b[0], 0.0]
        } else {
            self.b
        }
    }

    pub fn b_norm(&self) -> f64 {
        let b = self.convection();
        (b[0] * b[0] + b[1] * b[1]).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim != 1 && self.dim != 2 {
            return Err(Error::InvalidArgument(format!("dimension must be 1 or 2, got {}", self.dim)));
        }
        let finite = [self.eps, self.a, self.b[0], self.b[1], self.c].iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::NonFinite("problem coefficients".into()));
        }
        if let ScalarField::Constant(s) = self.source {
            if !s.is_finite() {
                return Err(Error::NonFinite("source".into()));
            }
        }
        if !(self.eps > 0.0) {
            return Err(Error::InvalidArgument(format!("eps must be > 0, got {}", self.eps)));
        }
        if !(self.a >= 1.0) {
            return Err(Error::InvalidArgument(format!("a must be >= 1, got {}", self.a)));
        }
        if !(self.c >= 0.0) {
            return Err(Error::InvalidArgument(format!("c must be >= 0, got {}", self.c)));
        }
        let mut any_dirichlet = false;
        for m in self.markers() {
            match self.boundary.get(m) {
                None => return Err(Error::InvalidArgument(format!("no boundary condition on the {m} side"))),
                Some(BoundaryCondition::Dirichlet(_)) => any_dirichlet = true,
                Some(BoundaryCondition::Neumann) => {}
            }
        }
        if !any_dirichlet {
            return Err(Error::InvalidArgument("at least one side must carry Dirichlet data".into()));
        }
        Ok(())
    }
}

/// Global numbering of the Lagrange DOFs: vertices, then edge interiors
/// (edges sorted by vertex pair, nodes ordered from the lower vertex index),
/// then cell interiors by cell index. In 1D the cell interior nodes follow
/// the vertices.
#[derive(Debug, Clone)]
pub struct DofMap {
    cell_type: CellType,
    degree: usize,
    n_dofs: usize,
    local_count: usize,
    cell_dofs: Vec<usize>,
    coords: Vec<Point>,
    markers: Vec<MarkerSet>,
}

impl DofMap {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn cell_type(&self) -> CellType {
        self.cell_type
    }

    pub fn len(&self) -> usize {
        self.n_dofs
    }

    pub fn is_empty(&self) -> bool {
        self.n_dofs == 0
    }

    pub fn cell_count(&self) -> usize {
        self.cell_dofs.len() / self.local_count
    }

    pub fn local_count(&self) -> usize {
        self.local_count
    }

    pub fn cell_dofs(&self, c: usize) -> &[usize] {
        &self.cell_dofs[c * self.local_count..(c + 1) * self.local_count]
    }

    pub fn coords(&self) -> &[Point] {
        &self.coords
    }

    /// Boundary sides each DOF lies on (empty for interior DOFs).
    pub fn markers(&self, dof: usize) -> MarkerSet {
        self.markers[dof]
    }

    pub(crate) fn check_mesh(&self, mesh: &Mesh) -> Result<()> {
        if mesh.cell_type() != self.cell_type || mesh.cell_count() != self.cell_count() {
            return Err(Error::InvalidArgument("DOF map was built for a different mesh".into()));
        }
        Ok(())
    }
}

pub fn build_dof_map(mesh: &Mesh, p: usize) -> Result<DofMap> {
    if !(1..=MAX_DEGREE).contains(&p) {
        return Err(Error::UnsupportedDegree(p));
    }
    let nv = mesh.vertex_count();
    let nc = mesh.cell_count();
    let verts = mesh.vertices();
    let mut coords: Vec<Point> = verts.to_vec();
    let mut markers: Vec<MarkerSet> = (0..nv).map(|v| mesh.vertex_markers(v)).collect();

    match mesh.cell_type() {
        CellType::Interval => {
            let local = p + 1;
            let mut cell_dofs = Vec::with_capacity(nc * local);
            for c in 0..nc {
                let cv = mesh.cell(c);
                cell_dofs.extend_from_slice(cv);
                let (x0, x1) = (verts[cv[0]][0], verts[cv[1]][0]);
                for m in 1..p {
                    cell_dofs.push(coords.len());
                    let t = m as f64 / p as f64;
                    coords.push([x0 + t * (x1 - x0), 0.0]);
                    markers.push(MarkerSet::EMPTY);
                }
            }
            let n_dofs = coords.len();
            Ok(DofMap { cell_type: CellType::Interval, degree: p, n_dofs, local_count: local, cell_dofs, coords, markers })
        }
        CellType::Triangle => {
            let per_edge = p - 1;
            let per_cell = if p >= 3 { (p - 1) * (p - 2) / 2 } else { 0 };
            let local = (p + 1) * (p + 2) / 2;
            for (e, &[a, b]) in mesh.edges().iter().enumerate() {
                for m in 1..p {
                    let t = m as f64 / p as f64;
                    let (pa, pb) = (verts[a], verts[b]);
                    coords.push([pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])]);
                    markers.push(mesh.edge_markers(e));
                }
            }
            let edge_base = nv;
            let interior_base = nv + mesh.edges().len() * per_edge;
            let element = reference_lagrange(CellType::Triangle, p)?;
            let interior_nodes = &element.nodes()[3 + 3 * per_edge..];

            let mut cell_dofs = Vec::with_capacity(nc * local);
            for c in 0..nc {
                let cv = mesh.cell(c);
                cell_dofs.extend_from_slice(cv);
                let edges = mesh.cell_edges(c);
                for k in 0..3 {
                    let forward = cv[k] < cv[(k + 1) % 3];
                    for m in 1..p {
                        let offset = if forward { m - 1 } else { per_edge - m };
                        cell_dofs.push(edge_base + edges[k] * per_edge + offset);
                    }
                }
                let (p0, p1, p2) = (verts[cv[0]], verts[cv[1]], verts[cv[2]]);
                for (k, q) in interior_nodes.iter().enumerate() {
                    cell_dofs.push(interior_base + c * per_cell + k);
                    coords.push([
                        p0[0] + q[0] * (p1[0] - p0[0]) + q[1] * (p2[0] - p0[0]),
                        p0[1] + q[0] * (p1[1] - p0[1]) + q[1] * (p2[1] - p0[1]),
                    ]);
                    markers.push(MarkerSet::EMPTY);
                }
            }
            let n_dofs = coords.len();
            Ok(DofMap { cell_type: CellType::Triangle, degree: p, n_dofs, local_count: local, cell_dofs, coords, markers })
        }
    }
}

/// Affine map from the reference cell onto a mesh cell.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CellGeometry {
    pub origin: Point,
    pub jac: [[f64; 2]; 2],
    pub inv: [[f64; 2]; 2],
    pub det: f64,
}

impl CellGeometry {
    pub fn new(mesh: &Mesh, c: usize) -> Self {
        let v = mesh.cell(c);
        let pts = mesh.vertices();
        let p0 = pts[v[0]];
        match mesh.cell_type() {
            CellType::Interval => {
                let h = pts[v[1]][0] - p0[0];
                CellGeometry { origin: p0, jac: [[h, 0.0], [0.0, 1.0]], inv: [[1.0 / h, 0.0], [0.0, 1.0]], det: h }
            }
            CellType::Triangle => {
                let (p1, p2) = (pts[v[1]], pts[v[2]]);
                let jac = [[p1[0] - p0[0], p2[0] - p0[0]], [p1[1] - p0[1], p2[1] - p0[1]]];
                let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
                let inv = [[jac[1][1] / det, -jac[0][1] / det], [-jac[1][0] / det, jac[0][0] / det]];
                CellGeometry { origin: p0, jac, inv, det }
            }
        }
    }

    pub fn map(&self, r: Point) -> Point {
        [
            self.origin[0] + self.jac[0][0] * r[0] + self.jac[0][1] * r[1],
            self.origin[1] + self.jac[1][0] * r[0] + self.jac[1][1] * r[1],
        ]
    }

    pub fn inverse_map(&self, x: Point) -> Point {
        let d = [x[0] - self.origin[0], x[1] - self.origin[1]];
        [
            self.inv[0][0] * d[0] + self.inv[0][1] * d[1],
            self.inv[1][0] * d[0] + self.inv[1][1] * d[1],
        ]
    }

    /// Physical gradient `J^{-T} g`.
    pub fn gradient(&self, g: [f64; 2]) -> [f64; 2] {
        [
            self.inv[0][0] * g[0] + self.inv[1][0] * g[1],
            self.inv[0][1] * g[0] + self.inv[1][1] * g[1],
        ]
    }

    /// Physical Laplacian `tr(J^{-T} H J^{-1})`.
    pub fn laplacian(&self, h: [[f64; 2]; 2], dim: usize) -> f64 {
        let mut s = 0.0;
        for a in 0..dim {
            for k in 0..2 {
                for l in 0..2 {
                    s += self.inv[k][a] * h[k][l] * self.inv[l][a];
                }
            }
        }
        s
    }
}

/// Global system; `dirichlet[i]` is `Some(value)` for constrained DOFs once
/// boundary conditions have been applied.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub dirichlet: Vec<Option<f64>>,
}

fn sparsity(dofmap: &DofMap) -> Result<CsrMatrix> {
    let n = dofmap.len();
    let mut cols: Vec<Vec<usize>> = vec![Vec::new(); n];
    for c in 0..dofmap.cell_count() {
        let dofs = dofmap.cell_dofs(c);
        for &i in dofs {
            cols[i].extend_from_slice(dofs);
        }
    }
    let mut row_offsets = Vec::with_capacity(n + 1);
    let mut col_indices = Vec::new();
    row_offsets.push(0);
    for mut row in cols {
        row.sort_unstable();
        row.dedup();
        col_indices.extend(row);
        row_offsets.push(col_indices.len());
    }
    let nnz = col_indices.len();
    CsrMatrix::new(n, row_offsets, col_indices, vec![0.0; nnz])
}

fn tabulate(element: &ReferenceElement, points: &[Point]) -> Vec<BasisEval> {
    points.iter().map(|&p| element.eval_unchecked(p)).collect()
}

/// Assembles the global matrix and load vector without boundary conditions.
pub fn assemble_raw(
    problem: &ProblemSpec,
    mesh: &Mesh,
    dofmap: &DofMap,
    stab: &StabilizationConfig,
) -> Result<LinearSystem> {
    problem.validate()?;
    stab.validate()?;
    dofmap.check_mesh(mesh)?;
    if problem.dim != mesh.dim() {
        return Err(Error::InvalidArgument(format!(
            "{}D problem on a {}D mesh",
            problem.dim,
            mesh.dim()
        )));
    }

    let p = dofmap.degree();
    let dim = mesh.dim();
    let element = reference_lagrange(mesh.cell_type(), p)?;
    let bilinear_rule = quadrature(mesh.cell_type(), 2 * p)?;
    let load_rule = if problem.source.is_constant() { bilinear_rule.clone() } else { quadrature(mesh.cell_type(), 2 * p + 2)? };
    let bilinear_tab = tabulate(&element, &bilinear_rule.points);
    let load_tab = tabulate(&element, &load_rule.points);

    let b = problem.convection();
    let b_norm = problem.b_norm();
    let diff = problem.eps * problem.a;
    let nloc = dofmap.local_count();

    let mut matrix = sparsity(dofmap)?;
    let mut rhs = vec![0.0; dofmap.len()];
    let mut local_a = vec![0.0; nloc * nloc];
    let mut local_f = vec![0.0; nloc];
    let mut grads = vec![[0.0; 2]; nloc];
    let mut bgrad = vec![0.0; nloc];
    let mut strong = vec![0.0; nloc];
    let mut positions = vec![0usize; nloc * nloc];

    for c in 0..mesh.cell_count() {
        let geo = CellGeometry::new(mesh, c);
        let (tau, eps_add) = stab.element_parameters(b_norm, problem.eps, problem.a, mesh.cell_diameter(c));
        let kappa = diff + eps_add;
        local_a.iter_mut().for_each(|v| *v = 0.0);
        local_f.iter_mut().for_each(|v| *v = 0.0);

        for (q, tab) in bilinear_tab.iter().enumerate() {
            let w = bilinear_rule.weights[q] * geo.det.abs();
            for i in 0..nloc {
                grads[i] = geo.gradient(tab.gradients[i]);
                bgrad[i] = b[0] * grads[i][0] + b[1] * grads[i][1];
                // strong-form operator applied to trial function i
                strong[i] = bgrad[i] + problem.c * tab.values[i];
                if tau != 0.0 && p >= 2 {
                    strong[i] -= diff * geo.laplacian(tab.hessians[i], dim);
                }
            }
            for i in 0..nloc {
                let vi = tab.values[i];
                let gi = grads[i];
                let row = &mut local_a[i * nloc..(i + 1) * nloc];
                for j in 0..nloc {
                    let gj = grads[j];
                    let mut v = kappa * (gi[0] * gj[0] + gi[1] * gj[1]) + bgrad[j] * vi + problem.c * tab.values[j] * vi;
                    if tau != 0.0 {
                        v += tau * bgrad[i] * strong[j];
                    }
                    row[j] += w * v;
                }
            }
        }

        if !problem.source.is_zero() {
            for (q, tab) in load_tab.iter().enumerate() {
                let w = load_rule.weights[q] * geo.det.abs();
                let s = problem.source.eval(geo.map(load_rule.points[q]));
                if !s.is_finite() {
                    return Err(Error::NonFinite("source value".into()));
                }
                for i in 0..nloc {
                    let mut v = s * tab.values[i];
                    if tau != 0.0 {
                        let g = geo.gradient(tab.gradients[i]);
                        v += tau * (b[0] * g[0] + b[1] * g[1]) * s;
                    }
                    local_f[i] += w * v;
                }
            }
        }

        let dofs = dofmap.cell_dofs(c);
        for (i, &gi) in dofs.iter().enumerate() {
            rhs[gi] += local_f[i];
            for (j, &gj) in dofs.iter().enumerate() {
                positions[i * nloc + j] = matrix.position(gi, gj).expect("pattern covers element couplings");
            }
        }
        let values = matrix.values_mut();
        for (k, &pos) in positions.iter().enumerate() {
            values[pos] += local_a[k];
        }
    }

    Ok(LinearSystem { matrix, rhs, dirichlet: vec![None; dofmap.len()] })
}

/// Dirichlet value for each DOF, `None` where the DOF is free.
pub fn dirichlet_constraints(problem: &ProblemSpec, dofmap: &DofMap) -> Result<Vec<Option<f64>>> {
    let mut out = vec![None; dofmap.len()];
    for (dof, slot) in out.iter_mut().enumerate() {
        let markers = dofmap.markers(dof);
        if markers.is_empty() {
            continue;
        }
        let x = dofmap.coords()[dof];
        let values: Vec<f64> = markers
            .iter()
            .filter_map(|m| match problem.boundary.get(&m) {
                Some(BoundaryCondition::Dirichlet(f)) => Some(f.eval(x)),
                _ => None,
            })
            .collect();
        if values.is_empty() {
            continue;
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("Dirichlet value at {x:?}")));
        }
        let agree = values.iter().all(|v| (v - values[0]).abs() <= 1e-14);
        let value = if agree {
            values[0]
        } else if let Some(&(_, v)) =
            problem.corner_values.iter().find(|(p, _)| (p[0] - x[0]).abs() < 1e-12 && (p[1] - x[1]).abs() < 1e-12)
        {
            v
        } else {
            values.iter().sum::<f64>() / values.len() as f64
        };
        *slot = Some(value);
    }
    Ok(out)
}

/// Symmetric elimination: constrained columns move to the right-hand side
/// and constrained rows become identity rows carrying the boundary value.
pub fn apply_dirichlet(system: LinearSystem, constraints: &[Option<f64>]) -> Result<LinearSystem> {
    let n = system.matrix.dim();
    if constraints.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: constraints.len() });
    }
    if constraints.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("Dirichlet values".into()));
    }
    let mut rhs = system.rhs;
    let mut row_offsets = Vec::with_capacity(n + 1);
    let mut col_indices = Vec::with_capacity(system.matrix.nnz());
    let mut values = Vec::with_capacity(system.matrix.nnz());
    row_offsets.push(0);
    for i in 0..n {
        if let Some(g) = constraints[i] {
            col_indices.push(i);
            values.push(1.0);
            rhs[i] = g;
        } else {
            for (j, v) in system.matrix.row(i) {
                match constraints[j] {
                    Some(g) => rhs[i] -= v * g,
                    None => {
                        col_indices.push(j);
                        values.push(v);
                    }
                }
            }
        }
        row_offsets.push(col_indices.len());
    }
    Ok(LinearSystem {
        matrix: CsrMatrix::new(n, row_offsets, col_indices, values)?,
        rhs,
        dirichlet: constraints.to_vec(),
    })
}

/// Assembles and applies the problem's Dirichlet data.
pub fn assemble(problem: &ProblemSpec, mesh: &Mesh, dofmap: &DofMap, stab: &StabilizationConfig) -> Result<LinearSystem> {
    let raw = assemble_raw(problem, mesh, dofmap, stab)?;
    let constraints = dirichlet_constraints(problem, dofmap)?;
    apply_dirichlet(raw, &constraints)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linsolve::{solve, DEFAULT_TOL};
    use crate::mesh::{build_interval_mesh, build_unit_square_mesh};

    fn solve_system(sys: &LinearSystem) -> Vec<f64> {
        solve(&sys.matrix, &sys.rhs, DEFAULT_TOL).unwrap()
    }

    #[test]
    fn dof_counts() {
        let m = build_interval_mesh(30).unwrap();
        assert_eq!(build_dof_map(&m, 3).unwrap().len(), 91);
        let m = build_interval_mesh(10).unwrap();
        assert_eq!(build_dof_map(&m, 1).unwrap().len(), 11);
        let m = build_unit_square_mesh(1).unwrap();
        assert_eq!(build_dof_map(&m, 2).unwrap().len(), 9);
        assert_eq!(build_dof_map(&m, 6).unwrap_err(), Error::UnsupportedDegree(6));
    }

    #[test]
    fn dof_count_formula_2d() {
        for n in [1, 2, 5] {
            let m = build_unit_square_mesh(n).unwrap();
            let (v, e, t) = (m.vertex_count(), m.edges().len(), m.cell_count());
            for p in 1..=5 {
                let d = build_dof_map(&m, p).unwrap();
                assert_eq!(d.len(), v + (p - 1) * e + (p - 1) * p.saturating_sub(2) / 2 * t, "n={n} p={p}");
            }
        }
    }

    #[test]
    fn shared_dofs_have_matching_coordinates() {
        // local node positions mapped through each cell agree with the
        // global DOF coordinates, so neighbouring cells share nodes
        let m = build_unit_square_mesh(3).unwrap();
        for p in 1..=5 {
            let d = build_dof_map(&m, p).unwrap();
            let el = reference_lagrange(CellType::Triangle, p).unwrap();
            for c in 0..m.cell_count() {
                let geo = CellGeometry::new(&m, c);
                for (k, &dof) in d.cell_dofs(c).iter().enumerate() {
                    let x = geo.map(el.nodes()[k]);
                    let y = d.coords()[dof];
                    assert!((x[0] - y[0]).abs() < 1e-14 && (x[1] - y[1]).abs() < 1e-14, "p={p} c={c} k={k}");
                }
            }
        }
        let m = build_interval_mesh(4).unwrap();
        let d = build_dof_map(&m, 3).unwrap();
        let el = reference_lagrange(CellType::Interval, 3).unwrap();
        for c in 0..4 {
            let geo = CellGeometry::new(&m, c);
            for (k, &dof) in d.cell_dofs(c).iter().enumerate() {
                assert!((geo.map(el.nodes()[k])[0] - d.coords()[dof][0]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn laplace_p1_two_cells() {
        let mut pr = ProblemSpec::paper_1d(0.0);
        pr.b = [0.0, 0.0];
        let m = build_interval_mesh(2).unwrap();
        let d = build_dof_map(&m, 1).unwrap();
        let sys = assemble(&pr, &m, &d, &StabilizationConfig::galerkin()).unwrap();
        let u = solve_system(&sys);
        assert!((u[1] - 0.5).abs() < 1e-14);
        assert_eq!((u[0], u[2]), (1.0, 0.0));
    }

    #[test]
    fn galerkin_p1_matches_recurrence() {
        let n = 10;
        let m = build_interval_mesh(n).unwrap();
        let d = build_dof_map(&m, 1).unwrap();
        let sys = assemble(&ProblemSpec::paper_1d(50.0), &m, &d, &StabilizationConfig::galerkin()).unwrap();
        let u = solve_system(&sys);
        let rho: f64 = -7.0 / 3.0;
        for j in 0..=n {
            let want = (rho.powi(j as i32) - rho.powi(n as i32)) / (1.0 - rho.powi(n as i32));
            assert!((u[j] - want).abs() < 1e-10, "node {j}: {} vs {want}", u[j]);
        }
        assert!((u[9] - 1.429).abs() < 1e-3);
    }

    #[test]
    fn corner_values_2d() {
        let m = build_unit_square_mesh(4).unwrap();
        let d = build_dof_map(&m, 2).unwrap();
        let cons = dirichlet_constraints(&ProblemSpec::paper_2d(50.0), &d).unwrap();
        let find = |x: f64, y: f64| d.coords().iter().position(|p| p[0] == x && p[1] == y).unwrap();
        assert_eq!(cons[find(0.0, 1.0)], Some(0.5));
        assert_eq!(cons[find(1.0, 0.0)], Some(0.5));
        assert_eq!(cons[find(0.0, 0.0)], Some(1.0));
        assert_eq!(cons[find(1.0, 1.0)], Some(0.0));
        assert_eq!(cons[find(0.5, 0.0)], Some(1.0));
        assert_eq!(cons[find(0.125, 1.0)], Some(0.0));
        assert_eq!(cons[find(0.5, 0.5)], None);
    }

    #[test]
    fn point_reflection_antisymmetry_at_zero_convection() {
        let m = build_unit_square_mesh(8).unwrap();
        let d = build_dof_map(&m, 2).unwrap();
        let sys = assemble(&ProblemSpec::paper_2d(0.0), &m, &d, &StabilizationConfig::galerkin()).unwrap();
        let u = solve_system(&sys);
        let key = |p: Point| ((p[0] * 1e6).round() as i64, (p[1] * 1e6).round() as i64);
        let index: std::collections::HashMap<_, _> = d.coords().iter().enumerate().map(|(i, p)| (key(*p), i)).collect();
        for (i, p) in d.coords().iter().enumerate() {
            let j = index[&key([1.0 - p[0], 1.0 - p[1]])];
            assert!((u[i] + u[j] - 1.0).abs() < 1e-10, "{p:?}");
        }
    }

    #[test]
    fn constants_reproduced() {
        for (mesh, dim) in [(build_interval_mesh(5).unwrap(), 1), (build_unit_square_mesh(4).unwrap(), 2)] {
            let mut pr = if dim == 1 { ProblemSpec::paper_1d(7.0) } else { ProblemSpec::paper_2d(7.0) };
            for bc in pr.boundary.values_mut() {
                *bc = BoundaryCondition::Dirichlet(0.3.into());
            }
            pr.corner_values.clear();
            for p in 1..=4 {
                let d = build_dof_map(&mesh, p).unwrap();
                for stab in [StabilizationConfig::galerkin(), StabilizationConfig::supg()] {
                    let u = solve_system(&assemble(&pr, &mesh, &d, &stab).unwrap());
                    assert!(u.iter().all(|v| (v - 0.3).abs() < 1e-12), "dim={dim} p={p}");
                }
            }
        }
    }

    #[test]
    fn diffusion_matrix_symmetric_zero_row_sums() {
        for (mesh, mut pr) in [
            (build_interval_mesh(6).unwrap(), ProblemSpec::paper_1d(0.0)),
            (build_unit_square_mesh(3).unwrap(), ProblemSpec::paper_2d(0.0)),
        ] {
            pr.b = [0.0, 0.0];
            for p in 1..=5 {
                let d = build_dof_map(&mesh, p).unwrap();
                let sys = assemble_raw(&pr, &mesh, &d, &StabilizationConfig::galerkin()).unwrap();
                let a = &sys.matrix;
                assert_eq!(a.dim(), d.len());
                for i in 0..a.dim() {
                    let mut sum = 0.0;
                    for (j, v) in a.row(i) {
                        assert!((v - a.get(j, i)).abs() < 1e-12);
                        sum += v;
                    }
                    if d.markers(i).is_empty() {
                        assert!(sum.abs() < 1e-10, "p={p} row {i}: {sum}");
                    }
                }
            }
        }
    }

    #[test]
    fn paper_1d_system_dimension() {
        let m = build_interval_mesh(30).unwrap();
        let d = build_dof_map(&m, 3).unwrap();
        let sys = assemble_raw(&ProblemSpec::paper_1d(50.0), &m, &d, &StabilizationConfig::galerkin()).unwrap();
        assert_eq!(sys.matrix.dim(), 91);
        let sys = assemble(&ProblemSpec::paper_1d(50.0), &m, &d, &StabilizationConfig::galerkin()).unwrap();
        let u = solve_system(&sys);
        let (left, right) = (d.coords().iter().position(|p| p[0] == 0.0).unwrap(), d.coords().iter().position(|p| p[0] == 1.0).unwrap());
        assert_eq!((u[left], u[right]), (1.0, 0.0));
    }

    #[test]
    fn supg_with_zero_tau_is_galerkin() {
        // b = 0 makes tau vanish on every element
        let m = build_unit_square_mesh(4).unwrap();
        let d = build_dof_map(&m, 3).unwrap();
        let mut pr = ProblemSpec::paper_2d(0.0);
        pr.c = 2.0;
        let g = assemble(&pr, &m, &d, &StabilizationConfig::galerkin()).unwrap();
        let s = assemble(&pr, &m, &d, &StabilizationConfig::supg()).unwrap();
        assert_eq!(g.matrix, s.matrix);
        assert!(g.rhs.iter().zip(&s.rhs).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn manufactured_source_is_integrated() {
        // -u'' = pi^2 sin(pi x), u(0) = u(1) = 0  =>  u = sin(pi x)
        use std::f64::consts::PI;
        let mut pr = ProblemSpec::paper_1d(0.0);
        pr.source = ScalarField::Function(Arc::new(|p: Point| PI * PI * (PI * p[0]).sin()));
        pr.boundary.insert(BoundaryMarker::Left, BoundaryCondition::Dirichlet(0.0.into()));
        let m = build_interval_mesh(16).unwrap();
        let d = build_dof_map(&m, 3).unwrap();
        let u = solve_system(&assemble(&pr, &m, &d, &StabilizationConfig::galerkin()).unwrap());
        for (x, v) in d.coords().iter().zip(&u) {
            assert!((v - (PI * x[0]).sin()).abs() < 1e-6);
        }
    }

    #[test]
    fn neumann_outflow() {
        // -u'' + u' = 0, u(0) = 1, u'(1) = 0  =>  u = 1
        let mut pr = ProblemSpec::paper_1d(1.0);
        pr.boundary.insert(BoundaryMarker::Right, BoundaryCondition::Neumann);
        let m = build_interval_mesh(8).unwrap();
        let d = build_dof_map(&m, 2).unwrap();
        let u = solve_system(&assemble(&pr, &m, &d, &StabilizationConfig::galerkin()).unwrap());
        assert!(u.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn invalid_problems_rejected() {
        let m = build_interval_mesh(4).unwrap();
        let d = build_dof_map(&m, 1).unwrap();
        let stab = StabilizationConfig::galerkin();
        let mut pr = ProblemSpec::paper_1d(1.0);
        pr.eps = 0.0;
        assert!(matches!(assemble(&pr, &m, &d, &stab), Err(Error::InvalidArgument(_))));
        let mut pr = ProblemSpec::paper_1d(1.0);
        pr.b[0] = f64::NAN;
        assert!(matches!(assemble(&pr, &m, &d, &stab), Err(Error::NonFinite(_))));
        let mut pr = ProblemSpec::paper_1d(1.0);
        pr.boundary.clear();
        assert!(assemble(&pr, &m, &d, &stab).is_err());
        // mesh/dofmap mismatch
        let other = build_interval_mesh(5).unwrap();
        assert!(assemble(&ProblemSpec::paper_1d(1.0), &other, &d, &stab).is_err());
        // non-finite Dirichlet data
        let mut pr = ProblemSpec::paper_1d(1.0);
        pr.boundary.insert(BoundaryMarker::Left, BoundaryCondition::Dirichlet(f64::INFINITY.into()));
        assert!(matches!(assemble(&pr, &m, &d, &stab), Err(Error::NonFinite(_))));
    }
}
