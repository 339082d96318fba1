//! Mesh + assembly + linear solve, and evaluation of the resulting field.

use crate::assembly::{assemble, build_dof_map, CellGeometry, DofMap, ProblemSpec};
use crate::elements::{reference_lagrange, ReferenceElement};
use crate::error::{Error, Result};
use crate::linsolve::solve;
use crate::mesh::{build_interval_mesh, build_unit_square_mesh, CellType, Mesh};
use crate::stabilization::StabilizationConfig;
use crate::Point;

/// A finite-element field: DOF values bound to a mesh and element degree.
#[derive(Debug, Clone)]
pub struct Solution {
    mesh: Mesh,
    dofmap: DofMap,
    element: ReferenceElement,
    values: Vec<f64>,
}

impl Solution {
    pub fn new(mesh: Mesh, dofmap: DofMap, values: Vec<f64>) -> Result<Self> {
        dofmap.check_mesh(&mesh)?;
        if values.len() != dofmap.len() {
            return Err(Error::DimensionMismatch { expected: dofmap.len(), actual: values.len() });
        }
        let element = reference_lagrange(mesh.cell_type(), dofmap.degree())?;
        Ok(Solution { mesh, dofmap, element, values })
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate(mesh: Mesh, degree: usize, f: impl Fn(Point) -> f64) -> Result<Self> {
        let dofmap = build_dof_map(&mesh, degree)?;
        let values = dofmap.coords().iter().map(|&p| f(p)).collect();
        Solution::new(mesh, dofmap, values)
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn dofmap(&self) -> &DofMap {
        &self.dofmap
    }

    pub fn element(&self) -> &ReferenceElement {
        &self.element
    }

    pub fn degree(&self) -> usize {
        self.dofmap.degree()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn coords(&self) -> &[Point] {
        self.dofmap.coords()
    }

    /// First cell (by index) containing `x`, with the reference coordinates.
    pub fn locate(&self, x: Point) -> Result<(usize, Point)> {
        for c in 0..self.mesh.cell_count() {
            let geo = CellGeometry::new(&self.mesh, c);
            let r = geo.inverse_map(x);
            let r = if self.mesh.cell_type() == CellType::Interval { [r[0], 0.0] } else { r };
            if self.element.contains(r) {
                let clamp = |v: f64| v.clamp(0.0, 1.0);
                return Ok((c, [clamp(r[0]), clamp(r[1])]));
            }
        }
        Err(Error::Domain { point: x, domain: "mesh" })
    }

    /// Value and physical gradient at a point of the domain.
    pub fn eval_with_gradient(&self, x: Point) -> Result<(f64, [f64; 2])> {
        let (c, r) = self.locate(x)?;
        Ok(self.eval_in_cell(c, r))
    }

    pub fn eval(&self, x: Point) -> Result<f64> {
        self.eval_with_gradient(x).map(|(v, _)| v)
    }

    /// Value and physical gradient at reference point `r` of cell `c`.
    pub fn eval_in_cell(&self, c: usize, r: Point) -> (f64, [f64; 2]) {
        let geo = CellGeometry::new(&self.mesh, c);
        let basis = self.element.eval_unchecked(r);
        let mut v = 0.0;
        let mut g = [0.0; 2];
        for (i, &dof) in self.dofmap.cell_dofs(c).iter().enumerate() {
            let u = self.values[dof];
            v += u * basis.values[i];
            let gi = geo.gradient(basis.gradients[i]);
            g[0] += u * gi[0];
            g[1] += u * gi[1];
        }
        if self.mesh.cell_type() == CellType::Interval {
            g[1] = 0.0;
        }
        (v, g)
    }

    /// DOF value at an exact coordinate match, if there is one.
    pub fn value_at_dof(&self, x: Point) -> Option<f64> {
        self.coords().iter().position(|&p| p == x).map(|i| self.values[i])
    }
}

/// Builds the uniform mesh for the problem's dimension.
pub fn build_mesh(dim: usize, n: usize) -> Result<Mesh> {
    match dim {
        1 => build_interval_mesh(n),
        2 => build_unit_square_mesh(n),
        d => Err(Error::InvalidArgument(format!("dimension must be 1 or 2, got {d}"))),
    }
}

/// Assembles and solves on `mesh` with Lagrange elements of degree `p`.
pub fn solve_on_mesh(problem: &ProblemSpec, mesh: Mesh, p: usize, stab: &StabilizationConfig, tol: f64) -> Result<Solution> {
    let dofmap = build_dof_map(&mesh, p)?;
    let system = assemble(problem, &mesh, &dofmap, stab)?;
    let mut values = solve(&system.matrix, &system.rhs, tol)?;
    // eliminated rows are identities; restore the data bit-exactly
    for (v, d) in values.iter_mut().zip(&system.dirichlet) {
        if let Some(d) = d {
            *v = *d;
        }
    }
    Solution::new(mesh, dofmap, values)
}

/// Uniform mesh with `n` cells per side, degree `p`.
pub fn solve_problem(problem: &ProblemSpec, n: usize, p: usize, stab: &StabilizationConfig, tol: f64) -> Result<Solution> {
    problem.validate()?;
    let mesh = build_mesh(problem.dim, n)?;
    solve_on_mesh(problem, mesh, p, stab, tol)
}
