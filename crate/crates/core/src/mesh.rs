//! Structured meshes of the unit interval and the unit square.
//!
//! The square is split into `2n²` right triangles whose diagonals run
//! parallel to `y = x`, so the triangulation maps onto itself under the
//! swap `(x, y) -> (y, x)`.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::Point;

/// Side of the domain a boundary entity lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BoundaryMarker {
    Left,
    Right,
    Bottom,
    Top,
}

impl BoundaryMarker {
    pub const ALL: [BoundaryMarker; 4] = [
        BoundaryMarker::Left,
        BoundaryMarker::Right,
        BoundaryMarker::Bottom,
        BoundaryMarker::Top,
    ];

    fn bit(self) -> u8 {
        match self {
            BoundaryMarker::Left => 1,
            BoundaryMarker::Right => 2,
            BoundaryMarker::Bottom => 4,
            BoundaryMarker::Top => 8,
        }
    }
}

impl fmt::Display for BoundaryMarker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BoundaryMarker::Left => "left",
            BoundaryMarker::Right => "right",
            BoundaryMarker::Bottom => "bottom",
            BoundaryMarker::Top => "top",
        };
        f.write_str(s)
    }
}

/// Small set of boundary markers; corner vertices carry two.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct MarkerSet(u8);

impl MarkerSet {
    pub const EMPTY: MarkerSet = MarkerSet(0);

    pub fn insert(&mut self, m: BoundaryMarker) {
        self.0 |= m.bit();
    }

    pub fn contains(self, m: BoundaryMarker) -> bool {
        self.0 & m.bit() != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn union(self, other: MarkerSet) -> MarkerSet {
        MarkerSet(self.0 | other.0)
    }

    pub fn iter(self) -> impl Iterator<Item = BoundaryMarker> {
        BoundaryMarker::ALL.into_iter().filter(move |m| self.contains(*m))
    }
}

impl From<BoundaryMarker> for MarkerSet {
    fn from(m: BoundaryMarker) -> Self {
        MarkerSet(m.bit())
    }
}

/// A boundary point (1D) or boundary edge (2D) with the side it lies on.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFacet {
    pub vertices: Vec<usize>,
    pub marker: BoundaryMarker,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellType {
    Interval,
    Triangle,
}

impl CellType {
    pub fn vertex_count(self) -> usize {
        match self {
            CellType::Interval => 2,
            CellType::Triangle => 3,
        }
    }

    pub fn dim(self) -> usize {
        match self {
            CellType::Interval => 1,
            CellType::Triangle => 2,
        }
    }
}

/// Immutable simplicial mesh of `[0,1]` or `[0,1]²`.
///
/// Points are stored as `[x, y]`; 1D meshes keep `y = 0`.
#[derive(Debug, Clone)]
pub struct Mesh {
    cell_type: CellType,
    vertices: Vec<Point>,
    cells: Vec<usize>,
    boundary_facets: Vec<BoundaryFacet>,
    vertex_markers: Vec<MarkerSet>,
    // 2D topology: unique edges sorted by (min, max) vertex pair, and for each
    // cell the edge index of local edge k = (k, k+1 mod 3).
    edges: Vec<[usize; 2]>,
    cell_edges: Vec<[usize; 3]>,
    edge_markers: Vec<MarkerSet>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshStats {
    pub h_min: f64,
    pub h_max: f64,
    pub cell_count: usize,
    pub vertex_count: usize,
}

/// Uniform mesh of `[0,1]` with `n` cells.
pub fn build_interval_mesh(n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::InvalidArgument("interval mesh needs at least one cell".into()));
    }
    let vertices = (0..=n).map(|i| [i as f64 / n as f64, 0.0]).collect();
    let cells = (0..n).flat_map(|i| [i, i + 1]).collect();
    let mut vertex_markers = vec![MarkerSet::EMPTY; n + 1];
    vertex_markers[0].insert(BoundaryMarker::Left);
    vertex_markers[n].insert(BoundaryMarker::Right);
    let boundary_facets = vec![
        BoundaryFacet { vertices: vec![0], marker: BoundaryMarker::Left },
        BoundaryFacet { vertices: vec![n], marker: BoundaryMarker::Right },
    ];
    Ok(Mesh {
        cell_type: CellType::Interval,
        vertices,
        cells,
        boundary_facets,
        vertex_markers,
        edges: Vec::new(),
        cell_edges: Vec::new(),
        edge_markers: Vec::new(),
    })
}

/// Uniform triangulation of the unit square with `n` cells per side.
pub fn build_unit_square_mesh(n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::InvalidArgument("square mesh needs at least one cell per side".into()));
    }
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([i as f64 / n as f64, j as f64 / n as f64]);
        }
    }

    let mut cells = Vec::with_capacity(6 * n * n);
    for j in 0..n {
        for i in 0..n {
            let v00 = idx(i, j);
            let v10 = idx(i + 1, j);
            let v01 = idx(i, j + 1);
            let v11 = idx(i + 1, j + 1);
            cells.extend_from_slice(&[v00, v10, v11]);
            cells.extend_from_slice(&[v00, v11, v01]);
        }
    }

    let mut vertex_markers = vec![MarkerSet::EMPTY; vertices.len()];
    let mut boundary_facets = Vec::with_capacity(4 * n);
    for k in 0..n {
        let sides = [
            ([idx(k, 0), idx(k + 1, 0)], BoundaryMarker::Bottom),
            ([idx(n, k), idx(n, k + 1)], BoundaryMarker::Right),
            ([idx(k, n), idx(k + 1, n)], BoundaryMarker::Top),
            ([idx(0, k), idx(0, k + 1)], BoundaryMarker::Left),
        ];
        for (verts, marker) in sides {
            for v in verts {
                vertex_markers[v].insert(marker);
            }
            boundary_facets.push(BoundaryFacet { vertices: verts.to_vec(), marker });
        }
    }

    let mut mesh = Mesh {
        cell_type: CellType::Triangle,
        vertices,
        cells,
        boundary_facets,
        vertex_markers,
        edges: Vec::new(),
        cell_edges: Vec::new(),
        edge_markers: Vec::new(),
    };
    mesh.build_edges();
    Ok(mesh)
}

impl Mesh {
    fn build_edges(&mut self) {
        let mut map: BTreeMap<[usize; 2], usize> = BTreeMap::new();
        for c in 0..self.cell_count() {
            let v = self.cell(c);
            for k in 0..3 {
                let (a, b) = (v[k], v[(k + 1) % 3]);
                map.insert([a.min(b), a.max(b)], 0);
            }
        }
        for (i, val) in map.values_mut().enumerate() {
            *val = i;
        }
        self.edges = map.keys().copied().collect();
        self.cell_edges = (0..self.cell_count())
            .map(|c| {
                let v = self.cell(c);
                let mut e = [0; 3];
                for (k, slot) in e.iter_mut().enumerate() {
                    let (a, b) = (v[k], v[(k + 1) % 3]);
                    *slot = map[&[a.min(b), a.max(b)]];
                }
                e
            })
            .collect();
        self.edge_markers = vec![MarkerSet::EMPTY; self.edges.len()];
        for f in &self.boundary_facets {
            let (a, b) = (f.vertices[0], f.vertices[1]);
            let e = map[&[a.min(b), a.max(b)]];
            self.edge_markers[e].insert(f.marker);
        }
    }

    pub fn cell_type(&self) -> CellType {
        self.cell_type
    }

    pub fn dim(&self) -> usize {
        self.cell_type.dim()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len() / self.cell_type.vertex_count()
    }

    pub fn cell(&self, c: usize) -> &[usize] {
        let k = self.cell_type.vertex_count();
        &self.cells[c * k..(c + 1) * k]
    }

    pub fn cell_points(&self, c: usize) -> impl Iterator<Item = Point> + '_ {
        self.cell(c).iter().map(|&v| self.vertices[v])
    }

    pub fn boundary_facets(&self) -> &[BoundaryFacet] {
        &self.boundary_facets
    }

    pub fn vertex_markers(&self, v: usize) -> MarkerSet {
        self.vertex_markers[v]
    }

    /// Unique edges of a triangulation as sorted vertex pairs. Empty in 1D.
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn cell_edges(&self, c: usize) -> [usize; 3] {
        self.cell_edges[c]
    }

    pub fn edge_markers(&self, e: usize) -> MarkerSet {
        self.edge_markers[e]
    }

    /// Signed length (1D) or signed area (2D) of a cell.
    pub fn cell_measure(&self, c: usize) -> f64 {
        let v = self.cell(c);
        let p0 = self.vertices[v[0]];
        let p1 = self.vertices[v[1]];
        match self.cell_type {
            CellType::Interval => p1[0] - p0[0],
            CellType::Triangle => {
                let p2 = self.vertices[v[2]];
                0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]))
            }
        }
    }

    /// Cell length (1D) or longest edge (2D).
    pub fn cell_diameter(&self, c: usize) -> f64 {
        let pts: Vec<Point> = self.cell_points(c).collect();
        let mut h: f64 = 0.0;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                h = h.max(dist(pts[i], pts[j]));
            }
        }
        h
    }

    pub fn stats(&self) -> MeshStats {
        mesh_stats(self)
    }
}

fn dist(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

pub fn mesh_stats(mesh: &Mesh) -> MeshStats {
    let (mut h_min, mut h_max) = (f64::INFINITY, 0.0_f64);
    for c in 0..mesh.cell_count() {
        let h = mesh.cell_diameter(c);
        h_min = h_min.min(h);
        h_max = h_max.max(h);
    }
    MeshStats { h_min, h_max, cell_count: mesh.cell_count(), vertex_count: mesh.vertex_count() }
}
