//! Temporal partitions, spatial simplex meshes and their tensor products.
//!
//! Meshes are immutable: refinement returns a new mesh so that the levels of a
//! convergence study can coexist.

use std::collections::HashMap;

/// A point in space. One-dimensional meshes use only the first coordinate.
pub type Point = [f64; 2];

/// Partition of the time interval `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimePartition {
    breakpoints: Vec<f64>,
}

impl TimePartition {
    /// Uniform partition of `[0, end]` into `n` intervals.
    pub fn uniform(end: f64, n: usize) -> Self {
        assert!(n >= 1 && end > 0.0);
        let breakpoints = (0..=n).map(|i| end * i as f64 / n as f64).collect();
        Self { breakpoints }
    }

    /// Builds a partition from strictly increasing breakpoints starting at 0.
    pub fn from_breakpoints(breakpoints: Vec<f64>) -> Option<Self> {
        let ok = breakpoints.len() >= 2
            && breakpoints[0] == 0.0
            && breakpoints.windows(2).all(|w| w[0] < w[1]);
        ok.then_some(Self { breakpoints })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn n_elements(&self) -> usize {
        self.breakpoints.len() - 1
    }

    pub fn end_time(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    /// `(t_start, t_end)` of element `m`.
    pub fn element(&self, m: usize) -> (f64, f64) {
        (self.breakpoints[m], self.breakpoints[m + 1])
    }

    pub fn length(&self, m: usize) -> f64 {
        self.breakpoints[m + 1] - self.breakpoints[m]
    }

    /// Bisects every interval `times` times.
    pub fn bisect(&self, times: u32) -> Self {
        let parts = 1usize << times;
        let mut breakpoints = Vec::with_capacity(self.n_elements() * parts + 1);
        for w in self.breakpoints.windows(2) {
            for j in 0..parts {
                breakpoints.push(w[0] + (w[1] - w[0]) * j as f64 / parts as f64);
            }
        }
        breakpoints.push(self.end_time());
        Self { breakpoints }
    }

    pub fn max_length(&self) -> f64 {
        (0..self.n_elements())
            .map(|m| self.length(m))
            .fold(0.0, f64::max)
    }

    pub fn min_length(&self) -> f64 {
        (0..self.n_elements())
            .map(|m| self.length(m))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Conforming simplex mesh of an interval (`dim == 1`) or a polygon (`dim == 2`).
///
/// Triangles are stored counter-clockwise. Edges are stored as `[a, b]` with
/// `a < b`, which fixes their global orientation.
#[derive(Debug, Clone)]
pub struct SpatialMesh {
    dim: usize,
    vertices: Vec<Point>,
    connectivity: Vec<usize>,
    edges: Vec<[usize; 2]>,
    cell_edges: Vec<[usize; 3]>,
    boundary_vertex: Vec<bool>,
    boundary_edge: Vec<bool>,
}

impl SpatialMesh {
    /// Interval mesh with the given (sorted) vertex coordinates.
    pub fn interval(coords: Vec<f64>) -> Self {
        assert!(coords.len() >= 2 && coords.windows(2).all(|w| w[0] < w[1]));
        let n = coords.len();
        let vertices = coords.into_iter().map(|x| [x, 0.0]).collect();
        let connectivity = (0..n - 1).flat_map(|i| [i, i + 1]).collect();
        let mut boundary_vertex = vec![false; n];
        boundary_vertex[0] = true;
        boundary_vertex[n - 1] = true;
        Self {
            dim: 1,
            vertices,
            connectivity,
            edges: Vec::new(),
            cell_edges: Vec::new(),
            boundary_vertex,
            boundary_edge: Vec::new(),
        }
    }

    /// Triangle mesh. Cells with clockwise orientation are flipped.
    pub fn triangles(vertices: Vec<Point>, cells: Vec<[usize; 3]>) -> Self {
        let mut connectivity = Vec::with_capacity(3 * cells.len());
        for mut c in cells {
            if signed_area(&vertices, &c) < 0.0 {
                c.swap(1, 2);
            }
            connectivity.extend_from_slice(&c);
        }

        let mut edge_index: HashMap<[usize; 2], usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut edge_cells = Vec::new();
        let mut cell_edges = Vec::with_capacity(connectivity.len() / 3);
        for c in connectivity.chunks_exact(3) {
            let mut ce = [0; 3];
            for (j, (p, q)) in LOCAL_EDGES.iter().enumerate() {
                let key = sorted_pair(c[*p], c[*q]);
                let e = *edge_index.entry(key).or_insert_with(|| {
                    edges.push(key);
                    edge_cells.push(0u8);
                    edges.len() - 1
                });
                edge_cells[e] += 1;
                ce[j] = e;
            }
            cell_edges.push(ce);
        }

        let boundary_edge: Vec<bool> = edge_cells.iter().map(|&n| n == 1).collect();
        let mut boundary_vertex = vec![false; vertices.len()];
        for (e, &b) in edges.iter().zip(&boundary_edge) {
            if b {
                boundary_vertex[e[0]] = true;
                boundary_vertex[e[1]] = true;
            }
        }
        Self {
            dim: 2,
            vertices,
            connectivity,
            edges,
            cell_edges,
            boundary_vertex,
            boundary_edge,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_cells(&self) -> usize {
        self.connectivity.len() / (self.dim + 1)
    }

    /// Vertex indices of cell `c` (2 for intervals, 3 for triangles).
    pub fn cell(&self, c: usize) -> &[usize] {
        let s = self.dim + 1;
        &self.connectivity[c * s..(c + 1) * s]
    }

    /// Global edges `[a, b]`, `a < b` (empty for `dim == 1`).
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// Edge indices of cell `c` for the local vertex pairs `(0,1), (0,2), (1,2)`.
    pub fn cell_edges(&self, c: usize) -> [usize; 3] {
        self.cell_edges[c]
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.boundary_edge[e]
    }

    /// Length (d=1) or area (d=2) of cell `c`.
    pub fn measure(&self, c: usize) -> f64 {
        let v = self.cell(c);
        match self.dim {
            1 => self.vertices[v[1]][0] - self.vertices[v[0]][0],
            _ => signed_area(&self.vertices, &[v[0], v[1], v[2]]),
        }
    }

    pub fn diameter(&self, c: usize) -> f64 {
        let v = self.cell(c);
        match self.dim {
            1 => self.measure(c),
            _ => [(0, 1), (0, 2), (1, 2)]
                .iter()
                .map(|&(p, q)| dist(&self.vertices[v[p]], &self.vertices[v[q]]))
                .fold(0.0, f64::max),
        }
    }

    pub fn max_diameter(&self) -> f64 {
        (0..self.n_cells()).map(|c| self.diameter(c)).fold(0.0, f64::max)
    }

    pub fn min_diameter(&self) -> f64 {
        (0..self.n_cells())
            .map(|c| self.diameter(c))
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest `diam(K)^d / |K|` over all cells.
    pub fn shape_regularity(&self) -> f64 {
        (0..self.n_cells())
            .map(|c| self.diameter(c).powi(self.dim as i32) / self.measure(c))
            .fold(0.0, f64::max)
    }

    /// Uniform refinement: bisection for intervals, red refinement for triangles.
    pub fn refine(&self) -> Self {
        match self.dim {
            1 => {
                let mut coords: Vec<f64> = Vec::with_capacity(2 * self.n_vertices() - 1);
                for c in 0..self.n_cells() {
                    let v = self.cell(c);
                    let (a, b) = (self.vertices[v[0]][0], self.vertices[v[1]][0]);
                    coords.push(a);
                    coords.push(0.5 * (a + b));
                }
                coords.push(self.vertices[self.cell(self.n_cells() - 1)[1]][0]);
                Self::interval(coords)
            }
            _ => self.red_refine(),
        }
    }

    fn red_refine(&self) -> Self {
        let nv = self.n_vertices();
        let mut vertices = self.vertices.clone();
        // midpoint of global edge e becomes vertex nv + e
        for &[a, b] in &self.edges {
            let (pa, pb) = (self.vertices[a], self.vertices[b]);
            vertices.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
        }
        let mut cells = Vec::with_capacity(4 * self.n_cells());
        for c in 0..self.n_cells() {
            let v = self.cell(c);
            let ce = self.cell_edges[c];
            // local edges: (0,1), (0,2), (1,2)
            let m01 = nv + ce[0];
            let m02 = nv + ce[1];
            let m12 = nv + ce[2];
            cells.push([v[0], m01, m02]);
            cells.push([m01, v[1], m12]);
            cells.push([m02, m12, v[2]]);
            cells.push([m01, m12, m02]);
        }
        Self::triangles(vertices, cells)
    }
}

/// Local vertex pairs of the three triangle edges.
pub const LOCAL_EDGES: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

fn sorted_pair(a: usize, b: usize) -> [usize; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

fn dist(a: &Point, b: &Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn signed_area(vertices: &[Point], c: &[usize; 3]) -> f64 {
    let (a, b, d) = (vertices[c[0]], vertices[c[1]], vertices[c[2]]);
    0.5 * ((b[0] - a[0]) * (d[1] - a[1]) - (b[1] - a[1]) * (d[0] - a[0]))
}

/// Relation between temporal and spatial mesh size along a refinement sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scaling {
    /// `h_t ~ h_x`: one temporal bisection per spatial refinement.
    Equal,
    /// `h_t ~ h_x^2`: two temporal bisections per spatial refinement.
    Parabolic,
}

impl Scaling {
    /// The exponent `s` in `h_t ~ h_x^s`.
    pub fn exponent(self) -> u32 {
        match self {
            Scaling::Equal => 1,
            Scaling::Parabolic => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    UnitInterval,
    UnitSquare,
}

/// Logical product of a temporal partition and a spatial mesh.
#[derive(Debug, Clone)]
pub struct TensorMesh {
    pub time: TimePartition,
    pub space: SpatialMesh,
    pub scaling: Scaling,
    /// Number of uniform refinements applied since the initial mesh.
    pub level: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshStats {
    pub h_t: f64,
    pub h_x: f64,
    pub n_cells: usize,
}

/// Initial meshes `T_t = {(0,1)}` and `T_x = {(0,1)}` or the two-triangle
/// split of the unit square.
pub fn initial_meshes(domain: Domain) -> (TimePartition, SpatialMesh) {
    let time = TimePartition::uniform(1.0, 1);
    let space = match domain {
        Domain::UnitInterval => SpatialMesh::interval(vec![0.0, 1.0]),
        Domain::UnitSquare => SpatialMesh::triangles(
            vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]],
            vec![[0, 1, 2], [1, 3, 2]],
        ),
    };
    (time, space)
}

impl TensorMesh {
    pub fn new(time: TimePartition, space: SpatialMesh, scaling: Scaling) -> Self {
        Self {
            time,
            space,
            scaling,
            level: 0,
        }
    }

    pub fn initial(domain: Domain, scaling: Scaling) -> Self {
        let (time, space) = initial_meshes(domain);
        Self::new(time, space, scaling)
    }

    pub fn refine_uniform(&self) -> Self {
        Self {
            time: self.time.bisect(self.scaling.exponent()),
            space: self.space.refine(),
            scaling: self.scaling,
            level: self.level + 1,
        }
    }

    pub fn refined(&self, times: usize) -> Self {
        (0..times).fold(self.clone(), |m, _| m.refine_uniform())
    }

    pub fn stats(&self) -> MeshStats {
        MeshStats {
            h_t: self.time.max_length(),
            h_x: self.space.max_diameter(),
            n_cells: self.time.n_elements() * self.space.n_cells(),
        }
    }

    /// All space-time cells `(time element, space element)`, time-major.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let ns = self.space.n_cells();
        (0..self.time.n_elements()).flat_map(move |m| (0..ns).map(move |c| (m, c)))
    }
}
