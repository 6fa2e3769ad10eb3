//! Degrees of freedom and basis evaluation for the factor spaces of
//! `U_h = S_1(T_t) ⊗ S_{1,0}(T_x)  ×  P_0(T_t) ⊗ RT_1(T_x)`.
//!
//! All spatial spaces share one affine reference map per cell, built from the
//! cell's vertices in ascending global index order. With that ordering every
//! local edge runs from its lower to its higher global vertex, so the edge
//! degrees of freedom of the Raviart-Thomas space agree between neighbours
//! without sign corrections. The Jacobian determinant may be negative; measures
//! use its absolute value.

use std::ops::{Deref, Range};
use std::sync::OnceLock;

use nalgebra::SMatrix;

use crate::error::{Error, Result};
use crate::mesh::{Point, SpatialMesh, TensorMesh, TimePartition, LOCAL_EDGES};

/// Fixed-capacity list of local basis data.
#[derive(Debug, Clone, Copy)]
pub struct Local<T: Copy + Default, const N: usize> {
    len: usize,
    items: [T; N],
}

impl<T: Copy + Default, const N: usize> Local<T, N> {
    fn new(len: usize) -> Self {
        Self {
            len,
            items: [T::default(); N],
        }
    }
}

impl<T: Copy + Default, const N: usize> Deref for Local<T, N> {
    type Target = [T];
    fn deref(&self) -> &[T] {
        &self.items[..self.len]
    }
}

// ---------------------------------------------------------------- time

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TemporalKind {
    /// Continuous piecewise linears `S_1(T_t)`.
    Continuous,
    /// Piecewise constants `P_0(T_t)`.
    Discontinuous,
}

#[derive(Debug, Clone)]
pub struct TemporalSpace {
    kind: TemporalKind,
    partition: TimePartition,
}

impl TemporalSpace {
    /// `S_k(T_t)` (continuous) or `P_{k-1}(T_t)`. Only `k = 1` is supported.
    pub fn new(kind: TemporalKind, degree: usize, partition: &TimePartition) -> Result<Self> {
        if degree != 1 {
            return Err(Error::UnsupportedDegree {
                what: "temporal space",
                degree,
            });
        }
        Ok(Self {
            kind,
            partition: partition.clone(),
        })
    }

    pub fn kind(&self) -> TemporalKind {
        self.kind
    }

    pub fn partition(&self) -> &TimePartition {
        &self.partition
    }

    pub fn n_dofs(&self) -> usize {
        let n = self.partition.n_elements();
        match self.kind {
            TemporalKind::Continuous => n + 1,
            TemporalKind::Discontinuous => n,
        }
    }

    /// Global indices of the local basis functions on element `m`.
    pub fn dofs(&self, m: usize) -> Range<usize> {
        match self.kind {
            TemporalKind::Continuous => m..m + 2,
            TemporalKind::Discontinuous => m..m + 1,
        }
    }

    /// Local basis values (`order == 0`) or time derivatives (`order == 1`) at
    /// the local coordinate `xi` in `[0, 1]` of element `m`.
    pub fn eval(&self, m: usize, xi: f64, order: u8) -> Local<f64, 2> {
        let h = self.partition.length(m);
        match (self.kind, order) {
            (TemporalKind::Continuous, 0) => Local { len: 2, items: [1.0 - xi, xi] },
            (TemporalKind::Continuous, _) => Local { len: 2, items: [-1.0 / h, 1.0 / h] },
            (TemporalKind::Discontinuous, 0) => Local { len: 1, items: [1.0, 0.0] },
            (TemporalKind::Discontinuous, _) => Local::new(1),
        }
    }
}

// ---------------------------------------------------------------- geometry

/// Affine map `x = origin + jac * xi` of a spatial cell.
#[derive(Debug, Clone, Copy)]
pub struct CellMap {
    /// Cell vertices in ascending global order (the third entry is unused for d=1).
    pub vertices: [usize; 3],
    pub origin: Point,
    pub jac: [[f64; 2]; 2],
    pub det: f64,
    /// `jac^{-T}`
    pub inv_t: [[f64; 2]; 2],
}

impl CellMap {
    fn build(mesh: &SpatialMesh, c: usize) -> Result<Self> {
        let cell = mesh.cell(c);
        let xs = mesh.vertices();
        if mesh.dim() == 1 {
            let (a, b) = if cell[0] < cell[1] {
                (cell[0], cell[1])
            } else {
                (cell[1], cell[0])
            };
            let h = xs[b][0] - xs[a][0];
            if h == 0.0 {
                return Err(Error::DegenerateElement(c));
            }
            return Ok(Self {
                vertices: [a, b, usize::MAX],
                origin: xs[a],
                jac: [[h, 0.0], [0.0, 1.0]],
                det: h,
                inv_t: [[1.0 / h, 0.0], [0.0, 1.0]],
            });
        }
        let mut v = [cell[0], cell[1], cell[2]];
        v.sort_unstable();
        let (p0, p1, p2) = (xs[v[0]], xs[v[1]], xs[v[2]]);
        let jac = [[p1[0] - p0[0], p2[0] - p0[0]], [p1[1] - p0[1], p2[1] - p0[1]]];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det == 0.0 {
            return Err(Error::DegenerateElement(c));
        }
        let inv_t = [
            [jac[1][1] / det, -jac[1][0] / det],
            [-jac[0][1] / det, jac[0][0] / det],
        ];
        Ok(Self {
            vertices: v,
            origin: p0,
            jac,
            det,
            inv_t,
        })
    }

    pub fn map(&self, xi: &[f64; 2]) -> Point {
        [
            self.origin[0] + self.jac[0][0] * xi[0] + self.jac[0][1] * xi[1],
            self.origin[1] + self.jac[1][0] * xi[0] + self.jac[1][1] * xi[1],
        ]
    }

    /// `|det J|`: the factor converting reference to physical quadrature weights.
    pub fn abs_det(&self) -> f64 {
        self.det.abs()
    }

    fn push_gradient(&self, g: [f64; 2]) -> [f64; 2] {
        [
            self.inv_t[0][0] * g[0] + self.inv_t[0][1] * g[1],
            self.inv_t[1][0] * g[0] + self.inv_t[1][1] * g[1],
        ]
    }

    fn piola(&self, v: [f64; 2]) -> [f64; 2] {
        [
            (self.jac[0][0] * v[0] + self.jac[0][1] * v[1]) / self.det,
            (self.jac[1][0] * v[0] + self.jac[1][1] * v[1]) / self.det,
        ]
    }
}

fn cell_maps(mesh: &SpatialMesh) -> Result<Vec<CellMap>> {
    (0..mesh.n_cells()).map(|c| CellMap::build(mesh, c)).collect()
}

// ---------------------------------------------------------------- scalar space

/// Values and gradients of the local `P_1` basis at one point. Basis functions
/// on boundary vertices are present with `dof == None`.
#[derive(Debug, Clone, Copy)]
pub struct ScalarLocal {
    pub dofs: Local<Option<usize>, 3>,
    pub values: Local<f64, 3>,
    pub grads: Local<[f64; 2], 3>,
}

/// `S_{1,0}(T_x)`: continuous piecewise linears vanishing on the boundary.
#[derive(Debug, Clone)]
pub struct ScalarSpace {
    dim: usize,
    maps: Vec<CellMap>,
    vertex_dof: Vec<Option<usize>>,
    n_dofs: usize,
}

impl ScalarSpace {
    pub fn new(mesh: &SpatialMesh, degree: usize) -> Result<Self> {
        if degree != 1 {
            return Err(Error::UnsupportedDegree {
                what: "spatial Lagrange space",
                degree,
            });
        }
        let mut n_dofs = 0;
        let vertex_dof = (0..mesh.n_vertices())
            .map(|v| {
                (!mesh.is_boundary_vertex(v)).then(|| {
                    n_dofs += 1;
                    n_dofs - 1
                })
            })
            .collect();
        Ok(Self {
            dim: mesh.dim(),
            maps: cell_maps(mesh)?,
            vertex_dof,
            n_dofs,
        })
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_cells(&self) -> usize {
        self.maps.len()
    }

    pub fn cell_map(&self, c: usize) -> &CellMap {
        &self.maps[c]
    }

    /// Global degree of freedom attached to vertex `v`, if it is interior.
    pub fn vertex_dof(&self, v: usize) -> Option<usize> {
        self.vertex_dof[v]
    }

    pub fn eval(&self, c: usize, xi: &[f64; 2]) -> ScalarLocal {
        let map = &self.maps[c];
        let n = self.dim + 1;
        let mut out = ScalarLocal {
            dofs: Local::new(n),
            values: Local::new(n),
            grads: Local::new(n),
        };
        let (vals, ref_grads): ([f64; 3], [[f64; 2]; 3]) = if self.dim == 1 {
            ([1.0 - xi[0], xi[0], 0.0], [[-1.0, 0.0], [1.0, 0.0], [0.0, 0.0]])
        } else {
            (
                [1.0 - xi[0] - xi[1], xi[0], xi[1]],
                [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]],
            )
        };
        for i in 0..n {
            out.dofs.items[i] = self.vertex_dof[map.vertices[i]];
            out.values.items[i] = vals[i];
            out.grads.items[i] = map.push_gradient(ref_grads[i]);
        }
        out
    }
}

// ---------------------------------------------------------------- flux space

/// Values and divergences of the local flux basis at one point.
#[derive(Debug, Clone, Copy)]
pub struct FluxLocal {
    pub dofs: Local<usize, 8>,
    pub values: Local<[f64; 2], 8>,
    pub divs: Local<f64, 8>,
}

/// `RT_1(T_x)`; for `d = 1` this is `S_2(T_x)` without boundary conditions.
///
/// Global numbering for `d = 2`: edge `e` carries dofs `2e, 2e + 1` (normal
/// moments against `1` and `s - 1/2`, with `s` running from the lower to the
/// higher vertex), cell `c` carries `2 E + 2c, 2 E + 2c + 1`. For `d = 1`
/// vertex `v` carries dof `v` and cell `c` carries the midpoint dof `V + c`.
#[derive(Debug, Clone)]
pub struct FluxSpace {
    dim: usize,
    maps: Vec<CellMap>,
    cell_dofs: Vec<[usize; 8]>,
    n_dofs: usize,
}

impl FluxSpace {
    pub fn new(mesh: &SpatialMesh, degree: usize) -> Result<Self> {
        if degree != 1 {
            return Err(Error::UnsupportedDegree {
                what: "Raviart-Thomas space",
                degree,
            });
        }
        let maps = cell_maps(mesh)?;
        let (cell_dofs, n_dofs) = if mesh.dim() == 1 {
            let nv = mesh.n_vertices();
            let dofs = maps
                .iter()
                .enumerate()
                .map(|(c, m)| [m.vertices[0], m.vertices[1], nv + c, 0, 0, 0, 0, 0])
                .collect();
            (dofs, nv + mesh.n_cells())
        } else {
            let ne = mesh.edges().len();
            let dofs = maps
                .iter()
                .enumerate()
                .map(|(c, m)| {
                    let edges = mesh.cell_edges(c);
                    let mut d = [0; 8];
                    for (j, &(p, q)) in LOCAL_EDGES.iter().enumerate() {
                        let key = [m.vertices[p], m.vertices[q]];
                        let e = *edges
                            .iter()
                            .find(|&&e| mesh.edges()[e] == key)
                            .expect("cell edge present in mesh");
                        d[2 * j] = 2 * e;
                        d[2 * j + 1] = 2 * e + 1;
                    }
                    d[6] = 2 * ne + 2 * c;
                    d[7] = 2 * ne + 2 * c + 1;
                    d
                })
                .collect();
            (dofs, 2 * ne + 2 * mesh.n_cells())
        };
        Ok(Self {
            dim: mesh.dim(),
            maps,
            cell_dofs,
            n_dofs,
        })
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_local(&self) -> usize {
        if self.dim == 1 {
            3
        } else {
            8
        }
    }

    pub fn n_cells(&self) -> usize {
        self.maps.len()
    }

    pub fn cell_map(&self, c: usize) -> &CellMap {
        &self.maps[c]
    }

    pub fn cell_dofs(&self, c: usize) -> &[usize] {
        &self.cell_dofs[c][..self.n_local()]
    }

    /// Physical values and divergences of the local basis of cell `c` at the
    /// reference point `xi` (contravariant Piola map for `d = 2`).
    pub fn eval(&self, c: usize, xi: &[f64; 2]) -> FluxLocal {
        let map = &self.maps[c];
        let n = self.n_local();
        let mut out = FluxLocal {
            dofs: Local::new(n),
            values: Local::new(n),
            divs: Local::new(n),
        };
        out.dofs.items[..n].copy_from_slice(&self.cell_dofs[c][..n]);
        if self.dim == 1 {
            let x = xi[0];
            let h = map.det;
            let vals = [(1.0 - x) * (1.0 - 2.0 * x), x * (2.0 * x - 1.0), 4.0 * x * (1.0 - x)];
            let ders = [4.0 * x - 3.0, 4.0 * x - 1.0, 4.0 - 8.0 * x];
            for i in 0..3 {
                out.values.items[i] = [vals[i], 0.0];
                out.divs.items[i] = ders[i] / h;
            }
        } else {
            let (vals, divs) = rt1_reference(xi);
            for i in 0..8 {
                out.values.items[i] = map.piola(vals[i]);
                out.divs.items[i] = divs[i] / map.det;
            }
        }
        out
    }

    /// `+1` if the global normal of local edge `j` of cell `c` points out of
    /// the cell, `-1` otherwise (`d = 2` only).
    pub fn edge_orientation(&self, c: usize, j: usize) -> f64 {
        // reference normals R t of the local edges (0,1), (0,2), (1,2) point
        // out, in, out for a positively oriented map
        let reference = [1.0, -1.0, 1.0];
        reference[j] * self.maps[c].det.signum()
    }
}

// ---------------------------------------------------------------- RT_1 reference basis

/// Vector monomials spanning `RT_1` on the reference triangle.
fn rt1_monomials(x: &[f64; 2]) -> ([[f64; 2]; 8], [f64; 8]) {
    let (a, b) = (x[0], x[1]);
    (
        [
            [1.0, 0.0],
            [a, 0.0],
            [b, 0.0],
            [0.0, 1.0],
            [0.0, a],
            [0.0, b],
            [a * a, a * b],
            [a * b, b * b],
        ],
        [0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 3.0 * a, 3.0 * b],
    )
}

const REF_VERTICES: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

/// Reference edge `j` as `(start, tangent, normal)` with `normal = R tangent`.
pub(crate) fn reference_edge(j: usize) -> ([f64; 2], [f64; 2], [f64; 2]) {
    let (p, q) = LOCAL_EDGES[j];
    let (a, b) = (REF_VERTICES[p], REF_VERTICES[q]);
    let t = [b[0] - a[0], b[1] - a[1]];
    (a, t, [t[1], -t[0]])
}

/// Basis coefficients: `phi_k = sum_j C[(j, k)] p_j`, dual to the edge and
/// interior moments.
fn rt1_coefficients() -> &'static SMatrix<f64, 8, 8> {
    static COEFFS: OnceLock<SMatrix<f64, 8, 8>> = OnceLock::new();
    COEFFS.get_or_init(|| {
        let edge_rule = crate::quadrature::gauss_interval(3).unwrap();
        let cell_rule = crate::quadrature::triangle_rule(2).unwrap();
        let mut dual = SMatrix::<f64, 8, 8>::zeros();
        for j in 0..3 {
            let (start, t, n) = reference_edge(j);
            for (s, w) in edge_rule.iter() {
                let s = s[0];
                let x = [start[0] + s * t[0], start[1] + s * t[1]];
                let (p, _) = rt1_monomials(&x);
                for (col, v) in p.iter().enumerate() {
                    let flux = v[0] * n[0] + v[1] * n[1];
                    dual[(2 * j, col)] += w * flux;
                    dual[(2 * j + 1, col)] += w * flux * (s - 0.5);
                }
            }
        }
        for (x, w) in cell_rule.iter() {
            let (p, _) = rt1_monomials(x);
            for (col, v) in p.iter().enumerate() {
                dual[(6, col)] += w * v[0];
                dual[(7, col)] += w * v[1];
            }
        }
        dual.try_inverse().expect("RT_1 moments are unisolvent")
    })
}

/// Reference values and divergences of the 8 local `RT_1` basis functions.
pub fn rt1_reference(xi: &[f64; 2]) -> ([[f64; 2]; 8], [f64; 8]) {
    let c = rt1_coefficients();
    let (p, dp) = rt1_monomials(xi);
    let mut vals = [[0.0; 2]; 8];
    let mut divs = [0.0; 8];
    for k in 0..8 {
        for j in 0..8 {
            let cjk = c[(j, k)];
            vals[k][0] += cjk * p[j][0];
            vals[k][1] += cjk * p[j][1];
            divs[k] += cjk * dp[j];
        }
    }
    (vals, divs)
}

// ---------------------------------------------------------------- product layout

/// Index convention of the product space: u-block first, then sigma-block,
/// each time-major:
/// `u(i, a) = i * n_u_space + a`, `sigma(m, e) = sigma_offset + m * n_sigma_space + e`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProductDofLayout {
    pub n_u_time: usize,
    pub n_u_space: usize,
    pub n_sigma_time: usize,
    pub n_sigma_space: usize,
}

impl ProductDofLayout {
    pub fn n_u(&self) -> usize {
        self.n_u_time * self.n_u_space
    }

    pub fn n_sigma(&self) -> usize {
        self.n_sigma_time * self.n_sigma_space
    }

    pub fn sigma_offset(&self) -> usize {
        self.n_u()
    }

    pub fn total(&self) -> usize {
        self.n_u() + self.n_sigma()
    }

    pub fn u_index(&self, i: usize, a: usize) -> usize {
        i * self.n_u_space + a
    }

    pub fn sigma_index(&self, m: usize, e: usize) -> usize {
        self.n_u() + m * self.n_sigma_space + e
    }
}

/// Parameters of `U_h` from the mesh alone, without building the spaces.
pub fn count_dofs(mesh: &TensorMesh) -> ProductDofLayout {
    let nt = mesh.time.n_elements();
    let s = &mesh.space;
    let interior = (0..s.n_vertices()).filter(|&v| !s.is_boundary_vertex(v)).count();
    let n_sigma_space = match s.dim() {
        1 => s.n_vertices() + s.n_cells(),
        _ => 2 * s.edges().len() + 2 * s.n_cells(),
    };
    ProductDofLayout {
        n_u_time: nt + 1,
        n_u_space: interior,
        n_sigma_time: nt,
        n_sigma_space,
    }
}

/// The four factor spaces and the product layout on one tensor mesh.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub mesh: TensorMesh,
    pub time_u: TemporalSpace,
    pub time_sigma: TemporalSpace,
    pub space_u: ScalarSpace,
    pub space_sigma: FluxSpace,
    pub layout: ProductDofLayout,
}

/// Builds `U_h` for degrees `(k, l)`; only `k = l = 1` is supported.
pub fn build_layout(mesh: &TensorMesh, k: usize, l: usize) -> Result<Discretization> {
    if l == 0 {
        return Err(Error::UnsupportedDegree {
            what: "spatial Lagrange space",
            degree: 0,
        });
    }
    let time_u = TemporalSpace::new(TemporalKind::Continuous, k, &mesh.time)?;
    let time_sigma = TemporalSpace::new(TemporalKind::Discontinuous, k, &mesh.time)?;
    let space_u = ScalarSpace::new(&mesh.space, l)?;
    let space_sigma = FluxSpace::new(&mesh.space, l)?;
    let layout = ProductDofLayout {
        n_u_time: time_u.n_dofs(),
        n_u_space: space_u.n_dofs(),
        n_sigma_time: time_sigma.n_dofs(),
        n_sigma_space: space_sigma.n_dofs(),
    };
    Ok(Discretization {
        mesh: mesh.clone(),
        time_u,
        time_sigma,
        space_u,
        space_sigma,
        layout,
    })
}

impl Discretization {
    pub fn dim(&self) -> usize {
        self.mesh.space.dim()
    }

    pub fn n_dofs(&self) -> usize {
        self.layout.total()
    }
}
