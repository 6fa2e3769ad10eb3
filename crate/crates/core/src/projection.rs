//! The `L²(Q)` projection `Π` onto `P_0(T_t) ⊗ P_1(T_x)`, which is the range
//! of `div_{t,x}` on `U_h`.

use nalgebra::DMatrix;

use crate::exact::{CellPoint, ExactValues, Problem, SpacePoint};
use crate::par;
use crate::quadrature::ErrorQuadrature;
use crate::solver::SolutionPair;
use crate::spaces::Discretization;

/// Piecewise polynomials, constant in time and affine in space on every
/// space-time cell, in the local monomials `1, ξ_1 (, ξ_2)` of the cell map.
#[derive(Debug, Clone, PartialEq)]
pub struct BrokenField {
    n_time: usize,
    n_cells: usize,
    n_basis: usize,
    coefs: Vec<f64>,
}

fn monomials(n_basis: usize, xi: &[f64; 2]) -> [f64; 3] {
    let mut p = [1.0, xi[0], xi[1]];
    if n_basis == 2 {
        p[2] = 0.0;
    }
    p
}

impl BrokenField {
    pub fn zeros(disc: &Discretization) -> Self {
        let n_basis = disc.dim() + 1;
        let (n_time, n_cells) = (disc.mesh.time.n_elements(), disc.space_u.n_cells());
        Self {
            n_time,
            n_cells,
            n_basis,
            coefs: vec![0.0; n_time * n_cells * n_basis],
        }
    }

    fn from_cells(disc: &Discretization, cells: Vec<[f64; 3]>) -> Self {
        let mut out = Self::zeros(disc);
        let nb = out.n_basis;
        for (k, c) in cells.iter().enumerate() {
            out.coefs[k * nb..(k + 1) * nb].copy_from_slice(&c[..nb]);
        }
        out
    }

    pub fn n_basis(&self) -> usize {
        self.n_basis
    }

    /// Coefficients on the cell `K_m × K_c`.
    pub fn cell(&self, m: usize, c: usize) -> &[f64] {
        let k = (m * self.n_cells + c) * self.n_basis;
        &self.coefs[k..k + self.n_basis]
    }

    pub fn eval(&self, m: usize, c: usize, x_ref: &[f64; 2]) -> f64 {
        let p = monomials(self.n_basis, x_ref);
        self.cell(m, c).iter().zip(p).map(|(a, b)| a * b).sum()
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.coefs
            .iter_mut()
            .zip(&other.coefs)
            .for_each(|(a, b)| *a -= b);
        out
    }

    /// `‖q‖_{L²(Q)}` by quadrature (exact for these polynomials).
    pub fn l2_norm(&self, disc: &Discretization, quad: &ErrorQuadrature) -> f64 {
        let time = &disc.mesh.time;
        let nc = self.n_cells;
        par::sum_range(self.n_time * nc, |k| {
            let (m, c) = (k / nc, k % nc);
            let w_cell = time.length(m) * disc.space_u.cell_map(c).abs_det();
            quad.space
                .iter()
                .map(|(xi, w)| w * self.eval(m, c, xi).powi(2))
                .sum::<f64>()
                * w_cell
        })
        .sqrt()
    }
}

/// `Πf` for a pointwise source `f`, by local mass solves on every cell.
pub fn project<F>(f: F, disc: &Discretization, quad: &ErrorQuadrature) -> BrokenField
where
    F: Fn(&CellPoint) -> f64 + Sync,
{
    let nb = disc.dim() + 1;
    let mut mass = DMatrix::<f64>::zeros(nb, nb);
    for (xi, w) in quad.space.iter() {
        let p = monomials(nb, xi);
        for i in 0..nb {
            for j in 0..nb {
                mass[(i, j)] += w * p[i] * p[j];
            }
        }
    }
    let inv = mass.try_inverse().expect("local mass matrix is invertible");
    let time = &disc.mesh.time;
    let nc = disc.space_u.n_cells();
    let cells = par::map_range(time.n_elements() * nc, |k| {
        let (m, c) = (k / nc, k % nc);
        let (t0, _) = time.element(m);
        let h = time.length(m);
        let map = disc.space_u.cell_map(c);
        let mut rhs = [0.0; 3];
        for (xi, wx) in quad.space.iter() {
            let x = map.map(xi);
            let p = monomials(nb, xi);
            for (tau, wt) in quad.time.iter() {
                let pt = CellPoint {
                    t: t0 + tau[0] * h,
                    x,
                    time_elem: m,
                    space_elem: c,
                    t_ref: tau[0],
                    x_ref: *xi,
                };
                let v = wx * wt * f(&pt);
                for i in 0..nb {
                    rhs[i] += v * p[i];
                }
            }
        }
        let mut out = [0.0; 3];
        for i in 0..nb {
            out[i] = (0..nb).map(|j| inv[(i, j)] * rhs[j]).sum();
        }
        out
    });
    BrokenField::from_cells(disc, cells)
}

/// `Π f` of the source of `problem`.
pub fn project_source<P: Problem + ?Sized>(
    problem: &P,
    disc: &Discretization,
    quad: &ErrorQuadrature,
) -> BrokenField {
    project(|p| problem.source(p), disc, quad)
}

/// `div_{t,x}(u_h, sigma_h)`, which lies in the broken space exactly.
pub fn discrete_divergence(disc: &Discretization, sol: &SolutionPair) -> BrokenField {
    let nb = disc.dim() + 1;
    let time = &disc.mesh.time;
    let nc = disc.space_u.n_cells();
    // affine functions are identified by their values at the reference vertices
    let nodes: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    let cells = par::map_range(time.n_elements() * nc, |k| {
        let (m, c) = (k / nc, k % nc);
        let h = time.length(m);
        let mut vals = [0.0; 3];
        for (v, xi) in vals.iter_mut().zip(&nodes).take(nb) {
            let s = disc.space_u.eval(c, xi);
            let r = disc.space_sigma.eval(c, xi);
            for i in 0..s.dofs.len() {
                if let Some(a) = s.dofs[i] {
                    *v += (sol.u_coef(m + 1, a) - sol.u_coef(m, a)) / h * s.values[i];
                }
            }
            for e in 0..r.dofs.len() {
                *v += sol.sigma_coef(m, r.dofs[e]) * r.divs[e];
            }
        }
        let mut out = [vals[0], vals[1] - vals[0], 0.0];
        if nb == 3 {
            out[2] = vals[2] - vals[0];
        }
        out
    });
    BrokenField::from_cells(disc, cells)
}

/// `‖Πf - div_{t,x} u_h‖_{L²(Q)}`.
pub fn conservation_error(
    pi_f: &BrokenField,
    disc: &Discretization,
    sol: &SolutionPair,
    quad: &ErrorQuadrature,
) -> f64 {
    pi_f.sub(&discrete_divergence(disc, sol)).l2_norm(disc, quad)
}

/// `problem` with its source replaced by a broken field (for example `Πf`).
pub struct WithSource<'a, P: ?Sized> {
    pub base: &'a P,
    pub source: &'a BrokenField,
}

impl<P: Problem + ?Sized> Problem for WithSource<'_, P> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn source(&self, p: &CellPoint) -> f64 {
        self.source.eval(p.time_elem, p.space_elem, &p.x_ref)
    }

    fn initial(&self, p: &SpacePoint) -> f64 {
        self.base.initial(p)
    }

    fn flux_source(&self, p: &CellPoint) -> [f64; 2] {
        self.base.flux_source(p)
    }

    fn has_flux_source(&self) -> bool {
        self.base.has_flux_source()
    }

    fn exact(&self, p: &CellPoint) -> Option<ExactValues> {
        self.base.exact(p)
    }
}
