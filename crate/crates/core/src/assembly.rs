//! Kronecker-structured assembly of the discrete Euler-Lagrange system
//! `a(u_h, v_h) = F(v_h)` for all `v_h` in `U_h`.
//!
//! With `u = sum u_ia phi_i psi_a` and `sigma = sum s_me chi_m rho_e` the
//! bilinear form splits into
//!
//! ```text
//! A_uu = (K_t + E0_t) ⊗ M_x + M_t ⊗ K_x
//! A_us = C_t ⊗ B_x + Mm_t ⊗ G_x
//! A_ss = Mc_t ⊗ (D_x + M_rt)
//! ```
//!
//! where `B_x[a, e] = ∫ psi_a div rho_e` and `G_x[a, e] = ∫ ∇psi_a · rho_e`.

use crate::error::{Error, Result};
use crate::exact::{CellPoint, Problem, SpacePoint};
use crate::par;
use crate::quadrature::{spatial_rule, ErrorQuadrature};
use crate::spaces::{Discretization, FluxSpace, ProductDofLayout, ScalarSpace};
use crate::sparse::CsrMatrix;
use crate::mesh::TimePartition;

#[derive(Debug, Clone)]
pub struct FactorMatrices {
    /// Mass of `S_1(T_t)`.
    pub m_t: CsrMatrix,
    /// `∫ phi_i' phi_j'`
    pub k_t: CsrMatrix,
    /// `phi_i(0) phi_j(0)`
    pub e0_t: CsrMatrix,
    /// Mass of `P_0(T_t)`.
    pub mc_t: CsrMatrix,
    /// `∫ phi_i' chi_m`
    pub c_t: CsrMatrix,
    /// `∫ phi_i chi_m`
    pub mm_t: CsrMatrix,
    pub m_x: CsrMatrix,
    pub k_x: CsrMatrix,
    pub m_rt: CsrMatrix,
    /// `∫ div rho_e div rho_f`
    pub d_x: CsrMatrix,
    /// `∫ psi_a div rho_e`
    pub b_x: CsrMatrix,
    /// `∫ ∇psi_a · rho_e`
    pub g_x: CsrMatrix,
}

/// The five temporal factors, integrated exactly.
pub fn temporal_factors(partition: &TimePartition) -> [CsrMatrix; 6] {
    let n = partition.n_elements();
    let mut m = Vec::with_capacity(4 * n);
    let mut k = Vec::with_capacity(4 * n);
    let mut c = Vec::with_capacity(2 * n);
    let mut mm = Vec::with_capacity(2 * n);
    let mut mc = Vec::with_capacity(n);
    for e in 0..n {
        let h = partition.length(e);
        for (i, j) in [(e, e), (e, e + 1), (e + 1, e), (e + 1, e + 1)] {
            let same = i == j;
            m.push((i, j, if same { h / 3.0 } else { h / 6.0 }));
            k.push((i, j, if same { 1.0 / h } else { -1.0 / h }));
        }
        c.push((e, e, -1.0));
        c.push((e + 1, e, 1.0));
        mm.push((e, e, h / 2.0));
        mm.push((e + 1, e, h / 2.0));
        mc.push((e, e, h));
    }
    [
        CsrMatrix::from_triplets(n + 1, n + 1, &m),
        CsrMatrix::from_triplets(n + 1, n + 1, &k),
        CsrMatrix::from_triplets(n + 1, n + 1, &[(0, 0, 1.0)]),
        CsrMatrix::from_triplets(n, n, &mc),
        CsrMatrix::from_triplets(n + 1, n, &c),
        CsrMatrix::from_triplets(n + 1, n, &mm),
    ]
}

type Triplets = Vec<(usize, usize, f64)>;

/// The six spatial factors `[M_x, K_x, M_rt, D_x, B_x, G_x]`.
pub fn spatial_factors(scalar: &ScalarSpace, flux: &FluxSpace) -> Result<[CsrMatrix; 6]> {
    // RT_1 values are quadratic: degree 4 integrates every product exactly
    let rule = spatial_rule(scalar.dim(), 4)?;
    let per_cell: Vec<[Triplets; 6]> = par::map_range(scalar.n_cells(), |c| {
        let mut t: [Triplets; 6] = Default::default();
        let w_cell = scalar.cell_map(c).abs_det();
        for (xi, wq) in rule.iter() {
            let w = wq * w_cell;
            let s = scalar.eval(c, xi);
            let r = flux.eval(c, xi);
            for i in 0..s.dofs.len() {
                let Some(a) = s.dofs[i] else { continue };
                for j in 0..s.dofs.len() {
                    let Some(b) = s.dofs[j] else { continue };
                    t[0].push((a, b, w * (s.values[i] * s.values[j])));
                    t[1].push((a, b, w * dot2(s.grads[i], s.grads[j])));
                }
                for f in 0..r.dofs.len() {
                    t[4].push((a, r.dofs[f], w * s.values[i] * r.divs[f]));
                    t[5].push((a, r.dofs[f], w * dot2(s.grads[i], r.values[f])));
                }
            }
            for e in 0..r.dofs.len() {
                for f in 0..r.dofs.len() {
                    t[2].push((r.dofs[e], r.dofs[f], w * dot2(r.values[e], r.values[f])));
                    t[3].push((r.dofs[e], r.dofs[f], w * (r.divs[e] * r.divs[f])));
                }
            }
        }
        t
    });
    let (nu, ns) = (scalar.n_dofs(), flux.n_dofs());
    let shapes = [(nu, nu), (nu, nu), (ns, ns), (ns, ns), (nu, ns), (nu, ns)];
    let mats: Vec<CsrMatrix> = (0..6)
        .map(|k| {
            let all: Triplets = per_cell.iter().flat_map(|t| t[k].iter().copied()).collect();
            CsrMatrix::from_triplets(shapes[k].0, shapes[k].1, &all)
        })
        .collect();
    Ok(mats.try_into().expect("six factors"))
}

fn dot2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub fn assemble_factors(disc: &Discretization) -> Result<FactorMatrices> {
    let [m_t, k_t, e0_t, mc_t, c_t, mm_t] = temporal_factors(&disc.mesh.time);
    let [m_x, k_x, m_rt, d_x, b_x, g_x] = spatial_factors(&disc.space_u, &disc.space_sigma)?;
    Ok(FactorMatrices {
        m_t,
        k_t,
        e0_t,
        mc_t,
        c_t,
        mm_t,
        m_x,
        k_x,
        m_rt,
        d_x,
        b_x,
        g_x,
    })
}

impl FactorMatrices {
    /// Layout implied by the factor dimensions.
    pub fn layout(&self) -> ProductDofLayout {
        ProductDofLayout {
            n_u_time: self.m_t.nrows(),
            n_u_space: self.m_x.nrows(),
            n_sigma_time: self.mc_t.nrows(),
            n_sigma_space: self.m_rt.nrows(),
        }
    }

    /// `A_uu`
    pub fn uu_block(&self) -> Result<CsrMatrix> {
        self.k_t
            .add(&self.e0_t)?
            .kron(&self.m_x)
            .add(&self.m_t.kron(&self.k_x))
    }

    /// `A_us`
    pub fn u_sigma_block(&self) -> Result<CsrMatrix> {
        self.c_t.kron(&self.b_x).add(&self.mm_t.kron(&self.g_x))
    }

    /// `D_x + M_rt`, the spatial factor of `A_ss`.
    pub fn sigma_space_factor(&self) -> Result<CsrMatrix> {
        self.d_x.add(&self.m_rt)
    }

    /// `A_ss`
    pub fn sigma_block(&self) -> Result<CsrMatrix> {
        Ok(self.mc_t.kron(&self.sigma_space_factor()?))
    }
}

/// The system matrix of `U_h` in the layout `[u (time-major); sigma (time-major)]`.
pub fn assemble_system(factors: &FactorMatrices, layout: &ProductDofLayout) -> Result<CsrMatrix> {
    let own = factors.layout();
    for (expected, got) in [
        (layout.n_u_time, own.n_u_time),
        (layout.n_u_space, own.n_u_space),
        (layout.n_sigma_time, own.n_sigma_time),
        (layout.n_sigma_space, own.n_sigma_space),
    ] {
        if expected != got {
            return Err(Error::DimensionMismatch { expected, got });
        }
    }
    let uu = factors.uu_block()?;
    let us = factors.u_sigma_block()?;
    let ss = factors.sigma_block()?;
    let su = us.transpose();
    CsrMatrix::block2x2(&uu, &us, &su, &ss)
}

/// The assembled linear system of one discretization.
#[derive(Debug, Clone)]
pub struct System {
    pub matrix: CsrMatrix,
    pub factors: FactorMatrices,
    pub layout: ProductDofLayout,
}

impl System {
    pub fn assemble(disc: &Discretization) -> Result<Self> {
        let factors = assemble_factors(disc)?;
        let matrix = assemble_system(&factors, &disc.layout)?;
        Ok(Self {
            matrix,
            factors,
            layout: disc.layout,
        })
    }
}

/// Contributions of one time element: to `u` rows of the left and right
/// temporal hat, and to the `sigma` rows of the element.
struct SliceLoad {
    left: Vec<f64>,
    right: Vec<f64>,
    sigma: Vec<f64>,
}

/// `F(v) = <f, div v> + <g, ∇v + tau> + <u0, v(0)>` for every basis function.
pub fn assemble_rhs<P: Problem + ?Sized>(
    problem: &P,
    disc: &Discretization,
    quad: &ErrorQuadrature,
) -> Result<Vec<f64>> {
    if problem.dim() != disc.dim() {
        return Err(Error::DimensionMismatch {
            expected: disc.dim(),
            got: problem.dim(),
        });
    }
    let layout = &disc.layout;
    let time = &disc.mesh.time;
    let (nu, ns) = (layout.n_u_space, layout.n_sigma_space);
    let flux_source = problem.has_flux_source();

    let slices = par::map_range(time.n_elements(), |m| {
        let (t0, _) = time.element(m);
        let h = time.length(m);
        let mut load = SliceLoad {
            left: vec![0.0; nu],
            right: vec![0.0; nu],
            sigma: vec![0.0; ns],
        };
        for c in 0..disc.space_u.n_cells() {
            let map = disc.space_u.cell_map(c);
            let w_cell = map.abs_det() * h;
            for (xi, wx) in quad.space.iter() {
                let x = map.map(xi);
                let s = disc.space_u.eval(c, xi);
                let r = disc.space_sigma.eval(c, xi);
                for (tau, wt) in quad.time.iter() {
                    let tau = tau[0];
                    let p = CellPoint {
                        t: t0 + tau * h,
                        x,
                        time_elem: m,
                        space_elem: c,
                        t_ref: tau,
                        x_ref: *xi,
                    };
                    let w = wx * wt * w_cell;
                    let f = problem.source(&p) * w;
                    let g = if flux_source {
                        let g = problem.flux_source(&p);
                        [g[0] * w, g[1] * w]
                    } else {
                        [0.0; 2]
                    };
                    // phi_left = 1 - tau, phi_right = tau, phi' = ∓1/h
                    for i in 0..s.dofs.len() {
                        let Some(a) = s.dofs[i] else { continue };
                        let v = s.values[i];
                        let gg = dot2(g, s.grads[i]);
                        load.left[a] += -f * v / h + (1.0 - tau) * gg;
                        load.right[a] += f * v / h + tau * gg;
                    }
                    for e in 0..r.dofs.len() {
                        load.sigma[r.dofs[e]] += f * r.divs[e] + dot2(g, r.values[e]);
                    }
                }
            }
        }
        load
    });

    let mut rhs = vec![0.0; layout.total()];
    for (m, load) in slices.into_iter().enumerate() {
        for a in 0..nu {
            rhs[layout.u_index(m, a)] += load.left[a];
            rhs[layout.u_index(m + 1, a)] += load.right[a];
        }
        let base = layout.sigma_index(m, 0);
        rhs[base..base + ns].copy_from_slice(&load.sigma);
    }

    // initial trace: only the first temporal hat is nonzero at t = 0
    let initial: Vec<Vec<(usize, f64)>> = par::map_range(disc.space_u.n_cells(), |c| {
        let map = disc.space_u.cell_map(c);
        let mut out = Vec::new();
        for (xi, w) in quad.space.iter() {
            let p = SpacePoint {
                x: map.map(xi),
                space_elem: c,
                x_ref: *xi,
            };
            let u0 = problem.initial(&p) * w * map.abs_det();
            let s = disc.space_u.eval(c, xi);
            for i in 0..s.dofs.len() {
                if let Some(a) = s.dofs[i] {
                    out.push((a, u0 * s.values[i]));
                }
            }
        }
        out
    });
    for (a, v) in initial.into_iter().flatten() {
        rhs[layout.u_index(0, a)] += v;
    }
    Ok(rhs)
}
