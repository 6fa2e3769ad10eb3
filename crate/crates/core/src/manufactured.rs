//! Data whose least-squares minimizer is a given discrete pair.
//!
//! No nonzero `u_h` has `-∇u_h` in the flux space, so a discrete pair
//! `w_h = (u_h, σ_h)` is made the exact minimizer through a flux source:
//! `f = div_{t,x} w_h`, `g = ∇u_h + σ_h`, `u0 = u_h(0)` annihilate all three
//! residual terms.

use crate::exact::{CellPoint, ExactValues, Problem, SpacePoint};
use crate::projection::{discrete_divergence, BrokenField};
use crate::solver::SolutionPair;
use crate::spaces::Discretization;

/// Point values of a discrete pair on the cell `K_m × K_c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteValues {
    pub u: f64,
    pub grad_u: [f64; 2],
    pub dt_u: f64,
    pub sigma: [f64; 2],
    pub div_sigma: f64,
}

pub fn eval_discrete(
    disc: &Discretization,
    sol: &SolutionPair,
    m: usize,
    c: usize,
    tau: f64,
    xi: &[f64; 2],
) -> DiscreteValues {
    let h = disc.mesh.time.length(m);
    let s = disc.space_u.eval(c, xi);
    let r = disc.space_sigma.eval(c, xi);
    let mut out = DiscreteValues {
        u: 0.0,
        grad_u: [0.0; 2],
        dt_u: 0.0,
        sigma: [0.0; 2],
        div_sigma: 0.0,
    };
    for k in 0..s.dofs.len() {
        let Some(a) = s.dofs[k] else { continue };
        let (c0, c1) = (sol.u_coef(m, a), sol.u_coef(m + 1, a));
        let ct = (1.0 - tau) * c0 + tau * c1;
        out.u += ct * s.values[k];
        out.dt_u += (c1 - c0) / h * s.values[k];
        for d in 0..2 {
            out.grad_u[d] += ct * s.grads[k][d];
        }
    }
    for e in 0..r.dofs.len() {
        let coef = sol.sigma_coef(m, r.dofs[e]);
        out.sigma[0] += coef * r.values[e][0];
        out.sigma[1] += coef * r.values[e][1];
        out.div_sigma += coef * r.divs[e];
    }
    out
}

pub struct Manufactured<'a> {
    disc: &'a Discretization,
    solution: SolutionPair,
    divergence: BrokenField,
}

impl<'a> Manufactured<'a> {
    pub fn new(disc: &'a Discretization, solution: SolutionPair) -> Self {
        let divergence = discrete_divergence(disc, &solution);
        Self {
            disc,
            solution,
            divergence,
        }
    }

    pub fn solution(&self) -> &SolutionPair {
        &self.solution
    }

    fn values(&self, p: &CellPoint) -> DiscreteValues {
        eval_discrete(self.disc, &self.solution, p.time_elem, p.space_elem, p.t_ref, &p.x_ref)
    }
}

impl Problem for Manufactured<'_> {
    fn dim(&self) -> usize {
        self.disc.dim()
    }

    fn source(&self, p: &CellPoint) -> f64 {
        self.divergence.eval(p.time_elem, p.space_elem, &p.x_ref)
    }

    fn initial(&self, p: &SpacePoint) -> f64 {
        eval_discrete(self.disc, &self.solution, 0, p.space_elem, 0.0, &p.x_ref).u
    }

    fn flux_source(&self, p: &CellPoint) -> [f64; 2] {
        let v = self.values(p);
        [v.grad_u[0] + v.sigma[0], v.grad_u[1] + v.sigma[1]]
    }

    fn has_flux_source(&self) -> bool {
        true
    }

    fn exact(&self, p: &CellPoint) -> Option<ExactValues> {
        let v = self.values(p);
        Some(ExactValues {
            u: v.u,
            grad_u: v.grad_u,
            dt_u: v.dt_u,
            sigma: v.sigma,
        })
    }
}
