//! The error quantities reported per refinement level.

use crate::exact::{CellPoint, Problem, SpacePoint};
use crate::par;
use crate::projection::{conservation_error, project_source};
use crate::quadrature::ErrorQuadrature;
use crate::solver::SolutionPair;
use crate::spaces::Discretization;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub dofs: usize,
    /// `LS(f, u0; u_h)`
    pub ls_error: f64,
    /// `‖f - div_{t,x} u_h‖`
    pub err_div_f: f64,
    /// `‖∇u_h + σ_h‖` (minus the flux source, if any)
    pub err_grad_plus_sigma: f64,
    /// `‖u0 - u_h(0)‖_{L²(Ω)}`
    pub err_u0: f64,
    /// `‖u - u_h‖_{L²(Q)}`
    pub err_u_l2q: f64,
    /// `‖Πf - div_{t,x} u_h‖`
    pub err_pf: f64,
    /// `‖σ - σ_h‖_{L²(Q)}`
    pub err_sigma: f64,
    /// `‖(u - u_h)(T)‖_{L²(Ω)}`
    pub err_ut: f64,
}

impl ErrorReport {
    pub const COLUMNS: [&'static str; 8] = [
        "ls_error",
        "err_div_f",
        "err_grad_plus_sigma",
        "err_u0",
        "err_u_L2Q",
        "err_Pf",
        "err_sigma",
        "err_uT",
    ];

    /// The eight error values in CSV column order.
    pub fn values(&self) -> [f64; 8] {
        [
            self.ls_error,
            self.err_div_f,
            self.err_grad_plus_sigma,
            self.err_u0,
            self.err_u_l2q,
            self.err_pf,
            self.err_sigma,
            self.err_ut,
        ]
    }

    pub fn get(&self, column: &str) -> Option<f64> {
        Self::COLUMNS
            .iter()
            .position(|&c| c == column)
            .map(|k| self.values()[k])
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Sums {
    div: f64,
    flux: f64,
    u: f64,
    sigma: f64,
}

impl Sums {
    fn add(mut self, o: Sums) -> Sums {
        self.div += o.div;
        self.flux += o.flux;
        self.u += o.u;
        self.sigma += o.sigma;
        self
    }
}

/// `u_h(t_i, ·)` at a spatial point, for a temporal node `i`.
fn trace_value(disc: &Discretization, sol: &SolutionPair, i: usize, c: usize, xi: &[f64; 2]) -> f64 {
    let s = disc.space_u.eval(c, xi);
    (0..s.dofs.len())
        .filter_map(|k| s.dofs[k].map(|a| sol.u_coef(i, a) * s.values[k]))
        .sum()
}

/// All error quantities by elementwise quadrature. Quantities that need the
/// exact solution are `NaN` when the problem does not provide one.
pub fn compute_errors<P: Problem + ?Sized>(
    problem: &P,
    disc: &Discretization,
    sol: &SolutionPair,
    quad: &ErrorQuadrature,
) -> ErrorReport {
    let time = &disc.mesh.time;
    let nc = disc.space_u.n_cells();
    let with_g = problem.has_flux_source();

    let per_slice = par::map_range(time.n_elements(), |m| {
        let (t0, _) = time.element(m);
        let h = time.length(m);
        let mut acc = Sums::default();
        for c in 0..nc {
            let map = disc.space_u.cell_map(c);
            let w_cell = h * map.abs_det();
            for (xi, wx) in quad.space.iter() {
                let s = disc.space_u.eval(c, xi);
                let r = disc.space_sigma.eval(c, xi);
                let (mut u0, mut u1) = (0.0, 0.0);
                let (mut g0, mut g1) = ([0.0; 2], [0.0; 2]);
                for k in 0..s.dofs.len() {
                    let Some(a) = s.dofs[k] else { continue };
                    let (c0, c1) = (sol.u_coef(m, a), sol.u_coef(m + 1, a));
                    u0 += c0 * s.values[k];
                    u1 += c1 * s.values[k];
                    for d in 0..2 {
                        g0[d] += c0 * s.grads[k][d];
                        g1[d] += c1 * s.grads[k][d];
                    }
                }
                let (mut sig, mut div_sig) = ([0.0; 2], 0.0);
                for e in 0..r.dofs.len() {
                    let coef = sol.sigma_coef(m, r.dofs[e]);
                    sig[0] += coef * r.values[e][0];
                    sig[1] += coef * r.values[e][1];
                    div_sig += coef * r.divs[e];
                }
                let div_h = (u1 - u0) / h + div_sig;
                let x = map.map(xi);
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
                    let w = w_cell * wx * wt;
                    let uh = (1.0 - tau) * u0 + tau * u1;
                    let grad = [
                        (1.0 - tau) * g0[0] + tau * g1[0],
                        (1.0 - tau) * g0[1] + tau * g1[1],
                    ];
                    let g = if with_g { problem.flux_source(&p) } else { [0.0; 2] };
                    acc.div += w * (problem.source(&p) - div_h).powi(2);
                    acc.flux += w
                        * ((grad[0] + sig[0] - g[0]).powi(2) + (grad[1] + sig[1] - g[1]).powi(2));
                    match problem.exact(&p) {
                        Some(ex) => {
                            acc.u += w * (ex.u - uh).powi(2);
                            acc.sigma +=
                                w * ((ex.sigma[0] - sig[0]).powi(2) + (ex.sigma[1] - sig[1]).powi(2));
                        }
                        None => {
                            acc.u = f64::NAN;
                            acc.sigma = f64::NAN;
                        }
                    }
                }
            }
        }
        acc
    });
    let sums = per_slice.into_iter().fold(Sums::default(), Sums::add);

    let nt = time.n_elements();
    let end = time.end_time();
    let traces = par::map_range(nc, |c| {
        let map = disc.space_u.cell_map(c);
        let mut e0 = 0.0;
        let mut et = 0.0;
        for (xi, w) in quad.space.iter() {
            let w = w * map.abs_det();
            let x = map.map(xi);
            let sp = SpacePoint { x, space_elem: c, x_ref: *xi };
            e0 += w * (problem.initial(&sp) - trace_value(disc, sol, 0, c, xi)).powi(2);
            let p = CellPoint {
                t: end,
                x,
                time_elem: nt - 1,
                space_elem: c,
                t_ref: 1.0,
                x_ref: *xi,
            };
            et += match problem.exact(&p) {
                Some(ex) => w * (ex.u - trace_value(disc, sol, nt, c, xi)).powi(2),
                None => f64::NAN,
            };
        }
        (e0, et)
    });
    let (e0, et) = traces
        .into_iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));

    let pi_f = project_source(problem, disc, quad);
    ErrorReport {
        dofs: disc.n_dofs(),
        ls_error: (sums.div + sums.flux + e0).sqrt(),
        err_div_f: sums.div.sqrt(),
        err_grad_plus_sigma: sums.flux.sqrt(),
        err_u0: e0.sqrt(),
        err_u_l2q: sums.u.sqrt(),
        err_pf: conservation_error(&pi_f, disc, sol, quad),
        err_sigma: sums.sigma.sqrt(),
        err_ut: et.sqrt(),
    }
}

/// `‖f‖²_{L²(Q)} + ‖g‖²_{L²(Q)} + ‖u0‖²_{L²(Ω)}` with the error quadrature, so
/// that `LS² = xᵀAx - 2xᵀF + data_norm_sq` holds algebraically.
pub fn data_norm_sq<P: Problem + ?Sized>(
    problem: &P,
    disc: &Discretization,
    quad: &ErrorQuadrature,
) -> f64 {
    let time = &disc.mesh.time;
    let nc = disc.space_u.n_cells();
    let with_g = problem.has_flux_source();
    let bulk = par::map_range(time.n_elements(), |m| {
        let (t0, _) = time.element(m);
        let h = time.length(m);
        let mut acc = 0.0;
        for c in 0..nc {
            let map = disc.space_u.cell_map(c);
            for (xi, wx) in quad.space.iter() {
                let x = map.map(xi);
                for (tau, wt) in quad.time.iter() {
                    let p = CellPoint {
                        t: t0 + tau[0] * h,
                        x,
                        time_elem: m,
                        space_elem: c,
                        t_ref: tau[0],
                        x_ref: *xi,
                    };
                    let g = if with_g { problem.flux_source(&p) } else { [0.0; 2] };
                    acc += h * map.abs_det() * wx * wt
                        * (problem.source(&p).powi(2) + g[0] * g[0] + g[1] * g[1]);
                }
            }
        }
        acc
    });
    let initial = par::map_range(nc, |c| {
        let map = disc.space_u.cell_map(c);
        quad.space
            .iter()
            .map(|(xi, w)| {
                let sp = SpacePoint { x: map.map(xi), space_elem: c, x_ref: *xi };
                w * map.abs_det() * problem.initial(&sp).powi(2)
            })
            .sum::<f64>()
    });
    bulk.into_iter().sum::<f64>() + initial.into_iter().sum::<f64>()
}
