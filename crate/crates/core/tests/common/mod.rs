#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stfosls::assembly::{assemble_rhs, System};
use stfosls::errors::{compute_errors, data_norm_sq};
use stfosls::exact::{fourier_coefficient_1d, hat, CellPoint, ProblemData, ProblemKind};
use stfosls::manufactured::Manufactured;
use stfosls::mesh::{Domain, Scaling, TensorMesh};
use stfosls::par;
use stfosls::projection::{project, project_source, WithSource};
use stfosls::quadrature::{gauss_interval, spatial_rule, triangle_rule, ErrorQuadrature};
use stfosls::solver::{cholesky_solve, solve_system, Method, SolutionPair, SolveOptions};
use stfosls::spaces::{build_layout, Discretization};
use stfosls::sparse::CsrMatrix;

pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self { name, passed, detail }
    }
}

pub fn disc(domain: Domain, scaling: Scaling, level: usize) -> Discretization {
    build_layout(&TensorMesh::initial(domain, scaling).refined(level), 1, 1).unwrap()
}

fn direct() -> SolveOptions {
    SolveOptions { method: Method::Direct, ..Default::default() }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn dense_max_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| max_abs_diff(x, y)).fold(0.0, f64::max)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `a(·,·)` assembled by a brute-force loop over space-time cells, straight
/// from `<div w, div v> + <∇w + ρ, ∇v + τ> + <w(0), v(0)>`.
pub fn element_loop_matrix(d: &Discretization) -> Vec<Vec<f64>> {
    let n = d.n_dofs();
    let l = d.layout;
    let mut a = vec![vec![0.0; n]; n];
    let tq = gauss_interval(3).unwrap();
    let sq = spatial_rule(d.dim(), 4).unwrap();
    let time = &d.mesh.time;
    for m in 0..time.n_elements() {
        let h = time.length(m);
        for c in 0..d.space_u.n_cells() {
            let det = d.space_u.cell_map(c).abs_det();
            for (xi, wx) in sq.iter() {
                let s = d.space_u.eval(c, xi);
                let r = d.space_sigma.eval(c, xi);
                for (tau, wt) in tq.iter() {
                    let tau = tau[0];
                    let w = wx * wt * h * det;
                    // (index, div, flux) of every basis function alive here
                    let mut basis: Vec<(usize, f64, [f64; 2])> = Vec::new();
                    for (i, phi, dphi) in [(m, 1.0 - tau, -1.0 / h), (m + 1, tau, 1.0 / h)] {
                        for k in 0..s.dofs.len() {
                            if let Some(a_) = s.dofs[k] {
                                let g = s.grads[k];
                                basis.push((l.u_index(i, a_), dphi * s.values[k], [phi * g[0], phi * g[1]]));
                            }
                        }
                    }
                    for e in 0..r.dofs.len() {
                        basis.push((l.sigma_index(m, r.dofs[e]), r.divs[e], r.values[e]));
                    }
                    for &(i, di, fi) in &basis {
                        for &(j, dj, fj) in &basis {
                            a[i][j] += w * (di * dj + fi[0] * fj[0] + fi[1] * fj[1]);
                        }
                    }
                }
            }
        }
    }
    for c in 0..d.space_u.n_cells() {
        let det = d.space_u.cell_map(c).abs_det();
        for (xi, w) in sq.iter() {
            let s = d.space_u.eval(c, xi);
            for i in 0..s.dofs.len() {
                for j in 0..s.dofs.len() {
                    if let (Some(p), Some(q)) = (s.dofs[i], s.dofs[j]) {
                        a[l.u_index(0, p)][l.u_index(0, q)] += w * det * s.values[i] * s.values[j];
                    }
                }
            }
        }
    }
    a
}

/// The same matrix for `d = 1` with hand-written hat and `P_2` bases and
/// midpoint-rule-free Simpson/Gauss integration, sharing only the numbering.
pub fn element_loop_matrix_1d(d: &Discretization) -> Vec<Vec<f64>> {
    assert_eq!(d.dim(), 1);
    let n = d.n_dofs();
    let l = d.layout;
    let mesh = &d.mesh.space;
    let nv = mesh.n_vertices();
    let mut a = vec![vec![0.0; n]; n];
    let g = gauss_interval(4).unwrap();
    let time = &d.mesh.time;
    for m in 0..time.n_elements() {
        let (t0, t1) = time.element(m);
        for c in 0..mesh.n_cells() {
            let cell = mesh.cell(c);
            let (va, vb) = if mesh.vertices()[cell[0]][0] < mesh.vertices()[cell[1]][0] {
                (cell[0], cell[1])
            } else {
                (cell[1], cell[0])
            };
            let (xa, xb) = (mesh.vertices()[va][0], mesh.vertices()[vb][0]);
            for (pt, wt) in g.iter() {
                let t = t0 + (t1 - t0) * pt[0];
                for (px, wx) in g.iter() {
                    let x = xa + (xb - xa) * px[0];
                    let w = wt * wx * (t1 - t0) * (xb - xa);
                    let hat_t = [(t1 - t) / (t1 - t0), (t - t0) / (t1 - t0)];
                    let dhat_t = [-1.0 / (t1 - t0), 1.0 / (t1 - t0)];
                    let hat_x = [(xb - x) / (xb - xa), (x - xa) / (xb - xa)];
                    let dhat_x = [-1.0 / (xb - xa), 1.0 / (xb - xa)];
                    // P2 Lagrange on [xa, xb]: nodes xa, xb, midpoint
                    let xm = 0.5 * (xa + xb);
                    let p2 = [
                        (x - xm) * (x - xb) / ((xa - xm) * (xa - xb)),
                        (x - xa) * (x - xm) / ((xb - xa) * (xb - xm)),
                        (x - xa) * (x - xb) / ((xm - xa) * (xm - xb)),
                    ];
                    let dp2 = [
                        ((x - xm) + (x - xb)) / ((xa - xm) * (xa - xb)),
                        ((x - xa) + (x - xm)) / ((xb - xa) * (xb - xm)),
                        ((x - xa) + (x - xb)) / ((xm - xa) * (xm - xb)),
                    ];
                    let _ = p2;
                    let mut basis: Vec<(usize, f64, f64)> = Vec::new();
                    for (k, i) in [m, m + 1].into_iter().enumerate() {
                        for (j, v) in [va, vb].into_iter().enumerate() {
                            if let Some(dof) = d.space_u.vertex_dof(v) {
                                basis.push((
                                    l.u_index(i, dof),
                                    dhat_t[k] * hat_x[j],
                                    hat_t[k] * dhat_x[j],
                                ));
                            }
                        }
                    }
                    let flux_dofs = [va, vb, nv + c];
                    for k in 0..3 {
                        basis.push((l.sigma_index(m, flux_dofs[k]), dp2[k], p2[k]));
                    }
                    for &(i, di, fi) in &basis {
                        for &(j, dj, fj) in &basis {
                            a[i][j] += w * (di * dj + fi * fj);
                        }
                    }
                }
            }
        }
    }
    for c in 0..mesh.n_cells() {
        let cell = mesh.cell(c);
        let (xa, xb) = (mesh.vertices()[cell[0]][0], mesh.vertices()[cell[1]][0]);
        let h = (xb - xa).abs();
        // exact P1 mass on the interval
        for (p, q, v) in [(0, 0, h / 3.0), (1, 1, h / 3.0), (0, 1, h / 6.0), (1, 0, h / 6.0)] {
            if let (Some(i), Some(j)) = (d.space_u.vertex_dof(cell[p]), d.space_u.vertex_dof(cell[q])) {
                a[l.u_index(0, i)][l.u_index(0, j)] += v;
            }
        }
    }
    a
}

pub fn random_solution(d: &Discretization, seed: u64) -> SolutionPair {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<f64> = (0..d.n_dofs()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    SolutionPair::from_vector(d.layout, &x).unwrap()
}

// ---------------------------------------------------------------- checks

pub fn check_symmetry() -> Check {
    let mut worst: f64 = 0.0;
    for (domain, scaling, level) in [
        (Domain::UnitInterval, Scaling::Equal, 4),
        (Domain::UnitInterval, Scaling::Parabolic, 3),
        (Domain::UnitSquare, Scaling::Equal, 2),
        (Domain::UnitSquare, Scaling::Parabolic, 1),
    ] {
        let sys = System::assemble(&disc(domain, scaling, level)).unwrap();
        worst = worst.max(sys.matrix.symmetry_defect());
    }
    Check::new("matrix symmetry <= 1e-12", worst <= 1e-12, format!("max |A - A^T| = {worst:.2e}"))
}

pub fn check_spd() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut min_rq = f64::INFINITY;
    let mut cholesky_ok = true;
    for (domain, level) in [(Domain::UnitInterval, 1), (Domain::UnitInterval, 3), (Domain::UnitSquare, 2)] {
        let sys = System::assemble(&disc(domain, Scaling::Equal, level)).unwrap();
        let n = sys.matrix.nrows();
        cholesky_ok &= cholesky_solve(&sys.matrix, &vec![1.0; n]).is_ok();
        for _ in 0..100 {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let ax = sys.matrix.apply(&x);
            let rq = x.iter().zip(&ax).map(|(a, b)| a * b).sum::<f64>() / norm(&x).powi(2);
            min_rq = min_rq.min(rq);
        }
    }
    Check::new(
        "SPD: Cholesky succeeds and 100 Rayleigh quotients > 0",
        cholesky_ok && min_rq > 0.0,
        format!("cholesky ok = {cholesky_ok}, min Rayleigh quotient = {min_rq:.3e}"),
    )
}

pub fn check_element_loop() -> Check {
    // 2 time x 2 space elements, plus a small 2D mesh
    let d1 = disc(Domain::UnitInterval, Scaling::Equal, 1);
    let k1 = System::assemble(&d1).unwrap().matrix.to_dense();
    let e1 = dense_max_diff(&k1, &element_loop_matrix_1d(&d1));
    let e2 = dense_max_diff(&k1, &element_loop_matrix(&d1));
    let d3 = disc(Domain::UnitInterval, Scaling::Parabolic, 2);
    let k3 = System::assemble(&d3).unwrap().matrix.to_dense();
    let e3 = dense_max_diff(&k3, &element_loop_matrix_1d(&d3));
    let d2 = disc(Domain::UnitSquare, Scaling::Equal, 1);
    let k2 = System::assemble(&d2).unwrap().matrix.to_dense();
    let e4 = dense_max_diff(&k2, &element_loop_matrix(&d2));
    let worst = e1.max(e2).max(e3).max(e4);
    Check::new(
        "Kronecker vs element-loop assembly <= 1e-10",
        worst <= 1e-10,
        format!("1D hand bases {e1:.1e}/{e3:.1e}, 1D {e2:.1e}, 2D {e4:.1e}"),
    )
}

pub fn check_kronecker_identity() -> Check {
    let d = disc(Domain::UnitSquare, Scaling::Equal, 2);
    let f = System::assemble(&d).unwrap().factors;
    let (nt, nx) = (f.m_t.nrows(), f.k_x.nrows());
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    // x[i * nx + a] = X[a][i]
    let x: Vec<f64> = (0..nt * nx).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let lhs = f.m_t.kron(&f.k_x).apply(&x);
    let mt = f.m_t.to_dense();
    let kx = f.k_x.to_dense();
    let mut worst: f64 = 0.0;
    for i in 0..nt {
        for a in 0..nx {
            // (K_x X M_t^T)[a][i]
            let mut v = 0.0;
            for b in 0..nx {
                for j in 0..nt {
                    v += kx[a][b] * x[j * nx + b] * mt[i][j];
                }
            }
            worst = worst.max((v - lhs[i * nx + a]).abs());
        }
    }
    Check::new(
        "Kronecker identity (M_t ⊗ K_x) vec X = vec(K_x X M_t^T) <= 1e-12",
        worst <= 1e-12,
        format!("max deviation {worst:.1e}"),
    )
}

pub fn check_manufactured() -> Check {
    let mut worst: f64 = 0.0;
    let mut detail = Vec::new();
    for (domain, scaling, level) in [
        (Domain::UnitInterval, Scaling::Equal, 3),
        (Domain::UnitSquare, Scaling::Equal, 1),
        (Domain::UnitSquare, Scaling::Parabolic, 1),
    ] {
        let d = disc(domain, scaling, level);
        let quad = ErrorQuadrature::new(d.dim());
        let w = random_solution(&d, 21);
        let problem = Manufactured::new(&d, w.clone());
        let sys = System::assemble(&d).unwrap();
        let rhs = assemble_rhs(&problem, &d, &quad).unwrap();
        for opts in [SolveOptions::default(), direct()] {
            let (sol, _) = solve_system(&sys, &rhs, &opts).unwrap();
            let diff: Vec<f64> = sol.to_vector().iter().zip(w.to_vector()).map(|(a, b)| a - b).collect();
            let energy = diff.iter().zip(sys.matrix.apply(&diff)).map(|(a, b)| a * b).sum::<f64>().sqrt();
            let report = compute_errors(&problem, &d, &sol, &quad);
            let fields = report.values().into_iter().fold(0.0, f64::max);
            worst = worst.max(energy).max(fields);
        }
    }
    detail.push(format!("max U-norm / error field {worst:.1e}"));
    Check::new("manufactured discrete solution recovered <= 1e-8", worst <= 1e-8, detail.join(", "))
}

pub fn check_pythagoras() -> Check {
    let mut worst: f64 = 0.0;
    for (kind, level) in [(ProblemKind::Smooth1d, 4), (ProblemKind::Smooth2d, 2)] {
        let data = ProblemData::new(kind);
        let d = disc(kind.domain(), Scaling::Equal, level);
        let quad = ErrorQuadrature::new(d.dim());
        let sys = System::assemble(&d).unwrap();
        let rhs = assemble_rhs(&data, &d, &quad).unwrap();
        let (sol, _) = solve_system(&sys, &rhs, &direct()).unwrap();
        let report = compute_errors(&data, &d, &sol, &quad);
        let pf = project_source(&data, &d, &quad);
        // ‖f - Πf‖² by the same quadrature
        let time = &d.mesh.time;
        let mut osc = 0.0;
        for m in 0..time.n_elements() {
            for c in 0..d.space_u.n_cells() {
                let map = d.space_u.cell_map(c);
                for (xi, wx) in quad.space.iter() {
                    for (tau, wt) in quad.time.iter() {
                        let t = time.element(m).0 + tau[0] * time.length(m);
                        let v = data.source_value(t, &map.map(xi)) - pf.eval(m, c, xi);
                        osc += wx * wt * time.length(m) * map.abs_det() * v * v;
                    }
                }
            }
        }
        let lhs = report.err_div_f.powi(2);
        let rhs = osc + report.err_pf.powi(2);
        worst = worst.max((lhs - rhs).abs() / lhs);
    }
    Check::new(
        "Pythagoras ‖f-div u_h‖² = ‖f-Πf‖² + ‖Πf-div u_h‖² to 1e-8 rel",
        worst <= 1e-8,
        format!("relative defect {worst:.1e}"),
    )
}

pub fn check_projected_data_invariance() -> Check {
    let tol = SolveOptions::default().tol;
    let mut worst: f64 = 0.0;
    for (kind, level) in [(ProblemKind::Smooth1d, 3), (ProblemKind::Smooth2d, 2)] {
        let data = ProblemData::new(kind);
        let d = disc(kind.domain(), Scaling::Equal, level);
        let quad = ErrorQuadrature::new(d.dim());
        let sys = System::assemble(&d).unwrap();
        let pf = project_source(&data, &d, &quad);
        let projected = WithSource { base: &data, source: &pf };
        let (x1, _) = solve_system(&sys, &assemble_rhs(&data, &d, &quad).unwrap(), &direct()).unwrap();
        let (x2, _) = solve_system(&sys, &assemble_rhs(&projected, &d, &quad).unwrap(), &direct()).unwrap();
        let (v1, v2) = (x1.to_vector(), x2.to_vector());
        worst = worst.max(max_abs_diff(&v1, &v2) / v1.iter().fold(0.0f64, |a, b| a.max(b.abs())));
    }
    Check::new(
        "Q = Π invariance: data f and Πf give the same solution (10x solver tol)",
        worst <= 10.0 * tol,
        format!("relative max difference {worst:.1e}"),
    )
}

/// Physical point to reference coordinates of a triangle cell map.
fn to_reference(d: &Discretization, c: usize, x: [f64; 2]) -> [f64; 2] {
    let map = d.space_sigma.cell_map(c);
    let (j, o) = (map.jac, map.origin);
    let (dx, dy) = (x[0] - o[0], x[1] - o[1]);
    [
        (j[1][1] * dx - j[0][1] * dy) / map.det,
        (-j[1][0] * dx + j[0][0] * dy) / map.det,
    ]
}

pub fn check_rt_normal_continuity() -> Check {
    let d = disc(Domain::UnitSquare, Scaling::Equal, 2);
    let mesh = &d.mesh.space;
    let g = gauss_interval(4).unwrap();
    // cells adjacent to each edge
    let mut owners = vec![Vec::new(); mesh.edges().len()];
    for c in 0..mesh.n_cells() {
        for e in mesh.cell_edges(c) {
            owners[e].push(c);
        }
    }
    let mut worst: f64 = 0.0;
    let mut interior = 0;
    for (e, cells) in owners.iter().enumerate() {
        if cells.len() != 2 {
            continue;
        }
        interior += 1;
        let [a, b] = mesh.edges()[e];
        let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
        let normal = [pb[1] - pa[1], pa[0] - pb[0]];
        for (s, _) in g.iter() {
            let x = [pa[0] + s[0] * (pb[0] - pa[0]), pa[1] + s[0] * (pb[1] - pa[1])];
            let side = |c: usize| {
                let ev = d.space_sigma.eval(c, &to_reference(&d, c, x));
                (0..ev.dofs.len())
                    .map(|k| (ev.dofs[k], ev.values[k][0] * normal[0] + ev.values[k][1] * normal[1]))
                    .collect::<Vec<_>>()
            };
            let (l, r) = (side(cells[0]), side(cells[1]));
            // every global dof: normal component from both sides (0 if absent)
            let lookup = |v: &[(usize, f64)], dof: usize| {
                v.iter().find(|p| p.0 == dof).map_or(0.0, |p| p.1)
            };
            for &(dof, _) in l.iter().chain(&r) {
                worst = worst.max((lookup(&l, dof) - lookup(&r, dof)).abs());
            }
        }
    }
    Check::new(
        "RT normal-continuity jumps <= 1e-12",
        worst <= 1e-12 && interior > 0,
        format!("{interior} interior edges, max jump {worst:.1e}"),
    )
}

pub fn check_quadrature_exactness() -> Check {
    let fact = |n: i32| (1..=n).map(f64::from).product::<f64>();
    let mut worst: f64 = 0.0;
    for n in 1..=20 {
        let r = gauss_interval(n).unwrap();
        for p in 0..(2 * n as i32) {
            let q = r.integrate(|x| x[0].powi(p));
            worst = worst.max((q - 1.0 / (p as f64 + 1.0)).abs());
        }
    }
    for deg in 0..=10 {
        let r = triangle_rule(deg).unwrap();
        for a in 0..=deg as i32 {
            for b in 0..=(deg as i32 - a) {
                let q = r.integrate(|x| x[0].powi(a) * x[1].powi(b));
                worst = worst.max((q - fact(a) * fact(b) / fact(a + b + 2)).abs());
            }
        }
    }
    Check::new(
        "quadrature monomial exactness (exhaustive)",
        worst <= 1e-13,
        format!("max monomial error {worst:.1e}"),
    )
}

pub fn check_fourier_coefficients() -> Check {
    // composite Gauss, with panel boundaries at the kink
    let g = gauss_interval(20).unwrap();
    let mut worst: f64 = 0.0;
    for n in 1..=40u32 {
        let mut q = 0.0;
        for k in 0..50 {
            let (a, b) = (k as f64 / 50.0, (k + 1) as f64 / 50.0);
            for (s, w) in g.iter() {
                let y = a + (b - a) * s[0];
                q += (b - a) * w * hat(y) * (n as f64 * std::f64::consts::PI * y).sin();
            }
        }
        worst = worst.max((2.0 * q - fourier_coefficient_1d(n)).abs());
    }
    Check::new(
        "Fourier coefficients match the quadrature oracle <= 1e-10",
        worst <= 1e-10,
        format!("max deviation {worst:.1e}"),
    )
}

pub fn check_ls_identity() -> Check {
    let mut worst: f64 = 0.0;
    for (kind, scaling, level) in [
        (ProblemKind::Smooth1d, Scaling::Equal, 4),
        (ProblemKind::Nonsmooth1d, Scaling::Parabolic, 3),
        (ProblemKind::Smooth2d, Scaling::Equal, 2),
        (ProblemKind::Nonsmooth2d, Scaling::Equal, 2),
    ] {
        let data = ProblemData::new(kind);
        let d = disc(kind.domain(), scaling, level);
        let quad = ErrorQuadrature::new(d.dim());
        let sys = System::assemble(&d).unwrap();
        let rhs = assemble_rhs(&data, &d, &quad).unwrap();
        let (sol, _) = solve_system(&sys, &rhs, &SolveOptions::default()).unwrap();
        let x = sol.to_vector();
        let ax = sys.matrix.apply(&x);
        let xax: f64 = x.iter().zip(&ax).map(|(a, b)| a * b).sum();
        let xf: f64 = x.iter().zip(&rhs).map(|(a, b)| a * b).sum();
        let algebraic = xax - 2.0 * xf + data_norm_sq(&data, &d, &quad);
        let ls = compute_errors(&data, &d, &sol, &quad).ls_error;
        worst = worst.max((algebraic.sqrt() - ls).abs() / ls);
    }
    Check::new(
        "LS quadrature vs algebraic identity <= 1e-8 rel",
        worst <= 1e-8,
        format!("relative defect {worst:.1e}"),
    )
}

pub fn check_cg_vs_direct() -> Check {
    let data = ProblemData::new(ProblemKind::Smooth1d);
    let d = disc(Domain::UnitInterval, Scaling::Equal, 2);
    let quad = ErrorQuadrature::new(1);
    let sys = System::assemble(&d).unwrap();
    let rhs = assemble_rhs(&data, &d, &quad).unwrap();
    let (a, stats) = solve_system(&sys, &rhs, &SolveOptions::default()).unwrap();
    let (b, _) = solve_system(&sys, &rhs, &direct()).unwrap();
    let diff = max_abs_diff(&a.to_vector(), &b.to_vector());
    let residual = norm(
        &sys.matrix
            .apply(&a.to_vector())
            .iter()
            .zip(&rhs)
            .map(|(x, y)| x - y)
            .collect::<Vec<_>>(),
    ) / norm(&rhs);
    Check::new(
        "CG and direct agree to 1e-9; Galerkin residual <= tol",
        diff <= 1e-9 && residual <= 1e-12 && stats.relative_residual <= 1e-12,
        format!("max difference {diff:.1e}, relative residual {residual:.1e}"),
    )
}

pub fn check_linearity() -> Check {
    struct Scaled<'a>(&'a ProblemData, f64);
    impl stfosls::exact::Problem for Scaled<'_> {
        fn dim(&self) -> usize {
            self.0.kind.dim()
        }
        fn source(&self, p: &CellPoint) -> f64 {
            self.1 * self.0.source_value(p.t, &p.x)
        }
        fn initial(&self, p: &stfosls::exact::SpacePoint) -> f64 {
            self.1 * self.0.initial_value(&p.x)
        }
        fn exact(&self, _: &CellPoint) -> Option<stfosls::exact::ExactValues> {
            None
        }
    }
    let data = ProblemData::new(ProblemKind::Smooth2d);
    let d = disc(Domain::UnitSquare, Scaling::Equal, 1);
    let quad = ErrorQuadrature::new(2);
    let sys = System::assemble(&d).unwrap();
    let (x1, _) = solve_system(&sys, &assemble_rhs(&data, &d, &quad).unwrap(), &direct()).unwrap();
    let (x3, _) = solve_system(&sys, &assemble_rhs(&Scaled(&data, 3.0), &d, &quad).unwrap(), &direct()).unwrap();
    let scaled: Vec<f64> = x1.to_vector().iter().map(|v| 3.0 * v).collect();
    let diff = max_abs_diff(&scaled, &x3.to_vector());
    Check::new(
        "linearity: data scaled by 3 scales the solution by 3",
        diff <= 1e-12,
        format!("max difference {diff:.1e}"),
    )
}

pub fn check_projection_orthogonality() -> Check {
    let d = disc(Domain::UnitSquare, Scaling::Parabolic, 1);
    let quad = ErrorQuadrature::new(2);
    let f = |p: &CellPoint| (2.0 * p.t).sin() * (p.x[0] - p.x[1] * p.x[1]).exp();
    let pf = project(f, &d, &quad);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let time = &d.mesh.time;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let coef: Vec<[f64; 3]> = (0..time.n_elements() * d.space_u.n_cells())
            .map(|_| [rng.gen(), rng.gen(), rng.gen()])
            .collect();
        let mut ip = 0.0;
        for m in 0..time.n_elements() {
            for c in 0..d.space_u.n_cells() {
                let map = d.space_u.cell_map(c);
                let q = coef[m * d.space_u.n_cells() + c];
                for (xi, wx) in quad.space.iter() {
                    for (tau, wt) in quad.time.iter() {
                        let p = CellPoint {
                            t: time.element(m).0 + tau[0] * time.length(m),
                            x: map.map(xi),
                            time_elem: m,
                            space_elem: c,
                            t_ref: tau[0],
                            x_ref: *xi,
                        };
                        let qv = q[0] + q[1] * xi[0] + q[2] * xi[1];
                        ip += wx * wt * time.length(m) * map.abs_det() * (f(&p) - pf.eval(m, c, xi)) * qv;
                    }
                }
            }
        }
        worst = worst.max(ip.abs());
    }
    Check::new(
        "projection residual orthogonal to broken polynomials <= 1e-10",
        worst <= 1e-10,
        format!("max |<f - Πf, q>| {worst:.1e}"),
    )
}

pub fn check_determinism() -> Check {
    let data = ProblemData::new(ProblemKind::Smooth2d);
    let d = disc(Domain::UnitSquare, Scaling::Equal, 2);
    let quad = ErrorQuadrature::new(2);
    let sys = System::assemble(&d).unwrap();
    par::set_parallel(false);
    let r1 = assemble_rhs(&data, &d, &quad).unwrap();
    let (s1, _) = solve_system(&sys, &r1, &SolveOptions::default()).unwrap();
    let r2 = assemble_rhs(&data, &d, &quad).unwrap();
    let (s2, _) = solve_system(&sys, &r2, &SolveOptions::default()).unwrap();
    par::set_parallel(true);
    let r3 = assemble_rhs(&data, &d, &quad).unwrap();
    let (s3, _) = solve_system(&sys, &r3, &SolveOptions::default()).unwrap();
    let same = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits());
    let ok = same(&r1, &r2) && same(&r1, &r3) && s1 == s2 && s1 == s3;
    Check::new(
        "assembly and solve bit-for-bit reproducible (serial and parallel)",
        ok && r1.iter().all(|v| v.is_finite()),
        format!("identical = {ok}"),
    )
}

pub fn property_suite() -> Vec<Check> {
    vec![
        check_symmetry(),
        check_spd(),
        check_element_loop(),
        check_kronecker_identity(),
        check_manufactured(),
        check_pythagoras(),
        check_projected_data_invariance(),
        check_projection_orthogonality(),
        check_rt_normal_continuity(),
        check_quadrature_exactness(),
        check_fourier_coefficients(),
        check_ls_identity(),
        check_cg_vs_direct(),
        check_linearity(),
        check_determinism(),
    ]
}

pub fn sparse_identity_solve() -> bool {
    let a = CsrMatrix::identity(3);
    cholesky_solve(&a, &[1.0, 0.0, 0.0]).unwrap() == vec![1.0, 0.0, 0.0]
}
