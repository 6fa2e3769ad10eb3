//! Solvers for the symmetric positive definite FOSLS system.

use std::fmt;
use std::str::FromStr;

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};
use nalgebra::{DMatrix, SymmetricEigen};

use crate::assembly::{FactorMatrices, System};
use crate::error::{Error, Result};
use crate::par;
use crate::spaces::ProductDofLayout;
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Cg,
    Direct,
}

impl FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "cg" => Ok(Method::Cg),
            "direct" => Ok(Method::Direct),
            _ => Err(format!("unknown solver `{s}` (expected cg or direct)")),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Cg => "cg",
            Method::Direct => "direct",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PreconditionerKind {
    /// Diagonal scaling.
    Jacobi,
    /// Exact inverses of the diagonal blocks `A_uu` and `A_ss`, applied through
    /// their Kronecker structure.
    Block,
}

impl FromStr for PreconditionerKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "jacobi" => Ok(PreconditionerKind::Jacobi),
            "block" => Ok(PreconditionerKind::Block),
            _ => Err(format!("unknown preconditioner `{s}` (expected jacobi or block)")),
        }
    }
}

impl fmt::Display for PreconditionerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PreconditionerKind::Jacobi => "jacobi",
            PreconditionerKind::Block => "block",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub method: Method,
    /// Relative residual tolerance `|A x - F| <= tol |F|`.
    pub tol: f64,
    /// Defaults to `10 * dofs`.
    pub max_iter: Option<usize>,
    pub preconditioner: PreconditionerKind,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            method: Method::Cg,
            tol: 1e-12,
            max_iter: None,
            preconditioner: PreconditionerKind::Block,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol <= 1e-4) {
            return Err(Error::InvalidTolerance(self.tol));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    /// Final `|A x - F| / |F|`.
    pub relative_residual: f64,
}

/// Coefficients of `(u_h, sigma_h)` in the product layout.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionPair {
    pub layout: ProductDofLayout,
    pub u: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl SolutionPair {
    pub fn from_vector(layout: ProductDofLayout, x: &[f64]) -> Result<Self> {
        if x.len() != layout.total() {
            return Err(Error::DimensionMismatch {
                expected: layout.total(),
                got: x.len(),
            });
        }
        let (u, sigma) = x.split_at(layout.n_u());
        Ok(Self {
            layout,
            u: u.to_vec(),
            sigma: sigma.to_vec(),
        })
    }

    pub fn to_vector(&self) -> Vec<f64> {
        let mut x = self.u.clone();
        x.extend_from_slice(&self.sigma);
        x
    }

    /// Coefficient of `phi_i psi_a`.
    pub fn u_coef(&self, i: usize, a: usize) -> f64 {
        self.u[i * self.layout.n_u_space + a]
    }

    /// Coefficient of `chi_m rho_e`.
    pub fn sigma_coef(&self, m: usize, e: usize) -> f64 {
        self.sigma[m * self.layout.n_sigma_space + e]
    }
}

pub trait Preconditioner: Sync {
    /// `z = P^{-1} r`
    fn apply(&self, r: &[f64], z: &mut [f64]);
}

pub struct Identity;

impl Preconditioner for Identity {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
    }
}

pub struct Jacobi {
    inv_diag: Vec<f64>,
}

impl Jacobi {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let inv_diag = a
            .diagonal()
            .into_iter()
            .map(|d| if d > 0.0 { Ok(1.0 / d) } else { Err(Error::NotPositiveDefinite) })
            .collect::<Result<_>>()?;
        Ok(Self { inv_diag })
    }
}

impl Preconditioner for Jacobi {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        par::for_each_chunk_mut(z, par::CHUNK, |c, out| {
            let base = c * par::CHUNK;
            for (k, zi) in out.iter_mut().enumerate() {
                *zi = self.inv_diag[base + k] * r[base + k];
            }
        });
    }
}

/// Block-diagonal preconditioner `diag(A_uu, A_ss)^{-1}`.
///
/// `A_uu = (K_t + E0_t) ⊗ M_x + M_t ⊗ K_x` is inverted by fast
/// diagonalization: with `K_x V = M_x V Λ`, `V^T M_x V = I`, each spatial mode
/// leaves a tridiagonal system `K_t + E0_t + λ M_t` in time.
/// `A_ss = Mc_t ⊗ S_x` with diagonal `Mc_t` reduces to one sparse Cholesky
/// factorization of `S_x = D_x + M_rt`.
pub struct TensorBlock {
    layout: ProductDofLayout,
    /// Row-major `V`, `n_u_space × n_u_space`.
    modes: Vec<f64>,
    /// Per mode `j`, the Thomas factorization of its temporal system.
    thomas: Vec<Thomas>,
    sigma_llt: Option<faer::sparse::linalg::solvers::Llt<usize, f64>>,
    inv_time_mass: Vec<f64>,
}

/// LU factors of a symmetric tridiagonal matrix without pivoting.
struct Thomas {
    /// Pivots `d_i`.
    pivots: Vec<f64>,
    /// Off-diagonal `e_i = A[i, i+1]`.
    upper: Vec<f64>,
}

impl Thomas {
    fn new(diag: &[f64], off: &[f64]) -> Result<Self> {
        let n = diag.len();
        let mut pivots = Vec::with_capacity(n);
        for i in 0..n {
            let d = if i == 0 {
                diag[0]
            } else {
                diag[i] - off[i - 1] * off[i - 1] / pivots[i - 1]
            };
            if !(d > 0.0) {
                return Err(Error::NotPositiveDefinite);
            }
            pivots.push(d);
        }
        Ok(Self {
            pivots,
            upper: off.to_vec(),
        })
    }

    fn solve_strided(&self, x: &mut [f64]) {
        let n = self.pivots.len();
        for i in 1..n {
            x[i] -= self.upper[i - 1] / self.pivots[i - 1] * x[i - 1];
        }
        x[n - 1] /= self.pivots[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = (x[i] - self.upper[i] * x[i + 1]) / self.pivots[i];
        }
    }
}

fn dense(a: &CsrMatrix) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(a.nrows(), a.ncols());
    for r in 0..a.nrows() {
        for (c, v) in a.row(r) {
            m[(r, c)] += v;
        }
    }
    m
}

fn sparse_cholesky(
    a: &CsrMatrix,
) -> Result<faer::sparse::linalg::solvers::Llt<usize, f64>> {
    let n = a.nrows();
    let mut triplets = Vec::with_capacity(a.nnz() / 2 + n);
    for r in 0..n {
        for (c, v) in a.row(r) {
            if r >= c {
                triplets.push(Triplet::new(r, c, v));
            }
        }
    }
    let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
        .map_err(|_| Error::DimensionMismatch { expected: n, got: a.ncols() })?;
    mat.sp_cholesky(Side::Lower).map_err(|_| Error::NotPositiveDefinite)
}

impl TensorBlock {
    pub fn new(factors: &FactorMatrices) -> Result<Self> {
        let layout = factors.layout();
        let nt = layout.n_u_time;
        let nx = layout.n_u_space;

        let (modes, thomas) = if nx > 0 {
            let m = dense(&factors.m_x);
            let k = dense(&factors.k_x);
            let l = m.cholesky().ok_or(Error::NotPositiveDefinite)?;
            let linv = l
                .l()
                .solve_lower_triangular(&DMatrix::identity(nx, nx))
                .ok_or(Error::NotPositiveDefinite)?;
            let c = &linv * k * linv.transpose();
            let c = (&c + c.transpose()) * 0.5;
            let eig = SymmetricEigen::new(c);
            // V = L^{-T} Q
            let v = linv.transpose() * &eig.eigenvectors;
            let modes: Vec<f64> = (0..nx * nx).map(|idx| v[(idx / nx, idx % nx)]).collect();

            let a1 = dense(&factors.k_t.add(&factors.e0_t)?);
            let a2 = dense(&factors.m_t);
            let thomas = eig
                .eigenvalues
                .iter()
                .map(|&lambda| {
                    let diag: Vec<f64> = (0..nt).map(|i| a1[(i, i)] + lambda * a2[(i, i)]).collect();
                    let off: Vec<f64> = (0..nt.saturating_sub(1))
                        .map(|i| a1[(i, i + 1)] + lambda * a2[(i, i + 1)])
                        .collect();
                    Thomas::new(&diag, &off)
                })
                .collect::<Result<Vec<_>>>()?;
            (modes, thomas)
        } else {
            (Vec::new(), Vec::new())
        };

        let sigma_llt = if layout.n_sigma_space > 0 {
            Some(sparse_cholesky(&factors.sigma_space_factor()?)?)
        } else {
            None
        };
        let inv_time_mass = factors.mc_t.diagonal().iter().map(|h| 1.0 / h).collect();
        Ok(Self {
            layout,
            modes,
            thomas,
            sigma_llt,
            inv_time_mass,
        })
    }

    fn apply_u(&self, r: &[f64], z: &mut [f64]) {
        let (nt, nx) = (self.layout.n_u_time, self.layout.n_u_space);
        if nx == 0 {
            return;
        }
        let v = &self.modes;
        // c_i = V^T r_i, stored mode-major
        let mut w = vec![0.0; nt * nx];
        par::for_each_chunk_mut(&mut w, nt, |j, col| {
            for (i, cij) in col.iter_mut().enumerate() {
                let ri = &r[i * nx..(i + 1) * nx];
                *cij = (0..nx).map(|a| v[a * nx + j] * ri[a]).sum();
            }
            self.thomas[j].solve_strided(col);
        });
        // z_i = V y_i
        par::for_each_chunk_mut(z, nx, |i, zi| {
            for (a, za) in zi.iter_mut().enumerate() {
                let row = &v[a * nx..(a + 1) * nx];
                *za = (0..nx).map(|j| row[j] * w[j * nt + i]).sum();
            }
        });
    }

    fn apply_sigma(&self, r: &[f64], z: &mut [f64]) {
        let Some(llt) = &self.sigma_llt else { return };
        let (nt, ns) = (self.layout.n_sigma_time, self.layout.n_sigma_space);
        let mut rhs = Mat::<f64>::from_fn(ns, nt, |e, m| r[m * ns + e] * self.inv_time_mass[m]);
        llt.solve_in_place(rhs.as_mut());
        for m in 0..nt {
            for e in 0..ns {
                z[m * ns + e] = rhs[(e, m)];
            }
        }
    }
}

impl Preconditioner for TensorBlock {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let n = self.layout.n_u();
        let (ru, rs) = r.split_at(n);
        let (zu, zs) = z.split_at_mut(n);
        self.apply_u(ru, zu);
        self.apply_sigma(rs, zs);
    }
}

/// Preconditioned conjugate gradients from the zero initial guess.
///
/// Convergence is declared on the true residual `|b - A x| <= tol |b|`; when
/// the recursively updated residual drifts below the true one, the iteration
/// restarts from the current iterate. A true residual at the rounding floor
/// of its own evaluation is accepted as converged as well.
pub fn pcg<P: Preconditioner + ?Sized>(
    a: &CsrMatrix,
    b: &[f64],
    prec: &P,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, SolveStats)> {
    let n = b.len();
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: n,
        });
    }
    let mut x = vec![0.0; n];
    let b_norm = par::norm2(b);
    if b_norm == 0.0 {
        return Ok((x, SolveStats { iterations: 0, relative_residual: 0.0 }));
    }
    let target = tol * b_norm;
    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    let mut q = vec![0.0; n];
    let mut iterations = 0;
    let mut true_residual = b_norm;
    for _restart in 0..6 {
        prec.apply(&r, &mut z);
        let mut p = z.clone();
        let mut rz = par::dot(&r, &z);
        while iterations < max_iter {
            if par::norm2(&r) <= target {
                break;
            }
            a.mul_vec(&p, &mut q);
            let pq = par::dot(&p, &q);
            if !(pq > 0.0) {
                return Err(Error::NotPositiveDefinite);
            }
            let alpha = rz / pq;
            axpy(alpha, &p, &mut x);
            axpy(-alpha, &q, &mut r);
            prec.apply(&r, &mut z);
            let rz_new = par::dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            par::for_each_chunk_mut(&mut p, par::CHUNK, |c, pc| {
                let base = c * par::CHUNK;
                for (k, pk) in pc.iter_mut().enumerate() {
                    *pk = z[base + k] + beta * *pk;
                }
            });
            iterations += 1;
        }
        a.mul_vec(&x, &mut q);
        par::for_each_chunk_mut(&mut r, par::CHUNK, |c, rc| {
            let base = c * par::CHUNK;
            for (k, rk) in rc.iter_mut().enumerate() {
                *rk = b[base + k] - q[base + k];
            }
        });
        true_residual = par::norm2(&r);
        if true_residual <= target || iterations >= max_iter {
            break;
        }
        if true_residual <= rounding_floor(a, &x, b) {
            log::debug!(
                "cg stopped at the rounding floor after {iterations} iterations (relative residual {:.3e})",
                true_residual / b_norm
            );
            return Ok((x, SolveStats { iterations, relative_residual: true_residual / b_norm }));
        }
        log::debug!(
            "cg restart after {iterations} iterations (true residual {:.3e})",
            true_residual / b_norm
        );
    }
    let stats = SolveStats {
        iterations,
        relative_residual: true_residual / b_norm,
    };
    if true_residual > target {
        return Err(Error::NoConvergence {
            iterations,
            residual: stats.relative_residual,
        });
    }
    Ok((x, stats))
}

/// A small multiple of `eps ‖|A| |x| + |b|‖`, the size of the rounding error
/// committed when `b - A x` is evaluated in floating point. No iterate can be
/// certified below it, so CG accepts it when `tol` asks for more.
fn rounding_floor(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let mut s = vec![0.0; b.len()];
    par::for_each_chunk_mut(&mut s, par::CHUNK, |c, out| {
        let base = c * par::CHUNK;
        for (k, v) in out.iter_mut().enumerate() {
            let r = base + k;
            *v = a.row(r).map(|(j, aij)| (aij * x[j]).abs()).sum::<f64>() + b[r].abs();
        }
    });
    64.0 * f64::EPSILON * par::norm2(&s)
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    par::for_each_chunk_mut(y, par::CHUNK, |c, yc| {
        let base = c * par::CHUNK;
        for (k, yk) in yc.iter_mut().enumerate() {
            *yk += alpha * x[base + k];
        }
    });
}

/// Sparse Cholesky solve; breakdown is reported as [`Error::NotPositiveDefinite`].
pub fn cholesky_solve(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if a.nrows() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: b.len(),
        });
    }
    if b.is_empty() {
        return Ok(Vec::new());
    }
    let llt = sparse_cholesky(a)?;
    let mut rhs = Mat::<f64>::from_fn(b.len(), 1, |i, _| b[i]);
    llt.solve_in_place(rhs.as_mut());
    Ok((0..b.len()).map(|i| rhs[(i, 0)]).collect())
}

fn relative_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.apply(x);
    let res = par::sum_range(b.len(), |i| (b[i] - ax[i]).powi(2)).sqrt();
    let bn = par::norm2(b);
    if bn == 0.0 {
        res
    } else {
        res / bn
    }
}

/// Solves `A x = b` for a general SPD matrix. The block preconditioner needs
/// the Kronecker factors and is replaced by Jacobi here.
pub fn solve_spd(a: &CsrMatrix, b: &[f64], opts: &SolveOptions) -> Result<(Vec<f64>, SolveStats)> {
    opts.validate()?;
    match opts.method {
        Method::Direct => {
            let x = cholesky_solve(a, b)?;
            let relative_residual = relative_residual(a, &x, b);
            Ok((x, SolveStats { iterations: 0, relative_residual }))
        }
        Method::Cg => {
            let max_iter = opts.max_iter.unwrap_or(10 * b.len().max(1));
            pcg(a, b, &Jacobi::new(a)?, opts.tol, max_iter)
        }
    }
}

/// Solves the FOSLS system and splits the result into `(u_h, sigma_h)`.
pub fn solve_system(
    system: &System,
    rhs: &[f64],
    opts: &SolveOptions,
) -> Result<(SolutionPair, SolveStats)> {
    opts.validate()?;
    let (x, stats) = match (opts.method, opts.preconditioner) {
        (Method::Cg, PreconditionerKind::Block) => {
            let max_iter = opts.max_iter.unwrap_or(10 * rhs.len().max(1));
            let prec = TensorBlock::new(&system.factors)?;
            pcg(&system.matrix, rhs, &prec, opts.tol, max_iter)?
        }
        _ => solve_spd(&system.matrix, rhs, opts)?,
    };
    log::debug!(
        "{} ({}) solve: {} iterations, relative residual {:.3e}",
        opts.method,
        opts.preconditioner,
        stats.iterations,
        stats.relative_residual
    );
    Ok((SolutionPair::from_vector(system.layout, &x)?, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::System;
    use crate::mesh::{Domain, Scaling, TensorMesh};
    use crate::spaces::build_layout;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn laplacian(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
                t.push((i - 1, i, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, n, &t)
    }

    #[test]
    fn identity_system() {
        let a = CsrMatrix::identity(5);
        let b = [1.0, 0.0, 0.0, 0.0, 0.0];
        for method in [Method::Cg, Method::Direct] {
            let opts = SolveOptions { method, ..Default::default() };
            let (x, _) = solve_spd(&a, &b, &opts).unwrap();
            assert_eq!(x, b.to_vec());
        }
    }

    #[test]
    fn tolerance_is_validated() {
        let a = CsrMatrix::identity(2);
        for tol in [0.0, -1.0, 1e-3, f64::NAN] {
            let opts = SolveOptions { tol, ..Default::default() };
            assert!(matches!(solve_spd(&a, &[1.0, 1.0], &opts), Err(Error::InvalidTolerance(_))));
        }
    }

    #[test]
    fn cg_and_direct_agree_on_laplacian() {
        let a = laplacian(200);
        let b: Vec<f64> = (0..200).map(|i| (i as f64 * 0.1).sin()).collect();
        let (x1, s) = solve_spd(&a, &b, &SolveOptions::default()).unwrap();
        let (x2, _) = solve_spd(&a, &b, &SolveOptions { method: Method::Direct, ..Default::default() }).unwrap();
        assert!(s.relative_residual <= 1e-12);
        let diff = x1.iter().zip(&x2).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-8, "{diff}");
    }

    #[test]
    fn indefinite_matrix_is_detected() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (1, 1, -1.0)]);
        let opts = SolveOptions { method: Method::Direct, ..Default::default() };
        assert!(matches!(solve_spd(&a, &[1.0, 1.0], &opts), Err(Error::NotPositiveDefinite)));
        assert!(matches!(
            solve_spd(&a, &[1.0, 1.0], &SolveOptions::default()),
            Err(Error::NotPositiveDefinite)
        ));
    }

    #[test]
    fn iteration_cap_reports_failure() {
        let a = laplacian(100);
        let b = vec![1.0; 100];
        let opts = SolveOptions { max_iter: Some(3), ..Default::default() };
        match solve_spd(&a, &b, &opts) {
            Err(Error::NoConvergence { iterations, residual }) => {
                assert_eq!(iterations, 3);
                assert!(residual > 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    fn system(domain: Domain, scaling: Scaling, level: usize) -> System {
        let mesh = TensorMesh::initial(domain, scaling).refined(level);
        System::assemble(&build_layout(&mesh, 1, 1).unwrap()).unwrap()
    }

    #[test]
    fn block_preconditioner_inverts_diagonal_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (domain, level) in [(Domain::UnitInterval, 3), (Domain::UnitSquare, 2)] {
            let sys = system(domain, Scaling::Equal, level);
            let f = &sys.factors;
            let prec = TensorBlock::new(f).unwrap();
            let uu = f.uu_block().unwrap();
            let ss = f.sigma_block().unwrap();
            let (nu, ns) = (sys.layout.n_u(), sys.layout.n_sigma());
            let xu: Vec<f64> = (0..nu).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let xs: Vec<f64> = (0..ns).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut r = uu.apply(&xu);
            r.extend(ss.apply(&xs));
            let mut z = vec![0.0; nu + ns];
            prec.apply(&r, &mut z);
            let err = xu
                .iter()
                .chain(&xs)
                .zip(&z)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(err < 1e-9, "{err}");
        }
    }

    #[test]
    fn preconditioners_give_the_same_solution() {
        let sys = system(Domain::UnitSquare, Scaling::Equal, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let b: Vec<f64> = (0..sys.matrix.nrows()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (x1, s1) = solve_system(&sys, &b, &SolveOptions::default()).unwrap();
        let jac = SolveOptions { preconditioner: PreconditionerKind::Jacobi, ..Default::default() };
        let (x2, s2) = solve_system(&sys, &b, &jac).unwrap();
        let direct = SolveOptions { method: Method::Direct, ..Default::default() };
        let (x3, _) = solve_system(&sys, &b, &direct).unwrap();
        assert!(s1.iterations < s2.iterations);
        for (x, y) in [(&x1, &x2), (&x1, &x3)] {
            let d = x
                .to_vector()
                .iter()
                .zip(y.to_vector())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(d < 1e-8, "{d}");
        }
    }

    #[test]
    fn deterministic_in_serial_mode() {
        let sys = system(Domain::UnitInterval, Scaling::Parabolic, 2);
        let b = vec![1.0; sys.matrix.nrows()];
        par::set_parallel(false);
        let (x1, _) = solve_system(&sys, &b, &SolveOptions::default()).unwrap();
        let (x2, _) = solve_system(&sys, &b, &SolveOptions::default()).unwrap();
        par::set_parallel(true);
        let (x3, _) = solve_system(&sys, &b, &SolveOptions::default()).unwrap();
        assert_eq!(x1, x2);
        assert_eq!(x1, x3);
    }
}
