//! Problem data and exact solutions of the four benchmark problems.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::mesh::{Domain, Point};

/// A quadrature point inside the space-time cell `K_t × K_x`.
#[derive(Debug, Clone, Copy)]
pub struct CellPoint {
    pub t: f64,
    pub x: Point,
    pub time_elem: usize,
    pub space_elem: usize,
    /// Local coordinate in `[0, 1]` of the time element.
    pub t_ref: f64,
    /// Reference coordinates in the spatial cell map.
    pub x_ref: [f64; 2],
}

/// A quadrature point inside the spatial cell `K_x`.
#[derive(Debug, Clone, Copy)]
pub struct SpacePoint {
    pub x: Point,
    pub space_elem: usize,
    pub x_ref: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactValues {
    pub u: f64,
    pub grad_u: [f64; 2],
    pub dt_u: f64,
    pub sigma: [f64; 2],
}

/// Data of the least-squares functional
/// `|div(v, tau) - f|^2 + |grad v + tau - g|^2 + |v(0) - u0|^2`.
///
/// The heat equation has `g = 0`; a nonzero flux source is only used to
/// manufacture discrete solutions with vanishing residual.
pub trait Problem: Sync {
    fn dim(&self) -> usize;

    /// `f`
    fn source(&self, p: &CellPoint) -> f64;

    /// `u0`
    fn initial(&self, p: &SpacePoint) -> f64;

    /// `g`
    fn flux_source(&self, _p: &CellPoint) -> [f64; 2] {
        [0.0; 2]
    }

    fn has_flux_source(&self) -> bool {
        false
    }

    /// Exact `(u, sigma)`, if known.
    fn exact(&self, p: &CellPoint) -> Option<ExactValues>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    Smooth1d,
    Nonsmooth1d,
    Smooth2d,
    Nonsmooth2d,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 4] = [
        ProblemKind::Smooth1d,
        ProblemKind::Nonsmooth1d,
        ProblemKind::Smooth2d,
        ProblemKind::Nonsmooth2d,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Smooth1d => "smooth_1d",
            ProblemKind::Nonsmooth1d => "nonsmooth_1d",
            ProblemKind::Smooth2d => "smooth_2d",
            ProblemKind::Nonsmooth2d => "nonsmooth_2d",
        }
    }

    pub fn dim(self) -> usize {
        match self {
            ProblemKind::Smooth1d | ProblemKind::Nonsmooth1d => 1,
            _ => 2,
        }
    }

    pub fn domain(self) -> Domain {
        match self.dim() {
            1 => Domain::UnitInterval,
            _ => Domain::UnitSquare,
        }
    }

    pub fn is_smooth(self) -> bool {
        matches!(self, ProblemKind::Smooth1d | ProblemKind::Smooth2d)
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown problem `{s}`"))
    }
}

/// Coefficient `2 ∫ u0(y) sin(nπy) dy = 8 sin(nπ/2) / (n²π²)` of the hat
/// function `u0(x) = 1 - 2|x - 1/2|`.
pub fn fourier_coefficient_1d(n: u32) -> f64 {
    assert!(n >= 1);
    let sign = match n % 4 {
        1 => 1.0,
        3 => -1.0,
        _ => return 0.0,
    };
    8.0 * sign / ((n as f64) * (n as f64) * PI * PI)
}

pub fn hat(x: f64) -> f64 {
    1.0 - 2.0 * (x - 0.5).abs()
}

fn hat_derivative(x: f64) -> f64 {
    if x < 0.5 {
        2.0
    } else if x > 0.5 {
        -2.0
    } else {
        0.0
    }
}

/// Truncated series `sum_{n<=N} c_n sin(nπx) exp(-n²π²t)` and its derivatives.
#[derive(Debug, Clone, Copy, Default)]
struct Series {
    u: f64,
    ux: f64,
    uxx: f64,
    ut: f64,
}

fn hat_series(terms: u32, t: f64, x: f64) -> Series {
    let theta = PI * x;
    let (s1, c1) = theta.sin_cos();
    // sin(nθ), cos(nθ) by rotation
    let (mut sn, mut cn) = (s1, c1);
    let mut out = Series::default();
    for n in 1..=terms {
        let nf = n as f64;
        let k2 = nf * nf * PI * PI;
        let decay = (-k2 * t).exp();
        let c = fourier_coefficient_1d(n) * decay;
        if c != 0.0 {
            out.u += c * sn;
            out.ux += c * nf * PI * cn;
            out.uxx -= c * k2 * sn;
            out.ut -= c * k2 * sn;
        }
        // all remaining terms are below 1e-30 relative to the leading one
        if k2 * t > 80.0 {
            break;
        }
        let s_next = sn * c1 + cn * s1;
        cn = cn * c1 - sn * s1;
        sn = s_next;
    }
    out
}

/// One of the four benchmark problems on `I = (0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemData {
    pub kind: ProblemKind,
    /// Truncation `N` of the Fourier series (per coordinate).
    pub fourier_terms: u32,
}

impl ProblemData {
    pub fn new(kind: ProblemKind) -> Self {
        Self {
            kind,
            fourier_terms: 100,
        }
    }

    pub fn with_fourier_terms(kind: ProblemKind, fourier_terms: u32) -> Self {
        Self {
            kind,
            fourier_terms,
        }
    }

    pub fn end_time(&self) -> f64 {
        1.0
    }

    /// `u0(x)`
    pub fn initial_value(&self, x: &Point) -> f64 {
        match self.kind {
            ProblemKind::Smooth1d => (PI * x[0]).sin(),
            ProblemKind::Smooth2d => (PI * x[0]).sin() * (PI * x[1]).sin(),
            ProblemKind::Nonsmooth1d => hat(x[0]),
            ProblemKind::Nonsmooth2d => hat(x[0]) * hat(x[1]),
        }
    }

    /// `f(t, x) = ∂_t u - Δu`
    pub fn source_value(&self, t: f64, x: &Point) -> f64 {
        match self.kind {
            ProblemKind::Smooth1d => {
                (PI * x[0]).sin() * (-PI * (PI * t).sin() + PI * PI * (PI * t).cos())
            }
            ProblemKind::Smooth2d => {
                (PI * x[0]).sin()
                    * (PI * x[1]).sin()
                    * (-PI * (PI * t).sin() + 2.0 * PI * PI * (PI * t).cos())
            }
            ProblemKind::Nonsmooth1d | ProblemKind::Nonsmooth2d => 0.0,
        }
    }

    /// Closed form or truncated series of `u`, `∇u`, `∂_t u` at `(t, x)`.
    ///
    /// For the non-smooth problems at `t = 0` the value and gradient come from
    /// `u0` directly; `∂_t u` is still the truncated series.
    pub fn eval(&self, t: f64, x: &Point) -> ExactValues {
        let (u, grad_u, dt_u) = match self.kind {
            ProblemKind::Smooth1d => {
                let (st, ct) = (PI * t).sin_cos();
                let (sx, cx) = (PI * x[0]).sin_cos();
                (ct * sx, [PI * ct * cx, 0.0], -PI * st * sx)
            }
            ProblemKind::Smooth2d => {
                let (st, ct) = (PI * t).sin_cos();
                let (sx, cx) = (PI * x[0]).sin_cos();
                let (sy, cy) = (PI * x[1]).sin_cos();
                (
                    ct * sx * sy,
                    [PI * ct * cx * sy, PI * ct * sx * cy],
                    -PI * st * sx * sy,
                )
            }
            ProblemKind::Nonsmooth1d => {
                let s = hat_series(self.fourier_terms, t, x[0]);
                if t == 0.0 {
                    (hat(x[0]), [hat_derivative(x[0]), 0.0], s.ut)
                } else {
                    (s.u, [s.ux, 0.0], s.ut)
                }
            }
            ProblemKind::Nonsmooth2d => {
                // the square-truncated double series factorizes exactly
                let a = hat_series(self.fourier_terms, t, x[0]);
                let b = hat_series(self.fourier_terms, t, x[1]);
                if t == 0.0 {
                    let (ha, hb) = (hat(x[0]), hat(x[1]));
                    (
                        ha * hb,
                        [hat_derivative(x[0]) * hb, ha * hat_derivative(x[1])],
                        a.ut * b.u + a.u * b.ut,
                    )
                } else {
                    (a.u * b.u, [a.ux * b.u, a.u * b.ux], a.ut * b.u + a.u * b.ut)
                }
            }
        };
        ExactValues {
            u,
            grad_u,
            dt_u,
            sigma: [-grad_u[0], -grad_u[1]],
        }
    }

    /// `Δu(t, x)` (for residual checks).
    pub fn laplacian(&self, t: f64, x: &Point) -> f64 {
        match self.kind {
            ProblemKind::Smooth1d => -PI * PI * self.eval(t, x).u,
            ProblemKind::Smooth2d => -2.0 * PI * PI * self.eval(t, x).u,
            ProblemKind::Nonsmooth1d => hat_series(self.fourier_terms, t, x[0]).uxx,
            ProblemKind::Nonsmooth2d => {
                let a = hat_series(self.fourier_terms, t, x[0]);
                let b = hat_series(self.fourier_terms, t, x[1]);
                a.uxx * b.u + a.u * b.uxx
            }
        }
    }
}

impl Problem for ProblemData {
    fn dim(&self) -> usize {
        self.kind.dim()
    }

    fn source(&self, p: &CellPoint) -> f64 {
        self.source_value(p.t, &p.x)
    }

    fn initial(&self, p: &SpacePoint) -> f64 {
        self.initial_value(&p.x)
    }

    fn exact(&self, p: &CellPoint) -> Option<ExactValues> {
        Some(self.eval(p.t, &p.x))
    }
}
