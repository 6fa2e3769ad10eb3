//! Gauss rules on `[0, 1]` and quadrature rules on the reference triangle
//! `conv{(0,0), (1,0), (0,1)}`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    /// Reference coordinates; interval rules leave the second entry at zero.
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    /// Total polynomial degree integrated exactly.
    pub degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64; 2], f64)> {
        self.points.iter().zip(self.weights.iter().copied())
    }

    pub fn integrate<F: Fn(&[f64; 2]) -> f64>(&self, f: F) -> f64 {
        self.iter().map(|(p, w)| w * f(p)).sum()
    }
}

/// `n`-point Gauss-Legendre rule on `[0, 1]`, exact up to degree `2n - 1`.
pub fn gauss_interval(n: usize) -> Result<QuadratureRule> {
    if !(1..=20).contains(&n) {
        return Err(Error::QuadratureRange(n));
    }
    let (x, w) = gauss_legendre(n);
    Ok(QuadratureRule {
        points: x.iter().map(|&xi| [0.5 * (xi + 1.0), 0.0]).collect(),
        weights: w.iter().map(|&wi| 0.5 * wi).collect(),
        degree: 2 * n - 1,
    })
}

/// Nodes and weights on `[-1, 1]` by Newton iteration on `P_n`.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Quadrature on the reference triangle exact up to total degree `degree`.
///
/// Degrees up to 5 use fully symmetric rules with positive weights; higher
/// degrees (up to 10) use a collapsed Gauss product rule.
pub fn triangle_rule(degree: usize) -> Result<QuadratureRule> {
    let mut rule = QuadratureRule {
        points: Vec::new(),
        weights: Vec::new(),
        degree,
    };
    match degree {
        0 | 1 => rule.push_orbit_centroid(0.5),
        2 => rule.push_orbit3(1.0 / 6.0, 1.0 / 6.0),
        3 | 4 => {
            rule.push_orbit3(0.445948490915965, 0.223381589678011 / 2.0);
            rule.push_orbit3(0.091576213509771, 0.109951743655322 / 2.0);
        }
        5 => {
            rule.push_orbit_centroid(0.225 / 2.0);
            rule.push_orbit3(0.470142064105115, 0.132394152788506 / 2.0);
            rule.push_orbit3(0.101286507323456, 0.125939180544827 / 2.0);
        }
        6..=10 => return Ok(collapsed_rule(degree)),
        _ => return Err(Error::UnsupportedDegree { what: "triangle quadrature", degree }),
    }
    rule.degree = match degree {
        0 | 1 => 1,
        3 => 4,
        d => d,
    };
    Ok(rule)
}

impl QuadratureRule {
    fn push_orbit_centroid(&mut self, w: f64) {
        self.points.push([1.0 / 3.0, 1.0 / 3.0]);
        self.weights.push(w);
    }

    /// The three points with barycentric coordinates `(a, a, 1 - 2a)` permuted.
    fn push_orbit3(&mut self, a: f64, w: f64) {
        let b = 1.0 - 2.0 * a;
        for p in [[a, a], [b, a], [a, b]] {
            self.points.push(p);
            self.weights.push(w);
        }
    }
}

fn collapsed_rule(degree: usize) -> QuadratureRule {
    // the Duffy factor (1 - a) raises the degree in `a` by one
    let n = (degree + 2).div_ceil(2);
    let g = gauss_interval(n).expect("valid gauss size");
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for (pa, wa) in g.iter() {
        for (pb, wb) in g.iter() {
            let a = pa[0];
            points.push([a, pb[0] * (1.0 - a)]);
            weights.push(wa * wb * (1.0 - a));
        }
    }
    QuadratureRule {
        points,
        weights,
        degree,
    }
}

/// Rule used for data integrals and error norms: 5 Gauss points in time,
/// degree 7 in space.
pub struct ErrorQuadrature {
    pub time: QuadratureRule,
    pub space: QuadratureRule,
}

impl ErrorQuadrature {
    pub fn new(dim: usize) -> Self {
        Self {
            time: gauss_interval(5).unwrap(),
            space: spatial_rule(dim, 7).unwrap(),
        }
    }
}

/// Reference-cell rule exact to `degree` for intervals (`dim == 1`) or triangles.
pub fn spatial_rule(dim: usize, degree: usize) -> Result<QuadratureRule> {
    match dim {
        1 => {
            let mut r = gauss_interval(degree / 2 + 1)?;
            r.degree = degree.max(r.degree);
            Ok(r)
        }
        2 => triangle_rule(degree),
        _ => Err(Error::UnsupportedDegree { what: "spatial dimension", degree: dim }),
    }
}
