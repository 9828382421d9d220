//! Bloch-sphere geometry and product quadrature over one or two sphere copies.
//!
//! Directions are stored as `(theta, phi)` in radians. The product grid uses
//! Gauss-Legendre nodes in `u = cos theta` and equally spaced azimuths, so a
//! grid with `n_theta` polar nodes integrates polynomials of degree
//! `2 n_theta - 1` in `cos theta` exactly, and `n_phi` azimuths integrate every
//! Fourier mode `e^{i k phi}` with `0 < |k| < n_phi` to zero.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{MalusError, Result};

/// A point on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    theta: f64,
    phi: f64,
}

impl Direction {
    /// Builds a direction, normalizing `phi` into `[0, 2pi)`.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() {
            return Err(MalusError::NonFiniteAngle { theta, phi });
        }
        if !(0.0..=PI).contains(&theta) {
            return Err(MalusError::PolarAngleOutOfRange(theta));
        }
        Ok(Self {
            theta,
            phi: normalize_azimuth(phi),
        })
    }

    pub fn north() -> Self {
        Self { theta: 0.0, phi: 0.0 }
    }

    pub fn south() -> Self {
        Self { theta: PI, phi: 0.0 }
    }

    /// Direction of a nonzero Cartesian vector.
    pub fn from_cartesian(v: [f64; 3]) -> Self {
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let theta = (v[2] / r).clamp(-1.0, 1.0).acos();
        let phi = v[1].atan2(v[0]);
        Self {
            theta,
            phi: normalize_azimuth(phi),
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn cos_theta(&self) -> f64 {
        self.theta.cos()
    }

    /// `sin theta`, exactly zero at both poles so that nothing downstream
    /// depends on the stored azimuth there.
    pub fn sin_theta(&self) -> f64 {
        if self.is_pole() {
            0.0
        } else {
            self.theta.sin()
        }
    }

    pub fn is_pole(&self) -> bool {
        self.theta == 0.0 || self.theta == PI
    }

    pub fn unit_vector(&self) -> [f64; 3] {
        let st = self.sin_theta();
        [st * self.phi.cos(), st * self.phi.sin(), self.cos_theta()]
    }

    pub fn dot(&self, other: &Direction) -> f64 {
        let (a, b) = (self.unit_vector(), other.unit_vector());
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
    }

    /// `cos alpha` for the relative angle, clamped into `[-1, 1]`.
    pub fn cos_angle(&self, other: &Direction) -> f64 {
        (self.cos_theta() * other.cos_theta() + self.sin_theta() * other.sin_theta() * (self.phi - other.phi).cos())
            .clamp(-1.0, 1.0)
    }
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.theta, self.phi)
    }
}

fn normalize_azimuth(phi: f64) -> f64 {
    let r = phi.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2pi for tiny negative inputs.
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Relative angle `alpha` in `[0, pi]` between two directions.
pub fn relative_angle(a: &Direction, b: &Direction) -> f64 {
    a.cos_angle(b).acos()
}

/// The diametrically opposite direction `(pi - theta, phi + pi)`.
pub fn antipode(a: &Direction) -> Direction {
    Direction {
        theta: PI - a.theta,
        phi: normalize_azimuth(a.phi + PI),
    }
}

/// One quadrature node: a direction and its weight in steradians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub direction: Direction,
    pub weight: f64,
}

/// Product Gauss-Legendre (in `cos theta`) by uniform-azimuth rule on the sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    nodes: Vec<Node>,
    n_theta: usize,
    n_phi: usize,
}

impl QuadratureGrid {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_theta, self.n_phi)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// The grid with both node counts doubled, used for refinement error estimates.
    pub fn refined(&self) -> QuadratureGrid {
        build_grid(2 * self.n_theta, 2 * self.n_phi).expect("doubling a valid grid")
    }

    pub fn total_weight(&self) -> f64 {
        self.nodes.iter().map(|n| n.weight).sum()
    }

    /// Largest polynomial degree in `cos theta` integrated exactly.
    pub fn polar_degree(&self) -> usize {
        2 * self.n_theta - 1
    }
}

/// Builds the `n_theta x n_phi` product grid. Nodes are ordered polar-major
/// with `cos theta` ascending, then `phi = 2pi j / n_phi`.
pub fn build_grid(n_theta: usize, n_phi: usize) -> Result<QuadratureGrid> {
    if n_theta == 0 || n_phi == 0 {
        return Err(MalusError::EmptyGrid { n_theta, n_phi });
    }
    let (us, ws) = gauss_legendre(n_theta);
    let dphi = TAU / n_phi as f64;
    let mut nodes = Vec::with_capacity(n_theta * n_phi);
    for (&u, &w) in us.iter().zip(&ws) {
        let theta = u.clamp(-1.0, 1.0).acos();
        for j in 0..n_phi {
            nodes.push(Node {
                direction: Direction {
                    theta,
                    phi: j as f64 * dphi,
                },
                weight: w * dphi,
            });
        }
    }
    Ok(QuadratureGrid { nodes, n_theta, n_phi })
}

/// Gauss-Legendre nodes (ascending) and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        xs[n - 1 - i] = x;
        xs[i] = -x;
        ws[n - 1 - i] = w;
        ws[i] = w;
    }
    if n % 2 == 1 {
        xs[n / 2] = 0.0;
    }
    (xs, ws)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Weighted node sum of a real integrand, in node order.
pub fn integrate<F>(grid: &QuadratureGrid, mut f: F) -> Result<f64>
where
    F: FnMut(&Direction) -> f64,
{
    let mut acc = 0.0;
    for (i, node) in grid.nodes.iter().enumerate() {
        let v = f(&node.direction);
        if !v.is_finite() {
            return Err(non_finite(i, &node.direction));
        }
        acc += node.weight * v;
    }
    Ok(acc)
}

/// Weighted node sum of a complex integrand, in node order.
pub fn integrate_complex<F>(grid: &QuadratureGrid, mut f: F) -> Result<Complex64>
where
    F: FnMut(&Direction) -> Complex64,
{
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, node) in grid.nodes.iter().enumerate() {
        let v = f(&node.direction);
        if !v.is_finite() {
            return Err(non_finite(i, &node.direction));
        }
        acc += v * node.weight;
    }
    Ok(acc)
}

/// Double integral over two sphere copies on the same grid.
pub fn integrate_pair<F>(grid: &QuadratureGrid, mut f: F) -> Result<f64>
where
    F: FnMut(&Direction, &Direction) -> f64,
{
    let mut acc = 0.0;
    for (i, a) in grid.nodes.iter().enumerate() {
        let mut inner = 0.0;
        for b in &grid.nodes {
            let v = f(&a.direction, &b.direction);
            if !v.is_finite() {
                return Err(non_finite(i, &a.direction));
            }
            inner += b.weight * v;
        }
        acc += a.weight * inner;
    }
    Ok(acc)
}

fn non_finite(node: usize, d: &Direction) -> MalusError {
    MalusError::NonFiniteIntegrand {
        node,
        theta: d.theta,
        phi: d.phi,
    }
}
