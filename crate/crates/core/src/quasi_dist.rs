//! Diagonal quasi-probability distributions over one or two Bloch spheres.
//!
//! A distribution is a closed-form smooth density plus, for two parties, an
//! optional antipodal pairing term `w * delta(Omega_a + Omega_b)`. The delta is
//! never put on a grid: integrals against it reduce analytically to
//! `w * int dOmega f(Omega, antipode(Omega))`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{MalusError, Result};
use crate::linalg;
use crate::sphere::{self, antipode, Direction, QuadratureGrid};
use crate::spin_states::{coherent_projector, zero_matrix, DensityMatrix, SpinQuantumNumber};

/// Stable identifiers of the built-in distributions.
pub const BUILTIN_NAMES: [&str; 6] = ["uniform", "p-plus", "p-minus", "pro1", "pro1-flipped", "pro2"];

type SingleFn = dyn Fn(&Direction) -> f64 + Send + Sync;
type PairFn = dyn Fn(&Direction, &Direction) -> f64 + Send + Sync;

#[derive(Clone)]
enum Smooth {
    Single(Arc<SingleFn>),
    Pair(Arc<PairFn>),
}

#[derive(Clone)]
pub struct QuasiDistribution {
    name: String,
    smooth: Smooth,
    delta_weight: f64,
}

impl fmt::Debug for QuasiDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QuasiDistribution")
            .field("name", &self.name)
            .field("parties", &self.parties())
            .field("delta_weight", &self.delta_weight)
            .finish()
    }
}

const FOUR_PI: f64 = 4.0 * PI;

impl QuasiDistribution {
    pub fn single<F>(name: impl Into<String>, density: F) -> Self
    where
        F: Fn(&Direction) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            smooth: Smooth::Single(Arc::new(density)),
            delta_weight: 0.0,
        }
    }

    pub fn pair<F>(name: impl Into<String>, density: F, delta_weight: f64) -> Self
    where
        F: Fn(&Direction, &Direction) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            smooth: Smooth::Pair(Arc::new(density)),
            delta_weight,
        }
    }

    /// `1 / 4pi`: the maximally mixed spin-1/2 state.
    pub fn uniform() -> Self {
        Self::single("uniform", |_| 1.0 / FOUR_PI)
    }

    /// `(1 - 3 cos theta) / 4pi`, representing `|+><+|`.
    pub fn p_plus() -> Self {
        Self::single("p-plus", |d| (1.0 - 3.0 * d.cos_theta()) / FOUR_PI)
    }

    /// `(1 + 3 cos theta) / 4pi`, representing `|-><-|`.
    pub fn p_minus() -> Self {
        Self::single("p-minus", |d| (1.0 + 3.0 * d.cos_theta()) / FOUR_PI)
    }

    /// `(1 + 9 n_a . n_b) / (4pi)^2`, the three-term singlet candidate with the sign as printed.
    pub fn pro1() -> Self {
        Self::pair("pro1", |a, b| (1.0 + 9.0 * a.cos_angle(b)) / (FOUR_PI * FOUR_PI), 0.0)
    }

    /// `(1 - 9 n_a . n_b) / (4pi)^2`.
    pub fn pro1_flipped() -> Self {
        Self::pair(
            "pro1-flipped",
            |a, b| (1.0 - 9.0 * a.cos_angle(b)) / (FOUR_PI * FOUR_PI),
            0.0,
        )
    }

    /// `(3/4pi) delta(Omega_a + Omega_b) - 2/(4pi)^2`.
    pub fn pro2() -> Self {
        Self::pair("pro2", |_, _| -2.0 / (FOUR_PI * FOUR_PI), 3.0 / FOUR_PI)
    }

    /// Normalized von Mises-Fisher density concentrated around `center`; a
    /// nonnegative classical test distribution.
    pub fn von_mises_fisher(center: Direction, kappa: f64) -> Self {
        let norm = kappa / (2.0 * PI * (-(-2.0 * kappa).exp_m1()));
        Self::single(format!("vmf(kappa={kappa})"), move |d| {
            norm * (kappa * (d.cos_angle(&center) - 1.0)).exp()
        })
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "uniform" => Ok(Self::uniform()),
            "p-plus" => Ok(Self::p_plus()),
            "p-minus" => Ok(Self::p_minus()),
            "pro1" => Ok(Self::pro1()),
            "pro1-flipped" => Ok(Self::pro1_flipped()),
            "pro2" => Ok(Self::pro2()),
            other => Err(MalusError::UnknownDistribution(other.to_string())),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn parties(&self) -> usize {
        match self.smooth {
            Smooth::Single(_) => 1,
            Smooth::Pair(_) => 2,
        }
    }

    pub fn delta_weight(&self) -> f64 {
        self.delta_weight
    }

    fn arity_error(&self, got: usize) -> MalusError {
        MalusError::ArityMismatch {
            name: self.name.clone(),
            expected: self.parties(),
            got,
        }
    }

    /// Pointwise value of the smooth part; a delta term contributes nothing
    /// pointwise.
    pub fn evaluate(&self, omegas: &[Direction]) -> Result<f64> {
        match (&self.smooth, omegas) {
            (Smooth::Single(f), [a]) => Ok(f(a)),
            (Smooth::Pair(f), [a, b]) => Ok(f(a, b)),
            _ => Err(self.arity_error(omegas.len())),
        }
    }

    /// `int dOmega P(Omega) f(Omega)` for a single-party distribution.
    pub fn integrate_single<F>(&self, grid: &QuadratureGrid, f: F) -> Result<f64>
    where
        F: Fn(&Direction) -> f64,
    {
        match &self.smooth {
            Smooth::Single(p) => sphere::integrate(grid, |d| p(d) * f(d)),
            Smooth::Pair(_) => Err(self.arity_error(1)),
        }
    }

    /// `int int P(Omega_a; Omega_b) f(Omega_a, Omega_b)` with the delta term
    /// reduced to a single-sphere integral.
    pub fn integrate_pair<F>(&self, grid: &QuadratureGrid, f: F) -> Result<f64>
    where
        F: Fn(&Direction, &Direction) -> f64,
    {
        let p = match &self.smooth {
            Smooth::Pair(p) => p,
            Smooth::Single(_) => return Err(self.arity_error(2)),
        };
        let smooth = sphere::integrate_pair(grid, |a, b| p(a, b) * f(a, b))?;
        let delta = if self.delta_weight != 0.0 {
            self.delta_weight * sphere::integrate(grid, |d| f(d, &antipode(d)))?
        } else {
            0.0
        };
        Ok(smooth + delta)
    }

    pub fn normalization(&self, grid: &QuadratureGrid) -> Result<f64> {
        match self.parties() {
            1 => self.integrate_single(grid, |_| 1.0),
            _ => self.integrate_pair(grid, |_, _| 1.0),
        }
    }

    /// `rho = int dOmega P(Omega) |Omega><Omega|` (tensor products per party for
    /// two parties). `spins` gives one spin per party.
    pub fn reconstruct_density(&self, spins: &[SpinQuantumNumber], grid: &QuadratureGrid) -> Result<DensityMatrix> {
        if spins.len() != self.parties() {
            return Err(self.arity_error(spins.len()));
        }
        let rho = match &self.smooth {
            Smooth::Single(p) => {
                let s = spins[0];
                let mut acc = zero_matrix(s.dim());
                for node in grid.nodes() {
                    let w = node.weight * p(&node.direction);
                    check_finite(node, w)?;
                    acc += coherent_projector(s, &node.direction) * Complex64::new(w, 0.0);
                }
                DensityMatrix::from_entries(vec![s.dim()], acc)?
            }
            Smooth::Pair(p) => {
                let (sa, sb) = (spins[0], spins[1]);
                let proj_a: Vec<_> = grid
                    .nodes()
                    .iter()
                    .map(|n| coherent_projector(sa, &n.direction))
                    .collect();
                let proj_b: Vec<_> = grid
                    .nodes()
                    .iter()
                    .map(|n| coherent_projector(sb, &n.direction))
                    .collect();
                let mut acc = zero_matrix(sa.dim() * sb.dim());
                for (i, a) in grid.nodes().iter().enumerate() {
                    let mut inner = zero_matrix(sb.dim());
                    for (j, b) in grid.nodes().iter().enumerate() {
                        let w = b.weight * p(&a.direction, &b.direction);
                        check_finite(b, w)?;
                        inner += &proj_b[j] * Complex64::new(w, 0.0);
                    }
                    acc += linalg::kron(&proj_a[i], &inner) * Complex64::new(a.weight, 0.0);
                }
                if self.delta_weight != 0.0 {
                    for (i, a) in grid.nodes().iter().enumerate() {
                        let opposite = coherent_projector(sb, &antipode(&a.direction));
                        acc += linalg::kron(&proj_a[i], &opposite) * Complex64::new(self.delta_weight * a.weight, 0.0);
                    }
                }
                DensityMatrix::from_entries(vec![sa.dim(), sb.dim()], acc)?
            }
        };
        let (hermiticity, trace) = (rho.hermiticity_defect(), rho.trace_defect());
        if hermiticity > 1e-8 || trace > 1e-8 {
            return Err(MalusError::ReconstructionDefect { hermiticity, trace });
        }
        Ok(rho)
    }

    /// Minimum of the smooth part over the grid nodes plus both poles (all
    /// probe pairs for two parties). The delta weight is reported separately.
    pub fn negativity_scan(&self, grid: &QuadratureGrid) -> NegativityScan {
        let mut probes = vec![Direction::north(), Direction::south()];
        probes.extend(grid.nodes().iter().map(|n| n.direction));
        let (min_value, argmin) = match &self.smooth {
            Smooth::Single(p) => {
                let mut best = (f64::INFINITY, vec![probes[0]]);
                for d in &probes {
                    let v = p(d);
                    if v < best.0 {
                        best = (v, vec![*d]);
                    }
                }
                best
            }
            Smooth::Pair(p) => {
                let mut best = (f64::INFINITY, vec![probes[0], probes[0]]);
                for a in &probes {
                    for b in &probes {
                        let v = p(a, b);
                        if v < best.0 {
                            best = (v, vec![*a, *b]);
                        }
                    }
                }
                best
            }
        };
        NegativityScan {
            min_value,
            argmin,
            delta_weight: self.delta_weight,
        }
    }
}

fn check_finite(node: &sphere::Node, w: f64) -> Result<()> {
    if w.is_finite() {
        Ok(())
    } else {
        Err(MalusError::NonFiniteIntegrand {
            node: 0,
            theta: node.direction.theta(),
            phi: node.direction.phi(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NegativityScan {
    pub min_value: f64,
    pub argmin: Vec<Direction>,
    pub delta_weight: f64,
}

impl NegativityScan {
    pub fn is_negative(&self) -> bool {
        self.min_value < 0.0 || self.delta_weight < 0.0
    }
}
