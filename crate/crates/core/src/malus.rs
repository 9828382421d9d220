//! Malus transmission experiments.
//!
//! Detector convention: a Stern-Gerlach apparatus "along `a`" projects onto the
//! coherent state at direction `a`, so with the ascending basis a detector at
//! `theta = 0` passes `|->` and one at `theta = pi` passes `|+>`. The spin-1/2
//! transmission of a hidden direction `lambda` is `cos^2(alpha(a, lambda)/2)`.

use std::sync::Arc;

use crate::error::{MalusError, Result};
use crate::linalg;
use crate::quasi_dist::QuasiDistribution;
use crate::sphere::{antipode, Direction, QuadratureGrid};
use crate::spin_states::{coherent_projector, malus_probability, singlet_state, SpinQuantumNumber};

pub const DETECTOR_CONVENTION: &str =
    "detector along Omega projects onto the coherent state |Omega>; theta=0 passes |->, theta=pi passes |+>";

/// A computed value and its grid-refinement error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentResult {
    pub value: f64,
    pub grid_used: (usize, usize),
    /// `|value(grid) - value(grid with both counts doubled)|`.
    pub estimated_error: f64,
}

fn with_refinement<F>(grid: &QuadratureGrid, f: F) -> Result<ExperimentResult>
where
    F: Fn(&QuadratureGrid) -> Result<f64>,
{
    let value = f(grid)?;
    let refined = f(&grid.refined())?;
    Ok(ExperimentResult {
        value,
        grid_used: grid.shape(),
        estimated_error: (value - refined).abs(),
    })
}

/// Spin-1/2 transmission `cos^2(alpha/2)` through a detector at `setting`.
pub fn spin_half_transmission(setting: &Direction, hidden: &Direction) -> f64 {
    0.5 * (1.0 + setting.cos_angle(hidden))
}

/// Classical `int dOmega P_cl(Omega) cos^2 alpha` for a nonnegative density.
pub fn classical_malus(
    p_cl: &QuasiDistribution,
    a_prime: &Direction,
    grid: &QuadratureGrid,
) -> Result<ExperimentResult> {
    for node in grid.nodes() {
        let v = p_cl.evaluate(&[node.direction])?;
        if v < 0.0 {
            return Err(MalusError::NegativeClassicalDensity {
                name: p_cl.name().to_string(),
                value: v,
                theta: node.direction.theta(),
                phi: node.direction.phi(),
            });
        }
    }
    with_refinement(grid, |g| p_cl.integrate_single(g, |d| a_prime.cos_angle(d).powi(2)))
}

/// `int dOmega P(Omega) cos^{4s}(alpha/2)`; `P` may be negative.
pub fn quantum_malus_average(
    p: &QuasiDistribution,
    s: SpinQuantumNumber,
    a_prime: &Direction,
    grid: &QuadratureGrid,
) -> Result<ExperimentResult> {
    with_refinement(grid, |g| p.integrate_single(g, |d| malus_probability(s, d, a_prime)))
}

/// `tr(rho Pi_a')` with `rho` reconstructed from `P`: the matrix side of the
/// quantum Malus average.
pub fn quantum_malus_trace(
    p: &QuasiDistribution,
    s: SpinQuantumNumber,
    a_prime: &Direction,
    grid: &QuadratureGrid,
) -> Result<f64> {
    let rho = p.reconstruct_density(&[s], grid)?;
    Ok(rho.expectation(&coherent_projector(s, a_prime)).re)
}

/// Joint (+,+) detection probability with spin-1/2 transmissions on both sides.
pub fn joint_probability(
    p: &QuasiDistribution,
    a: &Direction,
    b: &Direction,
    grid: &QuadratureGrid,
) -> Result<ExperimentResult> {
    with_refinement(grid, |g| {
        p.integrate_pair(g, |la, lb| {
            spin_half_transmission(a, la) * spin_half_transmission(b, lb)
        })
    })
}

/// `tr(rho (Pi_a x Pi_b))` with `rho` reconstructed from a two-party `P`.
pub fn joint_probability_trace(
    p: &QuasiDistribution,
    a: &Direction,
    b: &Direction,
    grid: &QuadratureGrid,
) -> Result<f64> {
    let half = SpinQuantumNumber::half();
    let rho = p.reconstruct_density(&[half, half], grid)?;
    let op = linalg::kron(&coherent_projector(half, a), &coherent_projector(half, b));
    Ok(rho.expectation(&op).re)
}

/// `<psi|(Pi_a x Pi_b)|psi>` for the singlet, by direct matrix arithmetic.
pub fn quantum_joint_oracle(a: &Direction, b: &Direction) -> f64 {
    let half = SpinQuantumNumber::half();
    let op = linalg::kron(&coherent_projector(half, a), &coherent_projector(half, b));
    singlet_state().expectation(&op).re
}

/// The closed form `(1 - a.b)/2` printed alongside the joint-detection integral.
pub fn printed_singlet_claim(a: &Direction, b: &Direction) -> f64 {
    0.5 * (1.0 - a.dot(b))
}

pub type Transmission = Arc<dyn Fn(&Direction, &Direction) -> f64 + Send + Sync>;

/// A local model: a distribution of hidden directions and one transmission
/// function `t(setting, hidden)` per side.
#[derive(Clone)]
pub struct HiddenVariableModel {
    pub distribution: QuasiDistribution,
    pub transmission_a: Transmission,
    pub transmission_b: Transmission,
}

impl HiddenVariableModel {
    pub fn new(distribution: QuasiDistribution, transmission_a: Transmission, transmission_b: Transmission) -> Self {
        Self {
            distribution,
            transmission_a,
            transmission_b,
        }
    }

    /// Both sides transmit with `cos^2(alpha/2)`.
    pub fn spin_half(distribution: QuasiDistribution) -> Self {
        let t: Transmission = Arc::new(spin_half_transmission);
        Self::new(distribution, t.clone(), t)
    }

    /// Deterministic both sides: pass iff the hidden direction lies in the
    /// open hemisphere around the setting.
    pub fn deterministic_hemisphere(distribution: QuasiDistribution) -> Self {
        let t: Transmission = Arc::new(|a: &Direction, l: &Direction| if a.dot(l) > 0.0 { 1.0 } else { 0.0 });
        Self::new(distribution, t.clone(), t)
    }
}

pub fn hidden_variable_probability(
    model: &HiddenVariableModel,
    a: &Direction,
    b: &Direction,
    grid: &QuadratureGrid,
) -> Result<ExperimentResult> {
    let (ta, tb) = (&model.transmission_a, &model.transmission_b);
    with_refinement(grid, |g| {
        model.distribution.integrate_pair(g, |la, lb| ta(a, la) * tb(b, lb))
    })
}

/// Analyzer settings `(a, a', b, b')`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChshSettings {
    pub a: Direction,
    pub a_prime: Direction,
    pub b: Direction,
    pub b_prime: Direction,
}

impl ChshSettings {
    /// Coplanar (x-z plane) settings at polar angles 0, pi/2 and pi/4, 3pi/4.
    pub fn standard() -> Self {
        use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
        let d = |t: f64| Direction::new(t, 0.0).expect("valid polar angle");
        Self {
            a: d(0.0),
            a_prime: d(FRAC_PI_2),
            b: d(FRAC_PI_4),
            b_prime: d(3.0 * FRAC_PI_4),
        }
    }
}

/// `E(a, b) = p(a,b) + p(-a,-b) - p(a,-b) - p(-a,b)` from a (+,+) joint probability.
pub fn correlator<F>(joint: &F, a: &Direction, b: &Direction) -> f64
where
    F: Fn(&Direction, &Direction) -> f64,
{
    let (na, nb) = (antipode(a), antipode(b));
    joint(a, b) + joint(&na, &nb) - joint(a, &nb) - joint(&na, b)
}

/// `S = E(a,b) - E(a,b') + E(a',b) + E(a',b')`.
pub fn chsh_value<F>(joint: F, settings: &ChshSettings) -> f64
where
    F: Fn(&Direction, &Direction) -> f64,
{
    let ChshSettings { a, a_prime, b, b_prime } = settings;
    correlator(&joint, a, b) - correlator(&joint, a, b_prime)
        + correlator(&joint, a_prime, b)
        + correlator(&joint, a_prime, b_prime)
}
