//! Large-spin behaviour: concentration of the spin-s transmission function and
//! classical dynamics on the sphere.
//!
//! The classical bracket is
//!
//! ```text
//! {A, B} = (1 / (s sin theta)) (dA/dphi dB/dtheta - dA/dtheta dB/dphi)
//! ```
//!
//! with `hbar = 1`. In canonical coordinates `(q, p) = (phi, cos theta)` it reads
//! `{A, B} = (1/s)(dA/dp dB/dq - dA/dq dB/dp)`, so the equations of motion are
//! `q' = -(1/s) dH/dp` and `p' = (1/s) dH/dq`. Trajectories are integrated there
//! with fixed-step RK4, which avoids the `1 / sin theta` factor.

use std::sync::Arc;

use crate::error::{MalusError, Result};
use crate::linalg::log_log_slope;
use crate::sphere::Direction;
use crate::spin_states::SpinQuantumNumber;

type FieldFn = dyn Fn(f64, f64) -> f64 + Send + Sync;
type GradFn = dyn Fn(f64, f64) -> (f64, f64) + Send + Sync;

/// Central-difference step used when no analytic gradient is supplied.
pub const FD_STEP: f64 = 1e-6;

/// A scalar function of `(theta, phi)` with an optional analytic gradient
/// `(d/dtheta, d/dphi)`.
#[derive(Clone)]
pub struct PhaseSpaceFunction {
    name: String,
    value: Arc<FieldFn>,
    grad: Option<Arc<GradFn>>,
}

pub type ClassicalHamiltonian = PhaseSpaceFunction;

impl std::fmt::Debug for PhaseSpaceFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PhaseSpaceFunction")
            .field("name", &self.name)
            .field("analytic_gradient", &self.grad.is_some())
            .finish()
    }
}

impl PhaseSpaceFunction {
    pub fn new<F>(name: impl Into<String>, value: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            value: Arc::new(value),
            grad: None,
        }
    }

    pub fn with_gradient<F, G>(name: impl Into<String>, value: F, grad: G) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64, f64) -> (f64, f64) + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            value: Arc::new(value),
            grad: Some(Arc::new(grad)),
        }
    }

    pub fn zero() -> Self {
        Self::with_gradient("zero", |_, _| 0.0, |_, _| (0.0, 0.0))
    }

    /// `omega0 s cos theta`: uniform precession about z at rate `-omega0`.
    pub fn precession(omega0: f64, s: SpinQuantumNumber) -> Self {
        let k = omega0 * s.s();
        Self::with_gradient("precession", move |t, _| k * t.cos(), move |t, _| (-k * t.sin(), 0.0))
    }

    /// `omega0 s sin theta cos phi`: a transverse field along x.
    pub fn transverse_field(omega0: f64, s: SpinQuantumNumber) -> Self {
        let k = omega0 * s.s();
        Self::with_gradient(
            "transverse",
            move |t, p| k * t.sin() * p.cos(),
            move |t, p| (k * t.cos() * p.cos(), -k * t.sin() * p.sin()),
        )
    }

    pub fn by_name(name: &str, omega0: f64, s: SpinQuantumNumber) -> Option<Self> {
        match name {
            "zero" => Some(Self::zero()),
            "precession" => Some(Self::precession(omega0, s)),
            "transverse" => Some(Self::transverse_field(omega0, s)),
            _ => None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn has_analytic_gradient(&self) -> bool {
        self.grad.is_some()
    }

    pub fn value(&self, theta: f64, phi: f64) -> f64 {
        (self.value)(theta, phi)
    }

    /// `(d/dtheta, d/dphi)`, by central differences when no gradient was given.
    pub fn gradient(&self, theta: f64, phi: f64) -> (f64, f64) {
        match &self.grad {
            Some(g) => g(theta, phi),
            None => {
                let h = FD_STEP;
                let f = &self.value;
                (
                    (f(theta + h, phi) - f(theta - h, phi)) / (2.0 * h),
                    (f(theta, phi + h) - f(theta, phi - h)) / (2.0 * h),
                )
            }
        }
    }
}

fn check_pole(theta: f64) -> Result<()> {
    if theta < 1e-8 || std::f64::consts::PI - theta < 1e-8 {
        return Err(MalusError::PoleProximity(theta));
    }
    Ok(())
}

/// The curved bracket `{A, B}` at `at`.
pub fn poisson_bracket(
    a: &PhaseSpaceFunction,
    b: &PhaseSpaceFunction,
    at: &Direction,
    s: SpinQuantumNumber,
) -> Result<f64> {
    let theta = at.theta();
    check_pole(theta)?;
    let (a_t, a_p) = a.gradient(theta, at.phi());
    let (b_t, b_p) = b.gradient(theta, at.phi());
    Ok((a_p * b_t - a_t * b_p) / (s.s() * theta.sin()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub theta: f64,
    /// Continuous azimuth: not reduced modulo `2pi`.
    pub phi: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub s: SpinQuantumNumber,
    pub step: f64,
    /// True when the Hamiltonian gradient came from finite differences.
    pub finite_difference: bool,
}

impl Trajectory {
    /// `max_t |H(t) - H(0)| / max(1, |H(0)|)`.
    pub fn energy_drift(&self) -> f64 {
        let e0 = self.samples[0].energy;
        let scale = e0.abs().max(1.0);
        self.samples
            .iter()
            .map(|x| (x.energy - e0).abs() / scale)
            .fold(0.0, f64::max)
    }

    pub fn last(&self) -> &TrajectorySample {
        self.samples.last().expect("trajectory has at least one sample")
    }
}

fn step_schedule(t_end: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(MalusError::InvalidStep(step));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(MalusError::InvalidStep(t_end));
    }
    let full = (t_end / step * (1.0 - 1e-12)).floor() as usize;
    let mut steps = vec![step; full];
    let rest = t_end - full as f64 * step;
    if rest > 1e-12 * step {
        steps.push(rest);
    }
    Ok(steps)
}

fn rk4<F>(y: [f64; 2], h: f64, f: F) -> [f64; 2]
where
    F: Fn([f64; 2]) -> [f64; 2],
{
    let add = |a: [f64; 2], b: [f64; 2], c: f64| [a[0] + c * b[0], a[1] + c * b[1]];
    let k1 = f(y);
    let k2 = f(add(y, k1, h / 2.0));
    let k3 = f(add(y, k2, h / 2.0));
    let k4 = f(add(y, k3, h));
    [
        y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

/// Integrates the canonical equations in `(q, p) = (phi, cos theta)`.
pub fn integrate_motion(
    h: &ClassicalHamiltonian,
    initial: &Direction,
    s: SpinQuantumNumber,
    t_end: f64,
    step: f64,
) -> Result<Trajectory> {
    let schedule = step_schedule(t_end, step)?;
    let inv_s = 1.0 / s.s();
    // y = [q, p]
    let rhs = |y: [f64; 2]| {
        let p = y[1].clamp(-1.0, 1.0);
        let theta = p.acos();
        let (h_t, h_q) = h.gradient(theta, y[0]);
        // dH/dp = -dH/dtheta / sin theta
        let h_p = -h_t / (1.0 - p * p).sqrt();
        [-inv_s * h_p, inv_s * h_q]
    };
    let sample = |t: f64, y: [f64; 2]| -> Result<TrajectorySample> {
        if !(y[0].is_finite() && y[1].is_finite()) || y[1].abs() > 1.0 + 1e-9 {
            return Err(MalusError::LeftSphere { t, p_abs: y[1].abs() });
        }
        let theta = y[1].clamp(-1.0, 1.0).acos();
        Ok(TrajectorySample {
            t,
            theta,
            phi: y[0],
            energy: h.value(theta, y[0]),
        })
    };
    let mut y = [initial.phi(), initial.cos_theta()];
    let mut t = 0.0;
    let mut samples = Vec::with_capacity(schedule.len() + 1);
    samples.push(sample(t, y)?);
    for (i, dt) in schedule.iter().enumerate() {
        y = rk4(y, *dt, rhs);
        t = if i + 1 == schedule.len() {
            t_end
        } else {
            (i + 1) as f64 * step
        };
        samples.push(sample(t, y)?);
    }
    Ok(Trajectory {
        samples,
        s,
        step,
        finite_difference: !h.has_analytic_gradient(),
    })
}

/// Integrates `theta' = {theta, H}`, `phi' = {phi, H}` directly with the curved
/// bracket. Independent route for checking [`integrate_motion`] away from poles.
pub fn integrate_motion_spherical(
    h: &ClassicalHamiltonian,
    initial: &Direction,
    s: SpinQuantumNumber,
    t_end: f64,
    step: f64,
) -> Result<Trajectory> {
    let schedule = step_schedule(t_end, step)?;
    let inv_s = 1.0 / s.s();
    // y = [theta, phi]
    let rhs = |y: [f64; 2]| {
        let (h_t, h_p) = h.gradient(y[0], y[1]);
        let st = y[0].sin();
        [-inv_s * h_p / st, inv_s * h_t / st]
    };
    let mut y = [initial.theta(), initial.phi()];
    check_pole(y[0])?;
    let mut t = 0.0;
    let mut samples = vec![TrajectorySample {
        t,
        theta: y[0],
        phi: y[1],
        energy: h.value(y[0], y[1]),
    }];
    for (i, dt) in schedule.iter().enumerate() {
        y = rk4(y, *dt, rhs);
        check_pole(y[0])?;
        t = if i + 1 == schedule.len() {
            t_end
        } else {
            (i + 1) as f64 * step
        };
        samples.push(TrajectorySample {
            t,
            theta: y[0],
            phi: y[1],
            energy: h.value(y[0], y[1]),
        });
    }
    Ok(Trajectory {
        samples,
        s,
        step,
        finite_difference: !h.has_analytic_gradient(),
    })
}

/// Relative angle at which `cos^{4s}(alpha/2)` drops to `level`.
pub fn transmission_width(s: SpinQuantumNumber, level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(MalusError::LevelOutOfRange(level));
    }
    Ok(2.0 * level.powf(1.0 / (2.0 * s.twice_s() as f64)).acos())
}

/// `cos^{4s}(alpha/2)` at each angle.
pub fn concentration_profile(s: SpinQuantumNumber, alphas: &[f64]) -> Vec<f64> {
    let n = 2 * s.twice_s() as i32;
    alphas.iter().map(|a| (a / 2.0).cos().powi(n)).collect()
}

/// Large-spin Gaussian form `exp(-s alpha^2 / 2)` of the transmission function.
pub fn gaussian_profile(s: SpinQuantumNumber, alpha: f64) -> f64 {
    (-s.s() * alpha * alpha / 2.0).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WidthRow {
    pub s: SpinQuantumNumber,
    pub width: f64,
    pub level: f64,
}

pub fn width_sweep(spins: &[SpinQuantumNumber], level: f64) -> Result<Vec<WidthRow>> {
    spins
        .iter()
        .map(|&s| {
            Ok(WidthRow {
                s,
                width: transmission_width(s, level)?,
                level,
            })
        })
        .collect()
}

/// Least-squares slope of `ln width` against `ln s`.
pub fn width_scaling_slope(rows: &[WidthRow]) -> f64 {
    let xs: Vec<f64> = rows.iter().map(|r| r.s.s()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.width).collect();
    log_log_slope(&xs, &ys)
}
