//! The sliced coherent-state path integral for the Malus amplitude.
//!
//! A path `Omega_1 .. Omega_N` runs from the start (`Omega_1`) to the end
//! (`Omega_N`). Its amplitude is the product of short-step overlaps
//! `<Omega_i|Omega_{i-1}>`, and the sliced kernel phase is
//! `s sum_i (phi_i - phi_{i-1}) cos theta_{i-1}` with every azimuth step taken in
//! the principal branch `(-pi, pi]`. Paths that wind must therefore supply
//! enough intermediate points.
//!
//! Phases depend on the coherent-state convention of [`crate::spin_states`]
//! (`tau = (theta/2) e^{-i phi}`). Under it the exact stepwise phase is
//! `s sum dphi (1 - cos theta)` to leading order, which differs from the
//! negated kernel phase by the boundary term `s sum dphi`;
//! [`phase_convention_gap`] measures what remains.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{MalusError, Result};
use crate::sphere::{Direction, QuadratureGrid};
use crate::spin_states::{coherent_overlap, spin_half_overlap, SpinQuantumNumber};

#[derive(Debug, Clone, PartialEq)]
pub struct PathSpec {
    s: SpinQuantumNumber,
    points: Vec<Direction>,
}

impl PathSpec {
    pub fn new(s: SpinQuantumNumber, points: Vec<Direction>) -> Result<Self> {
        if points.len() < 2 {
            return Err(MalusError::PathTooShort(points.len()));
        }
        Ok(Self { s, points })
    }

    /// `steps + 1` points with `theta` and `phi` both linear in the step index.
    pub fn spiral(
        s: SpinQuantumNumber,
        theta_start: f64,
        theta_end: f64,
        phi_start: f64,
        total_dphi: f64,
        steps: usize,
    ) -> Result<Self> {
        let n = steps.max(1);
        let points = (0..=n)
            .map(|i| {
                let f = i as f64 / n as f64;
                Direction::new(theta_start + f * (theta_end - theta_start), phi_start + f * total_dphi)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(s, points)
    }

    pub fn latitude(s: SpinQuantumNumber, theta: f64, phi_start: f64, total_dphi: f64, steps: usize) -> Result<Self> {
        Self::spiral(s, theta, theta, phi_start, total_dphi, steps)
    }

    /// Full positive circuit of the latitude circle at `theta`; the last point
    /// coincides with the first.
    pub fn closed_loop(s: SpinQuantumNumber, theta: f64, steps: usize) -> Result<Self> {
        Self::latitude(s, theta, 0.0, TAU, steps)
    }

    pub fn spin(&self) -> SpinQuantumNumber {
        self.s
    }

    pub fn points(&self) -> &[Direction] {
        &self.points
    }

    pub fn steps(&self) -> usize {
        self.points.len() - 1
    }

    fn check_steps(&self) -> Result<()> {
        for (i, w) in self.points.windows(2).enumerate() {
            if spin_half_overlap(&w[1], &w[0]).norm() < 1e-12 {
                return Err(MalusError::AntipodalStep { index: i });
            }
        }
        Ok(())
    }

    fn azimuth_steps(&self) -> impl Iterator<Item = f64> + '_ {
        self.points
            .windows(2)
            .map(|w| principal_branch(w[1].phi() - w[0].phi()))
    }
}

/// Maps an angle difference into `(-pi, pi]`.
pub fn principal_branch(x: f64) -> f64 {
    let r = (x + PI).rem_euclid(TAU) - PI;
    if r <= -PI {
        r + TAU
    } else {
        r
    }
}

/// `s sum_i (phi_i - phi_{i-1}) cos theta_{i-1}`.
pub fn discrete_action(path: &PathSpec) -> Result<f64> {
    path.check_steps()?;
    let sum: f64 = path
        .azimuth_steps()
        .zip(&path.points)
        .map(|(dphi, prev)| dphi * prev.cos_theta())
        .sum();
    Ok(path.s.s() * sum)
}

/// Accumulated argument of `prod_i <Omega_i|Omega_{i-1}>`, summed step by step.
pub fn exact_phase(path: &PathSpec) -> Result<f64> {
    path.check_steps()?;
    let twice_s = path.s.twice_s() as f64;
    Ok(path
        .points
        .windows(2)
        .map(|w| twice_s * spin_half_overlap(&w[1], &w[0]).arg())
        .sum())
}

/// `prod_i <Omega_i|Omega_{i-1}>`.
pub fn path_amplitude(path: &PathSpec) -> Result<Complex64> {
    path.check_steps()?;
    Ok(path
        .points
        .windows(2)
        .map(|w| coherent_overlap(path.s, &w[1], &w[0]))
        .product())
}

/// `exact_phase + discrete_action - s sum dphi`. The boundary term uses the
/// summed principal-branch steps, which equals `s (phi_N - phi_1)` on paths
/// that do not wind.
pub fn phase_convention_gap(path: &PathSpec) -> Result<f64> {
    let exact = exact_phase(path)?;
    let action = discrete_action(path)?;
    let boundary: f64 = path.s.s() * path.azimuth_steps().sum::<f64>();
    Ok(exact + action - boundary)
}

/// `(q, p) = (phi, cos theta)` per point.
pub fn canonical_coordinates(path: &PathSpec) -> Vec<(f64, f64)> {
    path.points.iter().map(|d| (d.phi(), d.cos_theta())).collect()
}

/// Inverse of [`canonical_coordinates`] for one point.
pub fn from_canonical(q: f64, p: f64) -> Result<Direction> {
    Direction::new(p.clamp(-1.0, 1.0).acos(), q)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompositionReport {
    pub s: SpinQuantumNumber,
    pub start: Direction,
    pub end: Direction,
    pub exact_amplitude: Complex64,
    pub composed_amplitude: Complex64,
    pub insertions: usize,
    pub grid: (usize, usize),
    pub abs_error: f64,
}

/// `<end|start>` rebuilt from `insertions` resolutions of the identity, each
/// `(2s+1)/4pi sum_j w_j |Omega_j><Omega_j|` on `grid`.
pub fn compose_amplitude(
    s: SpinQuantumNumber,
    start: &Direction,
    end: &Direction,
    insertions: usize,
    grid: &QuadratureGrid,
) -> CompositionReport {
    let exact = coherent_overlap(s, end, start);
    let nodes = grid.nodes();
    let composed = if insertions == 0 {
        exact
    } else {
        let scale = s.dim() as f64 / (4.0 * PI);
        let measure: Vec<f64> = nodes.iter().map(|n| scale * n.weight).collect();
        // Weight carried by each node after the latest insertion.
        let mut carried: Vec<Complex64> = nodes
            .iter()
            .zip(&measure)
            .map(|(n, &m)| coherent_overlap(s, &n.direction, start) * m)
            .collect();
        if insertions > 1 {
            let kernel: Vec<Vec<Complex64>> = nodes
                .iter()
                .map(|a| {
                    nodes
                        .iter()
                        .map(|b| coherent_overlap(s, &a.direction, &b.direction))
                        .collect()
                })
                .collect();
            for _ in 1..insertions {
                carried = kernel
                    .iter()
                    .zip(&measure)
                    .map(|(row, &m)| row.iter().zip(&carried).map(|(k, v)| k * v).sum::<Complex64>() * m)
                    .collect();
            }
        }
        nodes
            .iter()
            .zip(&carried)
            .map(|(n, v)| coherent_overlap(s, end, &n.direction) * v)
            .sum()
    };
    CompositionReport {
        s,
        start: *start,
        end: *end,
        exact_amplitude: exact,
        composed_amplitude: composed,
        insertions,
        grid: grid.shape(),
        abs_error: (exact - composed).norm(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub steps: usize,
    pub action: f64,
    pub exact_phase: f64,
    pub gap: f64,
    pub amplitude: Complex64,
}

/// Evaluates a family of paths at increasing refinement.
pub fn refinement_sweep<F>(build: F, steps: &[usize]) -> Result<Vec<SweepRow>>
where
    F: Fn(usize) -> Result<PathSpec>,
{
    steps
        .iter()
        .map(|&n| {
            let path = build(n)?;
            Ok(SweepRow {
                steps: path.steps(),
                action: discrete_action(&path)?,
                exact_phase: exact_phase(&path)?,
                gap: phase_convention_gap(&path)?,
                amplitude: path_amplitude(&path)?,
            })
        })
        .collect()
}

/// `s` times the solid angle `2pi (1 - cos theta)` of the cap enclosed by a
/// positive latitude loop.
pub fn geometric_phase(s: SpinQuantumNumber, theta: f64) -> f64 {
    s.s() * TAU * (1.0 - theta.cos())
}
