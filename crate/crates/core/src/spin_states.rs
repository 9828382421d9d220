//! Spin-s Hilbert spaces, coherent states and the spin-s Malus law.
//!
//! Basis ordering is fixed everywhere: index `k = s + m`, so `m` runs from
//! `-s` (index 0) up to `+s` (index `2s`). For spin 1/2 that puts `|->` at
//! index 0 and `|+>` at index 1. Units have `hbar = 1`.
//!
//! The coherent state at `(theta, phi)` is `exp(tau S+ - tau* S-) |s, -s>` with
//! `tau = (theta / 2) e^{-i phi}`, so `theta = 0` is `|s, -s>` and
//! `theta = pi` is `|s, +s>` up to a phase. Its components are
//!
//! ```text
//! C_m = sqrt(binom(2s, s+m)) sin^{s+m}(theta/2) cos^{s-m}(theta/2) e^{-i (s+m) phi}
//! ```

use num_complex::Complex64;

use crate::error::{MalusError, Result};
use crate::linalg::{self, CMatrix, CVector, ONE, ZERO};
use crate::sphere::{Direction, QuadratureGrid};

/// Spin quantum number stored as the integer `2s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinQuantumNumber(u32);

impl SpinQuantumNumber {
    pub fn from_twice(twice_s: u32) -> Result<Self> {
        if twice_s == 0 {
            return Err(MalusError::InvalidSpin(twice_s));
        }
        Ok(Self(twice_s))
    }

    pub fn half() -> Self {
        Self(1)
    }

    pub fn twice_s(&self) -> u32 {
        self.0
    }

    pub fn s(&self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.0 as usize + 1
    }

    /// Magnetic quantum number `m` of basis index `k`.
    pub fn m(&self, k: usize) -> f64 {
        k as f64 - self.s()
    }
}

impl std::fmt::Display for SpinQuantumNumber {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0.is_multiple_of(2) {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// A single-party state vector over `|s, m>`, `m = -s ..= s`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinState {
    s: SpinQuantumNumber,
    amplitudes: CVector,
}

impl SpinState {
    pub fn from_amplitudes(s: SpinQuantumNumber, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != s.dim() {
            return Err(MalusError::DimensionMismatch {
                left: s.dim(),
                right: amplitudes.len(),
            });
        }
        Ok(Self {
            s,
            amplitudes: CVector::from_vec(amplitudes),
        })
    }

    /// The basis state `|s, m>` with `m = -s + index`.
    pub fn basis(s: SpinQuantumNumber, index: usize) -> Self {
        let mut amplitudes = CVector::zeros(s.dim());
        amplitudes[index] = ONE;
        Self { s, amplitudes }
    }

    pub fn spin(&self) -> SpinQuantumNumber {
        self.s
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn apply(&self, op: &CMatrix) -> Result<SpinState> {
        if op.ncols() != self.s.dim() {
            return Err(MalusError::DimensionMismatch {
                left: op.ncols(),
                right: self.s.dim(),
            });
        }
        Ok(Self {
            s: self.s,
            amplitudes: op * &self.amplitudes,
        })
    }

    /// Componentwise max distance between amplitude vectors.
    pub fn distance(&self, other: &SpinState) -> Result<f64> {
        same_spin(self, other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

fn same_spin(a: &SpinState, b: &SpinState) -> Result<()> {
    if a.s != b.s {
        return Err(MalusError::DimensionMismatch {
            left: a.s.dim(),
            right: b.s.dim(),
        });
    }
    Ok(())
}

/// A multi-party pure state; party order is the order of `dims`, with the
/// first party as the slowest-varying index.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeState {
    dims: Vec<usize>,
    amplitudes: CVector,
}

impl CompositeState {
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn expectation(&self, op: &CMatrix) -> Complex64 {
        (self.amplitudes.adjoint() * op * &self.amplitudes)[(0, 0)]
    }

    pub fn apply(&self, op: &CMatrix) -> CompositeState {
        Self {
            dims: self.dims.clone(),
            amplitudes: op * &self.amplitudes,
        }
    }

    pub fn overlap(&self, other: &CompositeState) -> Result<Complex64> {
        if self.dims != other.dims {
            return Err(MalusError::DimensionMismatch {
                left: self.amplitudes.len(),
                right: other.amplitudes.len(),
            });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }
}

/// Hermitian, unit-trace matrix over one or more parties.
///
/// Positivity is not enforced: reconstructions from candidate quasi-distributions
/// may fail it, and [`DensityMatrix::min_eigenvalue`] reports by how much.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    entries: CMatrix,
}

impl DensityMatrix {
    pub fn from_entries(dims: Vec<usize>, entries: CMatrix) -> Result<Self> {
        let d: usize = dims.iter().product();
        if entries.nrows() != d || entries.ncols() != d {
            return Err(MalusError::DimensionMismatch {
                left: d,
                right: entries.nrows(),
            });
        }
        Ok(Self { dims, entries })
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let d: usize = dims.iter().product();
        Self {
            dims,
            entries: CMatrix::identity(d, d) * Complex64::new(1.0 / d as f64, 0.0),
        }
    }

    pub fn from_pure(state: &CompositeState) -> Self {
        Self {
            dims: state.dims.clone(),
            entries: linalg::outer(&state.amplitudes),
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn trace(&self) -> Complex64 {
        linalg::trace(&self.entries)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        linalg::hermiticity_defect(&self.entries)
    }

    pub fn trace_defect(&self) -> f64 {
        (self.trace() - ONE).norm()
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigen(&self.entries).0
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn is_physical(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol && self.trace_defect() <= tol && self.min_eigenvalue() >= -tol
    }

    /// `tr(rho op)`.
    pub fn expectation(&self, op: &CMatrix) -> Complex64 {
        linalg::trace(&(&self.entries * op))
    }

    pub fn max_entry_distance(&self, other: &DensityMatrix) -> Result<f64> {
        if self.dims != other.dims {
            return Err(MalusError::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(linalg::max_entry_distance(&self.entries, &other.entries))
    }

    pub fn fidelity(&self, other: &DensityMatrix) -> Result<f64> {
        self.max_entry_distance(other)?;
        Ok(linalg::fidelity(&self.entries, &other.entries))
    }

    /// Reduced matrix of party `keep` for a two-party matrix.
    pub fn partial_trace(&self, keep: usize) -> Result<DensityMatrix> {
        if self.dims.len() != 2 || keep > 1 {
            return Err(MalusError::DimensionMismatch {
                left: 2,
                right: self.dims.len(),
            });
        }
        let (da, db) = (self.dims[0], self.dims[1]);
        let e = &self.entries;
        let reduced = if keep == 0 {
            CMatrix::from_fn(da, da, |i, j| (0..db).map(|k| e[(i * db + k, j * db + k)]).sum())
        } else {
            CMatrix::from_fn(db, db, |i, j| (0..da).map(|k| e[(k * db + i, k * db + j)]).sum())
        };
        let d = if keep == 0 { da } else { db };
        Ok(DensityMatrix {
            dims: vec![d],
            entries: reduced,
        })
    }
}

/// Raising and lowering operators `(S+, S-)` in the ascending-`m` basis.
pub fn ladder_operators(s: SpinQuantumNumber) -> (CMatrix, CMatrix) {
    let d = s.dim();
    let sv = s.s();
    let mut plus = CMatrix::zeros(d, d);
    for k in 0..d - 1 {
        let m = s.m(k);
        plus[(k + 1, k)] = Complex64::new((sv * (sv + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
    }
    let minus = plus.adjoint();
    (plus, minus)
}

/// `S_z = diag(m)`.
pub fn s_z(s: SpinQuantumNumber) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_iterator(
        s.dim(),
        (0..s.dim()).map(|k| Complex64::new(s.m(k), 0.0)),
    ))
}

/// Cartesian spin operators `[S_x, S_y, S_z]`.
pub fn spin_operators(s: SpinQuantumNumber) -> [CMatrix; 3] {
    let (plus, minus) = ladder_operators(s);
    let sx = (&plus + &minus) * Complex64::new(0.5, 0.0);
    let sy = (&plus - &minus) * Complex64::new(0.0, -0.5);
    [sx, sy, s_z(s)]
}

/// The unitary `exp(tau S+ - tau* S-)`, `tau = (theta/2) e^{-i phi}`.
pub fn rotation_operator(s: SpinQuantumNumber, omega: &Direction) -> CMatrix {
    let (plus, minus) = ladder_operators(s);
    let tau = Complex64::from_polar(omega.theta() / 2.0, -omega.phi());
    let generator = plus * tau - minus * tau.conj();
    linalg::expm(&generator)
}

/// Coherent state built by rotating `|s, -s>` with a dense matrix exponential.
pub fn scs_exponential(s: SpinQuantumNumber, omega: &Direction) -> SpinState {
    let u = rotation_operator(s, omega);
    SpinState {
        s,
        amplitudes: u.column(0).into_owned(),
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Coherent state from its closed-form binomial coefficients.
pub fn scs_closed_form(s: SpinQuantumNumber, omega: &Direction) -> SpinState {
    let n = s.twice_s();
    let half = omega.theta() / 2.0;
    let (sh, ch) = (half.sin(), half.cos());
    let amplitudes = (0..=n)
        .map(|k| {
            let mag = binomial(n, k).sqrt() * sh.powi(k as i32) * ch.powi((n - k) as i32);
            Complex64::from_polar(mag, -(k as f64) * omega.phi())
        })
        .collect::<Vec<_>>();
    SpinState {
        s,
        amplitudes: CVector::from_vec(amplitudes),
    }
}

/// `<a|b>`, conjugate-linear in `a`.
pub fn overlap(a: &SpinState, b: &SpinState) -> Result<Complex64> {
    same_spin(a, b)?;
    Ok(a.amplitudes.dotc(&b.amplitudes))
}

/// `<Omega|Omega'>` between coherent states without building either vector:
/// `(cos(t/2) cos(t'/2) + e^{i(phi - phi')} sin(t/2) sin(t'/2))^{2s}`.
pub fn coherent_overlap(s: SpinQuantumNumber, omega: &Direction, omega_prime: &Direction) -> Complex64 {
    spin_half_overlap(omega, omega_prime).powu(s.twice_s())
}

pub(crate) fn spin_half_overlap(omega: &Direction, omega_prime: &Direction) -> Complex64 {
    let (a, b) = (omega.theta() / 2.0, omega_prime.theta() / 2.0);
    Complex64::new(a.cos() * b.cos(), 0.0) + Complex64::from_polar(a.sin() * b.sin(), omega.phi() - omega_prime.phi())
}

/// `cos^{4s}(alpha/2)`, evaluated as `((1 + cos alpha)/2)^{2s}`.
pub fn malus_probability(s: SpinQuantumNumber, omega: &Direction, omega_prime: &Direction) -> f64 {
    let half_cos_sq = 0.5 * (1.0 + omega.cos_angle(omega_prime));
    half_cos_sq.powi(s.twice_s() as i32)
}

pub fn projector(x: &SpinState) -> DensityMatrix {
    DensityMatrix {
        dims: vec![x.s.dim()],
        entries: linalg::outer(&x.amplitudes),
    }
}

/// Coherent-state projector `|Omega><Omega|` as a bare matrix.
pub(crate) fn coherent_projector(s: SpinQuantumNumber, omega: &Direction) -> CMatrix {
    linalg::outer(&scs_closed_form(s, omega).amplitudes)
}

pub fn tensor_states(a: &SpinState, b: &SpinState) -> CompositeState {
    CompositeState {
        dims: vec![a.s.dim(), b.s.dim()],
        amplitudes: linalg::kron_vec(&a.amplitudes, &b.amplitudes),
    }
}

pub fn tensor_density(a: &DensityMatrix, b: &DensityMatrix) -> DensityMatrix {
    let mut dims = a.dims.clone();
    dims.extend_from_slice(&b.dims);
    DensityMatrix {
        dims,
        entries: linalg::kron(&a.entries, &b.entries),
    }
}

/// `(|+>_a |->_b - |->_a |+>_b) / sqrt 2`.
pub fn singlet_state() -> CompositeState {
    let half = SpinQuantumNumber::half();
    let up = SpinState::basis(half, 1);
    let down = SpinState::basis(half, 0);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let amplitudes = (linalg::kron_vec(&up.amplitudes, &down.amplitudes)
        - linalg::kron_vec(&down.amplitudes, &up.amplitudes))
        * Complex64::new(r, 0.0);
    CompositeState {
        dims: vec![2, 2],
        amplitudes,
    }
}

pub fn singlet_projector() -> DensityMatrix {
    DensityMatrix::from_pure(&singlet_state())
}

/// Max-entry deviation of `(2s+1)/4pi sum_i w_i |Omega_i><Omega_i|` from the identity.
pub fn resolution_of_identity_defect(s: SpinQuantumNumber, grid: &QuadratureGrid) -> f64 {
    let d = s.dim();
    let mut acc = CMatrix::zeros(d, d);
    let scale = d as f64 / (4.0 * std::f64::consts::PI);
    for node in grid.nodes() {
        acc += coherent_projector(s, &node.direction) * Complex64::new(scale * node.weight, 0.0);
    }
    linalg::max_entry_distance(&acc, &CMatrix::identity(d, d))
}

pub(crate) fn zero_matrix(d: usize) -> CMatrix {
    CMatrix::from_element(d, d, ZERO)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::{antipode, build_grid, relative_angle};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

    fn spin(twice: u32) -> SpinQuantumNumber {
        SpinQuantumNumber::from_twice(twice).unwrap()
    }

    fn dir(theta: f64, phi: f64) -> Direction {
        Direction::new(theta, phi).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_spin_rejected() {
        assert!(SpinQuantumNumber::from_twice(0).is_err());
        assert_eq!(spin(3).to_string(), "3/2");
        assert_eq!(spin(4).to_string(), "2");
    }

    #[test]
    fn spin_half_ladder_is_pauli_raising() {
        let (p, m) = ladder_operators(spin(1));
        assert_eq!(p[(1, 0)], ONE);
        assert_eq!(p[(0, 1)], ZERO);
        assert_eq!(p[(0, 0)], ZERO);
        assert_eq!(m, p.adjoint());
    }

    #[test]
    fn spin_one_ladder_elements() {
        let (p, _) = ladder_operators(spin(2));
        assert_abs_diff_eq!(p[(1, 0)].re, 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(p[(2, 1)].re, 2f64.sqrt(), epsilon = 1e-15);
        let nonzero = p.iter().filter(|z| z.norm() > 0.0).count();
        assert_eq!(nonzero, 2);
    }

    #[test]
    fn ladder_commutator_is_twice_sz() {
        let s = spin(3);
        let (p, m) = ladder_operators(s);
        let comm = &p * &m - &m * &p;
        let expected = s_z(s) * c(2.0, 0.0);
        assert!(linalg::max_entry_distance(&comm, &expected) < 1e-13);
    }

    #[test]
    fn exponential_examples() {
        let half = spin(1);
        let st = scs_exponential(half, &dir(0.0, 2.3));
        assert!(st.distance(&SpinState::basis(half, 0)).unwrap() < 1e-15);

        let st = scs_exponential(half, &dir(FRAC_PI_2, 0.0));
        assert_abs_diff_eq!(st.amplitude(0).re, FRAC_1_SQRT_2, epsilon = 1e-14);
        assert_abs_diff_eq!(st.amplitude(1).re, FRAC_1_SQRT_2, epsilon = 1e-14);
        assert_abs_diff_eq!(st.amplitude(1).im, 0.0, epsilon = 1e-14);

        // Pole theta = pi: all weight on |1, +1> with phase e^{-2 i phi}.
        let phi = 0.8;
        let st = scs_exponential(spin(2), &dir(PI, phi));
        let target = Complex64::from_polar(1.0, -2.0 * phi);
        assert!((st.amplitude(2) - target).norm() < 1e-13);
        assert!(st.amplitude(0).norm() < 1e-13 && st.amplitude(1).norm() < 1e-13);
    }

    #[test]
    fn closed_form_examples() {
        let (theta, phi) = (1.1, 2.0);
        let st = scs_closed_form(spin(1), &dir(theta, phi));
        assert!((st.amplitude(1) - Complex64::from_polar((theta / 2.0).sin(), -phi)).norm() < 1e-15);
        assert_abs_diff_eq!(st.amplitude(0).re, (theta / 2.0).cos(), epsilon = 1e-15);

        let st = scs_closed_form(spin(4), &dir(0.0, 1.0));
        assert!(st.distance(&SpinState::basis(spin(4), 0)).unwrap() < 1e-15);

        // s = 2 on the equator: |C_m|^2 = binom(4, k) / 16.
        let st = scs_closed_form(spin(4), &dir(FRAC_PI_2, 0.0));
        for (k, b) in [1.0, 4.0, 6.0, 4.0, 1.0].iter().enumerate() {
            assert_abs_diff_eq!(st.amplitude(k).re, (b / 16.0f64).sqrt(), epsilon = 1e-15);
        }
        assert_abs_diff_eq!(st.norm_sqr(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn overlap_examples() {
        let s = spin(3);
        let x = scs_closed_form(s, &dir(0.7, 0.2));
        assert_abs_diff_eq!(overlap(&x, &x).unwrap().re, 1.0, epsilon = 1e-14);
        let a = dir(1.2, 2.2);
        let y = scs_closed_form(s, &antipode(&a));
        assert!(overlap(&scs_closed_form(s, &a), &y).unwrap().norm() < 1e-14);

        let (o, op) = (dir(0.4, 1.0), dir(2.1, 5.0));
        let got = overlap(&scs_closed_form(spin(1), &o), &scs_closed_form(spin(1), &op)).unwrap();
        let expect = (o.theta() / 2.0).cos() * (op.theta() / 2.0).cos()
            + Complex64::from_polar(1.0, o.phi() - op.phi()) * (o.theta() / 2.0).sin() * (op.theta() / 2.0).sin();
        assert!((got - expect).norm() < 1e-15);

        let err = overlap(&scs_closed_form(spin(1), &o), &scs_closed_form(spin(2), &o));
        assert!(matches!(err, Err(MalusError::DimensionMismatch { .. })));
    }

    #[test]
    fn malus_examples() {
        let a = dir(0.9, 1.3);
        assert_abs_diff_eq!(malus_probability(spin(5), &a, &a), 1.0, epsilon = 1e-15);
        let (x, z) = (dir(FRAC_PI_2, 0.0), dir(0.0, 0.0));
        assert_abs_diff_eq!(malus_probability(spin(1), &x, &z), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(malus_probability(spin(4), &x, &z), 1.0 / 16.0, epsilon = 1e-15);
    }

    #[test]
    fn projector_examples() {
        let p = projector(&scs_closed_form(spin(1), &dir(0.0, 4.0)));
        assert_eq!(p.entries()[(0, 0)], ONE);
        assert_eq!(p.entries()[(1, 1)].norm(), 0.0);
        let p = projector(&scs_closed_form(spin(3), &dir(1.3, 0.4)));
        assert_abs_diff_eq!(p.trace().re, 1.0, epsilon = 1e-14);
        let sq = p.entries() * p.entries();
        assert!(linalg::max_entry_distance(&sq, p.entries()) < 1e-14);
        let ev = p.eigenvalues();
        assert_abs_diff_eq!(ev[3], 1.0, epsilon = 1e-12);
        for l in &ev[..3] {
            assert!(l.abs() < 1e-12);
        }
    }

    #[test]
    fn tensor_party_order() {
        let half = spin(1);
        let t = tensor_states(&SpinState::basis(half, 1), &SpinState::basis(half, 0));
        // (m_a = +1/2, m_b = -1/2) lives at index 1 * 2 + 0.
        assert_eq!(t.amplitudes()[2], ONE);
        assert_eq!(t.dims(), &[2, 2]);
        let rho = tensor_density(
            &projector(&SpinState::basis(half, 1)),
            &projector(&SpinState::basis(half, 0)),
        );
        assert_eq!(rho.entries()[(2, 2)], ONE);
    }

    #[test]
    fn singlet_properties() {
        let psi = singlet_state();
        assert_abs_diff_eq!(psi.norm_sqr(), 1.0, epsilon = 1e-15);
        let sz = s_z(spin(1)) * c(2.0, 0.0);
        let zz = linalg::kron(&sz, &sz);
        assert_abs_diff_eq!(psi.expectation(&zz).re, -1.0, epsilon = 1e-15);

        let rho = singlet_projector();
        let half_id = DensityMatrix::maximally_mixed(vec![2]);
        for party in 0..2 {
            let r = rho.partial_trace(party).unwrap();
            assert!(r.max_entry_distance(&half_id).unwrap() < 1e-15);
        }

        let u = rotation_operator(spin(1), &dir(1.9, 0.6));
        let rotated = psi.apply(&linalg::kron(&u, &u));
        assert_abs_diff_eq!(psi.overlap(&rotated).unwrap().norm(), 1.0, epsilon = 1e-13);
    }

    #[test]
    fn resolution_of_identity_examples() {
        let d = resolution_of_identity_defect(spin(1), &build_grid(2, 3).unwrap());
        assert!(d < 1e-12, "{d}");
        let d = resolution_of_identity_defect(spin(10), &build_grid(11, 11).unwrap());
        assert!(d < 1e-10, "{d}");
        let d = resolution_of_identity_defect(spin(10), &build_grid(3, 3).unwrap());
        assert!(d > 0.1 && d < 2.0, "{d}");
    }

    #[test]
    fn pole_gauge_invariance() {
        let s = spin(7);
        let probe = dir(1.0, 0.3);
        for theta in [0.0, PI] {
            let a = malus_probability(s, &dir(theta, 0.0), &probe);
            for phi in [0.5, 3.0, 6.0] {
                assert_eq!(a, malus_probability(s, &dir(theta, phi), &probe));
            }
        }
    }

    fn sweep_case() -> impl Strategy<Value = (u32, Direction, Direction)> {
        (1u32..=50, 0.0..=PI, 0.0..6.3f64, 0.0..=PI, 0.0..6.3f64).prop_map(|(t, a, b, c, d)| (t, dir(a, b), dir(c, d)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn constructors_agree((twice, o, _) in sweep_case()) {
            let s = spin(twice);
            let dist = scs_exponential(s, &o).distance(&scs_closed_form(s, &o)).unwrap();
            prop_assert!(dist < 1e-10, "2s={} {} dist={}", twice, o, dist);
        }

        #[test]
        fn overlap_squared_is_malus((twice, o, op) in sweep_case()) {
            let s = spin(twice);
            let ov = overlap(&scs_closed_form(s, &o), &scs_closed_form(s, &op)).unwrap();
            let alpha = relative_angle(&o, &op);
            prop_assert!((ov.norm_sqr() - (alpha / 2.0).cos().powi(2 * twice as i32)).abs() < 1e-10);
            prop_assert!((ov - coherent_overlap(s, &o, &op)).norm() < 1e-10);
        }
    }
}
