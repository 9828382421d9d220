use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MalusError {
    #[error("polar angle {0} outside [0, pi]")]
    PolarAngleOutOfRange(f64),
    #[error("non-finite angle (theta = {theta}, phi = {phi})")]
    NonFiniteAngle { theta: f64, phi: f64 },
    #[error("quadrature grid needs at least one node per axis (got n_theta = {n_theta}, n_phi = {n_phi})")]
    EmptyGrid { n_theta: usize, n_phi: usize },
    #[error("integrand returned a non-finite value at node {node} (theta = {theta}, phi = {phi})")]
    NonFiniteIntegrand { node: usize, theta: f64, phi: f64 },
    #[error("spin quantum number must satisfy 2s >= 1 (got 2s = {0})")]
    InvalidSpin(u32),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("distribution `{name}` takes {expected} direction(s), got {got}")]
    ArityMismatch { name: String, expected: usize, got: usize },
    #[error("unknown distribution `{0}`")]
    UnknownDistribution(String),
    #[error("classical distribution `{name}` is negative ({value}) at theta = {theta}, phi = {phi}")]
    NegativeClassicalDensity {
        name: String,
        value: f64,
        theta: f64,
        phi: f64,
    },
    #[error("path needs at least two points (got {0})")]
    PathTooShort(usize),
    #[error("consecutive path points {index} and {next} are antipodal; the kernel overlap vanishes", next = .index + 1)]
    AntipodalStep { index: usize },
    #[error("theta = {0} is within 1e-8 of a pole where the spherical bracket is singular; use canonical coordinates (phi, cos theta)")]
    PoleProximity(f64),
    #[error("time step must be positive and finite (got {0})")]
    InvalidStep(f64),
    #[error("trajectory left the sphere at t = {t}: |cos theta| = {p_abs}")]
    LeftSphere { t: f64, p_abs: f64 },
    #[error("transmission level must lie in (0, 1) (got {0})")]
    LevelOutOfRange(f64),
    #[error(
        "reconstruction is not a valid density matrix: hermiticity defect {hermiticity:e}, trace defect {trace:e}"
    )]
    ReconstructionDefect { hermiticity: f64, trace: f64 },
}

pub type Result<T> = std::result::Result<T, MalusError>;

impl MalusError {
    /// True for failures of the numerics, as opposed to invalid input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            MalusError::NonFiniteIntegrand { .. }
                | MalusError::LeftSphere { .. }
                | MalusError::ReconstructionDefect { .. }
                | MalusError::PoleProximity(_)
        )
    }
}
