use thiserror::Error;

/// Errors raised across the expansion, renormalization and oracle layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("no circular orbit at E = {energy}: {reason}")]
    NoOrbit { energy: f64, reason: String },

    #[error("unstable orbit at r0 = {r0}: omega^2 = {omega_sq} <= 0")]
    Unstable { r0: f64, omega_sq: f64 },

    #[error("dependency order violated at C[{k}][{i}]: {missing}")]
    DependencyOrder { k: usize, i: usize, missing: String },

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: String, iterations: usize },

    #[error("orbit lost during search: m0 = {m0}")]
    OrbitLost { m0: f64 },

    #[error("degenerate renormalization system (Jacobian condition {condition:e})")]
    Degenerate { condition: f64 },

    #[error("grid too small: wavefunction not decayed by r_max = {r_max}")]
    GridTooSmall { r_max: f64 },

    #[error("energy {energy} out of range for n = {n}: {reason}")]
    OutOfRange { energy: f64, n: u32, reason: String },

    #[error("closed form domain error: {0}")]
    DomainError(String),
}

impl Error {
    /// True for failures of the numerics (as opposed to bad user input).
    pub fn is_numerical(&self) -> bool {
        !matches!(
            self,
            Error::InvalidPotential(_) | Error::InvalidInput(_) | Error::DomainError(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
