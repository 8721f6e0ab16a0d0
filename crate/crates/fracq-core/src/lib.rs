//! Numerical machinery for the fractional operator (−Δ)^{3/2} on ℝ³ realized as the
//! Neumann trace of a biharmonic extension to the upper half-space ℝ⁴₊, together with
//! the model solutions of the associated nonlocal Liouville equation
//! (−Δ)^{3/2} u = Q e^{3u} and the diagnostics used to study their concentration
//! behavior.
//!
//! Module map:
//! - [`specfun`]: Gamma, Bessel J/K, the half-space Dirichlet profile, and numerical
//!   verification of the classical Bessel integral identities behind the kernels.
//! - [`kernels`]: closed-form half-space kernels (Dirichlet, Neumann-log, scattering)
//!   and their normalization constants.
//! - [`quad`]: integration engines — radial, adaptive box, 4-ball, the singular log
//!   potential, and weighted tail norms.
//! - [`extension`]: Dirichlet/Neumann extensions, the boundary trace operator, the
//!   spectral fractional Laplacian, and consistency checks between them.
//! - [`liouville`]: bubbles, scaled families, nonpositive biharmonic comparison
//!   profiles, and the fixed-point construction of blow-up sequences.
//! - [`blowup`]: local curvature mass, concentration-point detection, the
//!   potential/harmonic decomposition, mean-value (Pizzetti) checks, and the
//!   exponential-integrability probe.
//! - [`gf3`]: on-disk serialization of grid fields (JSON header + raw samples).

pub mod blowup;
pub mod extension;
mod fftutil;
pub mod gf3;
pub mod grid;
pub mod kernels;
pub mod liouville;
pub mod poly;
pub mod quad;
pub mod specfun;

use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Error)]
pub enum FracqError {
    /// Input outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A quadrature or iteration failed to reach the requested accuracy;
    /// carries the achieved estimate.
    #[error("tolerance not met: requested {requested:e}, achieved {achieved:e} ({context})")]
    Tolerance {
        requested: f64,
        achieved: f64,
        context: String,
    },
    /// Evaluation outside representable range (e.g. at a kernel singularity).
    #[error("range error: {0}")]
    Range(String),
    /// Malformed field or grid data.
    #[error("invalid field: {0}")]
    InvalidField(String),
    /// I/O failure while reading or writing field data.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, FracqError>;

pub(crate) fn domain_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(FracqError::Domain(msg.into()))
}
