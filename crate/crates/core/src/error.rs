//! Error type shared by the numerical modules.

use thiserror::Error;

/// Failures reported by graph construction, the spectral engine and the observables.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("graph parameter `{0}` must be finite and strictly positive")]
    InvalidParameter(&'static str),
    #[error("boundary matrix is not unitary (max deviation {deviation:.3e})")]
    NonUnitary { deviation: f64 },
    #[error("matrix is not an orthogonal projection (max deviation {deviation:.3e})")]
    NotProjection { deviation: f64 },
    #[error("no numerical kernel at kappa = {kappa} (relative singular value {ratio:.3e})")]
    EmptyKernel { kappa: f64, ratio: f64 },
    #[error("x = {x} lies outside [{lo}, {hi}]")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },
    #[error("root refinement did not converge in [{lo}, {hi}]")]
    ScanIncomplete { lo: f64, hi: f64 },
    #[error("ring branches coincide when the masses are equal")]
    DegenerateSplit,
    #[error("point is off branch {branch} of preset {preset} (|f| = {residual:.3e})")]
    OffBranch {
        preset: &'static str,
        branch: usize,
        residual: f64,
    },
    #[error("branch {branch} does not exist for preset {preset}")]
    UnknownBranch { preset: &'static str, branch: usize },
    #[error("tangency formula is singular at phi1 = {phi1}")]
    SingularPoint { phi1: f64 },
    #[error("limit coefficients are singular at torus point ({phi1}, {phi2})")]
    SingularTorusPoint { phi1: f64, phi2: f64 },
    #[error("series has no entries in the requested range")]
    EmptySeries,
    #[error("Wigner formulas require plane-wave eigenfunctions (kappa > 0)")]
    UnsupportedProfile,
    #[error("scan reaches kappa = {available} but kappa = {required} is needed")]
    ScanTooShort { required: f64, available: f64 },
}

/// Result alias for this crate.
pub type Result<T> = std::result::Result<T, Error>;
