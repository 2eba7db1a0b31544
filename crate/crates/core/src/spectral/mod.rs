//! Spectral engine: secular determinant, root scan and eigenfunctions.

pub mod eigen;
pub mod matrix;
pub mod scan;

pub use eigen::{
    build_eigensolution, build_eigensolutions, detect_zero_modes, fix_phase, gram_blocks,
    zero_mode_dimension, EigenSolution, ModeProfile,
};
pub use matrix::{
    assemble_spectral_matrix, balanced_matrix, indicator_phase, kernel_basis, null_space,
    relative_gap, singular_gap, spectral_function, SpectralMatrix,
};
pub use scan::{
    default_rank_tol, scan_first_roots, scan_roots, IndicatorMode, ScanOptions, SpectralRoot,
    SpectralScan,
};
