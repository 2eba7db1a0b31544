//! Quantum particle with a jump-discontinuous mass on two joined intervals.
//!
//! The crate computes spectra for arbitrary self-adjoint boundary conditions, closed forms for
//! the scale-free catalog, edge-localization observables, Barra-Gaspard statistics and the
//! Wigner function of eigenstates.

// Negated comparisons deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod error;
pub mod graph;
pub mod io;
pub mod observables;
pub mod scalar;
pub mod special;
pub mod spectral;
pub mod wigner;

pub use error::{Error, Result};
pub use graph::{BoundaryCondition, BoundaryTrace, TwoEdgeGraph};
pub use scalar::{Cx, Real};

pub type TwoEdgeGraph64 = graph::TwoEdgeGraph<f64>;
pub type TwoEdgeGraph32 = graph::TwoEdgeGraph<f32>;
pub type BoundaryCondition64 = graph::BoundaryCondition<f64>;
pub type BoundaryCondition32 = graph::BoundaryCondition<f32>;
pub type EigenSolution64 = spectral::EigenSolution<f64>;
pub type SpectralScan64 = spectral::SpectralScan<f64>;
pub type LeaningSeries64 = observables::LeaningSeries<f64>;
