//! Wavelet-coefficient toolkit for Q-spaces, their preduals and Riesz
//! transforms on periodic dyadic grids.

pub mod dyadic;
pub mod error;
pub mod grid;
pub mod microlocal;
pub mod norms;
pub mod predual;
pub mod riesz;
pub mod spectral;
pub mod wavelet;

pub use dyadic::{DyadicCube, Epsilon, WaveletIndex};
pub use error::{QspaceError, Result};
pub use grid::{GridFunction, GridSpec};
pub use wavelet::{Basis, BasisSpec, CoefficientField, Family, FieldWindow, ScaleWindow};
