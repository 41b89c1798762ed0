//! Numerical toolkit for one-dimensional Schrödinger operators
//! L = −∂² + V(x) with complex potentials on an interval ]a,b[.

pub mod boundary;
pub mod error;
pub mod greens;
pub mod ivp;
pub mod par;
pub mod potential;
pub mod quad;
pub mod spectra;
pub mod weyl;

pub use error::{Error, Result};
pub use num_complex::Complex64;
