//! Quantum Rényi divergences, strong converse exponents of quantum dichotomy
//! transformations, and an exact finite-blocklength oracle for optimal
//! channel transformations.

pub mod channel;
pub mod channel_opt;
pub mod divergence;
pub mod error;
pub mod exponent;
pub mod format;
pub mod operator;
pub mod sdp;
pub mod verify;

pub use error::{Error, Result};
