//! Numerical toolkit for multi-bubble approximate solutions of
//! `-Δu + V(y) u = u^{(N+2)/(N-2)}` in ℝ^N.

pub mod bubble;
pub mod energy;
pub mod error;
pub mod field;
pub mod numerics;
pub mod pohozaev;
pub mod potential;
pub mod reduction;

pub use error::{Error, Result};
