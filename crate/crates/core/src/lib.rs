//! Euler–Bernoulli beam on a fractional Zener viscoelastic foundation.
//!
//! The foundation law `D^α u + u = θ D^α g + g` is solved for the foundation
//! force as a causal convolution `g = L u`, which turns the beam equation into
//! the integro-differential system
//!
//! ```text
//! ∂²ₜu + ∂²ₓ(c ∂²ₓu) + b ∂²ₓu + L u = h,   u = ∂ₓu = 0 at x ∈ {0, 1}
//! ```
//!
//! Coefficients may be regularizations of distributions (a stiffness jump, an
//! axial impulse, a moving point load) given as ε-families. The crate provides
//! the memory kernel, a Hermite-cubic discretization, Newmark and Picard time
//! marching, the a-priori energy bound with all of its constants, and a small
//! scenario harness that writes CSV.

pub mod beam_fem;
pub mod coefficients;
pub mod energy;
mod error;
pub mod fit;
pub mod fractional_kernel;
pub mod harness;
pub mod quadrature;
pub mod time_integration;

pub use error::{Error, Result};
