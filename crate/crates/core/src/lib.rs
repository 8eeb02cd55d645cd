//! Norm-resolvent limits of 1-D Schrödinger operators
//! `H_eps = -d²/dx² + eps^-3 Q_eps + eps^-1 q(x/eps)` with a shrinking
//! rank-two perturbation `Q_eps v = <g_eps, v> f_eps + <f_eps, v> g_eps`.
//!
//! The crate classifies the limit point interaction of a triple `(f, g, q)`
//! and checks the classification numerically by solving the scaled problem.

pub mod convergence;
pub mod error;
pub mod point_ops;
pub mod profiles;
pub mod cell_solver;
pub mod classifier;
pub mod cli;
pub mod fixtures;
pub mod ode;
pub mod resonance;

pub use error::{Error, Result};
pub use num_complex::Complex64;
