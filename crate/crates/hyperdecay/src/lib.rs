//! Stability certification, root asymptotics and decay-rate prediction for
//! dissipative higher-order hyperbolic operators `Q = P_m + P_{m-1} + ...`.

pub mod asymptotics;
pub mod cli;
pub mod decay_theory;
pub mod error;
pub mod expm;
pub mod fit;
pub mod fixtures;
pub mod model;
pub mod output;
pub mod presets;
pub mod profiles;
pub mod rootkit;
pub mod semilinear;
pub mod spectral_solver;
pub mod sphere;
pub mod stability;
pub mod symbol_core;

pub use error::{Error, Result};
pub use num_complex::Complex64;
