//! Explicit integral kernels of the dbar-Neumann problem on Henkin-Leiterer
//! model domains, the admissible-kernel type calculus, a Z-operator rewrite
//! engine, and quadrature and slope-fitting tools to check them numerically.

pub mod domain;
pub mod error;
pub mod forms;
pub mod kernels;
pub mod quad;
pub mod typecalc;
pub mod verify;
pub mod zalg;

pub use error::{Error, Result};
pub use num_complex::Complex64;
