//! Formal solutions, Borel-plane analysis and directional k-summation for
//! singular first-order nonlinear PDEs `t∂ₜu = F(t, x, u, ∂ₓu)`.

pub mod borel_plane;
pub mod coeff;
pub mod equation;
pub mod error;
pub mod nagumo;
pub mod par;
pub mod report;
pub mod resum;
pub mod series;
pub mod solver;

pub use coeff::{Coeff, Mode};
pub use error::{Error, ErrorKind, Result};
pub use series::{compose, BorelKernel, TruncatedSeries, Var};
