//! Sector functions from Borel-plane data: Padé continuation, directional
//! Laplace integrals, Gevrey fits, summed solutions and PDE residuals.

mod gevrey;
mod laplace;
mod pade;
mod pipeline;
mod residual;

pub use gevrey::{gevrey_fit, gevrey_fit_series, GevreyFit};
pub use laplace::{laplace_decay, laplace_sum, POLE_CLEARANCE};
pub use pade::{pade_approximant, PadeApproximant, Pole};
pub use pipeline::{
    borel_sum_solution, summed_solution, GridSample, Route, SectorInfo, SlicePoles, SumOptions, SummationReport,
    SummedSolution, CROSS_CHECK_TOL,
};
pub use residual::{pde_residual, rhs_value, ResidualReport};
