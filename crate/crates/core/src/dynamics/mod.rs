//! Time integration of the non-autonomous systems and invariant monitoring.

mod coefficients;
mod integrator;
mod monitor;

pub use coefficients::{CoefficientSet, TimeFunction};
pub use integrator::{
    integrate, integrate_partial, integrate_with_domain, rk4_fixed, IntegratorOptions,
    IntegratorStats, StepMode, Termination, Trajectory,
};
pub use monitor::{monitor, monitor_on_grid, InvariantReport};
