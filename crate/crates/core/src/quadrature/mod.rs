//! Deterministic quadrature, the localization sweep and stationary phase.

mod grid;
mod integrals;

pub use grid::{gauss_legendre, pairwise_sum, AxisRule, QuadratureGrid, Summable};
pub use integrals::{
    closedness_residual, constant_function, decimal, integrate_field, integrate_multivector, integrate_over_locus,
    integrate_top_form, integrate_top_form_on, oscillatory_integral, stationary_phase_estimate, sweep_order, t_grid,
    z_gamma_sweep, SweepResult, Verdict, INTEGRATION_TOLERANCE,
};
