//! Euler–Skorokhod simulation of the reflected diffusion in `G`, the frozen-slow
//! approximation and the cross-section relaxation law.

mod frozen;
mod law;
mod sim;
#[cfg(test)]
mod tests;

pub use frozen::{
    coupled_ensemble, coupled_path, frozen_slow_path, frozen_window_heights, gamma_eps, window_steps, CoupledState,
    DEFAULT_KAPPA1,
};
pub use law::{
    bound_shape, cross_section_relaxation, fit_and_dominate, local_time_moments, CrossSectionLaw, MomentCheck,
    MAX_MODES, TRUNCATION,
};
pub use sim::{
    advance, aligned_dt, brownian_increment, mc_expectation, mc_expectations, simulate_path, step_reflected, step_reflected_thin,
    terminal_positions, Estimate, ReflectedState, SimConfig, MAX_HALVINGS,
};
