//! Shared numerical kernel: fixed-step integration, finite differences,
//! matrix measures, box-grid suprema and truncated Taylor arithmetic.

mod diff;
mod grid;
mod integrate;
pub mod jet;
mod linalg;
mod measure;

pub use diff::{default_steps, jacobian_numeric, jacobian_numeric_default, jacobian_with_steps};
pub use grid::{max_over_grid, sup_over_box, GridBox, DEFAULT_MARGIN};
pub use integrate::{
    integrate, integrate_states, Channel, IntegratorConfig, Method, Trajectory, DEFAULT_MAX_STEPS,
};
pub use jet::Jet;
pub use linalg::{symmetric_eigenvalues, Matrix};
pub use measure::{
    condition_estimate, generalized_jacobian, generalized_jacobian_with_cap, matrix_measure_2,
    matrix_measure_inf, DEFAULT_CONDITION_CAP,
};

/// Ordered real scalars. Public outputs are finite.
pub type Vector = Vec<f64>;

pub(crate) fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

pub(crate) fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
