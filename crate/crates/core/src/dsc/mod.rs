//! Dynamic surface control: first-order command filters, the high-gain
//! disturbance observer and the resulting control law.

mod control;
mod filter;
mod observer;
mod sim;

use serde::{Deserialize, Serialize};

use crate::backstepping::TuningFunctions;
use crate::error::{DscError, Result};

pub use control::{dsc_control, initial_filter_state, DscCommand};
pub use filter::FilterBank;
pub use observer::ObserverState;
pub use sim::{simulate_dsc, simulate_observer};

/// How the filtered virtual controls are produced.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterMode {
    /// `μ α̇ᵢf = −αᵢf + αᵢ`.
    #[default]
    Filtered,
    /// Test device for the `μ → 0` limit: `αᵢf ≡ αᵢ` and `α̇ᵢf` is the exact
    /// derivative of the backstepping virtual control.
    Slaved,
}

/// Design parameters of the DSC loop.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DscConfig {
    /// Filter time constant, in `(0, 1]`.
    pub mu: f64,
    /// Observer gain; `ε = 1/k`.
    pub k: f64,
    pub tuning: TuningFunctions,
    pub observer_enabled: bool,
    pub filter_mode: FilterMode,
}

impl DscConfig {
    pub fn new(mu: f64, k: f64, tuning: TuningFunctions) -> Self {
        Self {
            mu,
            k,
            tuning,
            observer_enabled: true,
            filter_mode: FilterMode::Filtered,
        }
    }

    pub fn without_observer(mut self) -> Self {
        self.observer_enabled = false;
        self
    }

    pub fn slaved(mut self) -> Self {
        self.filter_mode = FilterMode::Slaved;
        self
    }

    pub fn epsilon(&self) -> f64 {
        1.0 / self.k
    }

    /// `κ = ε/μ`.
    pub fn kappa(&self) -> f64 {
        self.epsilon() / self.mu
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.mu > 0.0 && self.mu <= 1.0) {
            return Err(DscError::config(format!(
                "filter parameter mu = {} must lie in (0, 1]",
                self.mu
            )));
        }
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(DscError::config(format!(
                "observer gain k = {} must be positive",
                self.k
            )));
        }
        self.tuning.validate(n)
    }

    /// The fixed step must resolve both fast time scales:
    /// `dt ≤ μ/10` and `dt ≤ 1/(10k)`.
    pub fn validate_step(&self, dt: f64) -> Result<()> {
        let limit = self.mu.min(1.0 / self.k) / 10.0;
        // relative slack so that e.g. dt = 1e-3 passes for mu = 1e-2
        if dt > limit * (1.0 + 1e-12) {
            return Err(DscError::config(format!(
                "dt = {dt} exceeds min(mu, 1/k)/10 = {limit}"
            )));
        }
        Ok(())
    }
}
