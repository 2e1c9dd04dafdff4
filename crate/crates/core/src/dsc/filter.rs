use crate::error::{DscError, Result};
use crate::numerics::Vector;

/// Filtered virtual controls `α₂f..αₙf`.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterBank {
    pub alpha_f: Vector,
    pub mu: f64,
}

impl FilterBank {
    pub fn new(alpha_f: Vector, mu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(DscError::config(format!(
                "filter parameter must be positive, got {mu}"
            )));
        }
        Ok(Self { alpha_f, mu })
    }

    /// `(−α_f + α)/μ` per channel.
    pub fn filter_dynamics(&self, alpha: &[f64]) -> Result<Vector> {
        if alpha.len() != self.alpha_f.len() {
            return Err(DscError::Shape(format!(
                "{} virtual controls for {} filters",
                alpha.len(),
                self.alpha_f.len()
            )));
        }
        Ok(self
            .alpha_f
            .iter()
            .zip(alpha)
            .map(|(af, a)| (a - af) / self.mu)
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{integrate, IntegratorConfig};

    #[test]
    fn equilibrium_when_tracking() {
        let bank = FilterBank::new(vec![1.5, -2.0], 0.01).unwrap();
        assert_eq!(bank.filter_dynamics(&[1.5, -2.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn step_response_at_one_time_constant() {
        let mu = 0.05;
        let cfg = IntegratorConfig::new(mu / 1000.0, mu);
        let traj = integrate(
            |_, af| {
                FilterBank::new(af.to_vec(), mu)
                    .unwrap()
                    .filter_dynamics(&[1.0])
                    .unwrap()
            },
            &[0.0],
            &cfg,
        )
        .unwrap();
        let expected = 1.0 - (-1.0f64).exp();
        let got = traj.last("x").unwrap()[0];
        assert!(((got - expected) / expected).abs() < 1e-3);
        assert!((expected - 0.63212).abs() < 1e-5);
    }

    #[test]
    fn ramp_lag_equals_mu() {
        let mu = 0.02;
        let cfg = IntegratorConfig::new(1e-4, 1.0);
        let traj = integrate(
            |t, af| {
                FilterBank::new(af.to_vec(), mu)
                    .unwrap()
                    .filter_dynamics(&[t])
                    .unwrap()
            },
            &[0.0],
            &cfg,
        )
        .unwrap();
        let lag = 1.0 - traj.last("x").unwrap()[0];
        assert!((lag - mu).abs() < 1e-9, "lag {lag}");
    }

    #[test]
    fn non_positive_mu_rejected() {
        assert!(FilterBank::new(vec![0.0], 0.0).is_err());
        assert!(FilterBank::new(vec![0.0], -1.0).is_err());
    }
}
