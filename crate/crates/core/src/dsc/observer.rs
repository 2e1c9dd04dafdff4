use crate::error::{DscError, Result};
use crate::numerics::Vector;
use crate::plant::{points, StrictFeedbackSystem};

/// High-gain disturbance observer. The estimate is `d̂ᵢ = ξᵢ + k xᵢ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ObserverState {
    pub xi: Vector,
    pub k: f64,
}

impl ObserverState {
    pub fn new(xi: Vector, k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(DscError::config(format!(
                "observer gain must be positive, got {k}"
            )));
        }
        Ok(Self { xi, k })
    }

    /// Observer whose estimate at `x` equals `d_hat`.
    pub fn from_estimate(d_hat: &[f64], x: &[f64], k: f64) -> Result<Self> {
        Self::new(d_hat.iter().zip(x).map(|(d, xi)| d - k * xi).collect(), k)
    }

    pub fn d_hat(&self, x: &[f64]) -> Vector {
        self.xi
            .iter()
            .zip(x)
            .map(|(xi, xv)| xi + self.k * xv)
            .collect()
    }

    /// `ξ̇ᵢ = −k (ξᵢ + k xᵢ + fᵢ + bᵢ xᵢ₊₁)` with `xₙ₊₁ = u`, so that the
    /// estimate obeys `d̂̇ᵢ = −k (d̂ᵢ − dᵢ)` along the plant.
    pub fn observer_dynamics(
        &self,
        x: &[f64],
        u: f64,
        sys: &StrictFeedbackSystem,
    ) -> Result<Vector> {
        let n = sys.order();
        if x.len() != n || self.xi.len() != n {
            return Err(DscError::Shape(format!(
                "observer of size {} and state of length {} for order {n}",
                self.xi.len(),
                x.len()
            )));
        }
        let jets = points(x);
        (0..n)
            .map(|i| {
                let next = if i + 1 < n { x[i + 1] } else { u };
                let model =
                    sys.drift_jet(i, &jets).value() + sys.gain_jet(i, &jets)?.value() * next;
                Ok(-self.k * (self.xi[i] + self.k * x[i] + model))
            })
            .collect()
    }
}
