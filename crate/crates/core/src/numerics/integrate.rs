use serde::{Deserialize, Serialize};

use super::{all_finite, Vector};
use crate::error::{DscError, Result};

pub const DEFAULT_MAX_STEPS: usize = 50_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rk4,
    Euler,
}

impl std::str::FromStr for Method {
    type Err = DscError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rk4" => Ok(Method::Rk4),
            "euler" => Ok(Method::Euler),
            other => Err(DscError::config(format!(
                "unknown integration method {other:?} (expected rk4 or euler)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub method: Method,
    pub t0: f64,
    pub dt: f64,
    pub t_final: f64,
    pub max_steps: usize,
}

impl IntegratorConfig {
    pub fn new(dt: f64, t_final: f64) -> Self {
        Self {
            method: Method::Rk4,
            t0: 0.0,
            dt,
            t_final,
            max_steps: DEFAULT_MAX_STEPS,
        }
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    /// Number of steps; the horizon must be an integer multiple of `dt`.
    pub fn steps(&self) -> Result<usize> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(DscError::config(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t0.is_finite() && self.t_final.is_finite() && self.t_final > self.t0) {
            return Err(DscError::config(format!(
                "t_final ({}) must exceed t0 ({})",
                self.t_final, self.t0
            )));
        }
        let span = self.t_final - self.t0;
        let ratio = span / self.dt;
        if ratio > self.max_steps as f64 {
            return Err(DscError::config(format!(
                "{ratio:.0} steps exceed the cap of {}",
                self.max_steps
            )));
        }
        let steps = ratio.round();
        if (steps * self.dt - span).abs() > 1e-9 * span.max(1.0) || steps < 1.0 {
            return Err(DscError::config(format!(
                "horizon {span} is not an integer multiple of dt = {}",
                self.dt
            )));
        }
        Ok(steps as usize)
    }

    pub fn validate(&self) -> Result<()> {
        self.steps().map(|_| ())
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }
}

/// One named series of vector samples.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    pub name: String,
    pub samples: Vec<Vector>,
}

impl Channel {
    pub fn width(&self) -> usize {
        self.samples.first().map_or(0, Vec::len)
    }

    /// Component `k` of every sample.
    pub fn component(&self, k: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s[k]).collect()
    }
}

/// Uniform time grid with any number of named channels of equal length.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub t0: f64,
    pub dt: f64,
    channels: Vec<Channel>,
}

impl Trajectory {
    pub fn new(t0: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(DscError::config(format!(
                "trajectory dt must be positive, got {dt}"
            )));
        }
        Ok(Self {
            t0,
            dt,
            channels: Vec::new(),
        })
    }

    pub fn add_channel(&mut self, name: impl Into<String>, samples: Vec<Vector>) -> Result<()> {
        let name = name.into();
        if self.channel(&name).is_some() {
            return Err(DscError::config(format!("duplicate channel {name:?}")));
        }
        if let Some(first) = self.channels.first() {
            if first.samples.len() != samples.len() {
                return Err(DscError::Shape(format!(
                    "channel {name:?} has {} samples, expected {}",
                    samples.len(),
                    first.samples.len()
                )));
            }
        }
        self.channels.push(Channel { name, samples });
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.channels.first().map_or(0, |c| c.samples.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.time(i)).collect()
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn channel(&self, name: &str) -> Option<&Channel> {
        self.channels.iter().find(|c| c.name == name)
    }

    pub fn last(&self, name: &str) -> Option<&Vector> {
        self.channel(name).and_then(|c| c.samples.last())
    }
}

/// Integrates `ẋ = field(t, x)` with fixed steps and returns every sample,
/// endpoints included.
pub fn integrate_states<F>(field: F, x0: &[f64], cfg: &IntegratorConfig) -> Result<Vec<Vector>>
where
    F: Fn(f64, &[f64]) -> Vector,
{
    let steps = cfg.steps()?;
    if !all_finite(x0) {
        return Err(DscError::Divergence { time: cfg.t0 });
    }
    let n = x0.len();
    let mut out = Vec::with_capacity(steps + 1);
    let mut x = x0.to_vec();
    out.push(x.clone());
    let h = cfg.dt;
    let mut tmp = vec![0.0; n];
    for i in 0..steps {
        let t = cfg.time(i);
        match cfg.method {
            Method::Euler => {
                let k1 = field(t, &x);
                for j in 0..n {
                    x[j] += h * k1[j];
                }
            }
            Method::Rk4 => {
                let k1 = field(t, &x);
                for j in 0..n {
                    tmp[j] = x[j] + 0.5 * h * k1[j];
                }
                let k2 = field(t + 0.5 * h, &tmp);
                for j in 0..n {
                    tmp[j] = x[j] + 0.5 * h * k2[j];
                }
                let k3 = field(t + 0.5 * h, &tmp);
                for j in 0..n {
                    tmp[j] = x[j] + h * k3[j];
                }
                let k4 = field(t + h, &tmp);
                for j in 0..n {
                    x[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
                }
            }
        }
        if !all_finite(&x) {
            return Err(DscError::Divergence {
                time: cfg.time(i + 1),
            });
        }
        out.push(x.clone());
    }
    Ok(out)
}

/// Integrates a time-varying field and records the state as channel `"x"`.
pub fn integrate<F>(field: F, x0: &[f64], cfg: &IntegratorConfig) -> Result<Trajectory>
where
    F: Fn(f64, &[f64]) -> Vector,
{
    let states = integrate_states(field, x0, cfg)?;
    let mut traj = Trajectory::new(cfg.t0, cfg.dt)?;
    traj.add_channel("x", states)?;
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay_error(dt: f64) -> f64 {
        let cfg = IntegratorConfig::new(dt, 1.0);
        let traj = integrate(|_, x| vec![-x[0]], &[1.0], &cfg).unwrap();
        (traj.last("x").unwrap()[0] - (-1.0f64).exp()).abs()
    }

    #[test]
    fn zero_field_is_constant() {
        let cfg = IntegratorConfig::new(0.1, 1.0);
        let traj = integrate(|_, _| vec![0.0], &[3.0], &cfg).unwrap();
        assert_eq!(traj.len(), 11);
        assert!(traj
            .channel("x")
            .unwrap()
            .samples
            .iter()
            .all(|s| s[0] == 3.0));
    }

    #[test]
    fn exponential_decay_matches_closed_form() {
        assert!(decay_error(1e-3) < 1e-9);
    }

    #[test]
    fn rk4_error_ratio_near_sixteen() {
        let ratio = decay_error(0.02) / decay_error(0.01);
        assert!((14.0..=18.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn euler_is_first_order() {
        let run = |dt: f64| {
            let cfg = IntegratorConfig::new(dt, 1.0).with_method(Method::Euler);
            let traj = integrate(|_, x| vec![-x[0]], &[1.0], &cfg).unwrap();
            (traj.last("x").unwrap()[0] - (-1.0f64).exp()).abs()
        };
        let ratio = run(0.01) / run(0.005);
        assert!((1.8..=2.2).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn oscillator_energy_conserved() {
        let cfg = IntegratorConfig::new(1e-3, 10.0);
        let traj = integrate(|_, x| vec![x[1], -x[0]], &[1.0, 0.0], &cfg).unwrap();
        let drift = traj
            .channel("x")
            .unwrap()
            .samples
            .iter()
            .map(|s| (s[0] * s[0] + s[1] * s[1] - 1.0).abs())
            .fold(0.0, f64::max);
        assert!(drift < 1e-8, "drift {drift}");
    }

    #[test]
    fn divergence_reports_first_bad_time() {
        let cfg = IntegratorConfig::new(0.1, 1.0);
        let err = integrate(
            |t, _| vec![if t >= 0.45 { f64::NAN } else { 1.0 }],
            &[0.0],
            &cfg,
        )
        .unwrap_err();
        match err {
            DscError::Divergence { time } => assert!((time - 0.5).abs() < 1e-12),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn config_validation() {
        assert!(IntegratorConfig::new(0.0, 1.0).validate().is_err());
        assert!(IntegratorConfig::new(0.1, -1.0).validate().is_err());
        assert!(IntegratorConfig::new(0.3, 1.0).validate().is_err());
        let mut cfg = IntegratorConfig::new(1e-6, 10.0);
        cfg.max_steps = 1000;
        assert!(cfg.validate().is_err());
        assert_eq!(IntegratorConfig::new(1e-4, 10.0).steps().unwrap(), 100_000);
    }

    #[test]
    fn trajectory_channels_must_align() {
        let mut traj = Trajectory::new(0.0, 0.1).unwrap();
        traj.add_channel("a", vec![vec![0.0]; 3]).unwrap();
        assert!(traj.add_channel("b", vec![vec![0.0]; 2]).is_err());
        assert!(traj.add_channel("a", vec![vec![0.0]; 3]).is_err());
        assert!(Trajectory::new(0.0, 0.0).is_err());
    }
}
