//! Strict-feedback plants, disturbance signals and the reference trajectory.
//!
//! A plant of order `n` is the chain
//!
//! ```text
//! ẋᵢ = fᵢ(x₁..xᵢ) + bᵢ(x₁..xᵢ) xᵢ₊₁ + dᵢ,   i < n
//! ẋₙ = fₙ(x)      + bₙ(x) u        + dₙ
//! ```
//!
//! Stage evaluators operate on [`Jet`]s so that the same closed forms give
//! plain values, exact time derivatives along the flow and directional
//! derivatives.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{DscError, Result};
use crate::numerics::{Jet, Vector};

/// Lower bound enforced on every stage gain `bᵢ`.
pub const GAIN_FLOOR: f64 = 1e-9;

/// Stage evaluator; receives the jets of `x₁..xᵢ`.
pub type StageFn = Arc<dyn Fn(&[Jet]) -> Jet + Send + Sync>;

#[derive(Clone)]
pub struct StrictFeedbackSystem {
    drift: Vec<StageFn>,
    gain: Vec<StageFn>,
    state_units: Vec<String>,
    gain_floor: f64,
}

impl fmt::Debug for StrictFeedbackSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StrictFeedbackSystem")
            .field("order", &self.order())
            .field("state_units", &self.state_units)
            .field("gain_floor", &self.gain_floor)
            .finish_non_exhaustive()
    }
}

impl StrictFeedbackSystem {
    pub fn new(drift: Vec<StageFn>, gain: Vec<StageFn>, state_units: Vec<String>) -> Result<Self> {
        if drift.is_empty() || drift.len() != gain.len() || state_units.len() != drift.len() {
            return Err(DscError::Shape(format!(
                "{} drift, {} gain evaluators and {} unit labels",
                drift.len(),
                gain.len(),
                state_units.len()
            )));
        }
        if drift.len() > crate::numerics::jet::MAX_ORDER - 1 {
            return Err(DscError::config(format!(
                "system order {} exceeds the supported maximum {}",
                drift.len(),
                crate::numerics::jet::MAX_ORDER - 1
            )));
        }
        Ok(Self {
            drift,
            gain,
            state_units,
            gain_floor: GAIN_FLOOR,
        })
    }

    /// Pure integrator chain `ẋᵢ = xᵢ₊₁`, `ẋₙ = u`.
    pub fn integrator_chain(n: usize) -> Result<Self> {
        let zero: StageFn = Arc::new(|_| Jet::constant(0.0));
        let one: StageFn = Arc::new(|_| Jet::constant(1.0));
        Self::new(vec![zero; n], vec![one; n], vec![String::new(); n])
    }

    pub fn order(&self) -> usize {
        self.drift.len()
    }

    pub fn state_units(&self) -> &[String] {
        &self.state_units
    }

    pub fn gain_floor(&self) -> f64 {
        self.gain_floor
    }

    /// `fᵢ` (0-based stage) on jets of `x₁..xᵢ₊₁`.
    pub fn drift_jet(&self, stage: usize, x: &[Jet]) -> Jet {
        (self.drift[stage])(&x[..=stage])
    }

    /// `bᵢ` (0-based stage) on jets, checked against the gain floor.
    pub fn gain_jet(&self, stage: usize, x: &[Jet]) -> Result<Jet> {
        let b = (self.gain[stage])(&x[..=stage]);
        if !(b.value() >= self.gain_floor) {
            return Err(DscError::GainFloor {
                stage: stage + 1,
                value: b.value(),
                floor: self.gain_floor,
            });
        }
        Ok(b)
    }

    pub fn drift(&self, stage: usize, x: &[f64]) -> f64 {
        self.drift_jet(stage, &points(x)).value()
    }

    pub fn gain(&self, stage: usize, x: &[f64]) -> Result<f64> {
        Ok(self.gain_jet(stage, &points(x))?.value())
    }

    /// All stage gains `b₁..bₙ` at `x`.
    pub fn gains(&self, x: &[f64]) -> Result<Vector> {
        let jets = points(x);
        (0..self.order())
            .map(|i| self.gain_jet(i, &jets).map(|b| b.value()))
            .collect()
    }

    /// Right-hand side of the chain. `d` is indexed by state equation.
    pub fn eval_dynamics(&self, x: &[f64], u: f64, d: &[f64], _t: f64) -> Result<Vector> {
        let n = self.order();
        if x.len() != n || d.len() != n {
            return Err(DscError::Shape(format!(
                "state of length {} and disturbance of length {} for order {n}",
                x.len(),
                d.len()
            )));
        }
        let jets = points(x);
        (0..n)
            .map(|i| {
                let next = if i + 1 < n { x[i + 1] } else { u };
                let b = self.gain_jet(i, &jets)?.value();
                Ok(self.drift_jet(i, &jets).value() + b * next + d[i])
            })
            .collect()
    }
}

pub(crate) fn points(x: &[f64]) -> Vec<Jet> {
    x.iter().map(|&v| Jet::point(v, 0.0)).collect()
}

/// DC-motor driven manipulator parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DcMotorParams {
    /// Back-EMF constant, N·m/A.
    pub kb: f64,
    /// Armature resistance, Ω.
    pub r: f64,
    /// Armature inductance, H.
    pub l: f64,
    /// Inertia.
    pub m: f64,
    /// Viscous damping.
    pub b: f64,
    /// Gravity coefficient.
    pub n: f64,
}

impl DcMotorParams {
    pub const CASE_STUDY: DcMotorParams = DcMotorParams {
        kb: 0.90,
        r: 5.0,
        l: 0.025,
        m: 0.0640,
        b: 0.0044,
        n: 2.2816,
    };

    pub fn validate(&self) -> Result<()> {
        let named = [
            ("Kb", self.kb),
            ("R", self.r),
            ("L", self.l),
            ("M", self.m),
            ("B", self.b),
            ("N", self.n),
        ];
        for (name, v) in named {
            if !(v.is_finite() && v > 0.0) {
                return Err(DscError::config(format!(
                    "motor parameter {name} must be strictly positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

impl Default for DcMotorParams {
    fn default() -> Self {
        Self::CASE_STUDY
    }
}

/// Position, velocity and armature-current model
///
/// ```text
/// ẋ₁ = x₂
/// ẋ₂ = −(N/M) sin x₁ − (B/M) x₂ + (1/M) x₃
/// ẋ₃ = −(K_b/L) x₂ − (R/L) x₃ + (1/L) u
/// ```
pub fn dc_motor_system(p: DcMotorParams) -> Result<StrictFeedbackSystem> {
    p.validate()?;
    let DcMotorParams { kb, r, l, m, b, n } = p;
    let f1: StageFn = Arc::new(|_| Jet::constant(0.0));
    let f2: StageFn = Arc::new(move |x| -(n / m) * x[0].sin() - (b / m) * x[1]);
    let f3: StageFn = Arc::new(move |x| -(kb / l) * x[1] - (r / l) * x[2]);
    let b1: StageFn = Arc::new(|_| Jet::constant(1.0));
    let b2: StageFn = Arc::new(move |_| Jet::constant(1.0 / m));
    let b3: StageFn = Arc::new(move |_| Jet::constant(1.0 / l));
    StrictFeedbackSystem::new(
        vec![f1, f2, f3],
        vec![b1, b2, b3],
        vec!["rad".into(), "rad/s".into(), "A".into()],
    )
}

/// One additive component of a disturbance channel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DisturbanceTerm {
    Constant {
        value: f64,
    },
    Ramp {
        slope: f64,
    },
    /// `amplitude · sin(frequency · t + phase)`
    Sine {
        amplitude: f64,
        frequency: f64,
        phase: f64,
    },
    /// `amplitude · cos(frequency · t + phase)`
    Cosine {
        amplitude: f64,
        frequency: f64,
        phase: f64,
    },
    /// `gain · sgn(x[state])` with `sgn(0) = 0`; `state` is 0-based.
    Signum {
        gain: f64,
        state: usize,
    },
}

impl DisturbanceTerm {
    fn eval(&self, x: &[f64], t: f64) -> f64 {
        match *self {
            DisturbanceTerm::Constant { value } => value,
            DisturbanceTerm::Ramp { slope } => slope * t,
            DisturbanceTerm::Sine {
                amplitude,
                frequency,
                phase,
            } => amplitude * (frequency * t + phase).sin(),
            DisturbanceTerm::Cosine {
                amplitude,
                frequency,
                phase,
            } => amplitude * (frequency * t + phase).cos(),
            DisturbanceTerm::Signum { gain, state } => gain * sign(x[state]),
        }
    }

    /// Bound on `|d/dt|` of the smooth part of this term.
    fn rate_bound(&self) -> f64 {
        match *self {
            DisturbanceTerm::Constant { .. } | DisturbanceTerm::Signum { .. } => 0.0,
            DisturbanceTerm::Ramp { slope } => slope.abs(),
            DisturbanceTerm::Sine {
                amplitude,
                frequency,
                ..
            }
            | DisturbanceTerm::Cosine {
                amplitude,
                frequency,
                ..
            } => (amplitude * frequency).abs(),
        }
    }
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Disturbance channels and the state equation each one enters.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DisturbanceProfile {
    pub channels: Vec<Vec<DisturbanceTerm>>,
    /// 0-based state equation receiving each channel.
    pub channel_map: Vec<usize>,
}

impl DisturbanceProfile {
    pub fn none() -> Self {
        Self::default()
    }

    /// Coulomb friction plus periodic and ramp load:
    /// `d₁ = 0.2 sgn(x₂) + 10 sin(2t + 1) + 10t`, `d₂ = 10 cos(2t + 1)`,
    /// entering the velocity and current equations respectively.
    pub fn case_study() -> Self {
        Self {
            channels: vec![
                vec![
                    DisturbanceTerm::Signum {
                        gain: 0.2,
                        state: 1,
                    },
                    DisturbanceTerm::Sine {
                        amplitude: 10.0,
                        frequency: 2.0,
                        phase: 1.0,
                    },
                    DisturbanceTerm::Ramp { slope: 10.0 },
                ],
                vec![DisturbanceTerm::Cosine {
                    amplitude: 10.0,
                    frequency: 2.0,
                    phase: 1.0,
                }],
            ],
            channel_map: vec![1, 2],
        }
    }

    /// Single channel entering state equation `equation` (0-based).
    pub fn single(terms: Vec<DisturbanceTerm>, equation: usize) -> Self {
        Self {
            channels: vec![terms],
            channel_map: vec![equation],
        }
    }

    pub fn is_empty(&self) -> bool {
        self.channels.iter().all(Vec::is_empty)
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.channels.len() != self.channel_map.len() {
            return Err(DscError::config(format!(
                "{} disturbance channels but {} map entries",
                self.channels.len(),
                self.channel_map.len()
            )));
        }
        if let Some(&eq) = self.channel_map.iter().find(|&&eq| eq >= n) {
            return Err(DscError::config(format!(
                "disturbance mapped to state equation {} of a order-{n} system",
                eq + 1
            )));
        }
        for term in self.channels.iter().flatten() {
            if let DisturbanceTerm::Signum { gain, state } = term {
                if *state >= n || !gain.is_finite() {
                    return Err(DscError::config(format!(
                        "signum term on state {} with gain {gain} is invalid",
                        state + 1
                    )));
                }
            }
        }
        Ok(())
    }

    /// Per-channel signal values.
    pub fn disturbance_eval(&self, x: &[f64], t: f64) -> Vector {
        self.channels
            .iter()
            .map(|terms| terms.iter().map(|term| term.eval(x, t)).sum())
            .collect()
    }

    /// Disturbance indexed by state equation (zeros where nothing enters).
    pub fn state_vector(&self, x: &[f64], t: f64) -> Vector {
        let mut d = vec![0.0; x.len()];
        for (value, &eq) in self
            .disturbance_eval(x, t)
            .into_iter()
            .zip(&self.channel_map)
        {
            d[eq] += value;
        }
        d
    }

    /// Rate bound of the smooth part of each channel.
    pub fn channel_rate_bounds(&self) -> Vector {
        self.channels
            .iter()
            .map(|terms| terms.iter().map(DisturbanceTerm::rate_bound).sum())
            .collect()
    }

    /// `c₁`: the largest smooth-part rate bound over channels. Signum
    /// terms are excluded; see [`Self::signum_magnitude`].
    pub fn rate_bound_c1(&self) -> f64 {
        self.channel_rate_bounds().into_iter().fold(0.0, f64::max)
    }

    /// Largest per-channel sum of signum gains.
    pub fn signum_magnitude(&self) -> f64 {
        self.channels
            .iter()
            .map(|terms| {
                terms
                    .iter()
                    .map(|t| match t {
                        DisturbanceTerm::Signum { gain, .. } => gain.abs(),
                        _ => 0.0,
                    })
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }
}

/// Sinusoidal desired trajectory `x_d(t) = A sin(ω t)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSignal {
    pub amplitude: f64,
    pub angular_frequency: f64,
}

impl ReferenceSignal {
    /// `x_d = (π/2) sin(8πt/5)`.
    pub const CASE_STUDY: ReferenceSignal = ReferenceSignal {
        amplitude: PI / 2.0,
        angular_frequency: 8.0 * PI / 5.0,
    };

    pub fn zero() -> Self {
        Self {
            amplitude: 0.0,
            angular_frequency: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude.is_finite() && self.angular_frequency.is_finite()) {
            return Err(DscError::config("reference parameters must be finite"));
        }
        Ok(())
    }

    /// `[x_d, ẋ_d, …, x_d⁽ᵒʳᵈᵉʳ⁾]` at `t`.
    pub fn reference_derivs(&self, t: f64, order: usize) -> Vector {
        let w = self.angular_frequency;
        (0..=order)
            .map(|k| {
                let v = self.amplitude * w.powi(k as i32);
                // sin(ωt + kπ/2) by quadrant
                match k % 4 {
                    0 => v * (w * t).sin(),
                    1 => v * (w * t).cos(),
                    2 => -v * (w * t).sin(),
                    _ => -v * (w * t).cos(),
                }
            })
            .collect()
    }

    /// Period of the signal, if it is not constant.
    pub fn period(&self) -> Option<f64> {
        (self.angular_frequency != 0.0 && self.amplitude != 0.0)
            .then(|| 2.0 * PI / self.angular_frequency.abs())
    }
}

/// Taylor coefficients `x_d⁽ᵏ⁾/k!` from a derivative list.
pub(crate) fn taylor_coefficients(derivs: &[f64]) -> Vec<f64> {
    let mut fact = 1.0;
    derivs
        .iter()
        .enumerate()
        .map(|(k, d)| {
            if k > 0 {
                fact *= k as f64;
            }
            d / fact
        })
        .collect()
}
