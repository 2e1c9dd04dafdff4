//! Integrator backstepping for strict-feedback systems.
//!
//! The virtual controls are
//!
//! ```text
//! α₁ = x_d(t)
//! αᵢ = (1/bᵢ₋₁) [−fᵢ₋₁ − χᵢ₋₁(zᵢ₋₁) − bᵢ₋₂ zᵢ₋₂ + α̇ᵢ₋₁],   zᵢ = xᵢ − αᵢ
//! u  = (1/bₙ)  [−fₙ − bₙ₋₁ zₙ₋₁ − χₙ(zₙ) + α̇ₙ]
//! ```
//!
//! and every `α̇ᵢ` is the exact total derivative along the disturbance-free
//! flow. It is obtained by evaluating the stage expressions on truncated
//! Taylor series: the state series are generated from the plant right-hand
//! side, the reference series from its analytic derivatives, and each
//! virtual control is differentiated by shifting its series. No symbolic
//! expressions are built, but the result is the same chain-rule expansion
//! whose growth with the system order motivates DSC.

use std::cell::RefCell;

use serde::{Deserialize, Serialize};

use crate::error::{DscError, Result};
use crate::numerics::{integrate_states, IntegratorConfig, Jet, Matrix, Trajectory, Vector};
use crate::plant::{taylor_coefficients, ReferenceSignal, StrictFeedbackSystem};

/// Stage feedback map `χ(z)` with `χ(0) = 0` and `χ′ > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TuningFn {
    /// `k_c z`
    Linear { gain: f64 },
    /// `k_c z + c z³`
    Cubic { gain: f64, cubic: f64 },
}

impl TuningFn {
    pub fn eval_jet(&self, z: Jet) -> Jet {
        match *self {
            TuningFn::Linear { gain } => z * gain,
            TuningFn::Cubic { gain, cubic } => z * gain + z.powi(3) * cubic,
        }
    }

    pub fn eval(&self, z: f64) -> f64 {
        match *self {
            TuningFn::Linear { gain } => gain * z,
            TuningFn::Cubic { gain, cubic } => gain * z + cubic * z * z * z,
        }
    }

    /// `χ′(z)`.
    pub fn slope(&self, z: f64) -> f64 {
        match *self {
            TuningFn::Linear { gain } => gain,
            TuningFn::Cubic { gain, cubic } => gain + 3.0 * cubic * z * z,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            TuningFn::Linear { gain } => gain.is_finite() && gain > 0.0,
            TuningFn::Cubic { gain, cubic } => {
                gain.is_finite() && gain > 0.0 && cubic.is_finite() && cubic >= 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(DscError::config(format!(
                "tuning function {self:?} must have a strictly positive slope"
            )))
        }
    }
}

/// The per-stage family `χ₁..χₙ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuningFunctions {
    pub stages: Vec<TuningFn>,
}

impl TuningFunctions {
    /// `χᵢ(z) = k_c z` on all `n` stages.
    pub fn linear(n: usize, kc: f64) -> Self {
        Self {
            stages: vec![TuningFn::Linear { gain: kc }; n],
        }
    }

    pub fn from_gains(gains: &[f64]) -> Self {
        Self {
            stages: gains
                .iter()
                .map(|&gain| TuningFn::Linear { gain })
                .collect(),
        }
    }

    pub fn order(&self) -> usize {
        self.stages.len()
    }

    pub fn stage(&self, i: usize) -> &TuningFn {
        &self.stages[i]
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.stages.len() != n {
            return Err(DscError::Shape(format!(
                "{} tuning functions for a system of order {n}",
                self.stages.len()
            )));
        }
        self.stages.iter().try_for_each(TuningFn::validate)
    }
}

/// Virtual controls, their exact time derivatives and the error coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct VirtualControlStack {
    /// `α₁..αₙ` with `α₁ = x_d`.
    pub alphas: Vector,
    pub alpha_dots: Vector,
    /// `zᵢ = xᵢ − αᵢ`.
    pub z: Vector,
}

/// Jets of the states, virtual controls and errors at one instant.
pub(crate) struct StageJets {
    pub alpha: Vec<Jet>,
    pub z: Vec<Jet>,
}

/// Evaluates the backstepping recursion on Taylor series. `tangent`, when
/// given, seeds a state direction so every jet also carries its directional
/// derivative.
pub(crate) fn stage_jets(
    sys: &StrictFeedbackSystem,
    x: &[f64],
    tangent: Option<&[f64]>,
    ref_derivs: &[f64],
    tuning: &TuningFunctions,
) -> Result<StageJets> {
    let n = sys.order();
    if x.len() != n {
        return Err(DscError::Shape(format!(
            "state of length {} for order {n}",
            x.len()
        )));
    }
    if ref_derivs.len() < n + 1 {
        return Err(DscError::Shape(format!(
            "{} reference derivatives supplied, {} required",
            ref_derivs.len(),
            n + 1
        )));
    }
    if tuning.order() != n {
        return Err(DscError::Shape(format!(
            "{} tuning functions for order {n}",
            tuning.order()
        )));
    }
    let mut xs: Vec<Jet> = x
        .iter()
        .enumerate()
        .map(|(i, &v)| Jet::point(v, tangent.map_or(0.0, |t| t[i])))
        .collect();

    // Disturbance-free flow: state j needs n-1-j time derivatives.
    for m in 1..n {
        for j in 0..n - 1 {
            if n - 1 - j < m {
                break;
            }
            let rhs = sys.drift_jet(j, &xs) + sys.gain_jet(j, &xs)? * xs[j + 1];
            let k = (m - 1) as f64 + 1.0;
            xs[j].extend(
                m,
                rhs.coefficient(m - 1) / k,
                rhs.coefficient_tangent(m - 1) / k,
            );
        }
    }

    let mut alpha = Vec::with_capacity(n);
    let mut z: Vec<Jet> = Vec::with_capacity(n);
    alpha.push(Jet::from_coefficients(&taylor_coefficients(
        &ref_derivs[..=n],
    )));
    for i in 1..n {
        // stage i (0-based) builds alpha[i] from stage i-1
        z.push(xs[i - 1] - alpha[i - 1]);
        let mut num = -sys.drift_jet(i - 1, &xs) - tuning.stage(i - 1).eval_jet(z[i - 1])
            + alpha[i - 1].derivative();
        if i >= 2 {
            num = num - sys.gain_jet(i - 2, &xs)? * z[i - 2];
        }
        alpha.push(num / sys.gain_jet(i - 1, &xs)?);
    }
    z.push(xs[n - 1] - alpha[n - 1]);
    Ok(StageJets { alpha, z })
}

/// Virtual controls `α₁..αₙ` with exact derivatives at `(x, t)`.
/// `ref_derivs` holds `x_d, ẋ_d, …, x_d⁽ⁿ⁾`.
pub fn virtual_controls(
    sys: &StrictFeedbackSystem,
    x: &[f64],
    ref_derivs: &[f64],
    tuning: &TuningFunctions,
) -> Result<VirtualControlStack> {
    let jets = stage_jets(sys, x, None, ref_derivs, tuning)?;
    Ok(VirtualControlStack {
        alphas: jets.alpha.iter().map(Jet::value).collect(),
        alpha_dots: jets.alpha.iter().map(|a| a.coefficient(1)).collect(),
        z: jets.z.iter().map(Jet::value).collect(),
    })
}

/// Top-stage backstepping law. The input gain is read as `bₙ(x)`.
pub fn backstepping_control(
    sys: &StrictFeedbackSystem,
    x: &[f64],
    ref_derivs: &[f64],
    tuning: &TuningFunctions,
) -> Result<f64> {
    let stack = virtual_controls(sys, x, ref_derivs, tuning)?;
    control_from_stack(sys, x, &stack, tuning)
}

fn control_from_stack(
    sys: &StrictFeedbackSystem,
    x: &[f64],
    stack: &VirtualControlStack,
    tuning: &TuningFunctions,
) -> Result<f64> {
    let n = sys.order();
    let top = n - 1;
    let mut num = -sys.drift(top, x) - tuning.stage(top).eval(stack.z[top]) + stack.alpha_dots[top];
    if n >= 2 {
        num -= sys.gain(top - 1, x)? * stack.z[top - 1];
    }
    Ok(num / sys.gain(top, x)?)
}

/// Simulates the disturbance-free closed loop. Channels: `x`, `z`, `u`,
/// `alpha` (`α₂..αₙ`).
pub fn simulate_backstepping(
    sys: &StrictFeedbackSystem,
    reference: &ReferenceSignal,
    tuning: &TuningFunctions,
    x0: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    let n = sys.order();
    tuning.validate(n)?;
    if x0.len() != n {
        return Err(DscError::Shape(format!(
            "x0 of length {} for order {n}",
            x0.len()
        )));
    }
    let zero_d = vec![0.0; n];
    let failure: RefCell<Option<DscError>> = RefCell::new(None);
    let states = integrate_states(
        |t, x| {
            let step = || -> Result<Vector> {
                let derivs = reference.reference_derivs(t, n);
                let u = backstepping_control(sys, x, &derivs, tuning)?;
                sys.eval_dynamics(x, u, &zero_d, t)
            };
            match step() {
                Ok(v) => v,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    vec![f64::NAN; n]
                }
            }
        },
        x0,
        cfg,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let states = states?;

    let mut z = Vec::with_capacity(states.len());
    let mut u = Vec::with_capacity(states.len());
    let mut alpha = Vec::with_capacity(states.len());
    for (i, x) in states.iter().enumerate() {
        let derivs = reference.reference_derivs(cfg.time(i), n);
        let stack = virtual_controls(sys, x, &derivs, tuning)?;
        u.push(vec![control_from_stack(sys, x, &stack, tuning)?]);
        alpha.push(stack.alphas[1..].to_vec());
        z.push(stack.z);
    }
    let mut traj = Trajectory::new(cfg.t0, cfg.dt)?;
    traj.add_channel("x", states)?;
    traj.add_channel("z", z)?;
    traj.add_channel("u", u)?;
    traj.add_channel("alpha", alpha)?;
    Ok(traj)
}

/// Closed-loop error dynamics
///
/// ```text
/// ż₁ = −χ₁(z₁) + b₁ z₂
/// żᵢ = −bᵢ₋₁ zᵢ₋₁ − χᵢ(zᵢ) + bᵢ zᵢ₊₁
/// żₙ = −bₙ₋₁ zₙ₋₁ − χₙ(zₙ)
/// ```
pub fn error_dynamics(tuning: &TuningFunctions, b: &[f64], z: &[f64]) -> Vector {
    let n = z.len();
    (0..n)
        .map(|i| {
            let mut v = -tuning.stage(i).eval(z[i]);
            if i + 1 < n {
                v += b[i] * z[i + 1];
            }
            if i > 0 {
                v -= b[i - 1] * z[i - 1];
            }
            v
        })
        .collect()
}

/// Jacobian of [`error_dynamics`]: diagonal `−χᵢ′(zᵢ)`, superdiagonal `bᵢ`,
/// subdiagonal `−bᵢ`.
pub fn z_jacobian(tuning: &TuningFunctions, b: &[f64], z: &[f64]) -> Result<Matrix> {
    let n = z.len();
    if tuning.order() != n || b.len() + 1 < n {
        return Err(DscError::Shape(format!(
            "{} tuning functions and {} gains for {n} errors",
            tuning.order(),
            b.len()
        )));
    }
    let mut j = Matrix::zeros(n, n);
    for i in 0..n {
        j[(i, i)] = -tuning.stage(i).slope(z[i]);
        if i + 1 < n {
            j[(i, i + 1)] = b[i];
            j[(i + 1, i)] = -b[i];
        }
    }
    Ok(j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::matrix_measure_2;
    use crate::plant::{dc_motor_system, DcMotorParams};
    use std::f64::consts::PI;

    fn motor() -> StrictFeedbackSystem {
        dc_motor_system(DcMotorParams::CASE_STUDY).unwrap()
    }

    #[test]
    fn first_order_base_case() {
        let sys = StrictFeedbackSystem::integrator_chain(1).unwrap();
        let tuning = TuningFunctions::linear(1, 5.0);
        let stack = virtual_controls(&sys, &[0.7], &[0.2, 0.0], &tuning).unwrap();
        assert_eq!(stack.alphas, vec![0.2]);
        assert!((stack.z[0] - 0.5).abs() < 1e-15);
        assert_eq!(
            backstepping_control(&sys, &[1.0], &[0.0, 0.0], &tuning).unwrap(),
            -5.0
        );
        assert_eq!(
            backstepping_control(&sys, &[0.0], &[0.0, 0.0], &tuning).unwrap(),
            0.0
        );
    }

    #[test]
    fn stage_two_hand_expansion() {
        let sys = motor();
        let tuning = TuningFunctions::linear(3, 5.0);
        let derivs = ReferenceSignal::CASE_STUDY.reference_derivs(0.0, 3);
        let stack = virtual_controls(&sys, &[2.0 * PI, 0.0, 0.0], &derivs, &tuning).unwrap();
        let expected = -5.0 * 2.0 * PI + 7.895683520871486;
        assert!((stack.alphas[1] - expected).abs() < 1e-9);
        assert!((stack.alphas[1] + 23.52).abs() < 1e-2);
    }

    #[test]
    fn manifold_has_zero_errors() {
        let sys = motor();
        let tuning = TuningFunctions::linear(3, 5.0);
        let t = 0.37;
        let derivs = ReferenceSignal::CASE_STUDY.reference_derivs(t, 3);
        let mut x = vec![derivs[0], 0.0, 0.0];
        // α₂ depends on x₁ only, α₃ on x₁, x₂
        let s = virtual_controls(&sys, &x, &derivs, &tuning).unwrap();
        x[1] = s.alphas[1];
        let s = virtual_controls(&sys, &x, &derivs, &tuning).unwrap();
        x[2] = s.alphas[2];
        let s = virtual_controls(&sys, &x, &derivs, &tuning).unwrap();
        assert!(s.z.iter().all(|z| z.abs() < 1e-12), "{:?}", s.z);

        // closed loop at z = 0 gives ż = 0
        let u = backstepping_control(&sys, &x, &derivs, &tuning).unwrap();
        let dx = sys.eval_dynamics(&x, u, &[0.0; 3], t).unwrap();
        for (i, (v, a)) in dx.iter().zip(&s.alpha_dots).enumerate() {
            assert!((v - a).abs() < 1e-9, "stage {i}");
        }
    }

    #[test]
    fn alpha_dot_matches_finite_difference_at_fixed_state_flow() {
        // α̇ᵢ = ∂αᵢ/∂x · ẋ + ∂αᵢ/∂t with disturbance-free ẋ; check by
        // central differences in x and t.
        let sys = motor();
        let tuning = TuningFunctions::linear(3, 5.0);
        let reference = ReferenceSignal::CASE_STUDY;
        let x = [0.4, -1.3, 2.2];
        let t = 0.81;
        let stack = virtual_controls(&sys, &x, &reference.reference_derivs(t, 3), &tuning).unwrap();
        let u = 0.0; // α̇ᵢ for i ≤ n never involves u
        let xdot = sys.eval_dynamics(&x, u, &[0.0; 3], t).unwrap();
        let h = 1e-6;
        let alpha_at = |x: &[f64], t: f64| {
            virtual_controls(&sys, x, &reference.reference_derivs(t, 3), &tuning)
                .unwrap()
                .alphas
        };
        for i in 0..3 {
            let mut total = (alpha_at(&x, t + h)[i] - alpha_at(&x, t - h)[i]) / (2.0 * h);
            for j in 0..3 {
                let mut xp = x;
                let mut xm = x;
                xp[j] += h;
                xm[j] -= h;
                total += (alpha_at(&xp, t)[i] - alpha_at(&xm, t)[i]) / (2.0 * h) * xdot[j];
            }
            let tol = 1e-5 * stack.alpha_dots[i].abs().max(1.0);
            assert!(
                (total - stack.alpha_dots[i]).abs() < tol,
                "stage {i}: {total} vs {}",
                stack.alpha_dots[i]
            );
        }
    }

    #[test]
    fn z_jacobian_structure() {
        let tuning = TuningFunctions::linear(2, 5.0);
        let j = z_jacobian(&tuning, &[1.0, 1.0], &[0.3, -0.1]).unwrap();
        let expected = Matrix::from_rows(&[vec![-5.0, 1.0], vec![-1.0, -5.0]]).unwrap();
        assert_eq!(j, expected);
        let motor_j = z_jacobian(
            &TuningFunctions::linear(3, 5.0),
            &[1.0, 15.625, 40.0],
            &[0.0; 3],
        )
        .unwrap();
        assert!((matrix_measure_2(&motor_j).unwrap() + 5.0).abs() < 1e-12);
    }

    #[test]
    fn tuning_validation() {
        assert!(TuningFunctions::linear(3, 5.0).validate(3).is_ok());
        assert!(TuningFunctions::linear(3, -5.0).validate(3).is_err());
        assert!(TuningFunctions::linear(2, 5.0).validate(3).is_err());
        let cubic = TuningFn::Cubic {
            gain: 2.0,
            cubic: 1.0,
        };
        assert_eq!(cubic.eval(0.0), 0.0);
        assert!((cubic.slope(1.0) - 5.0).abs() < 1e-15);
    }

    #[test]
    fn short_reference_rejected() {
        let sys = motor();
        let tuning = TuningFunctions::linear(3, 5.0);
        assert!(matches!(
            virtual_controls(&sys, &[0.0; 3], &[0.0; 3], &tuning),
            Err(DscError::Shape(_))
        ));
    }
}
