//! Fast self-checks run by `dsc-lab validate`.

use serde::Serialize;

use crate::backstepping::{z_jacobian, TuningFunctions};
use crate::contraction::observer_bound;
use crate::dsc::{simulate_observer, FilterBank};
use crate::error::Result;
use crate::numerics::{integrate, matrix_measure_2, IntegratorConfig, Matrix, Method};
use crate::plant::{DisturbanceProfile, DisturbanceTerm, StrictFeedbackSystem};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn decay_error(dt: f64) -> Result<f64> {
    let cfg = IntegratorConfig::new(dt, 1.0).with_method(Method::Rk4);
    let traj = integrate(|_, x| vec![-x[0]], &[1.0], &cfg)?;
    Ok((traj.last("x").expect("integrate records x")[0] - (-1.0f64).exp()).abs())
}

/// RK4 endpoint error ratio under step halving on `ẋ = −x`.
pub fn rk4_order_ratio() -> Result<f64> {
    Ok(decay_error(0.1)? / decay_error(0.05)?)
}

/// Filter output at `t = μ` after a unit step, relative to `1 − e⁻¹`.
pub fn filter_step_relative_error(mu: f64) -> Result<f64> {
    let cfg = IntegratorConfig::new(mu / 1000.0, mu);
    let traj = integrate(
        |_, af| {
            FilterBank::new(af.to_vec(), mu)
                .and_then(|b| b.filter_dynamics(&[1.0]))
                .unwrap_or(vec![f64::NAN])
        },
        &[0.0],
        &cfg,
    )?;
    let target = 1.0 - (-1.0f64).exp();
    Ok((traj.last("x").expect("integrate records x")[0] - target).abs() / target)
}

/// Steady estimation error for a ramp disturbance of the given slope on a
/// scalar plant, averaged over the last half of a horizon of `40/k`.
pub fn observer_ramp_error(slope: f64, k: f64) -> Result<f64> {
    let sys = StrictFeedbackSystem::integrator_chain(1)?;
    let profile = DisturbanceProfile::single(vec![DisturbanceTerm::Ramp { slope }], 0);
    let horizon = 40.0 / k;
    let cfg = IntegratorConfig::new(horizon / 20_000.0, horizon);
    let traj = simulate_observer(&sys, k, &profile, &[0.0], |_, _| 0.0, &cfg)?;
    let err = &traj
        .channel("d_tilde")
        .expect("observer runs record d_tilde")
        .samples;
    let tail = &err[err.len() / 2..];
    Ok(tail.iter().map(|e| e[0]).sum::<f64>() / tail.len() as f64)
}

pub type JacobianFn = fn(&TuningFunctions, &[f64], &[f64]) -> Result<Matrix>;

/// Largest deviation of `μ₂(J(z))` from `−k_c` over deterministic sample
/// states, for the Jacobian builder `jac`.
pub fn skew_rate_deviation(jac: JacobianFn, kc: f64, samples: usize) -> Result<f64> {
    let tuning = TuningFunctions::linear(3, kc);
    let b = [1.0, 15.625, 2.5];
    let mut worst = 0.0f64;
    for s in 0..samples {
        let phase = s as f64 * 0.7;
        let z = [
            3.0 * phase.sin(),
            2.0 * (1.3 * phase).cos(),
            (0.4 * phase).sin(),
        ];
        let m = matrix_measure_2(&jac(&tuning, &b, &z)?)?;
        worst = worst.max((m + kc).abs());
    }
    Ok(worst)
}

/// Runs the invariant suite with the given error-dynamics Jacobian.
pub fn run_checks_with(jac: JacobianFn) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let mut push = |name: &'static str, r: Result<(bool, String)>| {
        let (passed, detail) = r.unwrap_or_else(|e| (false, format!("error: {e}")));
        out.push(CheckResult {
            name,
            passed,
            detail,
        });
    };
    push(
        "rk4 order",
        rk4_order_ratio().map(|r| {
            (
                (14.0..=18.0).contains(&r),
                format!("error ratio {r:.3} (expect 14..18)"),
            )
        }),
    );
    push(
        "filter step response",
        filter_step_relative_error(0.01).map(|e| {
            (
                e < 1e-3,
                format!("relative error {e:.2e} at t = mu (expect < 1e-3)"),
            )
        }),
    );
    push(
        "observer ramp error",
        observer_ramp_error(10.0, 50.0).and_then(|e| {
            let bound = observer_bound(10.0, 50.0)?;
            Ok((
                (e - bound).abs() <= 0.05 * bound,
                format!("steady error {e:.5} vs c1/k = {bound}"),
            ))
        }),
    );
    push(
        "skew contraction rate",
        [5.0, 40.0]
            .iter()
            .map(|&kc| skew_rate_deviation(jac, kc, 100))
            .try_fold(0.0f64, |acc, d| Ok(acc.max(d?)))
            .map(|d| {
                (
                    d < 1e-9,
                    format!("max |mu2(J) + kc| = {d:.2e} (expect < 1e-9)"),
                )
            }),
    );
    out
}

pub fn run_checks() -> Vec<CheckResult> {
    run_checks_with(z_jacobian)
}
