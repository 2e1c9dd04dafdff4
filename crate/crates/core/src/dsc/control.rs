use super::{DscConfig, FilterBank, FilterMode, ObserverState};
use crate::backstepping::virtual_controls;
use crate::error::{DscError, Result};
use crate::numerics::Vector;
use crate::plant::{ReferenceSignal, StrictFeedbackSystem};

/// Output of one evaluation of the DSC law.
#[derive(Clone, Debug, PartialEq)]
pub struct DscCommand {
    pub u: f64,
    /// Unfiltered virtual controls `α₂..αₙ`, the filter inputs.
    pub alpha: Vector,
    /// `zᵢ = xᵢ − αᵢf` with `α₁f = x_d`.
    pub z: Vector,
}

enum FilterSource<'a> {
    Bank(&'a [f64], f64),
    /// `αᵢf(0) = αᵢ(0)`
    Initial,
    Slaved(&'a [f64]),
}

/// DSC law
///
/// ```text
/// αᵢ = (1/bᵢ₋₁) [−fᵢ₋₁ − χᵢ₋₁(zᵢ₋₁) − bᵢ₋₂ zᵢ₋₂ + α̇₍ᵢ₋₁₎f − d̂ᵢ₋₁]
/// u  = (1/bₙ)  [−fₙ − bₙ₋₁ zₙ₋₁ − χₙ(zₙ) + α̇ₙf − d̂ₙ]
/// ```
///
/// with `α̇₁f = ẋ_d` and `α̇ᵢf = (αᵢ − αᵢf)/μ` for `i ≥ 2`. Estimates are
/// zero when the observer is disabled.
pub fn dsc_control(
    sys: &StrictFeedbackSystem,
    cfg: &DscConfig,
    x: &[f64],
    bank: &FilterBank,
    obs: &ObserverState,
    reference: &ReferenceSignal,
    t: f64,
) -> Result<DscCommand> {
    let n = sys.order();
    if bank.alpha_f.len() + 1 != n {
        return Err(DscError::Shape(format!(
            "{} filters for a system of order {n}",
            bank.alpha_f.len()
        )));
    }
    let d_hat = if cfg.observer_enabled {
        obs.d_hat(x)
    } else {
        vec![0.0; n]
    };
    match cfg.filter_mode {
        FilterMode::Filtered => evaluate(
            sys,
            cfg,
            x,
            &d_hat,
            FilterSource::Bank(&bank.alpha_f, bank.mu),
            reference,
            t,
        ),
        FilterMode::Slaved => {
            let derivs = reference.reference_derivs(t, n);
            let stack = virtual_controls(sys, x, &derivs, &cfg.tuning)?;
            evaluate(
                sys,
                cfg,
                x,
                &d_hat,
                FilterSource::Slaved(&stack.alpha_dots),
                reference,
                t,
            )
        }
    }
}

/// Filter state `αᵢf(0) = αᵢ(0)` for the initial state `x0`.
pub fn initial_filter_state(
    sys: &StrictFeedbackSystem,
    cfg: &DscConfig,
    x0: &[f64],
    d_hat0: &[f64],
    reference: &ReferenceSignal,
    t0: f64,
) -> Result<Vector> {
    let d_hat = if cfg.observer_enabled {
        d_hat0.to_vec()
    } else {
        vec![0.0; sys.order()]
    };
    Ok(evaluate(sys, cfg, x0, &d_hat, FilterSource::Initial, reference, t0)?.alpha)
}

fn evaluate(
    sys: &StrictFeedbackSystem,
    cfg: &DscConfig,
    x: &[f64],
    d_hat: &[f64],
    source: FilterSource<'_>,
    reference: &ReferenceSignal,
    t: f64,
) -> Result<DscCommand> {
    let n = sys.order();
    if x.len() != n || d_hat.len() != n {
        return Err(DscError::Shape(format!(
            "state of length {} and estimate of length {} for order {n}",
            x.len(),
            d_hat.len()
        )));
    }
    let r = reference.reference_derivs(t, 1);
    let gains = sys.gains(x)?;
    let tuning = &cfg.tuning;

    // filtered controls and their derivatives, stage 1 is the reference
    let mut alpha = vec![r[0]];
    let mut alpha_f = vec![r[0]];
    let mut alpha_f_dot = vec![r[1]];
    let mut z = vec![x[0] - r[0]];

    let stage_input = |i: usize, z: &[f64], alpha_f_dot: &[f64]| {
        // numerator of stage i+1 (0-based i)
        let mut num = -sys.drift(i, x) - tuning.stage(i).eval(z[i]) + alpha_f_dot[i] - d_hat[i];
        if i >= 1 {
            num -= gains[i - 1] * z[i - 1];
        }
        num
    };

    for i in 1..n {
        let a = stage_input(i - 1, &z, &alpha_f_dot) / gains[i - 1];
        let (af, af_dot) = match source {
            FilterSource::Bank(bank, mu) => (bank[i - 1], (a - bank[i - 1]) / mu),
            FilterSource::Initial => (a, 0.0),
            FilterSource::Slaved(dots) => (a, dots[i]),
        };
        alpha.push(a);
        alpha_f.push(af);
        alpha_f_dot.push(af_dot);
        z.push(x[i] - af);
    }
    let u = stage_input(n - 1, &z, &alpha_f_dot) / gains[n - 1];
    Ok(DscCommand {
        u,
        alpha: alpha[1..].to_vec(),
        z,
    })
}
