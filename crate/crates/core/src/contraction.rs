//! Constant estimation and the filter/observer tuning rules.
//!
//! The DSC loop is a two-time-scale system: the tracking errors `z` are
//! slow, the filtered virtual controls `α_f` and the disturbance estimates
//! `d̂` are fast. The constants estimated here bound how the fast variables
//! perturb the slow ones:
//!
//! * `c₁` bounds the disturbance rate,
//! * `c₂` bounds `‖∂Q/∂α_des‖` with `Q = (∂α/∂z) ż`,
//! * `c₃` bounds `‖(∂α/∂z) ż‖`,
//! * `L_v`, `L₁` are Lipschitz constants of the slow field in the fast variables,
//! * `λ_z` is the contraction rate of the error dynamics in the identity metric.
//!
//! From these the admissible filter parameter is `μ* = 1/c₂`, the fast
//! variables satisfy
//! `‖v(t) − v_ds(t)‖ ≤ ‖v(0) − v_ds(0)‖ e^{−t/μ} + max(c₁, c₃)`, and the
//! long-run tracking deviation is bounded by
//! `μ C_z L_v max(c₁, c₃) / (λ_z |max(−1, −1/κ)|)`.

use serde::{Deserialize, Serialize};

use crate::backstepping::{stage_jets, virtual_controls, TuningFunctions};
use crate::error::{DscError, Result};
use crate::numerics::{
    generalized_jacobian, jacobian_with_steps, matrix_measure_2, max_over_grid, norm2, GridBox,
    Matrix, Vector,
};
use crate::plant::{DisturbanceProfile, ReferenceSignal, StrictFeedbackSystem};

/// Difference step for derivatives of `Q` with respect to `α_des`.
pub const Q_STEP: f64 = 1e-5;

/// Where the constants are estimated: `B_z × B_α`, sampled over one
/// reference period.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimationDomain {
    pub box_z: GridBox,
    pub box_a: GridBox,
    /// Number of equally spaced instants over one reference period.
    pub time_samples: usize,
    pub margin: f64,
}

impl EstimationDomain {
    pub fn new(box_z: GridBox, box_a: GridBox, time_samples: usize, margin: f64) -> Result<Self> {
        if time_samples == 0 {
            return Err(DscError::config("at least one time sample is required"));
        }
        if !(margin > 0.0 && margin.is_finite()) {
            return Err(DscError::config(format!(
                "margin must be positive, got {margin}"
            )));
        }
        Ok(Self {
            box_z,
            box_a,
            time_samples,
            margin,
        })
    }

    fn times(&self, reference: &ReferenceSignal) -> Vec<f64> {
        match reference.period() {
            Some(p) => (0..self.time_samples)
                .map(|k| p * k as f64 / self.time_samples as f64)
                .collect(),
            None => vec![0.0],
        }
    }

    fn check(&self, n: usize) -> Result<()> {
        if self.box_z.dim() != n || self.box_a.dim() + 1 != n {
            return Err(DscError::Shape(format!(
                "boxes of dimension {} and {} for a system of order {n}",
                self.box_z.dim(),
                self.box_a.dim()
            )));
        }
        Ok(())
    }
}

/// Slow error dynamics with filter and estimation errors
///
/// ```text
/// żᵢ = −bᵢ₋₁ zᵢ₋₁ − χᵢ(zᵢ) + bᵢ zᵢ₊₁ + bᵢ α̃ᵢ₊₁ + d̃ᵢ
/// ```
///
/// with `α̃ = α_f − α`, `d̃ = d − d̂`, and gains `b` evaluated by the caller.
pub fn slow_field(
    tuning: &TuningFunctions,
    b: &[f64],
    z: &[f64],
    alpha_tilde: &[f64],
    d_tilde: &[f64],
) -> Vector {
    let n = z.len();
    (0..n)
        .map(|i| {
            let mut v = -tuning.stage(i).eval(z[i]) + d_tilde[i];
            if i + 1 < n {
                v += b[i] * (z[i + 1] + alpha_tilde[i]);
            }
            if i > 0 {
                v -= b[i - 1] * z[i - 1];
            }
            v
        })
        .collect()
}

fn state_from_errors(z: &[f64], alpha_des: &[f64], x_d: f64) -> Vector {
    std::iter::once(z[0] + x_d)
        .chain(z[1..].iter().zip(alpha_des).map(|(zi, a)| zi + a))
        .collect()
}

/// `Q(z, α_des) = (∂α/∂z) ż` at time `t`, where `α = α₂..αₙ` are the
/// backstepping virtual controls, the state is rebuilt as `x₁ = z₁ + x_d`,
/// `xᵢ = zᵢ + α_des,ᵢ`, and `ż` is the slow field with `α̃ = α_des − α`.
/// The directional derivative is exact (tangent-carrying Taylor arithmetic).
pub fn q_term(
    sys: &StrictFeedbackSystem,
    tuning: &TuningFunctions,
    reference: &ReferenceSignal,
    z: &[f64],
    alpha_des: &[f64],
    t: f64,
) -> Result<Vector> {
    let n = sys.order();
    let derivs = reference.reference_derivs(t, n);
    let x = state_from_errors(z, alpha_des, derivs[0]);
    let stack = virtual_controls(sys, &x, &derivs, tuning)?;
    let alpha_tilde: Vector = alpha_des
        .iter()
        .zip(&stack.alphas[1..])
        .map(|(a, b)| a - b)
        .collect();
    let b = sys.gains(&x)?;
    let z_dot = slow_field(tuning, &b, z, &alpha_tilde, &vec![0.0; n]);
    let jets = stage_jets(sys, &x, Some(&z_dot), &derivs, tuning)?;
    Ok(jets.alpha[1..].iter().map(|a| a.tangent()).collect())
}

fn over_domain<F>(
    sys: &StrictFeedbackSystem,
    reference: &ReferenceSignal,
    domain: &EstimationDomain,
    f: F,
) -> Result<f64>
where
    F: Fn(&[f64], &[f64], f64) -> Result<f64> + Sync,
{
    let n = sys.order();
    domain.check(n)?;
    let times = domain.times(reference);
    let grid = domain.box_z.product(&domain.box_a);
    let sup = max_over_grid(&grid, |p| {
        let (z, a) = p.split_at(n);
        times
            .iter()
            .map(|&t| f(z, a, t))
            .try_fold(0.0f64, |acc, v| Ok::<_, DscError>(acc.max(v?)))
    })?;
    Ok(domain.margin * sup)
}

/// `c₂ = sup ‖∂Q/∂α_des‖₂` over the domain.
pub fn estimate_c2(
    sys: &StrictFeedbackSystem,
    tuning: &TuningFunctions,
    reference: &ReferenceSignal,
    domain: &EstimationDomain,
) -> Result<f64> {
    over_domain(sys, reference, domain, |z, a, t| {
        let jac = jacobian_with_steps(
            |ad| q_term(sys, tuning, reference, z, ad, t),
            a,
            &vec![Q_STEP; a.len()],
        )?;
        Ok(jac.norm_2())
    })
}

/// `c₃ = sup ‖Q‖₂` over the domain.
pub fn estimate_c3(
    sys: &StrictFeedbackSystem,
    tuning: &TuningFunctions,
    reference: &ReferenceSignal,
    domain: &EstimationDomain,
) -> Result<f64> {
    over_domain(sys, reference, domain, |z, a, t| {
        Ok(norm2(&q_term(sys, tuning, reference, z, a, t)?))
    })
}

/// Largest admissible filter parameter, `μ* = 1/c₂`.
pub fn mu_star(c2: f64) -> Result<f64> {
    if !(c2 > 0.0 && c2.is_finite()) {
        return Err(DscError::Domain(format!("c2 must be positive, got {c2}")));
    }
    Ok(1.0 / c2)
}

/// Lipschitz estimate: the largest `‖Δf‖₂ / ‖Δv‖₂` over pairs of adjacent
/// grid points along each axis, times `margin`. For a linear map this is
/// the largest column norm, i.e. the induced ℓ₁→ℓ₂ norm.
pub fn estimate_lipschitz<F>(f: F, box_v: &GridBox, margin: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<Vector> + Sync,
{
    if !(margin > 0.0 && margin.is_finite()) {
        return Err(DscError::config(format!(
            "margin must be positive, got {margin}"
        )));
    }
    let sup = max_over_grid(box_v, |p| {
        let base = f(p)?;
        let mut best = 0.0f64;
        let here = multi_index_of(box_v, p);
        for axis in 0..box_v.dim() {
            if here[axis] + 1 >= box_v.counts()[axis] {
                continue;
            }
            let mut next = here.clone();
            next[axis] += 1;
            let q = box_v.point_at(&next);
            let fq = f(&q)?;
            let df: Vec<f64> = fq.iter().zip(&base).map(|(a, b)| a - b).collect();
            let dv = (q[axis] - p[axis]).abs();
            best = best.max(norm2(&df) / dv);
        }
        Ok(best)
    })?;
    Ok(margin * sup)
}

fn multi_index_of(grid: &GridBox, p: &[f64]) -> Vec<usize> {
    (0..grid.dim())
        .map(|axis| {
            let n = grid.counts()[axis];
            if n == 1 {
                return 0;
            }
            let (lo, hi) = (grid.lower()[axis], grid.upper()[axis]);
            (((p[axis] - lo) / (hi - lo) * (n - 1) as f64).round() as usize).min(n - 1)
        })
        .collect()
}

/// Contraction rate of the error dynamics in the identity metric:
/// `inf over the grid of minᵢ χᵢ′(zᵢ)`. The coupling is skew, so the
/// symmetric part of the Jacobian is `−diag(χᵢ′)`.
pub fn contraction_rate_z(tuning: &TuningFunctions, box_z: &GridBox) -> Result<f64> {
    if box_z.dim() != tuning.order() {
        return Err(DscError::Shape(format!(
            "box of dimension {} for {} tuning functions",
            box_z.dim(),
            tuning.order()
        )));
    }
    let neg = max_over_grid(box_z, |z| {
        Ok(-(0..z.len())
            .map(|i| tuning.stage(i).slope(z[i]))
            .fold(f64::INFINITY, f64::min))
    })?;
    Ok(-neg)
}

/// Both readings of the fast-variable bound at time `t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FastBound {
    /// `‖v(0) − v_ds(0)‖ e^{−t/μ} + max(c₁, c₃)`
    pub as_printed: f64,
    /// `‖v(0) − v_ds(0)‖ e^{−t/μ} + μ max(c₁, c₃)`
    pub lemma2_consistent: f64,
}

pub fn fast_bound(v0_err: f64, mu: f64, c1: f64, c3: f64, t: f64) -> Result<FastBound> {
    if !(mu > 0.0) {
        return Err(DscError::Domain(format!("mu must be positive, got {mu}")));
    }
    let transient = v0_err * (-t / mu).exp();
    let offset = c1.max(c3);
    Ok(FastBound {
        as_printed: transient + offset,
        lemma2_consistent: transient + mu * offset,
    })
}

/// `μ C_z L_v max(c₁, c₃) / (λ_z |max(−1, −1/κ)|)`.
pub fn steady_state_bound(
    mu: f64,
    c_z: f64,
    l_v: f64,
    c1: f64,
    c3: f64,
    lambda_z: f64,
    kappa: f64,
) -> Result<f64> {
    if !(lambda_z > 0.0) || !(kappa > 0.0) {
        return Err(DscError::Domain(format!(
            "lambda_z ({lambda_z}) and kappa ({kappa}) must be positive"
        )));
    }
    let denom = lambda_z * (-1.0f64).max(-1.0 / kappa).abs();
    if denom == 0.0 || !denom.is_finite() {
        return Err(DscError::Domain(
            "steady-state bound denominator vanishes".into(),
        ));
    }
    Ok(mu * c_z * l_v * c1.max(c3) / denom)
}

/// Steady estimation error bound of the observer, `c₁/k`.
pub fn observer_bound(c1: f64, k: f64) -> Result<f64> {
    if !(k > 0.0) {
        return Err(DscError::Domain(format!(
            "observer gain must be positive, got {k}"
        )));
    }
    Ok(c1 / k)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractionCertificate {
    pub certified: bool,
    /// Largest 2-measure of the generalized Jacobian over the grid (`−λ`).
    pub worst_measure: f64,
}

/// Checks `μ₂((Θ̇ + ΘJ)Θ⁻¹) < 0` at every grid point.
pub fn verify_contraction<F>(
    jac_field: F,
    theta: &Matrix,
    theta_dot: &Matrix,
    grid: &GridBox,
) -> Result<ContractionCertificate>
where
    F: Fn(&[f64]) -> Result<Matrix> + Sync,
{
    let worst = max_over_grid(grid, |p| {
        matrix_measure_2(&generalized_jacobian(theta, theta_dot, &jac_field(p)?)?)
    })?;
    Ok(ContractionCertificate {
        certified: worst < 0.0,
        worst_measure: worst,
    })
}

/// Estimated constants with the derived tuning quantities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub l_v: f64,
    pub l_1: f64,
    pub lambda_z: f64,
    /// Rate of the reduced slow system; identified with `lambda_z`.
    pub beta: f64,
    pub c_z: f64,
    pub mu: f64,
    pub k: f64,
    pub kappa: f64,
    pub mu_star: f64,
    pub mu_within_mu_star: bool,
    pub observer_bound: f64,
    /// Magnitude of discontinuous (signum) disturbance terms, excluded from `c1`.
    pub signum_magnitude: f64,
    pub fast_bound_v0_err: f64,
    /// Offset of the fast bound: `max(c1, c3)`.
    pub fast_offset_as_printed: f64,
    /// Offset of the fast bound: `mu · max(c1, c3)`.
    pub fast_offset_lemma2_consistent: f64,
    pub ss_bound: f64,
}

/// Inputs for [`bound_report`] beyond the plant and controller.
#[derive(Clone, Debug)]
pub struct BoundInputs<'a> {
    pub domain: &'a EstimationDomain,
    /// Disturbance-estimate box for the `L_v` estimate (dimension `n`).
    pub box_d: &'a GridBox,
    pub profile: &'a DisturbanceProfile,
    pub mu: f64,
    pub k: f64,
    /// `‖v(0) − v_ds(0)‖`.
    pub v0_err: f64,
}

/// Slow field as a function of the fast variables `v = [α_f; d̂]` at
/// `z = 0`, `α = 0`, `d = 0`, `t = 0`.
fn fast_to_slow_map<'a>(
    sys: &'a StrictFeedbackSystem,
    tuning: &'a TuningFunctions,
    reference: &'a ReferenceSignal,
    with_estimates: bool,
) -> impl Fn(&[f64]) -> Result<Vector> + Sync + 'a {
    move |v: &[f64]| {
        let n = sys.order();
        let (alpha_f, rest) = v.split_at(n - 1);
        let d_hat: Vector = if with_estimates {
            rest.to_vec()
        } else {
            vec![0.0; n]
        };
        let z = vec![0.0; n];
        let x = state_from_errors(&z, alpha_f, reference.reference_derivs(0.0, 0)[0]);
        let b = sys.gains(&x)?;
        let d_tilde: Vector = d_hat.iter().map(|d| -d).collect();
        Ok(slow_field(tuning, &b, &z, alpha_f, &d_tilde))
    }
}

pub fn bound_report(
    sys: &StrictFeedbackSystem,
    tuning: &TuningFunctions,
    reference: &ReferenceSignal,
    inputs: &BoundInputs<'_>,
) -> Result<BoundReport> {
    let n = sys.order();
    let domain = inputs.domain;
    if inputs.box_d.dim() != n {
        return Err(DscError::Shape(format!(
            "disturbance box of dimension {} for order {n}",
            inputs.box_d.dim()
        )));
    }
    let c1 = inputs.profile.rate_bound_c1();
    let c2 = estimate_c2(sys, tuning, reference, domain)?;
    let c3 = estimate_c3(sys, tuning, reference, domain)?;
    let box_v = domain.box_a.product(inputs.box_d);
    let l_v = estimate_lipschitz(
        fast_to_slow_map(sys, tuning, reference, true),
        &box_v,
        domain.margin,
    )?;
    let l_1 = estimate_lipschitz(
        fast_to_slow_map(sys, tuning, reference, false),
        &domain.box_a,
        domain.margin,
    )?;
    let lambda_z = contraction_rate_z(tuning, &domain.box_z)?;
    let c_z = 1.0;
    let kappa = (1.0 / inputs.k) / inputs.mu;
    let mu_star = mu_star(c2)?;
    let fb = fast_bound(inputs.v0_err, inputs.mu, c1, c3, 0.0)?;
    let offset = c1.max(c3);
    Ok(BoundReport {
        c1,
        c2,
        c3,
        l_v,
        l_1,
        lambda_z,
        beta: lambda_z,
        c_z,
        mu: inputs.mu,
        k: inputs.k,
        kappa,
        mu_star,
        mu_within_mu_star: inputs.mu <= mu_star,
        observer_bound: observer_bound(c1, inputs.k)?,
        signum_magnitude: inputs.profile.signum_magnitude(),
        fast_bound_v0_err: inputs.v0_err,
        fast_offset_as_printed: fb.as_printed - inputs.v0_err,
        fast_offset_lemma2_consistent: inputs.mu * offset,
        ss_bound: steady_state_bound(inputs.mu, c_z, l_v, c1, c3, lambda_z, kappa)?,
    })
}
