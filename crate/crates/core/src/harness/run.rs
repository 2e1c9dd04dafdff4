use rayon::prelude::*;
use serde::Serialize;

use super::metrics::{controller_metrics, recovery_gap, Metrics, ReducedDeviation};
use super::spec::{ExperimentSpec, SweepAxis};
use crate::backstepping::{error_dynamics, simulate_backstepping, TuningFunctions};
use crate::contraction::{bound_report, BoundInputs, BoundReport};
use crate::dsc::simulate_dsc;
use crate::error::{DscError, Result};
use crate::numerics::{integrate_states, norm2, Trajectory, Vector};
use crate::plant::StrictFeedbackSystem;

use super::metrics::tail_start;

/// Everything produced by one experiment.
#[derive(Clone, Debug)]
pub struct RunResult {
    pub spec: ExperimentSpec,
    pub backstepping: Option<Trajectory>,
    pub dsc: Option<Trajectory>,
    /// Reduced-system errors `z_ds`, sampled like the DSC run.
    pub reduced: Option<Vec<Vector>>,
    pub metrics: Metrics,
    pub bounds: Option<BoundReport>,
}

/// Simulates the slow error dynamics with the fast variables on their
/// slow manifold, `ż = −χ(z) + skew coupling`, starting from the same
/// `z(0)` as the DSC run. The gains `b` follow the DSC state trajectory,
/// interpolated linearly between samples.
pub fn reduced_trajectory(
    sys: &StrictFeedbackSystem,
    tuning: &TuningFunctions,
    dsc: &Trajectory,
    spec: &ExperimentSpec,
) -> Result<Vec<Vector>> {
    let x = &dsc
        .channel("x")
        .ok_or_else(|| DscError::config("DSC trajectory has no x channel"))?
        .samples;
    let z0 = &dsc
        .channel("z")
        .ok_or_else(|| DscError::config("DSC trajectory has no z channel"))?
        .samples[0];
    let gains: Vec<Vector> = x.iter().map(|xi| sys.gains(xi)).collect::<Result<_>>()?;
    let (t0, dt) = (dsc.t0, dsc.dt);
    let gain_at = |t: f64| -> Vector {
        let s = ((t - t0) / dt).max(0.0);
        let i = (s.floor() as usize).min(gains.len() - 1);
        let j = (i + 1).min(gains.len() - 1);
        let w = s - i as f64;
        gains[i]
            .iter()
            .zip(&gains[j])
            .map(|(a, b)| a + w * (b - a))
            .collect()
    };
    integrate_states(
        |t, z| error_dynamics(tuning, &gain_at(t), z),
        z0,
        &spec.integrator,
    )
}

/// Constant estimates and derived bounds over the configured boxes.
pub fn estimate_bounds(spec: &ExperimentSpec) -> Result<BoundReport> {
    let boxes = spec.boxes.as_ref().ok_or_else(|| DscError::Spec {
        path: "boxes".into(),
        message:
            "no estimation boxes configured; set boxes.z and boxes.alpha (or boxes.enabled = true)"
                .into(),
    })?;
    let sys = spec.system()?;
    let profile = spec.profile();
    let n = spec.order();
    let domain = boxes.domain(n)?;
    let box_d = boxes.box_d(n)?;
    // α_f(0) = α(0) and d̂(0) = 0, so v(0) − v_ds(0) = (0, −d(0))
    let v0_err = norm2(&profile.state_vector(&spec.x0, spec.integrator.t0));
    let inputs = BoundInputs {
        domain: &domain,
        box_d: &box_d,
        profile: &profile,
        mu: spec.mu,
        k: spec.k,
        v0_err,
    };
    bound_report(&sys, &spec.tuning(), &spec.reference, &inputs)
}

/// Runs the requested controllers on identical plant, reference and
/// disturbance realizations, then computes metrics and, when boxes are
/// configured, the bound report.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<RunResult> {
    spec.validate()?;
    let sys = spec.system()?;
    let tuning = spec.tuning();
    let profile = spec.profile();

    let backstepping = if spec.controller.runs_backstepping() {
        Some(simulate_backstepping(
            &sys,
            &spec.reference,
            &tuning,
            &spec.x0,
            &spec.integrator,
        )?)
    } else {
        None
    };
    let dsc = if spec.controller.runs_dsc() {
        Some(simulate_dsc(
            &sys,
            &spec.dsc_config(),
            &spec.reference,
            &profile,
            &spec.x0,
            &spec.integrator,
        )?)
    } else {
        None
    };
    let bounds = match &spec.boxes {
        Some(_) => Some(estimate_bounds(spec)?),
        None => None,
    };

    let mut metrics = Metrics::default();
    if let Some(t) = &backstepping {
        metrics.backstepping = Some(controller_metrics(t, spec.tail_fraction, spec.band)?);
    }
    let mut reduced = None;
    if let Some(t) = &dsc {
        metrics.dsc = Some(controller_metrics(t, spec.tail_fraction, spec.band)?);
        let z_ds = reduced_trajectory(&sys, &tuning, t, spec)?;
        let z = &t.channel("z").expect("DSC runs record z").samples;
        let start = tail_start(z.len(), spec.tail_fraction)?;
        let sup_norm = z[start..]
            .iter()
            .zip(&z_ds[start..])
            .map(|(a, b)| norm2(&a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<_>>()))
            .fold(0.0, f64::max);
        let bound = bounds.as_ref().map(|b| b.ss_bound);
        metrics.reduced = Some(ReducedDeviation {
            sup_norm,
            bound,
            slack: bound.map(|b| b / sup_norm),
        });
        reduced = Some(z_ds);
    }
    if let (Some(b), Some(d)) = (&backstepping, &dsc) {
        metrics.recovery_gap = Some(recovery_gap(b, d, spec.tail_fraction)?);
    }
    Ok(RunResult {
        spec: spec.clone(),
        backstepping,
        dsc,
        reduced,
        metrics,
        bounds,
    })
}

/// Runs both controllers without disturbance and reports the recovery gap.
pub fn compare_controllers(spec: &ExperimentSpec) -> Result<RunResult> {
    if spec.disturbances {
        return Err(DscError::Spec {
            path: "dist.enabled".into(),
            message: "controller comparison runs without disturbances".into(),
        });
    }
    let mut spec = spec.clone();
    spec.controller = super::spec::ControllerSelection::Both;
    run_experiment(&spec)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub metrics: Metrics,
    pub bounds: Option<BoundReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Monotonicity {
    /// Tail rms of `z₁` under DSC is nonincreasing along the sweep.
    pub rms_z1_nonincreasing: Option<bool>,
    /// Tail recovery gap is nondecreasing along the sweep.
    pub recovery_gap_nondecreasing: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepTable {
    pub axis: SweepAxis,
    pub rows: Vec<SweepRow>,
    pub monotonicity: Monotonicity,
}

fn monotone(values: &[f64], nondecreasing: bool) -> bool {
    values.windows(2).all(|w| {
        if nondecreasing {
            w[0] <= w[1]
        } else {
            w[0] >= w[1]
        }
    })
}

/// One experiment per value of `axis`, in parallel, rows in input order.
pub fn gain_sweep(spec: &ExperimentSpec, axis: SweepAxis, values: &[f64]) -> Result<SweepTable> {
    if values.is_empty() {
        return Err(DscError::Spec {
            path: "sweep.values".into(),
            message: "no values given".into(),
        });
    }
    let cells: Vec<ExperimentSpec> = values.iter().map(|&v| spec.with_axis(axis, v)).collect();
    for cell in &cells {
        cell.validate()?;
    }
    let rows: Vec<SweepRow> = cells
        .par_iter()
        .zip(values)
        .map(|(cell, &value)| {
            let r = run_experiment(cell)?;
            Ok(SweepRow {
                value,
                metrics: r.metrics,
                bounds: r.bounds,
            })
        })
        .collect::<Result<_>>()?;
    let rms_z1: Option<Vec<f64>> = rows
        .iter()
        .map(|r| r.metrics.dsc.as_ref().map(|m| m.z.rms[0]))
        .collect();
    let gaps: Option<Vec<f64>> = rows
        .iter()
        .map(|r| r.metrics.recovery_gap.as_ref().map(|g| g.sup[0]))
        .collect();
    Ok(SweepTable {
        axis,
        monotonicity: Monotonicity {
            rms_z1_nonincreasing: rms_z1.map(|v| monotone(&v, false)),
            recovery_gap_nondecreasing: gaps.map(|v| monotone(&v, true)),
        },
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsc::FilterMode;
    use crate::harness::spec::ControllerSelection;
    use crate::numerics::IntegratorConfig;

    fn short(preset: &str) -> ExperimentSpec {
        let mut s = ExperimentSpec::preset(preset).unwrap();
        s.integrator = IntegratorConfig::new(1e-3, 1.0);
        s.mu = 0.02;
        s.k = 10.0;
        s.boxes = None;
        s
    }

    #[test]
    fn slaved_dsc_recovers_backstepping_exactly() {
        let mut s = short("fig1");
        s.filter_mode = FilterMode::Slaved;
        let r = compare_controllers(&s).unwrap();
        let gap = r.metrics.recovery_gap.unwrap();
        assert!(gap.sup_norm < 1e-9, "gap {}", gap.sup_norm);
    }

    #[test]
    fn compare_rejects_disturbances() {
        assert!(compare_controllers(&short("fig2")).is_err());
    }

    #[test]
    fn single_value_sweep_matches_run() {
        let s = short("fig2");
        let table = gain_sweep(&s, SweepAxis::Kc, &[5.0]).unwrap();
        let run = run_experiment(&s).unwrap();
        assert_eq!(table.rows[0].metrics, run.metrics);
        assert_eq!(table.monotonicity.rms_z1_nonincreasing, Some(true));
        assert_eq!(table.monotonicity.recovery_gap_nondecreasing, None);
    }

    #[test]
    fn reduced_system_starts_at_dsc_errors() {
        let s = short("fig2");
        let r = run_experiment(&s).unwrap();
        let z0 = &r.dsc.as_ref().unwrap().channel("z").unwrap().samples[0];
        assert_eq!(&r.reduced.as_ref().unwrap()[0], z0);
        assert!(r.metrics.reduced.unwrap().bound.is_none());
        assert!(r.backstepping.is_none());
        assert_eq!(s.controller, ControllerSelection::Dsc);
    }
}
