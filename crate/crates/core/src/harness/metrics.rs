use serde::Serialize;

use crate::error::{DscError, Result};
use crate::numerics::{norm2, Trajectory, Vector};

/// First sample index of the tail window covering the last `fraction` of
/// the horizon.
pub fn tail_start(len: usize, fraction: f64) -> Result<usize> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(DscError::config(format!(
            "tail fraction {fraction} must lie in (0, 1]"
        )));
    }
    if len == 0 {
        return Err(DscError::config("empty trajectory has no tail window"));
    }
    Ok((((1.0 - fraction) * (len - 1) as f64).round() as usize).min(len - 1))
}

fn rms(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v * v, c + 1));
    if count == 0 {
        0.0
    } else {
        (sum / count as f64).sqrt()
    }
}

fn sup(values: impl Iterator<Item = f64>) -> f64 {
    values.map(f64::abs).fold(0.0, f64::max)
}

/// Componentwise tail-window statistics of one channel.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChannelStats {
    pub rms: Vector,
    pub sup: Vector,
}

impl ChannelStats {
    pub fn of(samples: &[Vector]) -> Self {
        let width = samples.first().map_or(0, Vec::len);
        Self {
            rms: (0..width)
                .map(|k| rms(samples.iter().map(|s| s[k])))
                .collect(),
            sup: (0..width)
                .map(|k| sup(samples.iter().map(|s| s[k])))
                .collect(),
        }
    }
}

/// Summary of one controller's run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ControllerMetrics {
    pub tail_start_time: f64,
    /// Tracking errors `z` over the tail window.
    pub z: ChannelStats,
    /// Time after which `|z₁|` stays within the band; `None` if it never settles.
    pub settling_time: Option<f64>,
    /// `sup |u|` over the whole run.
    pub effort_sup: f64,
    /// Disturbance estimation error `d − d̂` over the tail window.
    pub d_tilde: Option<ChannelStats>,
}

fn channel<'a>(traj: &'a Trajectory, name: &str) -> Result<&'a [Vector]> {
    traj.channel(name)
        .map(|c| c.samples.as_slice())
        .ok_or_else(|| DscError::config(format!("trajectory has no {name:?} channel")))
}

/// Index from which `|samples[i]| ≤ band` holds to the end.
fn settling_index(samples: &[f64], band: f64) -> Option<usize> {
    match samples.iter().rposition(|v| v.abs() > band) {
        None => Some(0),
        Some(i) if i + 1 < samples.len() => Some(i + 1),
        Some(_) => None,
    }
}

pub fn controller_metrics(
    traj: &Trajectory,
    tail_fraction: f64,
    band: f64,
) -> Result<ControllerMetrics> {
    let start = tail_start(traj.len(), tail_fraction)?;
    let z = channel(traj, "z")?;
    let z1: Vec<f64> = z.iter().map(|s| s[0]).collect();
    let d_tilde = traj
        .channel("d_tilde")
        .map(|c| ChannelStats::of(&c.samples[start..]));
    Ok(ControllerMetrics {
        tail_start_time: traj.time(start),
        z: ChannelStats::of(&z[start..]),
        settling_time: settling_index(&z1, band).map(|i| traj.time(i)),
        effort_sup: sup(channel(traj, "u")?.iter().map(|u| u[0])),
        d_tilde,
    })
}

/// DSC-versus-backstepping tracking-error difference over the tail window.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecoveryGap {
    /// `sup |z_DSC,i − z_BS,i|` per component.
    pub sup: Vector,
    pub rms: Vector,
    pub sup_norm: f64,
}

/// Per-sample `z_DSC − z_BS`.
pub fn gap_series(bs: &Trajectory, dsc: &Trajectory) -> Result<Vec<Vector>> {
    let (zb, zd) = (channel(bs, "z")?, channel(dsc, "z")?);
    if zb.len() != zd.len() || bs.dt != dsc.dt {
        return Err(DscError::Shape(
            "trajectories are sampled differently".into(),
        ));
    }
    Ok(zd
        .iter()
        .zip(zb)
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
        .collect())
}

pub fn recovery_gap(bs: &Trajectory, dsc: &Trajectory, tail_fraction: f64) -> Result<RecoveryGap> {
    let diff = gap_series(bs, dsc)?;
    let tail = &diff[tail_start(diff.len(), tail_fraction)?..];
    let stats = ChannelStats::of(tail);
    Ok(RecoveryGap {
        sup: stats.sup,
        rms: stats.rms,
        sup_norm: tail.iter().map(|v| norm2(v)).fold(0.0, f64::max),
    })
}

/// Deviation of the full-loop errors from the reduced (slow) system.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReducedDeviation {
    /// Long-run (tail window) `sup ‖z − z_ds‖₂`.
    pub sup_norm: f64,
    /// Bound from the estimated constants, when boxes are configured.
    pub bound: Option<f64>,
    /// `bound / sup_norm`.
    pub slack: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Metrics {
    pub backstepping: Option<ControllerMetrics>,
    pub dsc: Option<ControllerMetrics>,
    pub recovery_gap: Option<RecoveryGap>,
    pub reduced: Option<ReducedDeviation>,
}
