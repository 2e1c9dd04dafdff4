use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::metrics::Metrics;
use super::run::{RunResult, SweepTable};
use crate::contraction::BoundReport;
use crate::error::{DscError, Result};
use crate::numerics::Trajectory;

/// Decimal notation with 9 significant digits.
pub fn format_sig9(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v == 0.0 {
            "0.00000000".into()
        } else {
            v.to_string()
        };
    }
    let exponent = v.abs().log10().floor() as i32;
    let decimals = (8 - exponent).clamp(0, 40) as usize;
    let s = format!("{v:.decimals$}");
    // rounding can carry into a new leading digit, e.g. 9.999999999 -> 10.00000000
    let digits = s.chars().filter(char::is_ascii_digit).collect::<String>();
    if digits.trim_start_matches('0').len() > 9 && decimals > 0 {
        format!("{v:.prec$}", prec = decimals - 1)
    } else {
        s
    }
}

/// CSV header for a system of order `n`.
pub fn csv_header(n: usize) -> String {
    let mut cols = vec!["t".to_string()];
    cols.extend((1..=n).map(|i| format!("x{i}")));
    cols.extend((1..=n).map(|i| format!("z{i}")));
    cols.push("u".into());
    cols.extend((2..=n).map(|i| format!("alpha{i}")));
    cols.extend((2..=n).map(|i| format!("alphaf{i}")));
    cols.extend((1..=n).map(|i| format!("dhat{i}")));
    cols.extend((1..=n).map(|i| format!("d{i}")));
    cols.join(",")
}

/// Renders a trajectory in the CSV contract. Channels a controller does
/// not have are filled in: `alpha_f` falls back to `alpha`, `d_hat` and
/// `d` to zeros. A trajectory without samples gives a header-only file.
pub fn trajectory_csv(traj: &Trajectory, n: usize) -> Result<String> {
    let mut out = csv_header(n);
    out.push('\n');
    if traj.is_empty() {
        return Ok(out);
    }
    let get = |name: &str, width: usize| -> Result<Option<&[Vec<f64>]>> {
        match traj.channel(name) {
            Some(c) if c.width() == width => Ok(Some(&c.samples)),
            Some(c) => Err(DscError::Shape(format!(
                "channel {name} has width {} where {width} is expected",
                c.width()
            ))),
            None => Ok(None),
        }
    };
    let required = |name: &str, width: usize| {
        get(name, width)?
            .ok_or_else(|| DscError::config(format!("trajectory has no {name:?} channel")))
    };
    let x = required("x", n)?;
    let z = required("z", n)?;
    let u = required("u", 1)?;
    let alpha = required("alpha", n - 1)?;
    let alpha_f = get("alpha_f", n - 1)?.unwrap_or(alpha);
    let d_hat = get("d_hat", n)?;
    let d = get("d", n)?;
    let zeros = vec![0.0; n];
    for i in 0..traj.len() {
        let row = std::iter::once(traj.time(i))
            .chain(x[i].iter().copied())
            .chain(z[i].iter().copied())
            .chain(u[i].iter().copied())
            .chain(alpha[i].iter().copied())
            .chain(alpha_f[i].iter().copied())
            .chain(d_hat.map_or(&zeros, |c| &c[i]).iter().copied())
            .chain(d.map_or(&zeros, |c| &c[i]).iter().copied());
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            first = false;
            let _ = write!(out, "{}", format_sig9(v));
        }
        out.push('\n');
    }
    Ok(out)
}

#[derive(Serialize)]
struct Report<'a> {
    spec: std::collections::BTreeMap<String, String>,
    metrics: &'a Metrics,
    bounds: &'a Option<BoundReport>,
}

pub fn report_json(result: &RunResult) -> Result<String> {
    let report = Report {
        spec: result.spec.to_map(),
        metrics: &result.metrics,
        bounds: &result.bounds,
    };
    serde_json::to_string_pretty(&report)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| DscError::config(format!("report serialization failed: {e}")))
}

fn write_file(path: PathBuf, body: &str) -> Result<PathBuf> {
    std::fs::write(&path, body).map_err(|source| DscError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| DscError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

/// Writes `backstepping.csv` and/or `dsc.csv` plus `report.json` into `dir`.
pub fn write_outputs(result: &RunResult, dir: &Path) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let n = result.spec.order();
    let mut written = Vec::new();
    if let Some(t) = &result.backstepping {
        written.push(write_file(
            dir.join("backstepping.csv"),
            &trajectory_csv(t, n)?,
        )?);
    }
    if let Some(t) = &result.dsc {
        written.push(write_file(dir.join("dsc.csv"), &trajectory_csv(t, n)?)?);
    }
    written.push(write_file(dir.join("report.json"), &report_json(result)?)?);
    Ok(written)
}

pub fn sweep_csv(table: &SweepTable) -> String {
    let mut out = String::from("value,rms_z1,sup_z1,effort_sup,recovery_gap_z1,ss_bound,mu_star\n");
    let opt = |v: Option<f64>| v.map(format_sig9).unwrap_or_default();
    for row in &table.rows {
        let dsc = row
            .metrics
            .dsc
            .as_ref()
            .or(row.metrics.backstepping.as_ref());
        let cells = [
            format_sig9(row.value),
            opt(dsc.map(|m| m.z.rms[0])),
            opt(dsc.map(|m| m.z.sup[0])),
            opt(dsc.map(|m| m.effort_sup)),
            opt(row.metrics.recovery_gap.as_ref().map(|g| g.sup[0])),
            opt(row.bounds.as_ref().map(|b| b.ss_bound)),
            opt(row.bounds.as_ref().map(|b| b.mu_star)),
        ];
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Writes `sweep.csv` and `sweep.json` into `dir`.
pub fn write_sweep(
    table: &SweepTable,
    spec_map: std::collections::BTreeMap<String, String>,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    #[derive(Serialize)]
    struct SweepReport<'a> {
        spec: std::collections::BTreeMap<String, String>,
        sweep: &'a SweepTable,
    }
    ensure_dir(dir)?;
    let json = serde_json::to_string_pretty(&SweepReport {
        spec: spec_map,
        sweep: table,
    })
    .map_err(|e| DscError::config(format!("report serialization failed: {e}")))?;
    Ok(vec![
        write_file(dir.join("sweep.csv"), &sweep_csv(table))?,
        write_file(dir.join("sweep.json"), &(json + "\n"))?,
    ])
}
