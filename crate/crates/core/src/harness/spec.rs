use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::backstepping::TuningFunctions;
use crate::contraction::EstimationDomain;
use crate::dsc::{DscConfig, FilterMode};
use crate::error::{DscError, Result};
use crate::numerics::{GridBox, IntegratorConfig, Method, DEFAULT_MARGIN};
use crate::plant::{
    dc_motor_system, DcMotorParams, DisturbanceProfile, ReferenceSignal, StrictFeedbackSystem,
};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PlantKind {
    DcMotor(DcMotorParams),
    /// Pure integrator chain of the given order.
    Chain(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerSelection {
    Backstepping,
    Dsc,
    Both,
}

impl ControllerSelection {
    pub fn runs_backstepping(self) -> bool {
        matches!(self, Self::Backstepping | Self::Both)
    }

    pub fn runs_dsc(self) -> bool {
        matches!(self, Self::Dsc | Self::Both)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Kc,
    Mu,
    K,
}

impl SweepAxis {
    pub fn key(self) -> &'static str {
        match self {
            Self::Kc => "tuning.kc",
            Self::Mu => "dsc.mu",
            Self::K => "dsc.k",
        }
    }
}

/// Symmetric extents of the constant-estimation boxes.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxSpec {
    pub z: (f64, f64),
    pub alpha: (f64, f64),
    pub d: (f64, f64),
    pub resolution: usize,
    pub time_samples: usize,
    pub margin: f64,
}

impl Default for BoxSpec {
    fn default() -> Self {
        Self {
            z: (-2.0 * PI, 2.0 * PI),
            alpha: (-50.0, 50.0),
            d: (-50.0, 50.0),
            resolution: 5,
            time_samples: 8,
            margin: DEFAULT_MARGIN,
        }
    }
}

impl BoxSpec {
    pub fn domain(&self, n: usize) -> Result<EstimationDomain> {
        EstimationDomain::new(
            GridBox::uniform(n, self.z.0, self.z.1, self.resolution)?,
            GridBox::uniform(n - 1, self.alpha.0, self.alpha.1, self.resolution)?,
            self.time_samples,
            self.margin,
        )
    }

    pub fn box_d(&self, n: usize) -> Result<GridBox> {
        GridBox::uniform(n, self.d.0, self.d.1, self.resolution)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

/// A complete experiment description. Built from presets, spec files and
/// `key = value` overrides, all sharing the same dotted keys.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub plant: PlantKind,
    pub reference: ReferenceSignal,
    pub controller: ControllerSelection,
    pub kc: f64,
    pub mu: f64,
    pub k: f64,
    pub observer: bool,
    pub filter_mode: FilterMode,
    pub disturbances: bool,
    /// 0-based state equations receiving the two disturbance channels.
    pub dist_map: Vec<usize>,
    pub x0: Vec<f64>,
    pub integrator: IntegratorConfig,
    pub tail_fraction: f64,
    pub band: f64,
    pub boxes: Option<BoxSpec>,
    pub sweep: Option<SweepSpec>,
    pub out_dir: Option<PathBuf>,
}

impl Default for ExperimentSpec {
    /// DC motor tracking the sinusoidal reference, both controllers, no
    /// disturbance, no estimation boxes.
    fn default() -> Self {
        Self {
            plant: PlantKind::DcMotor(DcMotorParams::CASE_STUDY),
            reference: ReferenceSignal::CASE_STUDY,
            controller: ControllerSelection::Both,
            kc: 5.0,
            mu: 0.01,
            k: 50.0,
            observer: false,
            filter_mode: FilterMode::Filtered,
            disturbances: false,
            dist_map: vec![1, 2],
            x0: vec![2.0 * PI, 0.0, 0.0],
            integrator: IntegratorConfig::new(1e-4, 10.0),
            tail_fraction: 0.2,
            band: 0.05,
            boxes: None,
            sweep: None,
            out_dir: None,
        }
    }
}

pub const PRESETS: [&str; 3] = ["fig1", "fig2", "fig3"];

const KEYS: &[&str] = &[
    "preset",
    "plant.kind",
    "plant.order",
    "plant.kb",
    "plant.r",
    "plant.l",
    "plant.m",
    "plant.b",
    "plant.n",
    "ref.amplitude",
    "ref.omega",
    "controller",
    "dsc.mu",
    "dsc.k",
    "dsc.observer",
    "dsc.mode",
    "tuning.kc",
    "dist.enabled",
    "dist.map",
    "sim.x0",
    "sim.dt",
    "sim.t_final",
    "sim.method",
    "metrics.tail_fraction",
    "metrics.band",
    "boxes.enabled",
    "boxes.z",
    "boxes.alpha",
    "boxes.d",
    "boxes.resolution",
    "boxes.t_samples",
    "boxes.margin",
    "sweep.axis",
    "sweep.values",
    "out.dir",
];

fn spec_err(key: &str, message: impl Into<String>) -> DscError {
    DscError::Spec {
        path: key.to_string(),
        message: message.into(),
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    let x: f64 = match v.trim() {
        "pi" => PI,
        "2pi" => 2.0 * PI,
        "-2pi" => -2.0 * PI,
        "pi/2" => PI / 2.0,
        s => s
            .parse()
            .map_err(|_| spec_err(key, format!("expected a number, got {s:?}")))?,
    };
    if !x.is_finite() {
        return Err(spec_err(key, "value must be finite"));
    }
    Ok(x)
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    let items: Vec<&str> = v
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    if items.is_empty() {
        return Err(spec_err(key, "list must not be empty"));
    }
    items.into_iter().map(|s| parse_f64(key, s)).collect()
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.trim()
        .parse()
        .map_err(|_| spec_err(key, format!("expected a nonnegative integer, got {v:?}")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim() {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        s => Err(spec_err(key, format!("expected true or false, got {s:?}"))),
    }
}

fn parse_range(key: &str, v: &str) -> Result<(f64, f64)> {
    let vals = parse_list(key, v)?;
    match vals.as_slice() {
        [h] if *h > 0.0 => Ok((-h, *h)),
        [lo, hi] if lo < hi => Ok((*lo, *hi)),
        _ => Err(spec_err(
            key,
            "expected a positive half-width or `lo, hi` with lo < hi",
        )),
    }
}

impl ExperimentSpec {
    pub fn preset(name: &str) -> Result<Self> {
        let mut spec = Self {
            boxes: Some(BoxSpec::default()),
            ..Self::default()
        };
        match name {
            "fig1" => {}
            "fig2" | "fig3" => {
                spec.controller = ControllerSelection::Dsc;
                spec.disturbances = true;
                spec.observer = true;
                if name == "fig3" {
                    spec.kc = 40.0;
                }
            }
            other => {
                return Err(spec_err(
                    "preset",
                    format!(
                        "unknown preset {other:?}; expected one of {}",
                        PRESETS.join(", ")
                    ),
                ))
            }
        }
        Ok(spec)
    }

    /// Parses a spec file body: `key = value` lines, `#` comments. A
    /// `preset` line, if present, must come first and selects the base.
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_onto(Self::default(), text)
    }

    /// Like [`Self::parse`], starting from `base` instead of the default.
    pub fn parse_onto(base: Self, text: &str) -> Result<Self> {
        let mut spec = base;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                spec_err(
                    &format!("line {}", lineno + 1),
                    format!("expected `key = value`, got {line:?}"),
                )
            })?;
            let (key, value) = (key.trim(), value.trim());
            if key == "preset" {
                spec = Self::preset(value)?;
            } else {
                spec.set(key, value)?;
            }
        }
        Ok(spec)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_file_onto(Self::default(), path)
    }

    pub fn from_file_onto(base: Self, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| DscError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse_onto(base, &text)
    }

    /// Applies `key=value` in the spec-file syntax.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| spec_err(assignment, "override must look like key=value"))?;
        let (key, value) = (key.trim(), value.trim());
        if key == "preset" {
            return Err(spec_err(key, "presets cannot be applied as overrides"));
        }
        self.set(key, value)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !KEYS.contains(&key) {
            return Err(spec_err(key, "unknown key"));
        }
        fn motor<'a>(spec: &'a mut ExperimentSpec, key: &str) -> Result<&'a mut DcMotorParams> {
            match &mut spec.plant {
                PlantKind::DcMotor(p) => Ok(p),
                PlantKind::Chain(_) => {
                    Err(spec_err(key, "motor parameter given for a chain plant"))
                }
            }
        }
        match key {
            "plant.kind" => {
                self.plant = match value {
                    "dc_motor" => PlantKind::DcMotor(DcMotorParams::CASE_STUDY),
                    "chain" => PlantKind::Chain(self.x0.len()),
                    other => {
                        return Err(spec_err(
                            key,
                            format!("expected dc_motor or chain, got {other:?}"),
                        ))
                    }
                }
            }
            "plant.order" => match &mut self.plant {
                PlantKind::Chain(n) => *n = parse_usize(key, value)?,
                PlantKind::DcMotor(_) => {
                    return Err(spec_err(key, "order is fixed at 3 for the DC motor"))
                }
            },
            "plant.kb" => motor(self, key)?.kb = parse_f64(key, value)?,
            "plant.r" => motor(self, key)?.r = parse_f64(key, value)?,
            "plant.l" => motor(self, key)?.l = parse_f64(key, value)?,
            "plant.m" => motor(self, key)?.m = parse_f64(key, value)?,
            "plant.b" => motor(self, key)?.b = parse_f64(key, value)?,
            "plant.n" => motor(self, key)?.n = parse_f64(key, value)?,
            "ref.amplitude" => self.reference.amplitude = parse_f64(key, value)?,
            "ref.omega" => self.reference.angular_frequency = parse_f64(key, value)?,
            "controller" => {
                self.controller = match value {
                    "backstepping" => ControllerSelection::Backstepping,
                    "dsc" => ControllerSelection::Dsc,
                    "both" => ControllerSelection::Both,
                    other => {
                        return Err(spec_err(
                            key,
                            format!("expected backstepping, dsc or both, got {other:?}"),
                        ))
                    }
                }
            }
            "dsc.mu" => self.mu = parse_f64(key, value)?,
            "dsc.k" => self.k = parse_f64(key, value)?,
            "dsc.observer" => self.observer = parse_bool(key, value)?,
            "dsc.mode" => {
                self.filter_mode = match value {
                    "filtered" => FilterMode::Filtered,
                    "slaved" => FilterMode::Slaved,
                    other => {
                        return Err(spec_err(
                            key,
                            format!("expected filtered or slaved, got {other:?}"),
                        ))
                    }
                }
            }
            "tuning.kc" => self.kc = parse_f64(key, value)?,
            "dist.enabled" => self.disturbances = parse_bool(key, value)?,
            "dist.map" => {
                let map = parse_list(key, value)?;
                if map.len() != 2 || map.iter().any(|v| v.fract() != 0.0 || *v < 1.0) {
                    return Err(spec_err(key, "expected two 1-based state equation indices"));
                }
                self.dist_map = map.iter().map(|v| *v as usize - 1).collect();
            }
            "sim.x0" => self.x0 = parse_list(key, value)?,
            "sim.dt" => self.integrator.dt = parse_f64(key, value)?,
            "sim.t_final" => self.integrator.t_final = parse_f64(key, value)?,
            "sim.method" => {
                self.integrator.method = value
                    .parse()
                    .map_err(|e: DscError| spec_err(key, e.to_string()))?
            }
            "metrics.tail_fraction" => self.tail_fraction = parse_f64(key, value)?,
            "metrics.band" => self.band = parse_f64(key, value)?,
            "boxes.enabled" => {
                self.boxes = parse_bool(key, value)?.then(|| self.boxes.clone().unwrap_or_default())
            }
            "sweep.axis" => {
                let axis = match value {
                    "kc" | "tuning.kc" => SweepAxis::Kc,
                    "mu" | "dsc.mu" => SweepAxis::Mu,
                    "k" | "dsc.k" => SweepAxis::K,
                    other => {
                        return Err(spec_err(
                            key,
                            format!("expected kc, mu or k, got {other:?}"),
                        ))
                    }
                };
                let values = self.sweep.take().map(|s| s.values).unwrap_or_default();
                self.sweep = Some(SweepSpec { axis, values });
            }
            "sweep.values" => {
                let values = parse_list(key, value)?;
                match &mut self.sweep {
                    Some(s) => s.values = values,
                    None => {
                        self.sweep = Some(SweepSpec {
                            axis: SweepAxis::Kc,
                            values,
                        })
                    }
                }
            }
            "out.dir" => self.out_dir = Some(PathBuf::from(value)),
            _ => {
                // the remaining keys configure the estimation boxes
                let boxes = self.boxes.get_or_insert_with(BoxSpec::default);
                match key {
                    "boxes.z" => boxes.z = parse_range(key, value)?,
                    "boxes.alpha" => boxes.alpha = parse_range(key, value)?,
                    "boxes.d" => boxes.d = parse_range(key, value)?,
                    "boxes.resolution" => boxes.resolution = parse_usize(key, value)?,
                    "boxes.t_samples" => boxes.time_samples = parse_usize(key, value)?,
                    "boxes.margin" => boxes.margin = parse_f64(key, value)?,
                    _ => unreachable!("key list and match arms agree"),
                }
            }
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        match self.plant {
            PlantKind::DcMotor(_) => 3,
            PlantKind::Chain(n) => n,
        }
    }

    pub fn system(&self) -> Result<StrictFeedbackSystem> {
        match self.plant {
            PlantKind::DcMotor(p) => dc_motor_system(p).map_err(|e| e.in_spec("plant")),
            PlantKind::Chain(n) => {
                StrictFeedbackSystem::integrator_chain(n).map_err(|e| e.in_spec("plant.order"))
            }
        }
    }

    pub fn tuning(&self) -> TuningFunctions {
        TuningFunctions::linear(self.order(), self.kc)
    }

    pub fn dsc_config(&self) -> DscConfig {
        let mut cfg = DscConfig::new(self.mu, self.k, self.tuning());
        cfg.observer_enabled = self.observer;
        cfg.filter_mode = self.filter_mode;
        cfg
    }

    pub fn profile(&self) -> DisturbanceProfile {
        if self.disturbances {
            DisturbanceProfile {
                channel_map: self.dist_map.clone(),
                ..DisturbanceProfile::case_study()
            }
        } else {
            DisturbanceProfile::none()
        }
    }

    /// The same spec with the sweep axis set to `value` and no sweep.
    pub fn with_axis(&self, axis: SweepAxis, value: f64) -> Self {
        let mut cell = self.clone();
        cell.sweep = None;
        match axis {
            SweepAxis::Kc => cell.kc = value,
            SweepAxis::Mu => cell.mu = value,
            SweepAxis::K => cell.k = value,
        }
        cell
    }

    /// Checks everything that can be checked without simulating, including
    /// the step-size coupling for every sweep cell.
    pub fn validate(&self) -> Result<()> {
        let n = self.order();
        let sys = self.system()?;
        if self.x0.len() != n {
            return Err(spec_err(
                "sim.x0",
                format!("{} entries for a system of order {n}", self.x0.len()),
            ));
        }
        self.reference.validate().map_err(|e| e.in_spec("ref"))?;
        self.integrator.validate().map_err(|e| e.in_spec("sim"))?;
        if !(self.tail_fraction > 0.0 && self.tail_fraction <= 1.0) {
            return Err(spec_err("metrics.tail_fraction", "must lie in (0, 1]"));
        }
        if !(self.band > 0.0) {
            return Err(spec_err("metrics.band", "must be positive"));
        }
        self.profile()
            .validate(n)
            .map_err(|e| e.in_spec("dist.map"))?;
        if let Some(b) = &self.boxes {
            if n < 2 {
                return Err(spec_err(
                    "boxes",
                    "constant estimation needs order at least 2",
                ));
            }
            b.domain(n).map_err(|e| e.in_spec("boxes"))?;
            b.box_d(n).map_err(|e| e.in_spec("boxes.d"))?;
        }
        let cells: Vec<ExperimentSpec> = match &self.sweep {
            Some(s) => {
                if s.values.is_empty() {
                    return Err(spec_err("sweep.values", "no values given"));
                }
                s.values
                    .iter()
                    .map(|&v| self.with_axis(s.axis, v))
                    .collect()
            }
            None => vec![self.clone()],
        };
        for cell in &cells {
            let key = self.sweep.as_ref().map_or("tuning.kc", |s| s.axis.key());
            cell.tuning().validate(n).map_err(|e| e.in_spec(key))?;
            if self.controller.runs_dsc() {
                if n < 2 {
                    return Err(spec_err("plant.order", "DSC needs order at least 2"));
                }
                let cfg = cell.dsc_config();
                cfg.validate(n).map_err(|e| e.in_spec(key))?;
                cfg.validate_step(self.integrator.dt)
                    .map_err(|e| e.in_spec("sim.dt"))?;
            }
        }
        drop(sys);
        Ok(())
    }

    /// Canonical `key = value` listing, used in reports.
    pub fn to_map(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        let list = |v: &[f64]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        };
        match self.plant {
            PlantKind::DcMotor(p) => {
                put("plant.kind", "dc_motor".into());
                put("plant.kb", p.kb.to_string());
                put("plant.r", p.r.to_string());
                put("plant.l", p.l.to_string());
                put("plant.m", p.m.to_string());
                put("plant.b", p.b.to_string());
                put("plant.n", p.n.to_string());
            }
            PlantKind::Chain(n) => {
                put("plant.kind", "chain".into());
                put("plant.order", n.to_string());
            }
        }
        put("ref.amplitude", self.reference.amplitude.to_string());
        put("ref.omega", self.reference.angular_frequency.to_string());
        let controller = match self.controller {
            ControllerSelection::Backstepping => "backstepping",
            ControllerSelection::Dsc => "dsc",
            ControllerSelection::Both => "both",
        };
        put("controller", controller.into());
        put("dsc.mu", self.mu.to_string());
        put("dsc.k", self.k.to_string());
        put("dsc.observer", self.observer.to_string());
        let mode = match self.filter_mode {
            FilterMode::Filtered => "filtered",
            FilterMode::Slaved => "slaved",
        };
        put("dsc.mode", mode.into());
        put("tuning.kc", self.kc.to_string());
        put("dist.enabled", self.disturbances.to_string());
        put(
            "dist.map",
            self.dist_map
                .iter()
                .map(|e| (e + 1).to_string())
                .collect::<Vec<_>>()
                .join(", "),
        );
        put("sim.x0", list(&self.x0));
        put("sim.dt", self.integrator.dt.to_string());
        put("sim.t_final", self.integrator.t_final.to_string());
        let method = match self.integrator.method {
            Method::Rk4 => "rk4",
            Method::Euler => "euler",
        };
        put("sim.method", method.into());
        put("metrics.tail_fraction", self.tail_fraction.to_string());
        put("metrics.band", self.band.to_string());
        put("boxes.enabled", self.boxes.is_some().to_string());
        if let Some(b) = &self.boxes {
            put("boxes.z", list(&[b.z.0, b.z.1]));
            put("boxes.alpha", list(&[b.alpha.0, b.alpha.1]));
            put("boxes.d", list(&[b.d.0, b.d.1]));
            put("boxes.resolution", b.resolution.to_string());
            put("boxes.t_samples", b.time_samples.to_string());
            put("boxes.margin", b.margin.to_string());
        }
        if let Some(s) = &self.sweep {
            put("sweep.axis", s.axis.key().into());
            put("sweep.values", list(&s.values));
        }
        m
    }

    /// Spec-file text that parses back to this spec.
    pub fn to_text(&self) -> String {
        let map = self.to_map();
        let kind = ("plant.kind".to_string(), map["plant.kind"].clone());
        std::iter::once(kind)
            .chain(map.into_iter().filter(|(k, _)| k != "plant.kind"))
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_hold_the_case_study_values() {
        let f1 = ExperimentSpec::preset("fig1").unwrap();
        assert_eq!(f1.plant, PlantKind::DcMotor(DcMotorParams::CASE_STUDY));
        assert_eq!((f1.kc, f1.mu, f1.k), (5.0, 0.01, 50.0));
        assert_eq!(f1.x0, vec![2.0 * PI, 0.0, 0.0]);
        assert!(!f1.disturbances && f1.controller == ControllerSelection::Both);
        assert_eq!(f1.reference, ReferenceSignal::CASE_STUDY);
        let f2 = ExperimentSpec::preset("fig2").unwrap();
        assert!(f2.disturbances && f2.observer);
        assert_eq!((f2.kc, f2.k), (5.0, 50.0));
        let f3 = ExperimentSpec::preset("fig3").unwrap();
        assert_eq!(f3.kc, 40.0);
        assert_eq!(ExperimentSpec { kc: 5.0, ..f3 }, f2);
        for name in PRESETS {
            let spec = ExperimentSpec::preset(name).unwrap();
            spec.validate().unwrap();
            if let PlantKind::DcMotor(p) = spec.plant {
                p.validate().unwrap();
            }
        }
        assert!(ExperimentSpec::preset("fig4").is_err());
    }

    #[test]
    fn parse_and_override() {
        let spec = ExperimentSpec::parse(
            "preset = fig2\n# comment\ndsc.mu = 0.005 # trailing\nsweep.axis = kc\nsweep.values = 5, 10\n",
        )
        .unwrap();
        assert_eq!(spec.mu, 0.005);
        assert!(spec.disturbances);
        assert_eq!(spec.sweep.as_ref().unwrap().values, vec![5.0, 10.0]);
        let mut s = spec.clone();
        s.apply_override("dsc.mu=0.05").unwrap();
        assert_eq!(s.mu, 0.05);
        let e = s.apply_override("dsc.nu=1").unwrap_err();
        assert!(matches!(e, DscError::Spec { ref path, .. } if path == "dsc.nu"));
        assert!(s.apply_override("no_equals").is_err());
        assert!(ExperimentSpec::parse("sim.dt = fast").is_err());
        assert!(ExperimentSpec::parse("bogus line").is_err());
    }

    #[test]
    fn boxes_absent_unless_configured() {
        assert!(ExperimentSpec::parse("").unwrap().boxes.is_none());
        let s = ExperimentSpec::parse("boxes.z = 3").unwrap();
        assert_eq!(s.boxes.unwrap().z, (-3.0, 3.0));
        let s = ExperimentSpec::parse("preset = fig1\nboxes.enabled = false").unwrap();
        assert!(s.boxes.is_none());
    }

    #[test]
    fn validate_catches_step_coupling_in_sweeps() {
        let mut s = ExperimentSpec::preset("fig2").unwrap();
        s.sweep = Some(SweepSpec {
            axis: SweepAxis::K,
            values: vec![50.0, 5000.0],
        });
        let e = s.validate().unwrap_err();
        assert!(matches!(e, DscError::Spec { ref path, .. } if path == "sim.dt"));
        let mut s = ExperimentSpec::preset("fig1").unwrap();
        s.x0 = vec![0.0];
        assert!(s.validate().is_err());
    }

    #[test]
    fn canonical_map_round_trips() {
        let s = ExperimentSpec::preset("fig3").unwrap();
        assert_eq!(ExperimentSpec::parse(&s.to_text()).unwrap(), s);
        let c = ExperimentSpec {
            plant: PlantKind::Chain(2),
            x0: vec![1.0, 0.0],
            ..ExperimentSpec::default()
        };
        assert_eq!(ExperimentSpec::parse(&c.to_text()).unwrap(), c);
    }
}
