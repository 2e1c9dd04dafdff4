//! `dsc-lab`: run DSC experiments, sweeps and tuning calculations.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dsc_core::harness::{
    compare_controllers, estimate_bounds, format_sig9, gain_sweep, run_experiment, validation,
    write_outputs, write_sweep, ControllerMetrics, ExperimentSpec, PlantKind, RunResult,
};
use dsc_core::{BoundReport, DscError, Result};

const DEFAULT_OUT: &str = "dsc-lab-out";
const THREADS_VAR: &str = "DSC_LAB_THREADS";

#[derive(Parser)]
#[command(
    name = "dsc-lab",
    version,
    about = "Dynamic surface control experiments and tuning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured controllers and write CSV trajectories and a JSON report.
    Simulate(SpecArgs),
    /// Run backstepping and DSC side by side without disturbances and report the recovery gap.
    Compare(SpecArgs),
    /// Run one experiment per value of sweep.axis and write sweep.csv and sweep.json.
    Sweep(SpecArgs),
    /// Estimate the bound constants over the configured boxes and print the tuning rules.
    Tune(SpecArgs),
    /// Run the fast invariant suite.
    Validate {
        /// Print only failing checks.
        #[arg(long)]
        quiet: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Fig1,
    Fig2,
    Fig3,
}

impl Preset {
    fn name(self) -> &'static str {
        match self {
            Preset::Fig1 => "fig1",
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
        }
    }
}

#[derive(Args)]
struct SpecArgs {
    /// Experiment spec file (`key = value` lines).
    spec: Option<PathBuf>,
    /// Start from a built-in experiment; a spec file is applied on top.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Override a spec key, e.g. `--set dsc.mu=0.05`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory (overrides out.dir).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Suppress the summary on stdout.
    #[arg(long)]
    quiet: bool,
}

impl SpecArgs {
    fn load(&self) -> Result<ExperimentSpec> {
        let base = match self.preset {
            Some(p) => ExperimentSpec::preset(p.name())?,
            None if self.spec.is_some() => ExperimentSpec::default(),
            None => {
                return Err(DscError::Spec {
                    path: "spec".into(),
                    message: "give a spec file or --preset fig1|fig2|fig3".into(),
                })
            }
        };
        let mut spec = match &self.spec {
            Some(path) => ExperimentSpec::from_file_onto(base, path)?,
            None => base,
        };
        for o in &self.overrides {
            spec.apply_override(o)?;
        }
        if let Some(dir) = &self.out {
            spec.out_dir = Some(dir.clone());
        }
        Ok(spec)
    }
}

fn out_dir(spec: &ExperimentSpec) -> PathBuf {
    spec.out_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn list(v: &[f64]) -> String {
    v.iter()
        .map(|x| format_sig9(*x))
        .collect::<Vec<_>>()
        .join(", ")
}

fn print_controller(name: &str, m: &ControllerMetrics) {
    println!("{name}:");
    println!("  tail window from t = {}", format_sig9(m.tail_start_time));
    println!("  rms z    [{}]", list(&m.z.rms));
    println!("  sup z    [{}]", list(&m.z.sup));
    match m.settling_time {
        Some(t) => println!("  settling time {}", format_sig9(t)),
        None => println!("  settling time: not settled"),
    }
    println!("  sup |u|  {}", format_sig9(m.effort_sup));
    if let Some(d) = &m.d_tilde {
        println!("  rms d-dhat [{}]", list(&d.rms));
    }
}

fn print_run(r: &RunResult, written: &[PathBuf]) {
    if let Some(m) = &r.metrics.backstepping {
        print_controller("backstepping", m);
    }
    if let Some(m) = &r.metrics.dsc {
        print_controller("dsc", m);
    }
    if let Some(g) = &r.metrics.recovery_gap {
        println!(
            "recovery gap (tail): sup |z_dsc - z_bs| = [{}]",
            list(&g.sup)
        );
    }
    if let Some(d) = &r.metrics.reduced {
        print!(
            "reduced-system deviation (tail): sup |z - z_ds| = {}",
            format_sig9(d.sup_norm)
        );
        match (d.bound, d.slack) {
            (Some(b), Some(s)) => println!(", bound {} (slack {})", format_sig9(b), format_sig9(s)),
            _ => println!(),
        }
    }
    for p in written {
        println!("wrote {}", p.display());
    }
}

fn print_bounds(spec: &ExperimentSpec, b: &BoundReport) {
    let rows: [(&str, f64); 17] = [
        ("c1", b.c1),
        ("c2", b.c2),
        ("c3", b.c3),
        ("L_v", b.l_v),
        ("L_1", b.l_1),
        ("lambda_z", b.lambda_z),
        ("C_z", b.c_z),
        ("mu", b.mu),
        ("k", b.k),
        ("kappa", b.kappa),
        ("mu*", b.mu_star),
        ("observer bound c1/k", b.observer_bound),
        ("signum magnitude", b.signum_magnitude),
        ("|v(0) - v_ds(0)|", b.fast_bound_v0_err),
        ("fast offset (as-printed)", b.fast_offset_as_printed),
        (
            "fast offset (lemma-2-consistent)",
            b.fast_offset_lemma2_consistent,
        ),
        ("steady-state bound", b.ss_bound),
    ];
    for (name, v) in rows {
        println!("{name:<34}{}", format_sig9(v));
    }
    if matches!(spec.plant, PlantKind::DcMotor(_)) {
        println!(
            "{:<34}{} (1/83)",
            "reference mu* for the DC motor",
            format_sig9(1.0 / 83.0)
        );
    }
    println!(
        "mu = {} is {} mu*",
        format_sig9(b.mu),
        if b.mu_within_mu_star {
            "within"
        } else {
            "above"
        }
    );
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize =
        raw.trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| DscError::Spec {
                path: THREADS_VAR.into(),
                message: format!("expected a positive integer, got {raw:?}"),
            })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| DscError::Config(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> Result<bool> {
    configure_threads()?;
    match cli.command {
        Command::Simulate(args) => {
            let spec = args.load()?;
            let r = run_experiment(&spec)?;
            let written = write_outputs(&r, &out_dir(&spec))?;
            if !args.quiet {
                print_run(&r, &written);
            }
        }
        Command::Compare(args) => {
            let spec = args.load()?;
            let r = compare_controllers(&spec)?;
            let written = write_outputs(&r, &out_dir(&spec))?;
            if !args.quiet {
                print_run(&r, &written);
            }
        }
        Command::Sweep(args) => {
            let spec = args.load()?;
            let sweep = spec.sweep.clone().ok_or_else(|| DscError::Spec {
                path: "sweep.axis".into(),
                message: "no sweep configured; set sweep.axis and sweep.values".into(),
            })?;
            let table = gain_sweep(&spec, sweep.axis, &sweep.values)?;
            let written = write_sweep(&table, spec.to_map(), &out_dir(&spec))?;
            if !args.quiet {
                print!("{}", dsc_core::harness::sweep_csv(&table));
                let m = &table.monotonicity;
                if let Some(v) = m.rms_z1_nonincreasing {
                    println!("tail rms z1 nonincreasing: {v}");
                }
                if let Some(v) = m.recovery_gap_nondecreasing {
                    println!("recovery gap nondecreasing: {v}");
                }
                for p in &written {
                    println!("wrote {}", p.display());
                }
            }
        }
        Command::Tune(args) => {
            let spec = args.load()?;
            spec.validate()?;
            let b = estimate_bounds(&spec)?;
            if !args.quiet {
                print_bounds(&spec, &b);
            }
        }
        Command::Validate { quiet } => {
            let checks = validation::run_checks();
            for c in &checks {
                if !quiet || !c.passed {
                    println!(
                        "[{}] {}: {}",
                        if c.passed { "PASS" } else { "FAIL" },
                        c.name,
                        c.detail
                    );
                }
            }
            return Ok(checks.iter().all(|c| c.passed));
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
