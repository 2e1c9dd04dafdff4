use std::path::Path;
use std::process::{Command, Output};

fn dsc_lab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dsc-lab"))
        .args(args)
        .current_dir(cwd)
        .env_remove("DSC_LAB_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SHORT: [&str; 4] = ["--set", "sim.t_final=1", "--set", "boxes.resolution=3"];

#[test]
fn help_lists_verbs_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let o = dsc_lab(&["--help"], dir.path());
    assert!(o.status.success());
    for verb in ["simulate", "compare", "sweep", "tune", "validate"] {
        assert!(stdout(&o).contains(verb), "missing {verb}");
    }
    let o = dsc_lab(&["simulate", "--help"], dir.path());
    for flag in ["--preset", "--set", "--out", "--quiet"] {
        assert!(stdout(&o).contains(flag), "missing {flag}");
    }
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        dsc_lab(&["simulate", "--preset", "fig1", "--fast"], dir.path())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(dsc_lab(&["launch"], dir.path()).status.code(), Some(2));
    assert_eq!(
        dsc_lab(&["simulate", "--preset", "fig9"], dir.path())
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn simulate_fig1_writes_two_csvs_and_a_report_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["simulate", "--preset", "fig1", "--quiet", "--out", "a"];
    args.extend(SHORT);
    let o = dsc_lab(&args, dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["backstepping.csv", "dsc.csv", "report.json"] {
        assert!(dir.path().join("a").join(f).is_file(), "missing {f}");
    }
    args[5] = "b";
    assert!(dsc_lab(&args, dir.path()).status.success());
    for f in ["backstepping.csv", "dsc.csv", "report.json"] {
        let a = std::fs::read(dir.path().join("a").join(f)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(f)).unwrap();
        assert!(a == b, "{f} differs between reruns");
    }
    let csv = std::fs::read_to_string(dir.path().join("a/dsc.csv")).unwrap();
    assert!(csv.starts_with(
        "t,x1,x2,x3,z1,z2,z3,u,alpha2,alpha3,alphaf2,alphaf3,dhat1,dhat2,dhat3,d1,d2,d3\n"
    ));
    assert_eq!(csv.lines().count(), 1 + 10_001);
}

#[test]
fn spec_file_with_override() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("spec.txt"),
        "# fig1 on a short horizon\npreset = fig1\nsim.t_final = 0.5\nboxes.enabled = false\ncontroller = dsc\nout.dir = run\n",
    )
    .unwrap();
    let o = dsc_lab(
        &["simulate", "spec.txt", "--set", "dsc.mu=0.05"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("dsc:"));
    let report = std::fs::read_to_string(dir.path().join("run/report.json")).unwrap();
    assert!(report.contains("\"dsc.mu\": \"0.05\""), "{report}");
    assert!(!dir.path().join("run/backstepping.csv").exists());
}

#[test]
fn missing_spec_file_reports_path() {
    let dir = tempfile::tempdir().unwrap();
    let o = dsc_lab(&["simulate", "absent-spec.txt"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("absent-spec.txt"));
}

#[test]
fn bad_override_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = dsc_lab(
        &["simulate", "--preset", "fig1", "--set", "dsc.nu=1"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("dsc.nu"));
}

#[test]
fn tune_prints_mu_star_and_reference() {
    let dir = tempfile::tempdir().unwrap();
    let o = dsc_lab(&["tune", "--preset", "fig1"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("mu*"));
    assert!(out.contains("1/83"));
    assert!(out.contains("as-printed") && out.contains("lemma-2-consistent"));
    let observer = out
        .lines()
        .find(|l| l.starts_with("observer bound"))
        .unwrap();
    assert!(observer.ends_with("0.00000000"), "{observer}");
}

#[test]
fn tune_without_boxes_gives_guidance() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("spec.txt"), "dsc.mu = 0.01\n").unwrap();
    let o = dsc_lab(&["tune", "spec.txt"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("boxes"));
}

#[test]
fn sweep_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = dsc_lab(
        &[
            "sweep",
            "--preset",
            "fig2",
            "--set",
            "sim.t_final=1",
            "--set",
            "boxes.enabled=false",
            "--set",
            "sweep.axis=kc",
            "--set",
            "sweep.values=5,40",
            "--out",
            "s",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("s/sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(dir.path().join("s/sweep.json").is_file());
    let o = dsc_lab(&["sweep", "--preset", "fig2"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn validate_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = dsc_lab(&["validate"], dir.path());
    assert!(o.status.success(), "{}", stdout(&o));
    assert_eq!(stdout(&o).matches("[PASS]").count(), 4);
}

#[test]
fn thread_variable_is_checked() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_dsc-lab"))
        .args(["validate", "--quiet"])
        .current_dir(dir.path())
        .env("DSC_LAB_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_dsc-lab"))
        .args(["validate", "--quiet"])
        .current_dir(dir.path())
        .env("DSC_LAB_THREADS", "2")
        .output()
        .unwrap();
    assert!(o.status.success());
}

#[test]
fn divergence_maps_to_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    // a step far beyond the RK4 stability limit of the closed loop
    let o = dsc_lab(
        &[
            "simulate",
            "--preset",
            "fig1",
            "--set",
            "boxes.enabled=false",
            "--set",
            "controller=backstepping",
            "--set",
            "sim.dt=0.5",
            "--set",
            "sim.t_final=200",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}
