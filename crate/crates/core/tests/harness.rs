use dsc_core::contraction::{estimate_c2, estimate_c3, mu_star, EstimationDomain};
use dsc_core::harness::{
    compare_controllers, estimate_bounds, gain_sweep, run_experiment, ExperimentSpec, SweepAxis,
};
use dsc_core::plant::dc_motor_system;
use dsc_core::{DcMotorParams, FilterMode, GridBox, ReferenceSignal, TuningFunctions};

fn no_boxes(preset: &str) -> ExperimentSpec {
    let mut s = ExperimentSpec::preset(preset).unwrap();
    s.boxes = None;
    s
}

#[test]
fn recovery_gap_grows_with_mu() {
    let table = gain_sweep(&no_boxes("fig1"), SweepAxis::Mu, &[0.002, 0.01, 0.05]).unwrap();
    assert_eq!(table.monotonicity.recovery_gap_nondecreasing, Some(true));
    let gaps: Vec<f64> = table
        .rows
        .iter()
        .map(|r| r.metrics.recovery_gap.as_ref().unwrap().sup[0])
        .collect();
    assert!(gaps[0] < gaps[2], "{gaps:?}");
}

#[test]
fn slaved_filters_reproduce_backstepping_on_fig1() {
    let mut s = no_boxes("fig1");
    s.filter_mode = FilterMode::Slaved;
    let r = compare_controllers(&s).unwrap();
    assert!(r.metrics.recovery_gap.unwrap().sup_norm < 1e-8);
}

#[test]
fn sweep_cells_equal_standalone_runs() {
    let mut s = no_boxes("fig2");
    s.integrator.t_final = 2.0;
    let table = gain_sweep(&s, SweepAxis::K, &[20.0, 50.0]).unwrap();
    for row in &table.rows {
        let alone = run_experiment(&s.with_axis(SweepAxis::K, row.value)).unwrap();
        assert_eq!(row.metrics, alone.metrics);
    }
}

#[test]
fn bound_report_invariants() {
    let mut spec = ExperimentSpec::preset("fig2").unwrap();
    spec.boxes.as_mut().unwrap().resolution = 3;
    let b = estimate_bounds(&spec).unwrap();
    for v in [
        b.c1,
        b.c2,
        b.c3,
        b.l_v,
        b.l_1,
        b.lambda_z,
        b.c_z,
        b.kappa,
        b.mu_star,
        b.observer_bound,
        b.ss_bound,
    ] {
        assert!(v >= 0.0 && v.is_finite());
    }
    assert!((b.mu_star * b.c2 - 1.0).abs() <= f64::EPSILON);
    assert_eq!(b.c1, 30.0);
    assert!((b.observer_bound - 0.6).abs() < 1e-15);
    assert_eq!(b.signum_magnitude, 0.2);
    assert_eq!(b.lambda_z, 5.0);
    assert_eq!(b.kappa, 2.0);
    // the fast offsets differ by exactly the factor mu
    assert!((b.fast_offset_lemma2_consistent - b.mu * b.fast_offset_as_printed).abs() < 1e-9);
}

#[test]
fn c2_and_c3_grow_with_the_box() {
    let sys = dc_motor_system(DcMotorParams::CASE_STUDY).unwrap();
    let tuning = TuningFunctions::linear(3, 5.0);
    let domain = |h: f64, a: f64, res: usize| {
        EstimationDomain::new(
            GridBox::uniform(3, -h, h, res).unwrap(),
            GridBox::uniform(2, -a, a, res).unwrap(),
            4,
            1.1,
        )
        .unwrap()
    };
    let r = ReferenceSignal::CASE_STUDY;
    // the doubled box at resolution 5 contains every point of the small one
    let small = domain(1.0, 10.0, 3);
    let big = domain(2.0, 20.0, 5);
    let c2 = |d: &EstimationDomain| estimate_c2(&sys, &tuning, &r, d).unwrap();
    let c3 = |d: &EstimationDomain| estimate_c3(&sys, &tuning, &r, d).unwrap();
    assert!(c2(&big) >= c2(&small));
    assert!(c3(&big) >= c3(&small));
    let wider_margin = EstimationDomain {
        margin: 1.5,
        ..small.clone()
    };
    assert!(c2(&wider_margin) >= c2(&small));
    assert_eq!(mu_star(c2(&big)).unwrap(), 1.0 / c2(&big));
}
