use std::cell::RefCell;

use super::{dsc_control, initial_filter_state, DscConfig, FilterBank, FilterMode, ObserverState};
use crate::error::{DscError, Result};
use crate::numerics::{integrate_states, IntegratorConfig, Trajectory, Vector};
use crate::plant::{DisturbanceProfile, ReferenceSignal, StrictFeedbackSystem};

struct Layout {
    n: usize,
}

impl Layout {
    fn x<'a>(&self, s: &'a [f64]) -> &'a [f64] {
        &s[..self.n]
    }

    fn alpha_f<'a>(&self, s: &'a [f64]) -> &'a [f64] {
        &s[self.n..2 * self.n - 1]
    }

    fn xi<'a>(&self, s: &'a [f64]) -> &'a [f64] {
        &s[2 * self.n - 1..]
    }
}

/// Simulates the DSC loop on the augmented state `[x; α_f; ξ]`.
///
/// Channels: `x`, `z`, `alpha`, `alpha_f`, `alpha_tilde` (`α_f − α`), `d`
/// (by state equation), `d_hat`, `d_tilde` (`d − d̂`), `u`. The filter
/// starts at `α_f(0) = α(0)` and the estimate at `d̂(0) = 0`.
pub fn simulate_dsc(
    sys: &StrictFeedbackSystem,
    cfg: &DscConfig,
    reference: &ReferenceSignal,
    profile: &DisturbanceProfile,
    x0: &[f64],
    icfg: &IntegratorConfig,
) -> Result<Trajectory> {
    let n = sys.order();
    if n < 2 {
        return Err(DscError::config("DSC needs a system of order at least 2"));
    }
    cfg.validate(n)?;
    cfg.validate_step(icfg.dt)?;
    icfg.validate()?;
    profile.validate(n)?;
    reference.validate()?;
    if x0.len() != n {
        return Err(DscError::Shape(format!(
            "x0 of length {} for order {n}",
            x0.len()
        )));
    }
    let layout = Layout { n };
    let zero_estimate = vec![0.0; n];
    let alpha_f0 = initial_filter_state(sys, cfg, x0, &zero_estimate, reference, icfg.t0)?;
    let xi0 = ObserverState::from_estimate(&zero_estimate, x0, cfg.k)?.xi;
    let s0: Vector = [x0, alpha_f0.as_slice(), xi0.as_slice()].concat();

    let failure: RefCell<Option<DscError>> = RefCell::new(None);
    let rhs = |t: f64, s: &[f64]| -> Result<Vector> {
        let x = layout.x(s);
        let bank = FilterBank::new(layout.alpha_f(s).to_vec(), cfg.mu)?;
        let obs = ObserverState::new(layout.xi(s).to_vec(), cfg.k)?;
        let cmd = dsc_control(sys, cfg, x, &bank, &obs, reference, t)?;
        let d = profile.state_vector(x, t);
        let mut out = sys.eval_dynamics(x, cmd.u, &d, t)?;
        match cfg.filter_mode {
            FilterMode::Filtered => out.extend(bank.filter_dynamics(&cmd.alpha)?),
            FilterMode::Slaved => out.extend(std::iter::repeat_n(0.0, n - 1)),
        }
        out.extend(obs.observer_dynamics(x, cmd.u, sys)?);
        Ok(out)
    };
    let states = integrate_states(
        |t, s| match rhs(t, s) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                vec![f64::NAN; s.len()]
            }
        },
        &s0,
        icfg,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let states = states?;

    let len = states.len();
    let mut ch: [Vec<Vector>; 9] = Default::default();
    for (i, s) in states.iter().enumerate() {
        let t = icfg.time(i);
        let x = layout.x(s);
        let bank = FilterBank::new(layout.alpha_f(s).to_vec(), cfg.mu)?;
        let obs = ObserverState::new(layout.xi(s).to_vec(), cfg.k)?;
        let cmd = dsc_control(sys, cfg, x, &bank, &obs, reference, t)?;
        let alpha_f = match cfg.filter_mode {
            FilterMode::Filtered => bank.alpha_f.clone(),
            FilterMode::Slaved => cmd.alpha.clone(),
        };
        let d = profile.state_vector(x, t);
        let d_hat = obs.d_hat(x);
        ch[0].push(x.to_vec());
        ch[1].push(cmd.z.clone());
        ch[3].push(alpha_f.iter().zip(&cmd.alpha).map(|(f, a)| f - a).collect());
        ch[2].push(cmd.alpha);
        ch[4].push(alpha_f);
        ch[5].push(d.iter().zip(&d_hat).map(|(a, b)| a - b).collect());
        ch[6].push(d);
        ch[7].push(d_hat);
        ch[8].push(vec![cmd.u]);
    }
    debug_assert!(ch.iter().all(|c| c.len() == len));
    let [x, z, alpha, alpha_tilde, alpha_f, d_tilde, d, d_hat, u] = ch;
    let mut traj = Trajectory::new(icfg.t0, icfg.dt)?;
    traj.add_channel("x", x)?;
    traj.add_channel("z", z)?;
    traj.add_channel("alpha", alpha)?;
    traj.add_channel("alpha_f", alpha_f)?;
    traj.add_channel("alpha_tilde", alpha_tilde)?;
    traj.add_channel("d", d)?;
    traj.add_channel("d_hat", d_hat)?;
    traj.add_channel("d_tilde", d_tilde)?;
    traj.add_channel("u", u)?;
    Ok(traj)
}

/// Runs the observer alone on a plant driven by an open-loop input.
/// Channels: `x`, `d`, `d_hat`, `d_tilde`.
pub fn simulate_observer<U>(
    sys: &StrictFeedbackSystem,
    k: f64,
    profile: &DisturbanceProfile,
    x0: &[f64],
    input: U,
    icfg: &IntegratorConfig,
) -> Result<Trajectory>
where
    U: Fn(f64, &[f64]) -> f64,
{
    let n = sys.order();
    profile.validate(n)?;
    if x0.len() != n {
        return Err(DscError::Shape(format!(
            "x0 of length {} for order {n}",
            x0.len()
        )));
    }
    let xi0 = ObserverState::from_estimate(&vec![0.0; n], x0, k)?.xi;
    let s0: Vector = [x0, xi0.as_slice()].concat();
    let failure: RefCell<Option<DscError>> = RefCell::new(None);
    let rhs = |t: f64, s: &[f64]| -> Result<Vector> {
        let (x, xi) = s.split_at(n);
        let u = input(t, x);
        let obs = ObserverState::new(xi.to_vec(), k)?;
        let mut out = sys.eval_dynamics(x, u, &profile.state_vector(x, t), t)?;
        out.extend(obs.observer_dynamics(x, u, sys)?);
        Ok(out)
    };
    let states = integrate_states(
        |t, s| match rhs(t, s) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                vec![f64::NAN; s.len()]
            }
        },
        &s0,
        icfg,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let states = states?;
    let mut xs = Vec::with_capacity(states.len());
    let mut ds = Vec::with_capacity(states.len());
    let mut dh = Vec::with_capacity(states.len());
    let mut dt = Vec::with_capacity(states.len());
    for (i, s) in states.iter().enumerate() {
        let (x, xi) = s.split_at(n);
        let d = profile.state_vector(x, icfg.time(i));
        let d_hat = ObserverState::new(xi.to_vec(), k)?.d_hat(x);
        dt.push(d.iter().zip(&d_hat).map(|(a, b)| a - b).collect());
        xs.push(x.to_vec());
        ds.push(d);
        dh.push(d_hat);
    }
    let mut traj = Trajectory::new(icfg.t0, icfg.dt)?;
    traj.add_channel("x", xs)?;
    traj.add_channel("d", ds)?;
    traj.add_channel("d_hat", dh)?;
    traj.add_channel("d_tilde", dt)?;
    Ok(traj)
}
