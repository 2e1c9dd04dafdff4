//! Simulation and tuning toolkit for dynamic surface control (DSC) of
//! strict-feedback nonlinear systems.
//!
//! The crate is organised bottom-up:
//!
//! * [`numerics`] fixed-step integration, finite differences, matrix
//!   measures, box-grid suprema and a truncated Taylor arithmetic used for
//!   exact virtual-control derivatives.
//! * [`plant`] the strict-feedback model, disturbance signals, the DC-motor
//!   manipulator and the sinusoidal reference.
//! * [`backstepping`] recursive virtual controls with exact time derivatives.
//! * [`dsc`] command filters, the high-gain disturbance observer and the DSC law.
//! * [`contraction`] constant estimation, filter-parameter selection and error bounds.
//! * [`harness`] declarative experiments, metrics, sweeps and CSV/JSON output.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod backstepping;
pub mod contraction;
pub mod dsc;
pub mod error;
pub mod harness;
pub mod numerics;
pub mod plant;

pub use backstepping::{TuningFn, TuningFunctions, VirtualControlStack};
pub use contraction::BoundReport;
pub use dsc::{DscConfig, FilterMode};
pub use error::{DscError, Result};
pub use harness::{ExperimentSpec, Metrics};
pub use numerics::{GridBox, IntegratorConfig, Matrix, Method, Trajectory, Vector};
pub use plant::{DcMotorParams, DisturbanceProfile, ReferenceSignal, StrictFeedbackSystem};
