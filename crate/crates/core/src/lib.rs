//! MPPI local planning for a differential-drive robot, with a supervisor that
//! detects when the predicted trajectory stalls in a local minimum and
//! switches the terminal cost to a detour-inducing guidance function until
//! the robot has passed it.
//!
//! ```no_run
//! use drpa_core::bench::{run_trial, PlannerConfig, PlannerVariant};
//! use drpa_core::scenario::{make_qualitative, QualitativeKind};
//!
//! let scenario = make_qualitative(QualitativeKind::UShape);
//! let cfg = PlannerConfig::new(PlannerVariant::Drpa, 50);
//! let result = run_trial(&cfg, &scenario, 7).unwrap();
//! println!("success = {} after {:.1} s", result.success, result.elapsed);
//! ```

pub mod bench;
pub mod certify;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod guidance;
pub mod params;
pub mod sampling;
pub mod scenario;
pub mod solver;
pub mod supervisor;

pub use error::{Error, Result};
pub use geometry::{Aabb, Polygon, World};
pub use params::{Control, ControlSequence, DrpaParams, GuidanceMode, MppiParams, PassageRule, PredictedPath, State, Vec2};
pub use sampling::{NlnParams, NoiseBatch, NoiseSampler};
pub use solver::{Controller, CycleOutput, Planner};
