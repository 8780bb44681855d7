//! Closed-loop trials, scenario suites and SR / ST / CT aggregation.

pub mod config;
pub mod trajectory;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::step;
use crate::error::{Error, Result};
use crate::params::{DrpaParams, GuidanceMode, MppiParams, Vec2};
use crate::sampling::{NlnParams, NoiseSampler};
use crate::scenario::{make_random_grid, Convexity, Scenario};
use crate::solver::{Controller, Planner};

pub use trajectory::{ModeTag, TrajectoryRecord};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlannerVariant {
    Mppi,
    LogMppi,
    Drpa,
}

impl PlannerVariant {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Mppi => "mppi",
            Self::LogMppi => "logmppi",
            Self::Drpa => "drpa",
        }
    }
}

impl fmt::Display for PlannerVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PlannerVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "mppi" => Ok(Self::Mppi),
            "logmppi" => Ok(Self::LogMppi),
            "drpa" | "drpamppi" => Ok(Self::Drpa),
            other => Err(Error::Config(format!("unknown planner `{other}`"))),
        }
    }
}

/// Planner variant plus every parameter it needs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlannerConfig {
    pub variant: PlannerVariant,
    pub mppi: MppiParams,
    pub drpa: Option<DrpaParams>,
    pub nln: Option<NlnParams>,
}

impl PlannerConfig {
    /// Default constants for `variant` at the given horizon.
    pub fn new(variant: PlannerVariant, horizon: usize) -> Self {
        Self {
            variant,
            mppi: MppiParams::default().with_horizon(horizon),
            drpa: (variant == PlannerVariant::Drpa).then(DrpaParams::default),
            nln: (variant == PlannerVariant::LogMppi).then(NlnParams::default),
        }
    }

    pub fn with_rollouts(mut self, k: usize) -> Self {
        self.mppi.num_rollouts = k;
        self
    }

    pub fn horizon(&self) -> usize {
        self.mppi.horizon
    }

    /// e.g. `drpa-h50`
    pub fn label(&self) -> String {
        format!("{}-h{}", self.variant, self.mppi.horizon)
    }

    pub fn validate(&self) -> Result<()> {
        self.mppi.validate()?;
        match self.variant {
            PlannerVariant::Drpa => {
                let drpa = self.drpa.as_ref().ok_or(Error::MissingVariantParams {
                    variant: "drpa",
                    missing: "detection/detour parameters",
                })?;
                drpa.validate(self.mppi.horizon)?;
            }
            PlannerVariant::LogMppi => {
                self.nln
                    .as_ref()
                    .ok_or(Error::MissingVariantParams {
                        variant: "logmppi",
                        missing: "lognormal mixture parameters",
                    })?
                    .validate()?;
            }
            PlannerVariant::Mppi => {}
        }
        Ok(())
    }

    pub fn build(&self) -> Result<Planner> {
        self.validate()?;
        let variance = self.mppi.noise_variance;
        let (sampler, drpa) = match self.variant {
            PlannerVariant::Mppi => (NoiseSampler::gaussian(variance)?, None),
            PlannerVariant::LogMppi => (
                NoiseSampler::nln(variance, self.nln.expect("validated"))?,
                None,
            ),
            PlannerVariant::Drpa => (NoiseSampler::gaussian(variance)?, self.drpa.clone()),
        };
        Planner::new(self.mppi.clone(), drpa, sampler)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransitionKind {
    /// Local minimum detected, detour guidance engaged.
    Detected,
    /// Passage plane crossed, back to target guidance.
    Passed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeEvent {
    pub cycle: usize,
    pub t: f64,
    pub kind: TransitionKind,
    pub p_min: Vec2,
    pub p_vt: Vec2,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TrialOptions {
    /// Attach every cycle's predicted path to its trajectory record.
    pub record_predictions: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub success: bool,
    pub collision: bool,
    /// Seconds until success, collision or the time limit.
    pub elapsed: f64,
    pub cycles: usize,
    pub total_compute_ms: f64,
    pub mean_cycle_compute_ms: f64,
    pub final_distance: f64,
    pub trajectory: Vec<TrajectoryRecord>,
    pub events: Vec<ModeEvent>,
}

impl TrialResult {
    pub fn summary(&self) -> TrialSummary {
        TrialSummary {
            success: self.success,
            collision: self.collision,
            elapsed: self.elapsed,
            cycles: self.cycles,
            total_compute_ms: self.total_compute_ms,
            detours: self
                .events
                .iter()
                .filter(|e| e.kind == TransitionKind::Detected)
                .count(),
        }
    }
}

pub fn run_trial(planner: &PlannerConfig, scenario: &Scenario, seed: u64) -> Result<TrialResult> {
    run_trial_with(planner, scenario, seed, TrialOptions::default())
}

/// Runs the receding-horizon loop until the robot is within the success
/// radius, enters an obstacle, or the time limit passes.
pub fn run_trial_with(
    planner: &PlannerConfig,
    scenario: &Scenario,
    seed: u64,
    options: TrialOptions,
) -> Result<TrialResult> {
    let built = planner.build()?;
    let dt = built.params().dt;
    let max_cycles = (scenario.time_limit / dt).round() as usize;
    let mut controller = Controller::new(built, scenario.target, seed);
    let world = &scenario.world;

    let mut x = scenario.start;
    let mut trajectory = Vec::with_capacity(max_cycles + 1);
    let mut events = Vec::new();
    let mut total_compute_ms = 0.0;
    let mut cycles = 0;
    let mut collision = false;
    let mut success = false;
    let mut elapsed = max_cycles as f64 * dt;

    for cycle in 0..=max_cycles {
        let t = cycle as f64 * dt;
        if x.position().distance(scenario.target) <= scenario.success_radius {
            success = true;
            elapsed = t;
            break;
        }
        if cycle == max_cycles {
            break;
        }
        let mode = controller.mode();
        let started = Instant::now();
        let out = controller.step(x, world)?;
        let compute_ms = started.elapsed().as_secs_f64() * 1e3;
        total_compute_ms += compute_ms;
        cycles += 1;

        let mut record = TrajectoryRecord::new(cycle, t, x, out.executed, &mode);
        record.compute_ms = compute_ms;
        if options.record_predictions {
            record.predicted = Some(out.solver.predicted_path.positions().map(Into::into).collect());
        }
        trajectory.push(record);
        if let Some(event) = transition(cycle, t, &mode, &out.mode) {
            events.push(event);
        }

        x = step(x, out.executed, dt);
        if world.contains(x.position()) {
            collision = true;
            elapsed = t + dt;
            break;
        }
    }
    let mut last = TrajectoryRecord::new(cycles, elapsed, x, crate::params::Control::ZERO, &controller.mode());
    last.compute_ms = 0.0;
    trajectory.push(last);

    Ok(TrialResult {
        success,
        collision,
        elapsed,
        cycles,
        total_compute_ms,
        mean_cycle_compute_ms: if cycles > 0 {
            total_compute_ms / cycles as f64
        } else {
            0.0
        },
        final_distance: x.position().distance(scenario.target),
        trajectory,
        events,
    })
}

fn transition(cycle: usize, t: f64, before: &GuidanceMode, after: &GuidanceMode) -> Option<ModeEvent> {
    match (before, after) {
        (GuidanceMode::TargetDirected, GuidanceMode::DetourInducing { p_min, p_vt }) => Some(ModeEvent {
            cycle,
            t,
            kind: TransitionKind::Detected,
            p_min: *p_min,
            p_vt: *p_vt,
        }),
        (GuidanceMode::DetourInducing { p_min, p_vt }, GuidanceMode::TargetDirected) => Some(ModeEvent {
            cycle,
            t,
            kind: TransitionKind::Passed,
            p_min: *p_min,
            p_vt: *p_vt,
        }),
        _ => None,
    }
}

/// Per-trial numbers kept by a suite run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub success: bool,
    pub collision: bool,
    pub elapsed: f64,
    pub cycles: usize,
    pub total_compute_ms: f64,
    pub detours: usize,
}

/// Success rate (%), mean success time (s) and mean solver time per cycle (ms).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub sr: f64,
    /// Mean over successful trials only; `None` without any success.
    pub st: Option<f64>,
    pub ct: f64,
    pub n_trials: usize,
    pub n_success: usize,
    pub n_collision: usize,
}

impl Metrics {
    pub fn from_trials<'a>(trials: impl IntoIterator<Item = &'a TrialSummary>) -> Self {
        let (mut n, mut ok, mut hits, mut st_sum, mut ms, mut cycles) = (0usize, 0usize, 0usize, 0.0, 0.0, 0usize);
        for t in trials {
            n += 1;
            if t.success {
                ok += 1;
                st_sum += t.elapsed;
            }
            if t.collision {
                hits += 1;
            }
            ms += t.total_compute_ms;
            cycles += t.cycles;
        }
        Self {
            sr: if n > 0 { 100.0 * ok as f64 / n as f64 } else { 0.0 },
            st: (ok > 0).then(|| st_sum / ok as f64),
            ct: if cycles > 0 { ms / cycles as f64 } else { 0.0 },
            n_trials: n,
            n_success: ok,
            n_collision: hits,
        }
    }
}

/// Which random-grid family a suite draws from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub grid_n: usize,
    pub convexity: Convexity,
}

impl fmt::Display for SuiteConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{} {}", self.grid_n, self.grid_n, self.convexity)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub planner: PlannerConfig,
    pub suite: SuiteConfig,
    pub base_seed: u64,
    pub metrics: Metrics,
    pub trials: Vec<TrialSummary>,
}

/// Scenario `i` is generated from seed `base_seed + i`; its noise streams
/// are keyed by `base_seed ^ i`.
pub fn trial_seeds(base_seed: u64, index: usize) -> (u64, u64) {
    (base_seed.wrapping_add(index as u64), base_seed ^ index as u64)
}

/// Runs `n_scenarios` trials (in parallel) and aggregates them.
pub fn run_suite(
    planner: &PlannerConfig,
    suite: SuiteConfig,
    n_scenarios: usize,
    base_seed: u64,
) -> Result<SuiteReport> {
    if n_scenarios == 0 {
        return Err(Error::param("n_scenarios", "must be at least 1"));
    }
    planner.validate()?;
    let trials = (0..n_scenarios)
        .into_par_iter()
        .map(|i| {
            let (scenario_seed, noise_seed) = trial_seeds(base_seed, i);
            let scenario = make_random_grid(suite.grid_n, suite.convexity, scenario_seed)?;
            let mut result = run_trial(planner, &scenario, noise_seed)?;
            result.trajectory.clear();
            Ok(result.summary())
        })
        .collect::<Result<Vec<_>>>()?;
    let metrics = Metrics::from_trials(&trials);
    Ok(SuiteReport {
        planner: planner.clone(),
        suite,
        base_seed,
        metrics,
        trials,
    })
}

pub const CSV_HEADER: [&str; 8] = ["planner", "horizon", "grid", "convexity", "n", "sr", "st", "ct"];

impl SuiteReport {
    /// Row matching [`CSV_HEADER`]; `st` is empty when nothing succeeded.
    pub fn csv_row(&self) -> [String; 8] {
        [
            self.planner.variant.to_string(),
            self.planner.horizon().to_string(),
            self.suite.grid_n.to_string(),
            self.suite.convexity.to_string(),
            self.metrics.n_trials.to_string(),
            format!("{:.1}", self.metrics.sr),
            self.metrics.st.map(|s| format!("{s:.2}")).unwrap_or_default(),
            format!("{:.3}", self.metrics.ct),
        ]
    }
}
