//! WebAssembly bindings for the browser demo in `www/`.
//!
//! The page drives a [`Simulation`] one batch of control cycles per animation
//! frame, lets the user move the target by clicking, and renders the detour
//! guidance landscape with [`guidance_field`].

use drpa_core::bench::{PlannerConfig, PlannerVariant};
use drpa_core::dynamics::step;
use drpa_core::geometry::WorldDoc;
use drpa_core::guidance::{detour_guidance, DetourContext};
use drpa_core::scenario::{make_qualitative, make_random_grid, Convexity, QualitativeKind, Scenario};
use drpa_core::{Controller, DrpaParams, GuidanceMode, MppiParams, State, Vec2};
use serde_json::json;
use wasm_bindgen::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Status {
    Running,
    Success,
    Collision,
    Timeout,
}

impl Status {
    fn name(self) -> &'static str {
        match self {
            Status::Running => "running",
            Status::Success => "success",
            Status::Collision => "collision",
            Status::Timeout => "timeout",
        }
    }
}

/// One closed-loop run of a planner on a fixed layout.
#[wasm_bindgen]
pub struct Simulation {
    config: PlannerConfig,
    scenario: Scenario,
    controller: Controller,
    state: State,
    cycle: usize,
    max_cycles: usize,
    seed: u64,
    status: Status,
    predicted: Vec<[f64; 2]>,
}

fn build_scenario(layout: &str, seed: u64) -> Result<Scenario, JsError> {
    match layout {
        "grid6" => Ok(make_random_grid(6, Convexity::NonConvex, seed)?),
        "grid10" => Ok(make_random_grid(10, Convexity::NonConvex, seed)?),
        _ => Ok(make_qualitative(layout.parse::<QualitativeKind>()?)),
    }
}

#[wasm_bindgen]
impl Simulation {
    /// `layout` is `shortrect`, `longrect`, `ushape`, `grid6` or `grid10`;
    /// `planner` is `mppi`, `logmppi` or `drpa`.
    #[wasm_bindgen(constructor)]
    pub fn new(layout: &str, planner: &str, horizon: usize, rollouts: usize, seed: u32) -> Result<Simulation, JsError> {
        let variant: PlannerVariant = planner.parse()?;
        let config = PlannerConfig::new(variant, horizon).with_rollouts(rollouts);
        config.validate()?;
        let seed = u64::from(seed);
        let scenario = build_scenario(layout, seed)?;
        let controller = Controller::new(config.build()?, scenario.target, seed);
        let max_cycles = (scenario.time_limit / config.mppi.dt).round() as usize;
        Ok(Simulation {
            state: scenario.start,
            config,
            scenario,
            controller,
            cycle: 0,
            max_cycles,
            seed,
            status: Status::Running,
            predicted: Vec::new(),
        })
    }

    /// Obstacles, bounds, start and target as JSON.
    pub fn world_json(&self) -> Result<String, JsError> {
        let doc = WorldDoc::from(self.scenario.world.clone());
        Ok(serde_json::to_string(&json!({
            "world": doc,
            "start": [self.scenario.start.x, self.scenario.start.y],
            "target": [self.scenario.target.x, self.scenario.target.y],
            "success_radius": self.scenario.success_radius,
        }))?)
    }

    /// Moves the target and restarts the controller from the current state.
    pub fn set_target(&mut self, x: f64, y: f64) -> Result<(), JsError> {
        let target = Vec2::new(x, y);
        if self.scenario.world.contains(target) {
            return Err(JsError::new("target lies inside an obstacle"));
        }
        self.scenario.target = target;
        self.controller = Controller::new(self.config.build()?, target, self.seed.wrapping_add(self.cycle as u64));
        self.max_cycles = self.cycle + (self.scenario.time_limit / self.config.mppi.dt).round() as usize;
        if self.status != Status::Collision {
            self.status = Status::Running;
        }
        Ok(())
    }

    /// Runs up to `cycles` control cycles and returns the latest frame as JSON.
    pub fn advance(&mut self, cycles: usize) -> Result<String, JsError> {
        let dt = self.config.mppi.dt;
        for _ in 0..cycles {
            if self.status != Status::Running {
                break;
            }
            if self.state.position().distance(self.scenario.target) <= self.scenario.success_radius {
                self.status = Status::Success;
                break;
            }
            if self.cycle >= self.max_cycles {
                self.status = Status::Timeout;
                break;
            }
            let out = self.controller.step(self.state, &self.scenario.world)?;
            self.predicted = out.solver.predicted_path.positions().map(Into::into).collect();
            self.state = step(self.state, out.executed, dt);
            self.cycle += 1;
            if self.scenario.world.contains(self.state.position()) {
                self.status = Status::Collision;
            }
        }
        self.frame()
    }

    fn frame(&self) -> Result<String, JsError> {
        let (mode, p_min, p_vt) = match self.controller.mode() {
            GuidanceMode::TargetDirected => ("target", None, None),
            GuidanceMode::DetourInducing { p_min, p_vt } => ("detour", Some([p_min.x, p_min.y]), Some([p_vt.x, p_vt.y])),
        };
        Ok(serde_json::to_string(&json!({
            "t": self.cycle as f64 * self.config.mppi.dt,
            "pose": [self.state.x, self.state.y, self.state.theta],
            "mode": mode,
            "p_min": p_min,
            "p_vt": p_vt,
            "predicted": self.predicted,
            "status": self.status.name(),
        }))?)
    }
}

/// Samples the detour guidance on an `n x n` grid over the square of half
/// width `half` centred on `p_min`, row by row from the bottom.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn guidance_field(
    p_min_x: f64,
    p_min_y: f64,
    target_x: f64,
    target_y: f64,
    d_vt: f64,
    w_rep: f64,
    half: f64,
    n: usize,
) -> Result<Vec<f64>, JsError> {
    let drpa = DrpaParams {
        d_vt,
        w_rep,
        ..DrpaParams::default()
    };
    drpa.validate(MppiParams::default().horizon)?;
    let p_min = Vec2::new(p_min_x, p_min_y);
    let ctx = DetourContext::toward(p_min, Vec2::new(target_x, target_y), &drpa)?;
    let step = if n > 1 { 2.0 * half / (n - 1) as f64 } else { 0.0 };
    let mut out = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let p = p_min + Vec2::new(-half + i as f64 * step, -half + j as f64 * step);
            out.push(detour_guidance(p, &ctx));
        }
    }
    Ok(out)
}
