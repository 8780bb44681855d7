//! Path-integral solver and the receding-horizon control cycle.
//!
//! A cycle samples K noise sequences, rolls each one out from the current
//! state, turns the rollout costs into softmax weights (shifted by the
//! minimum cost), nudges the nominal sequence by the weighted noise, executes
//! the first command and shifts the rest forward. When a supervisor is
//! configured, the predicted path of the new optimum drives the guidance mode.
//!
//! Rollouts run in parallel, but every reduction walks `k` in index order, so
//! the result is bit-identical for any thread count.

use rayon::prelude::*;

use crate::dynamics::{clamp_control, propagate, step};
use crate::error::Result;
use crate::geometry::World;
use crate::guidance::{terminal_cost, Guidance};
use crate::params::{Control, ControlSequence, DrpaParams, GuidanceMode, MppiParams, PredictedPath, State, Vec2};
use crate::sampling::{Noise, NoiseBatch, NoiseSampler};
use crate::supervisor::advance_mode;

/// Cost-to-go of a single rollout together with the noise it consumed.
#[derive(Clone, Debug, PartialEq)]
pub struct RolloutResult {
    pub cost_to_go: f64,
    pub epsilons_used: Vec<Noise>,
}

/// Accumulates running collision cost on every simulated state after the
/// first, the terminal cost on the last one, and the control term
/// `γ·ûᵀΣ⁻¹(û + ε)` at every step.
#[inline]
fn accumulate_rollout(
    x0: State,
    u_hat: &[Control],
    eps: &[Noise],
    world: &World,
    guidance: &Guidance,
    params: &MppiParams,
    precision: [f64; 2],
) -> f64 {
    let last = u_hat.len() - 1;
    let mut x = x0;
    let mut cost = 0.0;
    for (tau, (uh, e)) in u_hat.iter().zip(eps).enumerate() {
        let v = Control::new(uh.v + e[0], uh.omega + e[1]);
        x = step(x, clamp_control(v, params), params.dt);
        if tau == last {
            cost += terminal_cost(&x, world, guidance, params);
        } else {
            cost += world.collision_cost(x.position(), params.w_obst);
        }
        cost += params.gamma * (uh.v * precision[0] * v.v + uh.omega * precision[1] * v.omega);
    }
    cost
}

pub fn rollout_cost(
    x0: State,
    u_hat: &ControlSequence,
    eps: &[Noise],
    world: &World,
    guidance: &Guidance,
    params: &MppiParams,
) -> RolloutResult {
    assert_eq!(u_hat.len(), eps.len(), "noise length must equal the horizon");
    RolloutResult {
        cost_to_go: accumulate_rollout(x0, u_hat.as_slice(), eps, world, guidance, params, params.noise_precision()),
        epsilons_used: eps.to_vec(),
    }
}

/// Softmax weights `exp(-(J_k - ρ)/λ) / η` and the minimum cost `ρ`.
pub fn importance_weights(costs: &[f64], lambda: f64) -> (Vec<f64>, f64) {
    let rho = costs.iter().copied().fold(f64::INFINITY, f64::min);
    let mut weights: Vec<f64> = costs.iter().map(|&j| (-(j - rho) / lambda).exp()).collect();
    let eta: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= eta;
    }
    (weights, rho)
}

/// `u*_τ = û_τ + Σ_k w_k ε_{k,τ}`, left unclamped.
pub fn update_controls(u_hat: &ControlSequence, weights: &[f64], batch: &NoiseBatch) -> ControlSequence {
    let horizon = u_hat.len();
    assert_eq!(batch.horizon, horizon);
    assert_eq!(batch.num_rollouts, weights.len());
    let mut acc = vec![[0.0f64; 2]; horizon];
    for (k, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for (a, e) in acc.iter_mut().zip(batch.rollout(k)) {
            a[0] += w * e[0];
            a[1] += w * e[1];
        }
    }
    ControlSequence(
        u_hat
            .as_slice()
            .iter()
            .zip(&acc)
            .map(|(u, a)| Control::new(u.v + a[0], u.omega + a[1]))
            .collect(),
    )
}

/// Drops the first command and pads the tail with zero control.
pub fn shift_sequence(u_star: &ControlSequence) -> ControlSequence {
    let mut next: Vec<Control> = u_star.as_slice().iter().skip(1).copied().collect();
    next.push(Control::ZERO);
    ControlSequence(next)
}

/// Artifacts of one importance-sampling update.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverOutput {
    pub optimal_sequence: ControlSequence,
    pub predicted_path: PredictedPath,
    pub weights: Vec<f64>,
    pub rho: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CycleOutput {
    /// Clamped first command of the optimal sequence.
    pub executed: Control,
    /// Shifted (unclamped) nominal sequence for the next cycle.
    pub next_u_hat: ControlSequence,
    pub mode: GuidanceMode,
    pub solver: SolverOutput,
}

/// Validated solver configuration: MPPI constants, optional supervisor and
/// the noise distribution. Immutable once built.
#[derive(Clone, Debug)]
pub struct Planner {
    params: MppiParams,
    drpa: Option<DrpaParams>,
    sampler: NoiseSampler,
    precision: [f64; 2],
}

impl Planner {
    pub fn new(params: MppiParams, drpa: Option<DrpaParams>, sampler: NoiseSampler) -> Result<Self> {
        params.validate()?;
        if let Some(d) = &drpa {
            d.validate(params.horizon)?;
        }
        let precision = params.noise_precision();
        Ok(Self {
            params,
            drpa,
            sampler,
            precision,
        })
    }

    pub fn params(&self) -> &MppiParams {
        &self.params
    }

    pub fn drpa(&self) -> Option<&DrpaParams> {
        self.drpa.as_ref()
    }

    pub fn sampler(&self) -> &NoiseSampler {
        &self.sampler
    }

    fn guidance(&self, mode: &GuidanceMode, target: Vec2) -> Guidance {
        let w_rep = self.drpa.as_ref().map_or(0.0, |d| d.w_rep);
        Guidance::from_mode(mode, target, w_rep)
    }

    /// Samples noise for every rollout and evaluates all K costs.
    pub fn evaluate_rollouts(
        &self,
        x0: State,
        world: &World,
        guidance: &Guidance,
        u_hat: &ControlSequence,
        seed: u64,
    ) -> (NoiseBatch, Vec<f64>) {
        let (k_count, horizon) = (self.params.num_rollouts, self.params.horizon);
        let mut epsilons = vec![[0.0; 2]; k_count * horizon];
        let mut costs = vec![0.0; k_count];
        epsilons
            .par_chunks_mut(horizon)
            .zip(costs.par_iter_mut())
            .enumerate()
            .for_each(|(k, (eps, cost))| {
                self.sampler.fill_rollout(seed, k, eps);
                *cost = accumulate_rollout(x0, u_hat.as_slice(), eps, world, guidance, &self.params, self.precision);
            });
        let batch = NoiseBatch {
            epsilons,
            num_rollouts: k_count,
            horizon,
            seed,
        };
        (batch, costs)
    }

    /// One full receding-horizon cycle from state `x0`.
    pub fn control_cycle(
        &self,
        x0: State,
        world: &World,
        target: Vec2,
        mode: GuidanceMode,
        u_hat: &ControlSequence,
        seed: u64,
    ) -> Result<CycleOutput> {
        assert_eq!(u_hat.len(), self.params.horizon, "nominal sequence must span the horizon");
        let guidance = self.guidance(&mode, target);
        let (batch, costs) = self.evaluate_rollouts(x0, world, &guidance, u_hat, seed);
        let (weights, rho) = importance_weights(&costs, self.params.lambda);
        let optimal_sequence = update_controls(u_hat, &weights, &batch);

        let executed = clamp_control(optimal_sequence[0], &self.params);
        let next_u_hat = shift_sequence(&optimal_sequence);
        let predicted_path = propagate(x0, &optimal_sequence, &self.params);
        let mode = match &self.drpa {
            Some(drpa) => advance_mode(mode, &predicted_path, x0.position(), target, drpa)?,
            None => mode,
        };
        Ok(CycleOutput {
            executed,
            next_u_hat,
            mode,
            solver: SolverOutput {
                optimal_sequence,
                predicted_path,
                weights,
                rho,
            },
        })
    }
}

/// SplitMix64 finaliser, used to derive independent per-cycle seeds.
pub fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stateful wrapper that owns the nominal sequence and guidance mode across
/// cycles.
#[derive(Clone, Debug)]
pub struct Controller {
    planner: Planner,
    target: Vec2,
    u_hat: ControlSequence,
    mode: GuidanceMode,
    cycle: u64,
    seed: u64,
}

impl Controller {
    pub fn new(planner: Planner, target: Vec2, seed: u64) -> Self {
        let u_hat = ControlSequence::zeros(planner.params.horizon);
        Self {
            planner,
            target,
            u_hat,
            mode: GuidanceMode::TargetDirected,
            cycle: 0,
            seed,
        }
    }

    pub fn planner(&self) -> &Planner {
        &self.planner
    }

    pub fn mode(&self) -> GuidanceMode {
        self.mode
    }

    pub fn cycle(&self) -> u64 {
        self.cycle
    }

    pub fn target(&self) -> Vec2 {
        self.target
    }

    pub fn nominal(&self) -> &ControlSequence {
        &self.u_hat
    }

    /// Runs one cycle at state `x0` and commits the new nominal sequence and mode.
    pub fn step(&mut self, x0: State, world: &World) -> Result<CycleOutput> {
        let seed = mix_seed(self.seed, self.cycle);
        let out = self
            .planner
            .control_cycle(x0, world, self.target, self.mode, &self.u_hat, seed)?;
        self.u_hat = out.next_u_hat.clone();
        self.mode = out.mode;
        self.cycle += 1;
        Ok(out)
    }
}
