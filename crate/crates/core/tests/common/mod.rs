//! Oracles shared by the integration tests and the acceptance run.
#![allow(dead_code)]

use drpa_core::bench::{run_trial, PlannerConfig, TrajectoryRecord};
use drpa_core::geometry::Aabb;
use drpa_core::scenario::Scenario;
use drpa_core::{MppiParams, Polygon, Vec2, World};

const RES: f64 = 0.5;

pub struct GridWorld {
    pub cells: Vec<(i32, i32)>,
}

impl GridWorld {
    pub fn occupied(&self, x: f64, y: f64) -> bool {
        self.cells.iter().any(|&(i, j)| {
            let (x0, y0) = (i as f64 * RES, j as f64 * RES);
            x0 <= x && x <= x0 + RES && y0 <= y && y <= y0 + RES
        })
    }

    pub fn world(&self) -> World {
        let polys = self
            .cells
            .iter()
            .map(|&(i, j)| {
                let min = Vec2::new(i as f64 * RES, j as f64 * RES);
                Polygon::rectangle(min, min + Vec2::new(RES, RES)).unwrap()
            })
            .collect();
        World::new(polys, Aabb::square(10.0)).unwrap()
    }
}

pub enum Goal {
    Target(f64, f64),
    Detour { min: (f64, f64), vt: (f64, f64), w: f64 },
}

/// The cost-to-go written out literally for one rollout.
#[allow(clippy::too_many_arguments)]
pub fn oracle_cost(
    x0: (f64, f64, f64),
    u_hat: &[(f64, f64)],
    eps: &[[f64; 2]],
    grid: &GridWorld,
    goal: &Goal,
    p: &MppiParams,
) -> f64 {
    let (mut x, mut y, mut th) = x0;
    let mut j = 0.0;
    let t = u_hat.len();
    for tau in 0..t {
        let v = u_hat[tau].0 + eps[tau][0];
        let w = u_hat[tau].1 + eps[tau][1];
        let vc = v.max(p.v_bounds.lo).min(p.v_bounds.hi);
        let wc = w.max(p.omega_bounds.lo).min(p.omega_bounds.hi);
        x += vc * th.cos() * p.dt;
        y += vc * th.sin() * p.dt;
        th += wc * p.dt;
        let hit = if grid.occupied(x, y) { p.w_obst } else { 0.0 };
        if tau == t - 1 {
            let g = match *goal {
                Goal::Target(gx, gy) => ((gx - x).powi(2) + (gy - y).powi(2)).sqrt(),
                Goal::Detour { min, vt, w } => {
                    ((vt.0 - x).powi(2) + (vt.1 - y).powi(2)).sqrt()
                        - w * ((min.0 - x).powi(2) + (min.1 - y).powi(2)).sqrt()
                }
            };
            j += hit + p.w_guidance * g;
        } else {
            j += hit;
        }
        j += p.gamma * (u_hat[tau].0 * v / p.noise_variance[0] + u_hat[tau].1 * w / p.noise_variance[1]);
    }
    j
}

pub fn fingerprint(records: &[TrajectoryRecord]) -> Vec<[u64; 5]> {
    records
        .iter()
        .map(|r| {
            [
                r.x.to_bits(),
                r.y.to_bits(),
                r.theta.to_bits(),
                r.v.to_bits(),
                r.omega.to_bits(),
            ]
        })
        .collect()
}

pub fn run_in_pool(threads: usize, cfg: &PlannerConfig, scenario: &Scenario, seed: u64) -> Vec<[u64; 5]> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| fingerprint(&run_trial(cfg, scenario, seed).unwrap().trajectory))
}
