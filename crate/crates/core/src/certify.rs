//! Numerical certification of the detour guidance function.
//!
//! Three suites over randomly drawn configurations:
//! * the virtual target is the unique minimiser and every other point has a
//!   descent direction toward it;
//! * the sign change of the outward derivative on the perpendicular line
//!   through `p_min` sits at [`repulsion_radius`];
//! * the analytic gradient agrees with central finite differences.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::guidance::{detour_gradient, detour_guidance, repulsion_radius, DetourContext};
use crate::params::{DrpaParams, Vec2};

pub const W_REP_LEVELS: [f64; 4] = [0.3, 0.5, 0.7, 0.9];
const EXCLUSION: f64 = 1e-6;

/// A random `(p_min, p_target, d_vt, w_rep)` draw with its context.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertConfig {
    pub p_min: Vec2,
    pub p_target: Vec2,
    pub ctx: DetourContext,
}

/// `n` configurations, `w_rep` cycling through [`W_REP_LEVELS`].
pub fn random_configs(n: usize, seed: u64) -> Result<Vec<CertConfig>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let p_min = Vec2::new(rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0));
            let heading = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
            let dist = rng.random_range(0.5..30.0);
            let p_target = p_min + Vec2::new(heading.cos(), heading.sin()) * dist;
            let drpa = DrpaParams {
                d_vt: rng.random_range(0.5..20.0),
                w_rep: W_REP_LEVELS[i % W_REP_LEVELS.len()],
                ..DrpaParams::default()
            };
            Ok(CertConfig {
                p_min,
                p_target,
                ctx: DetourContext::toward(p_min, p_target, &drpa)?,
            })
        })
        .collect()
}

fn sample_disc(rng: &mut ChaCha8Rng, center: Vec2, radius: f64) -> Vec2 {
    let r = radius * rng.random::<f64>().sqrt();
    let a = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
    center + Vec2::new(a.cos(), a.sin()) * r
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MinimiserReport {
    pub configs: usize,
    pub points: usize,
    pub skipped: usize,
    pub value_violations: usize,
    pub descent_violations: usize,
}

impl MinimiserReport {
    pub fn passed(&self) -> bool {
        self.points > 0 && self.value_violations == 0 && self.descent_violations == 0
    }
}

/// Draws `points` samples from the disc of radius `3 d_vt` around `p_min`
/// for every configuration and checks `G(p) > G(p_vt)` and
/// `-∇G(p) · (p_vt - p) > 0`.
pub fn check_unique_minimiser(configs: &[CertConfig], points: usize, seed: u64) -> MinimiserReport {
    let mut report = MinimiserReport {
        configs: configs.len(),
        ..Default::default()
    };
    for (i, cfg) in configs.iter().enumerate() {
        let ctx = &cfg.ctx;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let g_vt = detour_guidance(ctx.p_vt, ctx);
        for _ in 0..points {
            let p = sample_disc(&mut rng, ctx.p_min, 3.0 * ctx.d_vt);
            if p.distance(ctx.p_min) < EXCLUSION || p.distance(ctx.p_vt) < EXCLUSION {
                report.skipped += 1;
                continue;
            }
            report.points += 1;
            if detour_guidance(p, ctx) <= g_vt {
                report.value_violations += 1;
            }
            match detour_gradient(p, ctx) {
                Ok(grad) if -grad.dot(ctx.p_vt - p) > 0.0 => {}
                _ => report.descent_violations += 1,
            }
        }
    }
    report
}

/// Outward derivative `-∇G · unit(p - p_min)` at distance `r` along the
/// unit normal `n` to `p_vt - p_min`.
fn outward_derivative(ctx: &DetourContext, n: Vec2, r: f64) -> Result<f64> {
    let p = ctx.p_min + n * r;
    Ok(-detour_gradient(p, ctx)?.dot(n))
}

/// Locates the sign change of the outward derivative on one side of the
/// perpendicular line by bracket doubling and bisection.
pub fn bisect_repulsion_radius(ctx: &DetourContext, side: f64, tol: f64) -> Result<f64> {
    let axis = ctx.p_vt - ctx.p_min;
    let axis = axis * (1.0 / axis.norm());
    let n = Vec2::new(-axis.y, axis.x) * side.signum();
    let mut lo = ctx.d_vt * 1e-6;
    let mut hi = ctx.d_vt;
    while outward_derivative(ctx, n, hi)? >= 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if outward_derivative(ctx, n, mid)? >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusCheck {
    pub w_rep: f64,
    pub d_vt: f64,
    pub closed_form: f64,
    pub bisected: [f64; 2],
}

impl RadiusCheck {
    pub fn max_error(&self) -> f64 {
        self.bisected
            .iter()
            .map(|b| (b - self.closed_form).abs())
            .fold(0.0, f64::max)
    }
}

pub fn check_repulsion_radius(configs: &[CertConfig]) -> Result<Vec<RadiusCheck>> {
    configs
        .iter()
        .map(|cfg| {
            let ctx = &cfg.ctx;
            Ok(RadiusCheck {
                w_rep: ctx.w_rep,
                d_vt: ctx.d_vt,
                closed_form: repulsion_radius(ctx.w_rep, ctx.d_vt),
                bisected: [
                    bisect_repulsion_radius(ctx, 1.0, 1e-9)?,
                    bisect_repulsion_radius(ctx, -1.0, 1e-9)?,
                ],
            })
        })
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GradientReport {
    pub points: usize,
    pub max_relative_error: f64,
}

/// Compares [`detour_gradient`] with central differences of step `h` at
/// `points` samples spread over the configurations.
pub fn check_gradient(configs: &[CertConfig], points: usize, h: f64, seed: u64) -> Result<GradientReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = GradientReport::default();
    let mut i = 0;
    while report.points < points {
        let ctx = &configs[i % configs.len()].ctx;
        i += 1;
        let p = sample_disc(&mut rng, ctx.p_min, 3.0 * ctx.d_vt);
        // keep the stencil clear of the two kinks
        if p.distance(ctx.p_min) < 1e-2 || p.distance(ctx.p_vt) < 1e-2 {
            continue;
        }
        let grad = detour_gradient(p, ctx)?;
        let fd = Vec2::new(
            (detour_guidance(p + Vec2::new(h, 0.0), ctx) - detour_guidance(p - Vec2::new(h, 0.0), ctx)) / (2.0 * h),
            (detour_guidance(p + Vec2::new(0.0, h), ctx) - detour_guidance(p - Vec2::new(0.0, h), ctx)) / (2.0 * h),
        );
        let rel = (grad - fd).norm() / grad.norm().max(1e-12);
        report.max_relative_error = report.max_relative_error.max(rel);
        report.points += 1;
    }
    Ok(report)
}
