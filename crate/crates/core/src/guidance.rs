//! Terminal guidance functions.
//!
//! `target_guidance` is the plain Euclidean distance to the goal. The detour
//! function attracts toward a virtual target placed `d_vt` past the detected
//! local minimum while pushing away from the minimum itself:
//!
//! ```text
//! G_detour(p) = |p_vt - p| - w_rep |p_min - p|
//! ```
//!
//! For `0 < w_rep < 1` the virtual target is the unique minimiser, and on the
//! line through `p_min` perpendicular to `p_vt - p_min` the negative gradient
//! points outward up to [`repulsion_radius`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::World;
use crate::params::{DrpaParams, GuidanceMode, MppiParams, State, Vec2};

const DEGENERATE_EPS: f64 = 1e-9;

#[inline]
pub fn target_guidance(p: Vec2, p_target: Vec2) -> f64 {
    (p_target - p).norm()
}

/// `p_min + d_vt · unit(p_target - p_min)`. May land beyond the target.
pub fn place_virtual_target(p_min: Vec2, p_target: Vec2, d_vt: f64) -> Result<Vec2> {
    let dir = p_target - p_min;
    let len = dir.norm();
    if len < DEGENERATE_EPS {
        return Err(Error::DegenerateDirection("p_target"));
    }
    Ok(p_min + dir * (d_vt / len))
}

/// Everything the detour function needs once a minimum has been detected.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetourContext {
    pub p_min: Vec2,
    pub p_vt: Vec2,
    pub w_rep: f64,
    pub d_vt: f64,
}

impl DetourContext {
    pub fn new(p_min: Vec2, p_vt: Vec2, w_rep: f64, d_vt: f64) -> Result<Self> {
        if !(w_rep > 0.0 && w_rep < 1.0) {
            return Err(Error::param("w_rep", "must lie strictly inside (0, 1)"));
        }
        if ((p_vt - p_min).norm() - d_vt).abs() > 1e-9 * d_vt.max(1.0) {
            return Err(Error::param("d_vt", "virtual target is not d_vt from p_min"));
        }
        Ok(Self {
            p_min,
            p_vt,
            w_rep,
            d_vt,
        })
    }

    /// Places the virtual target toward `p_target` and builds the context.
    pub fn toward(p_min: Vec2, p_target: Vec2, drpa: &DrpaParams) -> Result<Self> {
        let p_vt = place_virtual_target(p_min, p_target, drpa.d_vt)?;
        Self::new(p_min, p_vt, drpa.w_rep, drpa.d_vt)
    }
}

#[inline]
pub fn detour_guidance(p: Vec2, ctx: &DetourContext) -> f64 {
    (ctx.p_vt - p).norm() - ctx.w_rep * (ctx.p_min - p).norm()
}

/// Analytic gradient of [`detour_guidance`]; undefined at `p_min` and `p_vt`.
pub fn detour_gradient(p: Vec2, ctx: &DetourContext) -> Result<Vec2> {
    let to_vt = p - ctx.p_vt;
    let to_min = p - ctx.p_min;
    let (d_vt, d_min) = (to_vt.norm(), to_min.norm());
    if d_vt <= DEGENERATE_EPS {
        return Err(Error::Undifferentiable("p_vt"));
    }
    if d_min <= DEGENERATE_EPS {
        return Err(Error::Undifferentiable("p_min"));
    }
    Ok(to_vt * (1.0 / d_vt) - to_min * (ctx.w_rep / d_min))
}

/// Radius of the region on the perpendicular hyperplane through `p_min` where
/// the descent direction has an outward component:
/// `d_vt · sqrt(w_rep² / (1 - w_rep²))`.
pub fn repulsion_radius(w_rep: f64, d_vt: f64) -> f64 {
    let w2 = w_rep * w_rep;
    d_vt * (w2 / (1.0 - w2)).sqrt()
}

/// Guidance function resolved for evaluation inside the rollouts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Guidance {
    Target { p_target: Vec2 },
    Detour(DetourContext),
}

impl Guidance {
    pub fn from_mode(mode: &GuidanceMode, p_target: Vec2, w_rep: f64) -> Self {
        match *mode {
            GuidanceMode::TargetDirected => Guidance::Target { p_target },
            GuidanceMode::DetourInducing { p_min, p_vt } => Guidance::Detour(DetourContext {
                p_min,
                p_vt,
                w_rep,
                d_vt: (p_vt - p_min).norm(),
            }),
        }
    }

    #[inline]
    pub fn eval(&self, p: Vec2) -> f64 {
        match self {
            Guidance::Target { p_target } => target_guidance(p, *p_target),
            Guidance::Detour(ctx) => detour_guidance(p, ctx),
        }
    }
}

/// Terminal cost: collision indicator plus weighted guidance at the final state.
#[inline]
pub fn terminal_cost(state: &State, world: &World, guidance: &Guidance, params: &MppiParams) -> f64 {
    let p = state.position();
    world.collision_cost(p, params.w_obst) + params.w_guidance * guidance.eval(p)
}
