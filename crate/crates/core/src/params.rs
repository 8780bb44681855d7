//! Shared domain types and the validated solver / supervisor parameter bundles.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A planar point or vector in meters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    #[inline]
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from([x, y]: [f64; 2]) -> Self {
        Vec2::new(x, y)
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(p: Vec2) -> Self {
        [p.x, p.y]
    }
}

/// Wraps an angle onto `(-π, π]`.
///
/// Values already in range are returned untouched, which makes the function
/// exactly idempotent.
pub fn wrap_angle(theta: f64) -> f64 {
    if theta > -PI && theta <= PI {
        return theta;
    }
    let r = theta.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Robot pose: position in meters, heading in radians.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl State {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: wrap_angle(theta),
        }
    }

    #[inline]
    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

/// Translational (m/s) and angular (rad/s) velocity command.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Control {
    pub v: f64,
    pub omega: f64,
}

impl Control {
    pub const ZERO: Control = Control { v: 0.0, omega: 0.0 };

    pub const fn new(v: f64, omega: f64) -> Self {
        Self { v, omega }
    }
}

/// Control inputs over the prediction horizon, one per step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlSequence(pub Vec<Control>);

impl ControlSequence {
    pub fn zeros(horizon: usize) -> Self {
        Self(vec![Control::ZERO; horizon])
    }

    pub fn constant(horizon: usize, u: Control) -> Self {
        Self(vec![u; horizon])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Control] {
        &self.0
    }
}

impl std::ops::Index<usize> for ControlSequence {
    type Output = Control;
    fn index(&self, i: usize) -> &Control {
        &self.0[i]
    }
}

/// States visited under a control sequence; index 0 is the start state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictedPath(pub Vec<State>);

impl PredictedPath {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn states(&self) -> &[State] {
        &self.0
    }

    pub fn positions(&self) -> impl Iterator<Item = Vec2> + '_ {
        self.0.iter().map(State::position)
    }

    /// Horizon length T (one less than the number of states).
    pub fn horizon(&self) -> usize {
        self.0.len().saturating_sub(1)
    }
}

impl std::ops::Index<usize> for PredictedPath {
    type Output = State;
    fn index(&self, i: usize) -> &State {
        &self.0[i]
    }
}

/// Closed interval `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    #[inline]
    pub fn clamp(&self, value: f64) -> f64 {
        value.clamp(self.lo, self.hi)
    }
}

/// Path-integral solver constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MppiParams {
    /// Number of sampled rollouts K.
    pub num_rollouts: usize,
    /// Prediction horizon T in steps.
    pub horizon: usize,
    /// Softmax temperature.
    pub lambda: f64,
    /// Control-cost weight, `0 <= gamma <= lambda`.
    pub gamma: f64,
    /// Diagonal of the sampling covariance: (v variance, omega variance).
    pub noise_variance: [f64; 2],
    pub dt: f64,
    pub v_bounds: Interval,
    pub omega_bounds: Interval,
    /// Cost of one state inside an obstacle. Kept well above `w_guidance`
    /// times the largest guidance value reachable in the arena.
    pub w_obst: f64,
    /// Weight of the terminal guidance term.
    pub w_guidance: f64,
}

impl Default for MppiParams {
    fn default() -> Self {
        Self {
            num_rollouts: 10_000,
            horizon: 50,
            lambda: 10.0,
            gamma: 0.1,
            noise_variance: [0.5, 0.5],
            dt: 0.1,
            v_bounds: Interval::new(-2.0, 2.0),
            omega_bounds: Interval::new(-1.5, 1.5),
            w_obst: 1.0e4,
            w_guidance: 27.0,
        }
    }
}

impl MppiParams {
    pub fn with_horizon(mut self, horizon: usize) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn with_rollouts(mut self, num_rollouts: usize) -> Self {
        self.num_rollouts = num_rollouts;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_rollouts < 1 {
            return Err(Error::param("num_rollouts", "must be at least 1"));
        }
        if self.horizon < 2 {
            return Err(Error::param("horizon", "must be at least 2"));
        }
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::param("lambda", "must be finite and > 0"));
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0 && self.gamma <= self.lambda) {
            return Err(Error::param(
                "gamma",
                format!("must lie in [0, lambda = {}]", self.lambda),
            ));
        }
        if !self.noise_variance.iter().all(|s| s.is_finite() && *s > 0.0) {
            return Err(Error::param("noise_variance", "diagonal entries must be > 0"));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::param("dt", "must be > 0"));
        }
        for (field, b) in [("v_bounds", self.v_bounds), ("omega_bounds", self.omega_bounds)] {
            if !(b.lo.is_finite() && b.hi.is_finite() && b.lo <= b.hi) {
                return Err(Error::param(field, "must be a finite interval with lo <= hi"));
            }
        }
        if !(self.w_obst.is_finite() && self.w_obst > 0.0) {
            return Err(Error::param("w_obst", "must be > 0"));
        }
        if !(self.w_guidance.is_finite() && self.w_guidance > 0.0) {
            return Err(Error::param("w_guidance", "must be > 0"));
        }
        Ok(())
    }

    /// Inverse of the diagonal sampling covariance.
    pub fn noise_precision(&self) -> [f64; 2] {
        [1.0 / self.noise_variance[0], 1.0 / self.noise_variance[1]]
    }
}

/// Local-minimum detection and detour constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DrpaParams {
    /// First predicted-path index of the monitoring window.
    pub tau_monitor: usize,
    /// Variation threshold (m) below which the predicted tail counts as trapped.
    pub r_thres: f64,
    /// Distance (m) from the local minimum to the virtual target.
    pub d_vt: f64,
    /// Offset (m) of the passage hyperplane past the local minimum.
    pub d_margin: f64,
    /// Repulsion weight in (0, 1).
    pub w_rep: f64,
    /// A stalled tail whose centroid is this close (m) to the target is an
    /// arrival, not a trap. Zero disables the check.
    #[serde(default = "default_goal_tolerance")]
    pub goal_tolerance: f64,
    #[serde(default)]
    pub passage_rule: PassageRule,
}

fn default_goal_tolerance() -> f64 {
    1.0
}

/// How detour mode decides the robot has cleared the local minimum.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PassageRule {
    /// The robot lies strictly on the target side of the plane through
    /// `p_min + d_margin * unit(p_target - p_min)` normal to that direction.
    #[default]
    HalfSpace,
    /// `(p_target - p) . (q - p) < 0` with `q` the offset plane point, which
    /// holds only inside the disc whose diameter joins `q` and the target.
    Disc,
}

impl std::str::FromStr for PassageRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "halfspace" => Ok(Self::HalfSpace),
            "disc" => Ok(Self::Disc),
            _ => Err(Error::param("passage_rule", format!("unknown rule {s:?}"))),
        }
    }
}

impl Default for DrpaParams {
    fn default() -> Self {
        Self {
            tau_monitor: 40,
            r_thres: 0.2,
            d_vt: 10.0,
            d_margin: 0.25,
            w_rep: 0.7,
            goal_tolerance: default_goal_tolerance(),
            passage_rule: PassageRule::default(),
        }
    }
}

impl DrpaParams {
    pub fn validate(&self, horizon: usize) -> Result<()> {
        if self.tau_monitor > horizon {
            return Err(Error::param(
                "tau_monitor",
                format!("must lie in [0, horizon = {horizon}]"),
            ));
        }
        if !(self.r_thres.is_finite() && self.r_thres > 0.0) {
            return Err(Error::param("r_thres", "must be > 0"));
        }
        if !(self.d_vt.is_finite() && self.d_vt > 0.0) {
            return Err(Error::param("d_vt", "must be > 0"));
        }
        if !(self.d_margin.is_finite() && self.d_margin >= 0.0) {
            return Err(Error::param("d_margin", "must be >= 0"));
        }
        if !(self.w_rep > 0.0 && self.w_rep < 1.0) {
            return Err(Error::param("w_rep", "must lie strictly inside (0, 1)"));
        }
        if !(self.goal_tolerance.is_finite() && self.goal_tolerance >= 0.0) {
            return Err(Error::param("goal_tolerance", "must be >= 0"));
        }
        Ok(())
    }
}

/// Checks both bundles; the error names the first violated field.
pub fn validate(mppi: &MppiParams, drpa: &DrpaParams) -> Result<()> {
    mppi.validate()?;
    drpa.validate(mppi.horizon)
}

/// Which terminal guidance function the solver currently optimizes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum GuidanceMode {
    #[default]
    TargetDirected,
    DetourInducing { p_min: Vec2, p_vt: Vec2 },
}

impl GuidanceMode {
    pub fn is_detour(&self) -> bool {
        matches!(self, GuidanceMode::DetourInducing { .. })
    }
}
