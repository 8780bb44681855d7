//! Experiment worlds: the three single-obstacle layouts and seeded random
//! checkerboard grids of convex or non-convex obstacles.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Aabb, Polygon, World};
use crate::params::{State, Vec2};

pub const TIME_LIMIT: f64 = 30.0;
pub const SUCCESS_RADIUS: f64 = 0.5;

/// Half side of the square obstacle region of the random grids.
pub const REGION_HALF: f64 = 15.0;
/// Start and target lines sit at x = ∓18.
pub const LINE_X: f64 = 18.0;
/// Start / target y range on their lines.
pub const LINE_HALF_SPAN: f64 = 12.0;
const WORLD_HALF: f64 = 20.0;

const POINTS_PER_EDGE: usize = 2;
const MIN_AREA_FRACTION: f64 = 0.1;

/// Qualitative obstacles, centred between start (-10, 0) and target (10, 0).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QualitativeKind {
    ShortRect,
    LongRect,
    UShape,
}

impl QualitativeKind {
    pub const ALL: [QualitativeKind; 3] = [Self::ShortRect, Self::LongRect, Self::UShape];

    pub fn name(&self) -> &'static str {
        match self {
            Self::ShortRect => "shortrect",
            Self::LongRect => "longrect",
            Self::UShape => "ushape",
        }
    }
}

impl fmt::Display for QualitativeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for QualitativeKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "shortrect" | "short" => Ok(Self::ShortRect),
            "longrect" | "long" => Ok(Self::LongRect),
            "ushape" | "u" => Ok(Self::UShape),
            other => Err(Error::Config(format!("unknown scenario `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convexity {
    Convex,
    NonConvex,
}

impl Convexity {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Convex => "convex",
            Self::NonConvex => "nonconvex",
        }
    }
}

impl fmt::Display for Convexity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Convexity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "convex" => Ok(Self::Convex),
            "nonconvex" => Ok(Self::NonConvex),
            other => Err(Error::Config(format!("unknown convexity `{other}`"))),
        }
    }
}

/// A complete navigation problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub label: String,
    pub world: World,
    pub start: State,
    pub target: Vec2,
    pub time_limit: f64,
    pub success_radius: f64,
    pub seed: u64,
}

impl Scenario {
    /// Heading at the start points straight at the target.
    pub fn new(label: String, world: World, start: Vec2, target: Vec2, seed: u64) -> Self {
        let d = target - start;
        Self {
            label,
            world,
            start: State::new(start.x, start.y, d.y.atan2(d.x)),
            target,
            time_limit: TIME_LIMIT,
            success_radius: SUCCESS_RADIUS,
            seed,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Polygon {
    Polygon::rectangle(Vec2::new(x0, y0), Vec2::new(x1, y1)).expect("axis-aligned rectangle")
}

/// Single-obstacle layouts. Rectangles are 1 m deep along the travel axis;
/// the U has 0.5 m walls, 5 m outer width and a 2 m cavity facing the start.
pub fn make_qualitative(kind: QualitativeKind) -> Scenario {
    let obstacle = match kind {
        QualitativeKind::ShortRect => rect(-0.5, -0.5, 0.5, 0.5),
        QualitativeKind::LongRect => rect(-0.5, -2.5, 0.5, 2.5),
        QualitativeKind::UShape => Polygon::new(vec![
            Vec2::new(-1.25, -2.5),
            Vec2::new(1.25, -2.5),
            Vec2::new(1.25, 2.5),
            Vec2::new(-1.25, 2.5),
            Vec2::new(-1.25, 2.0),
            Vec2::new(0.75, 2.0),
            Vec2::new(0.75, -2.0),
            Vec2::new(-1.25, -2.0),
        ])
        .expect("U outline is simple and counter-clockwise"),
    };
    let world = World::new(vec![obstacle], Aabb::square(WORLD_HALF)).expect("obstacle inside bounds");
    Scenario::new(
        kind.name().to_string(),
        world,
        Vec2::new(-10.0, 0.0),
        Vec2::new(10.0, 0.0),
        0,
    )
}

/// Start on x = -18 and target on x = +18, both with y uniform in [-12, 12].
pub fn sample_start_target(seed: u64) -> (State, Vec2) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let ys = rng.random_range(-LINE_HALF_SPAN..=LINE_HALF_SPAN);
    let yt = rng.random_range(-LINE_HALF_SPAN..=LINE_HALF_SPAN);
    let (start, target) = (Vec2::new(-LINE_X, ys), Vec2::new(LINE_X, yt));
    let d = target - start;
    (State::new(start.x, start.y, d.y.atan2(d.x)), target)
}

/// Andrew's monotone chain; returns a counter-clockwise hull without
/// collinear vertices.
pub fn convex_hull(points: &[Vec2]) -> Vec<Vec2> {
    let mut pts: Vec<Vec2> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Vec2> = Vec::with_capacity(pts.len() * 2);
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Vec2>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 {
                let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
                if (b - a).cross(p - b) <= 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Convex hull of points sampled along the edges of the cell `[min, max]`,
/// resampled until it covers more than a tenth of the cell.
fn random_cell_hull(rng: &mut ChaCha8Rng, min: Vec2, max: Vec2) -> Polygon {
    let corners = [min, Vec2::new(max.x, min.y), max, Vec2::new(min.x, max.y)];
    let cell_area = (max.x - min.x) * (max.y - min.y);
    loop {
        let mut pts = Vec::with_capacity(4 * POINTS_PER_EDGE);
        for i in 0..4 {
            let (a, b) = (corners[i], corners[(i + 1) % 4]);
            for _ in 0..POINTS_PER_EDGE {
                let t: f64 = rng.random();
                pts.push(a + (b - a) * t);
            }
        }
        let hull = convex_hull(&pts);
        if hull.len() < 3 {
            continue;
        }
        if let Ok(poly) = Polygon::new(hull) {
            if poly.area() / cell_area > MIN_AREA_FRACTION {
                return poly;
            }
        }
    }
}

/// 30 m × 30 m region, `grid_n²` cells, obstacles on the cells with even
/// `i + j`. Non-convex obstacles are the union of two hulls in the same cell,
/// stored as two polygons.
pub fn make_random_grid(grid_n: usize, convexity: Convexity, seed: u64) -> Result<Scenario> {
    if grid_n == 0 {
        return Err(Error::param("grid_n", "must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cell = 2.0 * REGION_HALF / grid_n as f64;
    let per_cell = match convexity {
        Convexity::Convex => 1,
        Convexity::NonConvex => 2,
    };
    let mut polygons = Vec::with_capacity(grid_n * grid_n / 2 * per_cell + 1);
    for j in 0..grid_n {
        for i in 0..grid_n {
            if (i + j) % 2 != 0 {
                continue;
            }
            let min = Vec2::new(-REGION_HALF + i as f64 * cell, -REGION_HALF + j as f64 * cell);
            let max = min + Vec2::new(cell, cell);
            for _ in 0..per_cell {
                polygons.push(random_cell_hull(&mut rng, min, max));
            }
        }
    }
    let world = World::new(polygons, Aabb::square(WORLD_HALF))?;
    let (start, target) = sample_start_target(seed);
    let mut scenario = Scenario::new(
        format!("grid{grid_n}-{convexity}-{seed}"),
        world,
        start.position(),
        target,
        seed,
    );
    scenario.start = start;
    Ok(scenario)
}

/// Number of obstacle cells in a checkerboard of `grid_n²` cells.
pub fn obstacle_cell_count(grid_n: usize) -> usize {
    (grid_n * grid_n).div_ceil(2)
}
