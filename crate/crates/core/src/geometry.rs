//! Polygonal obstacle world and the collision indicator used by the running
//! and terminal costs.
//!
//! Obstacles are closed sets: a point on an edge is occupied. Membership uses
//! the winding number so non-convex outlines (U shapes, unions of hulls) work
//! without any boolean geometry.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::Vec2;

/// Axis-aligned rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Vec2,
    pub max: Vec2,
}

impl Aabb {
    pub fn new(min: Vec2, max: Vec2) -> Self {
        Self { min, max }
    }

    pub fn square(half_extent: f64) -> Self {
        Self::new(
            Vec2::new(-half_extent, -half_extent),
            Vec2::new(half_extent, half_extent),
        )
    }

    fn around(points: &[Vec2]) -> Self {
        let mut min = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut max = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        Self { min, max }
    }

    #[inline]
    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }
}

/// Twice the signed area (shoelace); positive for counter-clockwise rings.
fn twice_signed_area(vertices: &[Vec2]) -> f64 {
    let n = vertices.len();
    (0..n)
        .map(|i| vertices[i].cross(vertices[(i + 1) % n]))
        .sum()
}

fn on_segment(a: Vec2, b: Vec2, p: Vec2) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

fn orientation(a: Vec2, b: Vec2, c: Vec2) -> i8 {
    let v = (b - a).cross(c - a);
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

fn segments_intersect(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let (o1, o2) = (orientation(a, b, c), orientation(a, b, d));
    let (o3, o4) = (orientation(c, d, a), orientation(c, d, b));
    if o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0 {
        return true;
    }
    (o1 == 0 && on_segment(a, b, c))
        || (o2 == 0 && on_segment(a, b, d))
        || (o3 == 0 && on_segment(c, d, a))
        || (o4 == 0 && on_segment(c, d, b))
}

/// A simple, counter-clockwise polygon.
#[derive(Clone, Debug, PartialEq)]
pub struct Polygon {
    vertices: Vec<Vec2>,
    bbox: Aabb,
}

impl Polygon {
    pub fn new(vertices: Vec<Vec2>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::InvalidPolygon(format!("{n} vertices, need at least 3")));
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidPolygon("non-finite vertex".into()));
        }
        if twice_signed_area(&vertices) <= 0.0 {
            return Err(Error::InvalidPolygon(
                "vertices must be counter-clockwise with positive area".into(),
            ));
        }
        for i in 0..n {
            let (a, b) = (vertices[i], vertices[(i + 1) % n]);
            if a == b {
                return Err(Error::InvalidPolygon(format!("repeated vertex at index {i}")));
            }
            for j in (i + 1)..n {
                let (c, d) = (vertices[j], vertices[(j + 1) % n]);
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    // Neighbouring edges share exactly one endpoint; they must not fold back.
                    let (shared, other_ab, other_cd) = if j == i + 1 { (b, a, d) } else { (a, b, c) };
                    let u = other_ab - shared;
                    let v = other_cd - shared;
                    if u.cross(v) == 0.0 && u.dot(v) > 0.0 {
                        return Err(Error::InvalidPolygon(format!(
                            "edges {i} and {j} overlap"
                        )));
                    }
                } else if segments_intersect(a, b, c, d) {
                    return Err(Error::InvalidPolygon(format!(
                        "edges {i} and {j} intersect"
                    )));
                }
            }
        }
        let bbox = Aabb::around(&vertices);
        Ok(Self { vertices, bbox })
    }

    /// Axis-aligned rectangle with corners `min`, `max`.
    pub fn rectangle(min: Vec2, max: Vec2) -> Result<Self> {
        Self::new(vec![
            min,
            Vec2::new(max.x, min.y),
            max,
            Vec2::new(min.x, max.y),
        ])
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn bbox(&self) -> Aabb {
        self.bbox
    }

    pub fn area(&self) -> f64 {
        0.5 * twice_signed_area(&self.vertices)
    }

    /// True when every turn is a left turn (collinear turns allowed).
    pub fn is_convex(&self) -> bool {
        let v = &self.vertices;
        let n = v.len();
        (0..n).all(|i| {
            let (a, b, c) = (v[i], v[(i + 1) % n], v[(i + 2) % n]);
            (b - a).cross(c - b) >= 0.0
        })
    }

    /// Winding number of the ring around `p` (0 outside).
    pub fn winding_number(&self, p: Vec2) -> i32 {
        let v = &self.vertices;
        let n = v.len();
        let mut wn = 0;
        for i in 0..n {
            let (a, b) = (v[i], v[(i + 1) % n]);
            if a.y <= p.y {
                if b.y > p.y && (b - a).cross(p - a) > 0.0 {
                    wn += 1;
                }
            } else if b.y <= p.y && (b - a).cross(p - a) < 0.0 {
                wn -= 1;
            }
        }
        wn
    }

    /// Closed membership: interior or boundary.
    #[inline]
    pub fn contains(&self, p: Vec2) -> bool {
        if !self.bbox.contains(p) {
            return false;
        }
        let v = &self.vertices;
        let n = v.len();
        let mut wn = 0i32;
        for i in 0..n {
            let a = v[i];
            let b = v[if i + 1 == n { 0 } else { i + 1 }];
            let side = (b - a).cross(p - a);
            if side == 0.0 && on_segment(a, b, p) {
                return true;
            }
            if a.y <= p.y {
                if b.y > p.y && side > 0.0 {
                    wn += 1;
                }
            } else if b.y <= p.y && side < 0.0 {
                wn -= 1;
            }
        }
        wn != 0
    }
}

/// Uniform bucket grid over the world bounds; each cell lists the polygons
/// whose bounding box overlaps it.
#[derive(Clone, Debug)]
struct GridIndex {
    origin: Vec2,
    inv_cell: f64,
    nx: usize,
    ny: usize,
    offsets: Vec<u32>,
    items: Vec<u32>,
}

impl GridIndex {
    const TARGET_CELL: f64 = 0.25;
    const MAX_CELLS_PER_AXIS: usize = 1024;

    fn build(bounds: &Aabb, polygons: &[Polygon]) -> Self {
        let extent = bounds.width().max(bounds.height()).max(1e-9);
        let per_axis = ((extent / Self::TARGET_CELL).ceil() as usize).clamp(1, Self::MAX_CELLS_PER_AXIS);
        let cell = extent / per_axis as f64;
        let nx = ((bounds.width() / cell).ceil() as usize).max(1);
        let ny = ((bounds.height() / cell).ceil() as usize).max(1);
        let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); nx * ny];
        let mut index = Self {
            origin: bounds.min,
            inv_cell: 1.0 / cell,
            nx,
            ny,
            offsets: Vec::new(),
            items: Vec::new(),
        };
        for (i, poly) in polygons.iter().enumerate() {
            let (x0, y0) = index.cell_of(poly.bbox.min);
            let (x1, y1) = index.cell_of(poly.bbox.max);
            for cy in y0..=y1 {
                for cx in x0..=x1 {
                    buckets[cy * nx + cx].push(i as u32);
                }
            }
        }
        index.offsets.reserve(nx * ny + 1);
        index.offsets.push(0);
        for bucket in buckets {
            index.items.extend_from_slice(&bucket);
            index.offsets.push(index.items.len() as u32);
        }
        index
    }

    #[inline]
    fn cell_of(&self, p: Vec2) -> (usize, usize) {
        let fx = ((p.x - self.origin.x) * self.inv_cell).max(0.0) as usize;
        let fy = ((p.y - self.origin.y) * self.inv_cell).max(0.0) as usize;
        (fx.min(self.nx - 1), fy.min(self.ny - 1))
    }

    #[inline]
    fn candidates(&self, p: Vec2) -> &[u32] {
        let (cx, cy) = self.cell_of(p);
        let c = cy * self.nx + cx;
        &self.items[self.offsets[c] as usize..self.offsets[c + 1] as usize]
    }
}

/// Obstacle set plus the rectangle it lives in.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "WorldDoc", into = "WorldDoc")]
pub struct World {
    polygons: Vec<Polygon>,
    bounds: Aabb,
    index: GridIndex,
}

impl PartialEq for World {
    fn eq(&self, other: &Self) -> bool {
        self.polygons == other.polygons && self.bounds == other.bounds
    }
}

impl World {
    pub fn new(polygons: Vec<Polygon>, bounds: Aabb) -> Result<Self> {
        if !(bounds.min.is_finite() && bounds.max.is_finite())
            || bounds.width() <= 0.0
            || bounds.height() <= 0.0
        {
            return Err(Error::InvalidWorld("bounds must be a non-empty finite rectangle".into()));
        }
        for (i, poly) in polygons.iter().enumerate() {
            if !poly.vertices.iter().all(|&v| bounds.contains(v)) {
                return Err(Error::InvalidWorld(format!("polygon {i} leaves the bounds")));
            }
        }
        let index = GridIndex::build(&bounds, &polygons);
        Ok(Self {
            polygons,
            bounds,
            index,
        })
    }

    pub fn empty(bounds: Aabb) -> Self {
        Self::new(Vec::new(), bounds).expect("empty world with valid bounds")
    }

    pub fn polygons(&self) -> &[Polygon] {
        &self.polygons
    }

    pub fn bounds(&self) -> Aabb {
        self.bounds
    }

    /// Obstacle indicator: true when `p` is inside or on any polygon.
    #[inline]
    pub fn contains(&self, p: Vec2) -> bool {
        if !self.bounds.contains(p) {
            return false;
        }
        self.index
            .candidates(p)
            .iter()
            .any(|&i| self.polygons[i as usize].contains(p))
    }

    #[inline]
    pub fn collision_cost(&self, p: Vec2, w_obst: f64) -> f64 {
        collision_cost(self, p, w_obst)
    }
}

/// `w_obst` when `p` is occupied, otherwise 0.
#[inline]
pub fn collision_cost(world: &World, p: Vec2, w_obst: f64) -> f64 {
    if world.contains(p) {
        w_obst
    } else {
        0.0
    }
}

/// On-disk world layout: vertex arrays plus bounds.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WorldDoc {
    pub bounds: BoundsDoc,
    pub polygons: Vec<Vec<[f64; 2]>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundsDoc {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl TryFrom<WorldDoc> for World {
    type Error = Error;

    fn try_from(doc: WorldDoc) -> Result<Self> {
        let polygons = doc
            .polygons
            .into_iter()
            .map(|ring| Polygon::new(ring.into_iter().map(Vec2::from).collect()))
            .collect::<Result<Vec<_>>>()?;
        World::new(
            polygons,
            Aabb::new(doc.bounds.min.into(), doc.bounds.max.into()),
        )
    }
}

impl From<World> for WorldDoc {
    fn from(world: World) -> Self {
        WorldDoc {
            bounds: BoundsDoc {
                min: world.bounds.min.into(),
                max: world.bounds.max.into(),
            },
            polygons: world
                .polygons
                .iter()
                .map(|p| p.vertices.iter().map(|&v| v.into()).collect())
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square_world() -> World {
        let sq = Polygon::rectangle(Vec2::new(0.0, 0.0), Vec2::new(1.0, 1.0)).unwrap();
        World::new(vec![sq], Aabb::square(5.0)).unwrap()
    }

    /// Angle-sum winding number with an explicit on-edge test; shares no code
    /// with the crossing-based implementation.
    fn angle_sum_contains(vertices: &[Vec2], p: Vec2) -> bool {
        let n = vertices.len();
        let mut total = 0.0;
        for i in 0..n {
            let a = vertices[i] - p;
            let b = vertices[(i + 1) % n] - p;
            let edge = b - a;
            let t = (-a.dot(edge) / edge.dot(edge)).clamp(0.0, 1.0);
            if (a + edge * t).norm() < 1e-12 {
                return true;
            }
            total += a.cross(b).atan2(a.dot(b));
        }
        (total / std::f64::consts::TAU).round() != 0.0
    }

    #[test]
    fn unit_square_membership() {
        let w = unit_square_world();
        assert!(w.contains(Vec2::new(0.5, 0.5)));
        assert!(!w.contains(Vec2::new(2.0, 2.0)));
        let edge = Vec2::new(1.0, 0.5);
        assert!(w.contains(edge));
        assert!(angle_sum_contains(w.polygons()[0].vertices(), edge));
        assert!(w.contains(Vec2::new(0.0, 0.0)));
        assert!(w.contains(Vec2::new(1.0, 1.0)));
        assert!(!w.contains(Vec2::new(1.0 + 1e-9, 0.5)));
    }

    #[test]
    fn collision_cost_is_indicator() {
        let w = unit_square_world();
        assert_eq!(w.collision_cost(Vec2::new(0.5, 0.5), 1e3), 1000.0);
        assert_eq!(w.collision_cost(Vec2::new(3.0, 0.5), 1e3), 0.0);
        assert_eq!(w.collision_cost(Vec2::new(1.0, 0.5), 1e3), 1000.0);
    }

    #[test]
    fn u_shape_cavity_is_free() {
        let u = Polygon::new(vec![
            Vec2::new(-1.0, -2.0),
            Vec2::new(1.0, -2.0),
            Vec2::new(1.0, 2.0),
            Vec2::new(-1.0, 2.0),
            Vec2::new(-1.0, 1.5),
            Vec2::new(0.5, 1.5),
            Vec2::new(0.5, -1.5),
            Vec2::new(-1.0, -1.5),
        ])
        .unwrap();
        assert!(!u.is_convex());
        assert!(!u.contains(Vec2::new(0.0, 0.0)));
        assert!(u.contains(Vec2::new(0.75, 0.0)));
        assert!(u.contains(Vec2::new(0.0, 1.75)));
        for p in [Vec2::new(0.0, 0.0), Vec2::new(0.75, 0.0), Vec2::new(-0.9, -1.6)] {
            assert_eq!(u.contains(p), angle_sum_contains(u.vertices(), p));
        }
    }

    #[test]
    fn invalid_polygons_are_rejected() {
        // too few vertices
        assert!(Polygon::new(vec![Vec2::ZERO, Vec2::new(1.0, 0.0)]).is_err());
        // clockwise
        assert!(Polygon::new(vec![Vec2::ZERO, Vec2::new(0.0, 1.0), Vec2::new(1.0, 0.0)]).is_err());
        // bow tie with positive net area
        assert!(Polygon::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(1.0, -0.2),
            Vec2::new(1.5, 2.0),
        ])
        .is_err());
    }

    #[test]
    fn world_rejects_polygon_outside_bounds() {
        let sq = Polygon::rectangle(Vec2::new(0.0, 0.0), Vec2::new(6.0, 1.0)).unwrap();
        assert!(World::new(vec![sq], Aabb::square(5.0)).is_err());
    }

    #[test]
    fn json_round_trip() {
        let w = unit_square_world();
        let text = serde_json::to_string(&w).unwrap();
        let back: World = serde_json::from_str(&text).unwrap();
        assert_eq!(w, back);
        assert!(back.contains(Vec2::new(0.5, 0.5)));
        // schema sanity
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["polygons"][0][1], serde_json::json!([1.0, 0.0]));
        assert_eq!(v["bounds"]["min"], serde_json::json!([-5.0, -5.0]));
    }
}
