//! Mode switching between target-directed and detour-inducing guidance.
//!
//! Detection looks at the tail of the freshly optimised predicted path: if
//! the positions in the monitoring window barely move away from the window's
//! first point, the tail is stuck and its centroid becomes `p_min`. While
//! detouring, only passage detection runs; by default it reverts once the
//! robot lies on the target side of the margin-offset hyperplane.

use crate::error::{Error, Result};
use crate::guidance::place_virtual_target;
use crate::params::{DrpaParams, GuidanceMode, PassageRule, PredictedPath, Vec2};

fn window(path: &PredictedPath, tau_monitor: usize) -> &[crate::params::State] {
    let states = path.states();
    let start = tau_monitor.min(states.len().saturating_sub(1));
    &states[start..]
}

/// Mean distance of the window positions from the window's first position.
/// The zero self-distance is counted in the denominator.
pub fn variation_measure(path: &PredictedPath, tau_monitor: usize) -> f64 {
    let w = window(path, tau_monitor);
    if w.is_empty() {
        return 0.0;
    }
    let anchor = w[0].position();
    let total: f64 = w.iter().map(|s| (anchor - s.position()).norm()).sum();
    total / w.len() as f64
}

/// Centroid of the monitoring window when its variation is below `r_thres`.
pub fn detect_local_minimum(path: &PredictedPath, drpa: &DrpaParams) -> Option<Vec2> {
    if path.is_empty() || variation_measure(path, drpa.tau_monitor) >= drpa.r_thres {
        return None;
    }
    let w = window(path, drpa.tau_monitor);
    let sum = w.iter().fold(Vec2::ZERO, |acc, s| acc + s.position());
    Some(sum * (1.0 / w.len() as f64))
}

/// Strict test against the plane point `q = p_min + d_margin * unit(p_target - p_min)`
/// under `rule`. Both rules agree on the line through `p_min` and the target.
pub fn passage_detected(
    p_current: Vec2,
    p_min: Vec2,
    p_target: Vec2,
    d_margin: f64,
    rule: PassageRule,
) -> Result<bool> {
    let dir = p_target - p_min;
    let len = dir.norm();
    if len < 1e-9 {
        return Err(Error::DegenerateDirection("p_target"));
    }
    let plane_point = p_min + dir * (d_margin / len);
    Ok(match rule {
        PassageRule::HalfSpace => dir.dot(p_current - plane_point) > 0.0,
        PassageRule::Disc => (p_target - p_current).dot(plane_point - p_current) < 0.0,
    })
}

/// One supervisor step. At most one transition happens per call: detection
/// only runs in target-directed mode, passage only in detour mode.
pub fn advance_mode(
    mode: GuidanceMode,
    path: &PredictedPath,
    p_current: Vec2,
    p_target: Vec2,
    drpa: &DrpaParams,
) -> Result<GuidanceMode> {
    match mode {
        GuidanceMode::TargetDirected => {
            let Some(p_min) = detect_local_minimum(path, drpa) else {
                return Ok(mode);
            };
            if p_min.distance(p_target) < drpa.goal_tolerance {
                return Ok(mode);
            }
            match place_virtual_target(p_min, p_target, drpa.d_vt) {
                Ok(p_vt) => Ok(GuidanceMode::DetourInducing { p_min, p_vt }),
                // stuck on the target itself: the goal check ends the run first
                Err(Error::DegenerateDirection(_)) => Ok(mode),
                Err(e) => Err(e),
            }
        }
        GuidanceMode::DetourInducing { p_min, .. } => {
            if passage_detected(p_current, p_min, p_target, drpa.d_margin, drpa.passage_rule)? {
                Ok(GuidanceMode::TargetDirected)
            } else {
                Ok(mode)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::State;
    use proptest::prelude::*;

    fn path_from(points: &[(f64, f64)]) -> PredictedPath {
        PredictedPath(points.iter().map(|&(x, y)| State::new(x, y, 0.0)).collect())
    }

    /// T = 50 path whose window [40, 50] is given; earlier points are far away.
    fn with_tail(tail: &[(f64, f64)]) -> PredictedPath {
        assert_eq!(tail.len(), 11);
        let mut pts: Vec<(f64, f64)> = (0..40).map(|i| (-20.0 + i as f64 * 0.2, 0.0)).collect();
        pts.extend_from_slice(tail);
        path_from(&pts)
    }

    #[test]
    fn variation_examples() {
        let still = with_tail(&[(4.0, 2.0); 11]);
        assert_eq!(variation_measure(&still, 40), 0.0);

        let straight: Vec<_> = (0..11).map(|i| (i as f64 * 0.1, 0.0)).collect();
        let v = variation_measure(&with_tail(&straight), 40);
        assert!((v - 0.5).abs() < 1e-12);

        let osc: Vec<_> = (0..11).map(|i| (if i % 2 == 0 { 0.0 } else { 0.1 }, 0.0)).collect();
        let v = variation_measure(&with_tail(&osc), 40);
        // five of the eleven terms are 0.1
        assert!((v - 0.5 / 11.0).abs() < 1e-12);
        assert!(v <= 0.1 && v < 0.2);
    }

    #[test]
    fn detection_examples() {
        let drpa = DrpaParams::default();
        let still = with_tail(&[(4.0, 2.0); 11]);
        assert_eq!(detect_local_minimum(&still, &drpa), Some(Vec2::new(4.0, 2.0)));

        let straight: Vec<_> = (0..11).map(|i| (i as f64 * 0.1, 0.0)).collect();
        assert_eq!(detect_local_minimum(&with_tail(&straight), &drpa), None);

        let short: Vec<_> = (0..11).map(|i| (i as f64 * 0.01, 0.0)).collect();
        let path = with_tail(&short);
        assert!((variation_measure(&path, 40) - 0.05).abs() < 1e-12);
        let p_min = detect_local_minimum(&path, &drpa).unwrap();
        assert!((p_min - Vec2::new(0.05, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn passage_examples() {
        let (p_min, target) = (Vec2::ZERO, Vec2::new(10.0, 0.0));
        for rule in [PassageRule::HalfSpace, PassageRule::Disc] {
            assert!(passage_detected(Vec2::new(5.0, 0.0), p_min, target, 0.25, rule).unwrap());
            assert!(!passage_detected(Vec2::new(-1.0, 0.0), p_min, target, 0.25, rule).unwrap());
            assert!(!passage_detected(Vec2::new(0.25, 0.0), p_min, target, 0.25, rule).unwrap());
            assert!(matches!(
                passage_detected(Vec2::ZERO, target, target, 0.25, rule),
                Err(Error::DegenerateDirection(_))
            ));
        }
    }

    #[test]
    fn rules_differ_off_the_axis_and_beyond_the_target() {
        let (p_min, target) = (Vec2::ZERO, Vec2::new(10.0, 0.0));
        // disc centre (5.125, 0), radius 4.875
        for p in [Vec2::new(5.0, 6.0), Vec2::new(12.0, 0.0), Vec2::new(1.0, -3.0)] {
            assert!(passage_detected(p, p_min, target, 0.25, PassageRule::HalfSpace).unwrap());
            assert!(!passage_detected(p, p_min, target, 0.25, PassageRule::Disc).unwrap());
        }
        assert!(passage_detected(Vec2::new(5.0, 4.0), p_min, target, 0.25, PassageRule::Disc).unwrap());
    }

    #[test]
    fn advance_mode_examples() {
        let drpa = DrpaParams::default();
        let target = Vec2::new(10.0, 0.0);
        let still = with_tail(&[(0.0, 0.0); 11]);

        let next = advance_mode(GuidanceMode::TargetDirected, &still, Vec2::new(-3.0, 0.0), target, &drpa)
            .unwrap();
        let GuidanceMode::DetourInducing { p_min, p_vt } = next else {
            panic!("expected a switch, got {next:?}");
        };
        assert_eq!(p_min, Vec2::ZERO);
        assert!((p_vt - Vec2::new(10.0, 0.0)).norm() < 1e-12);

        // past the margin plane: revert
        let back = advance_mode(next, &still, Vec2::new(5.0, 0.0), target, &drpa).unwrap();
        assert_eq!(back, GuidanceMode::TargetDirected);

        // stuck tail while detouring but not past the plane: no re-detection
        let stay = advance_mode(next, &still, Vec2::new(-1.0, 0.0), target, &drpa).unwrap();
        assert_eq!(stay, next);
    }

    #[test]
    fn detection_at_the_target_keeps_target_mode() {
        let drpa = DrpaParams::default();
        let target = Vec2::new(4.0, 2.0);
        let still = with_tail(&[(4.0, 2.0); 11]);
        let next = advance_mode(GuidanceMode::TargetDirected, &still, Vec2::ZERO, target, &drpa).unwrap();
        assert_eq!(next, GuidanceMode::TargetDirected);
    }

    fn rigid(p: Vec2, angle: f64, shift: Vec2) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * p.x - s * p.y, s * p.x + c * p.y) + shift
    }

    proptest! {
        #[test]
        fn no_immediate_revert_behind_the_minimum(
            px in -50.0f64..50.0, py in -50.0f64..50.0,
            angle in 0.0f64..std::f64::consts::TAU,
            dist in 1.0f64..40.0,
            behind in 0.0f64..20.0, lateral in -20.0f64..20.0,
            margin in 0.0f64..2.0,
        ) {
            // robot on the far side of p_min from the target by more than the margin
            let p_min = Vec2::new(px, py);
            let u = Vec2::new(angle.cos(), angle.sin());
            let n = Vec2::new(-u.y, u.x);
            let target = p_min + u * dist;
            let robot = p_min - u * (margin + behind + 1e-6) + n * lateral;
            for rule in [PassageRule::HalfSpace, PassageRule::Disc] {
                prop_assert!(!passage_detected(robot, p_min, target, margin, rule).unwrap());
            }
        }

        #[test]
        fn detection_is_rigid_motion_covariant(
            pts in proptest::collection::vec((-0.05f64..0.05, -0.05f64..0.05), 11),
            angle in 0.0f64..std::f64::consts::TAU,
            sx in -100.0f64..100.0, sy in -100.0f64..100.0,
        ) {
            let drpa = DrpaParams::default();
            let base = with_tail(&pts);
            let shift = Vec2::new(sx, sy);
            let moved = PredictedPath(
                base.states()
                    .iter()
                    .map(|s| {
                        let q = rigid(s.position(), angle, shift);
                        State::new(q.x, q.y, s.theta)
                    })
                    .collect(),
            );
            let a = detect_local_minimum(&base, &drpa);
            let b = detect_local_minimum(&moved, &drpa);
            prop_assert!(a.is_some() && b.is_some());
            let expected = rigid(a.unwrap(), angle, shift);
            prop_assert!((b.unwrap() - expected).norm() < 1e-9);
            prop_assert!((variation_measure(&base, 40) - variation_measure(&moved, 40)).abs() < 1e-9);
        }
    }
}
