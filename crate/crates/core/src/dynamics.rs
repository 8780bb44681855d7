//! Discrete-time differential-drive kinematics (forward Euler).

use crate::params::{wrap_angle, Control, ControlSequence, MppiParams, PredictedPath, State};

/// Projects each component of `u` onto its actuator interval.
#[inline]
pub fn clamp_control(u: Control, params: &MppiParams) -> Control {
    Control {
        v: params.v_bounds.clamp(u.v),
        omega: params.omega_bounds.clamp(u.omega),
    }
}

/// One Euler step of the unicycle model. `u` is expected to be clamped already.
#[inline]
pub fn step(x: State, u: Control, dt: f64) -> State {
    let (sin, cos) = x.theta.sin_cos();
    State {
        x: x.x + u.v * cos * dt,
        y: x.y + u.v * sin * dt,
        theta: wrap_angle(x.theta + u.omega * dt),
    }
}

/// Rolls `seq` out from `x0`, clamping every command before it is applied.
pub fn propagate(x0: State, seq: &ControlSequence, params: &MppiParams) -> PredictedPath {
    let mut states = Vec::with_capacity(seq.len() + 1);
    states.push(x0);
    let mut x = x0;
    for &u in seq.as_slice() {
        x = step(x, clamp_control(u, params), params.dt);
        states.push(x);
    }
    PredictedPath(states)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn close(a: State, b: State, tol: f64) -> bool {
        (a.x - b.x).abs() < tol && (a.y - b.y).abs() < tol && (a.theta - b.theta).abs() < tol
    }

    #[test]
    fn clamp_examples() {
        let p = MppiParams::default();
        assert_eq!(clamp_control(Control::new(1.0, 0.5), &p), Control::new(1.0, 0.5));
        assert_eq!(clamp_control(Control::new(3.0, -2.0), &p), Control::new(2.0, -1.5));
        assert_eq!(clamp_control(Control::new(-2.0, 1.5), &p), Control::new(-2.0, 1.5));
    }

    #[test]
    fn step_examples() {
        let s = step(State::new(0.0, 0.0, 0.0), Control::new(1.0, 0.0), 0.1);
        assert!(close(s, State::new(0.1, 0.0, 0.0), 1e-15));

        let s = step(State::new(0.0, 0.0, FRAC_PI_2), Control::new(1.0, 0.0), 0.1);
        assert!(close(s, State::new(0.0, 0.1, FRAC_PI_2), 1e-15));

        // 1 + 2·cos0·0.1, 1 + 2·sin0·0.1, 0 + 1.5·0.1
        let s = step(State::new(1.0, 1.0, 0.0), Control::new(2.0, 1.5), 0.1);
        assert!(close(s, State::new(1.2, 1.0, 0.15), 1e-12));
    }

    #[test]
    fn propagate_zero_input_stays_put() {
        let p = MppiParams::default();
        let path = propagate(State::default(), &ControlSequence::zeros(p.horizon), &p);
        assert_eq!(path.len(), p.horizon + 1);
        assert!(path.states().iter().all(|s| *s == State::default()));
    }

    #[test]
    fn propagate_straight_line() {
        let p = MppiParams::default();
        let seq = ControlSequence::constant(50, Control::new(1.0, 0.0));
        let path = propagate(State::default(), &seq, &p);
        assert!(close(path[50], State::new(5.0, 0.0, 0.0), 1e-12));
    }

    #[test]
    fn propagate_circle_matches_analytic_radius() {
        // The analytic unicycle arc has radius v/ω. Euler vertices sit on a
        // slightly shifted circle; fit it through three samples and compare.
        let p = MppiParams::default();
        let (v, omega) = (1.0, 1.5);
        let r = v / omega;
        let seq = ControlSequence::constant(50, Control::new(v, omega));
        let path = propagate(State::default(), &seq, &p);
        let pts: Vec<_> = path.positions().collect();
        let (a, b, c) = (pts[0], pts[13], pts[29]);
        let d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
        let sq = |q: crate::params::Vec2| q.dot(q);
        let centre = crate::params::Vec2::new(
            (sq(a) * (b.y - c.y) + sq(b) * (c.y - a.y) + sq(c) * (a.y - b.y)) / d,
            (sq(a) * (c.x - b.x) + sq(b) * (a.x - c.x) + sq(c) * (b.x - a.x)) / d,
        );
        for (k, q) in pts.iter().enumerate() {
            let rho = q.distance(centre);
            assert!((rho - r).abs() / r < 0.02, "step {k}: radius {rho} vs {r}");
        }
    }

    proptest! {
        #[test]
        fn step_respects_speed_bound(
            x in -50.0f64..50.0, y in -50.0f64..50.0, th in -4.0f64..4.0,
            v in -2.0f64..2.0, w in -1.5f64..1.5, dt in 0.001f64..1.0,
        ) {
            let s0 = State::new(x, y, th);
            let s1 = step(s0, Control::new(v, w), dt);
            let moved = s0.position().distance(s1.position());
            prop_assert!(moved <= v.abs() * dt * (1.0 + 1e-12) + 1e-12);
            prop_assert_eq!(s1, step(s0, Control::new(v, w), dt));
        }

        #[test]
        fn propagate_is_iterated_clamped_step(
            seed_v in proptest::collection::vec((-4.0f64..4.0, -3.0f64..3.0), 2..20),
        ) {
            let p = MppiParams::default();
            let seq = ControlSequence(seed_v.iter().map(|&(v, w)| Control::new(v, w)).collect());
            let x0 = State::new(0.3, -0.2, 0.7);
            let path = propagate(x0, &seq, &p);
            prop_assert_eq!(path[0], x0);
            for k in 0..seq.len() {
                prop_assert_eq!(path[k + 1], step(path[k], clamp_control(seq[k], &p), p.dt));
            }
        }
    }
}
