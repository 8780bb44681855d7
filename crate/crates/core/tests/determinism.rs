//! Bit-identical closed-loop trajectories for any rayon pool size.

use drpa_core::bench::{PlannerConfig, PlannerVariant};
use drpa_core::scenario::{make_qualitative, make_random_grid, Convexity, QualitativeKind};

mod common;
use common::run_in_pool;

#[test]
fn trajectories_match_across_1_4_8_threads() {
    let cases = [
        (PlannerVariant::Drpa, make_qualitative(QualitativeKind::UShape), 3),
        (PlannerVariant::LogMppi, make_random_grid(6, Convexity::NonConvex, 4).unwrap(), 9),
    ];
    for (variant, scenario, seed) in cases {
        let cfg = PlannerConfig::new(variant, 50).with_rollouts(512);
        let one = run_in_pool(1, &cfg, &scenario, seed);
        assert!(one.len() > 10);
        for threads in [4, 8] {
            assert_eq!(run_in_pool(threads, &cfg, &scenario, seed), one, "{variant} with {threads} threads");
        }
    }
}
