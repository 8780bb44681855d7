//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.
//!
//! Criteria 1 to 4 run full closed-loop experiments and take a while on a
//! single core.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use drpa_core::bench::{run_suite, run_trial, PlannerConfig, PlannerVariant, SuiteConfig, SuiteReport};
use drpa_core::certify;
use drpa_core::guidance::{repulsion_radius, DetourContext, Guidance};
use drpa_core::sampling::{NlnParams, NoiseBatch, NoiseSampler};
use drpa_core::scenario::{make_qualitative, make_random_grid, Convexity, QualitativeKind};
use drpa_core::solver::{importance_weights, rollout_cost, update_controls};
use drpa_core::{Control, ControlSequence, DrpaParams, MppiParams, State, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

mod common;
use common::{oracle_cost, run_in_pool, Goal, GridWorld};

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self {
            passed,
            detail: detail.into(),
        }
    }
}

fn qualitative_layouts() -> Outcome {
    const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
    let planners = [
        (PlannerVariant::Drpa, 50, [true, true, true]),
        (PlannerVariant::Mppi, 50, [true, false, false]),
        (PlannerVariant::Mppi, 100, [true, true, false]),
    ];
    let mut passed = true;
    let mut cells = Vec::new();
    for (variant, horizon, expected) in planners {
        let cfg = PlannerConfig::new(variant, horizon).with_rollouts(10_000);
        for (kind, expect) in QualitativeKind::ALL.into_iter().zip(expected) {
            let scenario = make_qualitative(kind);
            let successes = SEEDS
                .par_iter()
                .map(|&seed| run_trial(&cfg, &scenario, seed).map(|r| r.success))
                .collect::<drpa_core::Result<Vec<_>>>()
                .expect("trial");
            let agree = successes.iter().filter(|&&s| s == expect).count();
            let ok = agree >= 4;
            passed &= ok;
            let n_success = successes.iter().filter(|&&s| s).count();
            cells.push(format!(
                "{}/{kind} {n_success}/5 success{}",
                cfg.label(),
                if ok { "" } else { " (MISMATCH)" }
            ));
        }
    }
    Outcome::new(passed, cells.join(", "))
}

struct DeskRuns {
    reports: BTreeMap<(String, &'static str), SuiteReport>,
}

const DESK_CELLS: [Convexity; 2] = [Convexity::NonConvex, Convexity::Convex];

fn desk_planners() -> Vec<PlannerConfig> {
    [
        (PlannerVariant::Drpa, 50),
        (PlannerVariant::Mppi, 50),
        (PlannerVariant::Mppi, 100),
        (PlannerVariant::LogMppi, 50),
        (PlannerVariant::LogMppi, 100),
    ]
    .into_iter()
    .map(|(v, h)| PlannerConfig::new(v, h).with_rollouts(2048))
    .collect()
}

fn run_desk() -> DeskRuns {
    let mut reports = BTreeMap::new();
    for convexity in DESK_CELLS {
        let suite = SuiteConfig { grid_n: 6, convexity };
        for cfg in desk_planners() {
            let started = Instant::now();
            let report = run_suite(&cfg, suite, 100, 1).expect("suite");
            let m = &report.metrics;
            eprintln!(
                "  {} {suite}: SR {:.1} ST {} CT {:.3} ms ({:.0} s)",
                cfg.label(),
                m.sr,
                m.st.map(|s| format!("{s:.2}")).unwrap_or_else(|| "-".into()),
                m.ct,
                started.elapsed().as_secs_f64()
            );
            reports.insert((cfg.label(), convexity.name()), report);
        }
    }
    DeskRuns { reports }
}

impl DeskRuns {
    fn get(&self, label: &str, convexity: Convexity) -> &SuiteReport {
        &self.reports[&(label.to_string(), convexity.name())]
    }

    /// Total solver time over total cycles for one planner across both cells.
    fn pooled_ct(&self, label: &str) -> f64 {
        let (ms, cycles) = DESK_CELLS
            .iter()
            .flat_map(|&c| &self.get(label, c).trials)
            .fold((0.0, 0usize), |(ms, n), t| (ms + t.total_compute_ms, n + t.cycles));
        ms / cycles as f64
    }
}

fn success_rate_gaps(desk: &DeskRuns) -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for (convexity, min_gap) in [(Convexity::NonConvex, 15.0), (Convexity::Convex, 10.0)] {
        let drpa = desk.get("drpa-h50", convexity).metrics.sr;
        let mppi = desk.get("mppi-h50", convexity).metrics.sr;
        let ok = drpa - mppi >= min_gap && drpa >= 90.0;
        passed &= ok;
        parts.push(format!(
            "{convexity}: drpa {drpa:.1} vs mppi {mppi:.1} (gap {:.1}, need >= {min_gap} and drpa >= 90)",
            drpa - mppi
        ));
    }
    Outcome::new(passed, parts.join("; "))
}

fn success_time_ordering(desk: &DeskRuns) -> Outcome {
    let mut passed = true;
    let mut compared = 0;
    let mut parts = Vec::new();
    for convexity in DESK_CELLS {
        let drpa = &desk.get("drpa-h50", convexity).metrics;
        for base in ["mppi-h50", "mppi-h100", "logmppi-h50", "logmppi-h100"] {
            let other = &desk.get(base, convexity).metrics;
            if drpa.n_success < 20 || other.n_success < 20 {
                continue;
            }
            compared += 1;
            let (d, o) = (drpa.st.unwrap(), other.st.unwrap());
            if d > o + 0.5 {
                passed = false;
                parts.push(format!("{convexity} {base}: drpa {d:.2} s > {o:.2} s + 0.5"));
            }
        }
    }
    if parts.is_empty() {
        parts.push(format!("drpa-h50 within tolerance in {compared} comparisons"));
    }
    Outcome::new(passed, parts.join("; "))
}

fn compute_time_scaling(desk: &DeskRuns) -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for variant in ["mppi", "logmppi"] {
        let ratio = desk.pooled_ct(&format!("{variant}-h100")) / desk.pooled_ct(&format!("{variant}-h50"));
        let ok = (1.7..=2.3).contains(&ratio);
        passed &= ok;
        parts.push(format!("{variant} h100/h50 = {ratio:.3}"));
    }
    let overhead = desk.pooled_ct("drpa-h50") / desk.pooled_ct("mppi-h50");
    passed &= overhead <= 1.15;
    parts.push(format!("drpa/mppi at h50 = {overhead:.3}"));
    Outcome::new(passed, parts.join(", "))
}

fn configs() -> Vec<certify::CertConfig> {
    certify::random_configs(20, 2024).expect("configs")
}

fn unique_minimiser() -> Outcome {
    let report = certify::check_unique_minimiser(&configs(), 10_000, 7);
    Outcome::new(
        report.passed(),
        format!(
            "{} points over {} configs, {} skipped, {} value / {} descent violations",
            report.points, report.configs, report.skipped, report.value_violations, report.descent_violations
        ),
    )
}

fn repulsion_radius_check() -> Outcome {
    let checks = certify::check_repulsion_radius(&configs()).expect("bisection");
    let worst = checks.iter().map(|c| c.max_error()).fold(0.0, f64::max);
    let drpa = DrpaParams {
        w_rep: 0.7,
        d_vt: 10.0,
        ..DrpaParams::default()
    };
    let ctx = DetourContext::toward(Vec2::ZERO, Vec2::new(20.0, 0.0), &drpa).expect("context");
    let bisected = certify::bisect_repulsion_radius(&ctx, 1.0, 1e-10).expect("bisection");
    let closed = repulsion_radius(0.7, 10.0);
    let passed = worst <= 1e-6 && (bisected - 9.802).abs() <= 1e-3 && (closed - 9.802).abs() <= 1e-3;
    Outcome::new(
        passed,
        format!("max error {worst:.2e} m over {} configs; w_rep 0.7, d_vt 10: bisected {bisected:.6} m, closed form {closed:.6} m", checks.len()),
    )
}

fn gradient_check() -> Outcome {
    let report = certify::check_gradient(&configs(), 1000, 1e-6, 11).expect("gradient");
    Outcome::new(
        report.max_relative_error < 1e-6,
        format!("max relative error {:.2e} over {} points", report.max_relative_error, report.points),
    )
}

fn solver_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst_sum: f64 = 0.0;
    let mut worst_shift: f64 = 0.0;
    for _ in 0..1000 {
        let k = rng.random_range(1..2000);
        let scale = 10f64.powf(rng.random_range(-2.0..4.0));
        let costs: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..scale)).collect();
        let (w, _) = importance_weights(&costs, 10.0);
        worst_sum = worst_sum.max((w.iter().sum::<f64>() - 1.0).abs());
        let shift = rng.random_range(-1e3..1e3);
        let shifted: Vec<f64> = costs.iter().map(|c| c + shift).collect();
        let (ws, _) = importance_weights(&shifted, 10.0);
        for (a, b) in w.iter().zip(&ws) {
            worst_shift = worst_shift.max((a - b).abs());
        }
    }

    let mut worst_cost: f64 = 0.0;
    let mut worst_update: f64 = 0.0;
    for case in 0..500u64 {
        let t = rng.random_range(2..=3);
        let k = rng.random_range(1..=8);
        let p = MppiParams {
            w_obst: 1000.0,
            w_guidance: 3.0,
            ..MppiParams::default().with_horizon(t).with_rollouts(k)
        };
        let cells: Vec<(i32, i32)> = (0..rng.random_range(0..10))
            .map(|_| (rng.random_range(-3..3), rng.random_range(-3..3)))
            .collect();
        let grid = GridWorld { cells };
        let world = grid.world();
        let x0 = (rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5), rng.random_range(-3.0..3.0));
        let u_hat: Vec<(f64, f64)> = (0..t).map(|_| (rng.random_range(-3.0..3.0), rng.random_range(-2.0..2.0))).collect();
        let seq = ControlSequence(u_hat.iter().map(|&(v, w)| Control::new(v, w)).collect());
        let (goal, guidance) = if case % 2 == 0 {
            let ctx = DetourContext::toward(Vec2::new(0.3, -0.2), Vec2::new(4.0, 1.0), &DrpaParams::default()).unwrap();
            (
                Goal::Detour {
                    min: (ctx.p_min.x, ctx.p_min.y),
                    vt: (ctx.p_vt.x, ctx.p_vt.y),
                    w: ctx.w_rep,
                },
                Guidance::Detour(ctx),
            )
        } else {
            (Goal::Target(2.0, 1.0), Guidance::Target { p_target: Vec2::new(2.0, 1.0) })
        };
        let batch: NoiseBatch = NoiseSampler::gaussian(p.noise_variance).unwrap().sample(k, t, case);
        let start = State { x: x0.0, y: x0.1, theta: x0.2 };
        let mut costs = Vec::with_capacity(k);
        for kk in 0..k {
            let got = rollout_cost(start, &seq, batch.rollout(kk), &world, &guidance, &p).cost_to_go;
            let want = oracle_cost(x0, &u_hat, batch.rollout(kk), &grid, &goal, &p);
            worst_cost = worst_cost.max((got - want).abs() / want.abs().max(1.0));
            costs.push(got);
        }
        let min = costs.iter().copied().fold(f64::INFINITY, f64::min);
        let eta: f64 = costs.iter().map(|j| (-(j - min) / p.lambda).exp()).sum();
        let manual: Vec<f64> = costs.iter().map(|j| (-(j - min) / p.lambda).exp() / eta).collect();
        let (weights, _) = importance_weights(&costs, p.lambda);
        let updated = update_controls(&seq, &weights, &batch);
        for tau in 0..t {
            let (mut dv, mut dw) = (0.0, 0.0);
            for kk in 0..k {
                dv += manual[kk] * batch.get(kk, tau)[0];
                dw += manual[kk] * batch.get(kk, tau)[1];
            }
            worst_update = worst_update
                .max((updated[tau].v - (u_hat[tau].0 + dv)).abs())
                .max((updated[tau].omega - (u_hat[tau].1 + dw)).abs());
        }
    }

    let cases = [
        (PlannerVariant::Drpa, make_qualitative(QualitativeKind::UShape), 3),
        (PlannerVariant::Mppi, make_random_grid(6, Convexity::NonConvex, 8).unwrap(), 5),
    ];
    let mut deterministic = true;
    for (variant, scenario, seed) in cases {
        let cfg = PlannerConfig::new(variant, 50).with_rollouts(1024);
        let one = run_in_pool(1, &cfg, &scenario, seed);
        deterministic &= [4, 8].iter().all(|&n| run_in_pool(n, &cfg, &scenario, seed) == one);
    }

    let passed = worst_sum <= 1e-9 && worst_shift <= 1e-12 && worst_cost <= 1e-12 && worst_update <= 1e-12 && deterministic;
    Outcome::new(
        passed,
        format!(
            "weight sum error {worst_sum:.1e}, shift error {worst_shift:.1e}, brute-force cost error {worst_cost:.1e}, update error {worst_update:.1e}, 1/4/8-thread trajectories {}",
            if deterministic { "identical" } else { "DIFFER" }
        ),
    )
}

fn variance_and_kurtosis(batch: &NoiseBatch, dim: usize) -> (f64, f64) {
    let n = batch.epsilons.len() as f64;
    let mean = batch.epsilons.iter().map(|e| e[dim]).sum::<f64>() / n;
    let m2 = batch.epsilons.iter().map(|e| (e[dim] - mean).powi(2)).sum::<f64>() / n;
    let m4 = batch.epsilons.iter().map(|e| (e[dim] - mean).powi(4)).sum::<f64>() / n;
    (m2, m4 / (m2 * m2))
}

fn sampler_moments() -> Outcome {
    let gaussian = NoiseSampler::gaussian([0.5, 0.5]).unwrap().sample(1_000_000, 1, 42);
    let nln = NoiseSampler::nln([0.5, 0.5], NlnParams::default()).unwrap().sample(1_000_000, 1, 42);
    let mut passed = true;
    let mut parts = Vec::new();
    for dim in 0..2 {
        let (gv, _) = variance_and_kurtosis(&gaussian, dim);
        let (nv, nk) = variance_and_kurtosis(&nln, dim);
        passed &= (gv - 0.5).abs() <= 0.02 && (nv - 0.5).abs() <= 0.025 && (nk - 3.25).abs() <= 0.15;
        parts.push(format!("dim {dim}: gaussian var {gv:.4}, nln var {nv:.4} kurtosis {nk:.3}"));
    }
    Outcome::new(passed, parts.join("; "))
}

fn report(n: usize, name: &str, run: impl FnOnce() -> Outcome) -> bool {
    let started = Instant::now();
    let outcome = run();
    println!(
        "criterion {n} {name}: {} ({}) [{:.0} s]",
        if outcome.passed { "PASS" } else { "FAIL" },
        outcome.detail,
        started.elapsed().as_secs_f64()
    );
    outcome.passed
}

fn main() -> ExitCode {
    let mut all = true;
    all &= report(1, "qualitative layouts", qualitative_layouts);
    let started = Instant::now();
    let desk = run_desk();
    eprintln!("  desk-scale suites took {:.0} s", started.elapsed().as_secs_f64());
    all &= report(2, "success-rate gaps", || success_rate_gaps(&desk));
    all &= report(3, "success-time ordering", || success_time_ordering(&desk));
    all &= report(4, "compute-time scaling", || compute_time_scaling(&desk));
    all &= report(5, "unique minimiser", unique_minimiser);
    all &= report(6, "repulsion radius", repulsion_radius_check);
    all &= report(7, "gradient check", gradient_check);
    all &= report(8, "solver oracles", solver_oracles);
    all &= report(9, "sampler moments", sampler_moments);
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
