//! End-to-end acceptance checks. Each test prints one PASS/FAIL line; run
//! with `--nocapture` to see them.

use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use plsaddle::bounds::{quality_guarantees, smoothness_l, thm1_inner_bound};
use plsaddle::harness::{
    compare_savings, emit_table, run_config_file, run_experiment, ExperimentConfig,
    ExperimentRecord, ExperimentRow, TableFormat,
};
use plsaddle::problem::{
    make_composed_quadratic, make_experiment_6d, ProblemConfig, QuadraticSaddle,
};
use plsaddle::validation::{inject_fault, validate_problem, Fault, ValidationOptions};
use plsaddle::{
    sample_uniform, solve_inner, solve_saddle, solve_saddle_observed, InitStrategy, InnerStop,
    OuterStop, PLConstants, SaddleProblem, SolverConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEEDS: std::ops::Range<u64> = 0..10;

fn verdict(id: u32, title: &str, ok: bool, detail: String) {
    println!(
        "criterion {id:>2} {} {title}: {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {id} ({title}) failed: {detail}");
}

fn grid(problem: &str, gammas: &[f64]) -> ExperimentConfig {
    let seeds: Vec<u64> = SEEDS.collect();
    ExperimentConfig::from_json(&format!(
        r#"{{"problem": {{"name": "{problem}"}}, "gammas": {gammas:?},
            "strategies": ["random_y0", "warm_start"], "seeds": {seeds:?},
            "record_wall_time": false}}"#
    ))
    .unwrap()
}

fn run_grid(problem: &str, gammas: &[f64]) -> Vec<ExperimentRecord> {
    let records = run_experiment(&grid(problem, gammas)).unwrap();
    for r in &records {
        assert!(!r.failed(), "run aborted: {:?}", r.error);
    }
    records
}

fn experiment_constants() -> PLConstants {
    PLConstants::new(8.0, 28.0, 28.0, 28.0, 1.0 / 16.0, 1.0 / 14.0).unwrap()
}

#[test]
fn c01_inner_bound_exact() {
    let c = experiment_constants();
    let start = Instant::now();
    let got: Vec<u64> = [1e-3, 1e-5, 1e-8]
        .iter()
        .map(|&g| thm1_inner_bound(&c, g, 100.0))
        .collect();
    let elapsed = start.elapsed();
    let ok = got == [6950, 10560, 15976] && elapsed.as_secs_f64() < 1e-3;
    verdict(
        1,
        "inner bound exact",
        ok,
        format!("{got:?} in {elapsed:?}"),
    );
}

#[test]
fn c02_gap_guarantee() {
    let records = run_grid("experiment_6d", &[1e-2, 1e-3, 1e-4]);
    let c = experiment_constants();
    let mut violations = 0;
    let mut unmet = 0;
    let mut worst = 0.0f64;
    for r in &records {
        if r.stop_reason != Some(OuterStop::Rule1Met) {
            unmet += 1;
            continue;
        }
        let (bound, _) = quality_guarantees(&c, r.row.gamma);
        let gap = r.final_value.unwrap();
        worst = worst.max(gap / bound);
        if gap > bound {
            violations += 1;
        }
    }
    verdict(
        2,
        "gap guarantee",
        violations == 0 && unmet == 0,
        format!(
            "{} runs, {violations} violations, {unmet} without the stopping rule, worst gap/bound {worst:.4}",
            records.len()
        ),
    );
}

#[test]
fn c03_observed_gap_magnitude() {
    let records = run_grid("experiment_6d", &[1e-3, 1e-5]);
    let scaled: Vec<f64> = records
        .iter()
        .map(|r| r.row.gap.unwrap() / (r.row.gamma * r.row.gamma))
        .collect();
    let lo = scaled.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = scaled.iter().cloned().fold(0.0, f64::max);
    verdict(
        3,
        "observed gap / gamma^2 in [350, 3600]",
        lo >= 350.0 && hi <= 3600.0,
        format!("{} runs, range [{lo:.2}, {hi:.2}]", scaled.len()),
    );
}

fn by_strategy(records: &[ExperimentRecord], s: InitStrategy) -> Vec<&ExperimentRow> {
    records
        .iter()
        .map(|r| &r.row)
        .filter(|r| r.strategy == s)
        .collect()
}

#[test]
fn c04_warm_start_efficiency() {
    let records = run_grid("experiment_6d", &[1e-3]);
    let warm = by_strategy(&records, InitStrategy::WarmStart);
    let random = by_strategy(&records, InitStrategy::RandomY0);
    assert_eq!(warm.len(), SEEDS.count());
    let mut ok = true;
    let mut worst_avg = 0.0f64;
    let mut worst_share = 0.0f64;
    for (w, r) in warm.iter().zip(&random) {
        assert_eq!(w.seed, r.seed);
        worst_avg = worst_avg.max(w.avg_p);
        worst_share = worst_share.max(w.sum_p as f64 / r.sum_p as f64);
        ok &= w.avg_p <= 5.0 && 5 * w.sum_p <= r.sum_p;
    }
    verdict(
        4,
        "warm start efficiency",
        ok,
        format!("max warm avg_p {worst_avg:.4}, max sum_p warm/random {worst_share:.2e}"),
    );
}

#[test]
fn c05_savings_over_fixed_budget() {
    let records = run_grid("experiment_6d", &[1e-3]);
    let rows: Vec<ExperimentRow> = records.iter().map(|r| r.row.clone()).collect();
    let report = compare_savings(&rows);
    let min_random = report
        .entries
        .iter()
        .filter(|e| e.strategy == InitStrategy::RandomY0)
        .map(|e| e.ratio_table_variant)
        .fold(f64::INFINITY, f64::min);
    let min_all = report
        .entries
        .iter()
        .map(|e| e.ratio_table_variant)
        .fold(f64::INFINITY, f64::min);

    // reference row: known counts, known ratio
    let reference = ExperimentRow {
        gamma: 1e-3,
        strategy: InitStrategy::RandomY0,
        seed: 0,
        gap: Some(1.1749e-3),
        n: 40921,
        sum_p: 3_921_481,
        avg_p: 95.83,
        nstar_thm3: 1_263_938,
        nstar_table_variant: 1_751_204,
        p_bound: 6950,
        grad_evals: 0,
        wall_ms: 0,
    };
    let sanity = compare_savings(&[reference]).entries[0].ratio_table_variant;
    let ok = min_all >= 1e3 && (sanity - 3_072.030_3).abs() < 1e-3;
    verdict(
        5,
        "savings over fixed budget",
        ok,
        format!("min ratio {min_all:.1} (random y0 {min_random:.1}), reference row {sanity:.4}"),
    );
}

fn identity_problem() -> SaddleProblem {
    let i = DMatrix::identity(2, 2);
    make_composed_quadratic(&i, &i, 1.0, 1.0).unwrap()
}

#[test]
fn c06_argument_guarantee() {
    let p = identity_problem();
    let gamma = 1e-4;
    let (_, bound) = quality_guarantees(p.constants(), gamma);
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut ok = true;
    for seed in SEEDS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x0 = sample_uniform(2, 5.0, &mut rng);
        let y0 = sample_uniform(2, 5.0, &mut rng);
        for s in [InitStrategy::WarmStart, InitStrategy::RandomY0] {
            let cfg = SolverConfig::new(gamma).with_strategy(s).with_seed(seed);
            let r = solve_saddle(&p, &x0, &y0, &cfg).unwrap();
            let dist = r.x_hat.norm();
            worst = worst.max(dist / bound);
            ok &= r.stop_reason == OuterStop::Rule1Met && dist <= bound;
        }
    }
    let elapsed = start.elapsed();
    verdict(
        6,
        "argument guarantee",
        ok && elapsed.as_secs_f64() < 1.0,
        format!("20 runs, worst |x - x*|/bound {worst:.4}, {elapsed:?}"),
    );
}

#[test]
fn c07_inner_stopping_soundness() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let c2 = 100.0;
    let mut violations = 0;
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let mu2 = 10f64.powf(rng.gen_range(-2.0..0.0));
        let l22 = mu2 * 10f64.powf(rng.gen_range(0.0..2.0));
        let curv = rng.gen_range(mu2..=l22);
        let q = 10f64.powf(rng.gen_range(-1.0..1.0)) * if rng.gen() { 1.0 } else { -1.0 };
        let b = rng.gen_range(-5.0..5.0);
        let gamma = 10f64.powf(rng.gen_range(-8.0..-2.0));
        let x = rng.gen_range(-5.0..5.0);

        // f = x^2/2 + q x y - curv y^2 / 2 + b y, maximized at (q x + b) / curv
        let obj = QuadraticSaddle::new(
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, q),
            DMatrix::from_element(1, 1, curv),
            DVector::zeros(1),
            DVector::from_element(1, b),
            0.0,
        )
        .unwrap();
        let constants = PLConstants::new(1.0, q.abs(), q.abs(), l22, 1.0, mu2).unwrap();
        let p = SaddleProblem::new("quad1d", Arc::new(obj), constants, None).unwrap();
        let y_star = (q * x + b) / curv;
        // initial gap curv/2 (y0 - y*)^2 stays within C2
        let y0 = y_star + rng.gen_range(-1.0..1.0) * (2.0 * c2 / curv).sqrt();

        let bound = thm1_inner_bound(&constants, gamma, c2);
        let r = solve_inner(
            &p,
            &DVector::from_element(1, x),
            &DVector::from_element(1, y0),
            gamma,
            bound * 10,
        )
        .unwrap();
        let err = (r.y_hat[0] - y_star).abs();
        worst = worst.max(err / gamma);
        if r.stop_reason != InnerStop::CriterionMet || err > gamma || r.iterations > bound {
            violations += 1;
        }
    }
    verdict(
        7,
        "inner stopping soundness",
        violations == 0,
        format!("1000 instances, {violations} violations, worst |y - y*|/gamma {worst:.4}"),
    );
}

#[test]
fn c08_outer_descent() {
    // B = I: max_y <Ax, y> - b/2 |y|^2 = |Ax|^2 / (2b)
    let instances = [
        (DMatrix::identity(2, 2), 1.0, 1.0),
        (
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.3])),
            1.5,
            0.7,
        ),
    ];
    let mut steps = 0u64;
    let mut violations = 0u64;
    let mut tightest = f64::INFINITY;
    for (a, sa, sb) in &instances {
        let p = make_composed_quadratic(a, &DMatrix::identity(2, 2), *sa, *sb).unwrap();
        let c = p.constants();
        let g = |x: &DVector<f64>| (sa / 2.0 + 1.0 / (2.0 * sb)) * (a * x).norm_squared();
        for gamma in [1e-2, 1e-3] {
            let required = -c.l12 * c.l12 * gamma * gamma / (2.0 * smoothness_l(c)) + 1e-10;
            for seed in SEEDS {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let x0 = sample_uniform(2, 5.0, &mut rng);
                let y0 = sample_uniform(2, 5.0, &mut rng);
                for s in [InitStrategy::WarmStart, InitStrategy::RandomY0] {
                    let cfg = SolverConfig::new(gamma).with_strategy(s).with_seed(seed);
                    let mut trace: Vec<(DVector<f64>, bool)> = Vec::new();
                    solve_saddle_observed(&p, &x0, &y0, &cfg, |st| {
                        trace.push((st.x.clone(), st.rule_met))
                    })
                    .unwrap();
                    for w in trace.windows(2) {
                        let (x, met) = &w[0];
                        assert!(!met);
                        let delta = g(&w[1].0) - g(x);
                        steps += 1;
                        tightest = tightest.min(required - delta);
                        if delta > required {
                            violations += 1;
                        }
                    }
                }
            }
        }
    }
    verdict(
        8,
        "outer descent per step",
        violations == 0 && steps > 0,
        format!("{steps} steps, {violations} violations, smallest slack {tightest:.3e}"),
    );
}

#[test]
fn c09_validation_self_consistency() {
    let opts = ValidationOptions::default();
    let mut lines = Vec::new();
    let mut ok = true;
    for name in plsaddle::problem::BUILTIN_NAMES {
        let p = ProblemConfig::named(name).build().unwrap();
        let a = validate_problem(&p, &opts).unwrap();
        let b = validate_problem(&p, &opts).unwrap();
        let passed = a.iter().all(|r| r.passed);
        ok &= passed && a == b;
        lines.push(format!(
            "{name} {}",
            if passed { "passes" } else { "fails" }
        ));
    }
    let six = make_experiment_6d();
    let faults = [
        (
            "scaled gradient",
            inject_fault(&six, Fault::ScaledGradX(1.01)).unwrap(),
        ),
        (
            "inflated mu2",
            inject_fault(&identity_problem(), Fault::InflatedMu2(100.0)).unwrap(),
        ),
        (
            "understated L22",
            inject_fault(&six, Fault::UnderstatedL22(0.99)).unwrap(),
        ),
    ];
    for (label, p) in &faults {
        let a = validate_problem(p, &opts).unwrap();
        let b = validate_problem(p, &opts).unwrap();
        let caught: Vec<&str> = a
            .iter()
            .filter(|r| !r.passed)
            .map(|r| r.check_name.as_str())
            .collect();
        ok &= !caught.is_empty() && a == b;
        lines.push(format!("{label} caught by {caught:?}"));
    }
    verdict(9, "validation self-consistency", ok, lines.join("; "));
}

#[test]
fn c10_deterministic_csv() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.json");
    let csv = || {
        let (cfg, records) = run_config_file(&path).unwrap();
        assert!(!cfg.record_wall_time);
        let rows: Vec<ExperimentRow> = records.into_iter().map(|r| r.row).collect();
        emit_table(&rows, TableFormat::Csv)
    };
    let a = csv();
    let b = csv();
    verdict(
        10,
        "byte-identical CSV",
        a == b,
        format!(
            "{} bytes, {} lines",
            a.len(),
            a.iter().filter(|&&c| c == b'\n').count()
        ),
    );
}
