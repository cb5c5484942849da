//! Inexact gradient descent on `g(x) = max_y f(x, y)`.
//!
//! Every outer iteration solves the inner problem to argument accuracy
//! `gamma`, uses `grad_x f(x_k, y_hat)` as the inexact gradient of `g`, and
//! stops as soon as its norm drops to `sqrt(6) L12 gamma`. Otherwise it
//! steps with `1/L = mu2 / (L11 mu2 + L12^2)`.
//!
//! [`solve_fixed_budget`] runs the same scheme for the a-priori counts
//! `k` and `p` with no stopping rules, as a baseline.

use nalgebra::DVector;
use rand::distributions::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{classical_bounds, gamma_for_epsilon, thm2_outer_bound, thm3_outer_bound};
use crate::error::{Error, Result, Stage};
use crate::inner::{default_inner_cap, solve_inner, InnerResult, InnerStop};
use crate::problem::SaddleProblem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitStrategy {
    /// Fresh uniform sample in the box for every inner solve.
    RandomY0,
    /// Start each inner solve at the previous `y_hat`; the first uses the
    /// caller's `y0`.
    WarmStart,
}

impl InitStrategy {
    pub fn as_str(&self) -> &'static str {
        match self {
            InitStrategy::RandomY0 => "random_y0",
            InitStrategy::WarmStart => "warm_start",
        }
    }
}

impl std::fmt::Display for InitStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OuterCapPolicy {
    /// The `mu1`-dependent log ceiling `N*`.
    Theorem3,
    /// The `mu1`-free polynomial ceiling.
    Theorem2,
    Manual(u64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub gamma: f64,
    pub c1: f64,
    pub c2: f64,
    pub init_strategy: InitStrategy,
    pub init_box_radius: f64,
    pub seed: u64,
    pub outer_cap_policy: OuterCapPolicy,
    pub record_history: bool,
    /// Multiplies the default inner cap, for problems whose declared
    /// constants or `C2` may be off.
    pub inner_cap_multiplier: u64,
}

impl SolverConfig {
    pub fn new(gamma: f64) -> Self {
        SolverConfig {
            gamma,
            c1: 100.0,
            c2: 100.0,
            init_strategy: InitStrategy::WarmStart,
            init_box_radius: 5.0,
            seed: 0,
            outer_cap_policy: OuterCapPolicy::Theorem3,
            record_history: false,
            inner_cap_multiplier: 1,
        }
    }

    pub fn with_strategy(mut self, s: InitStrategy) -> Self {
        self.init_strategy = s;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_history(mut self, on: bool) -> Self {
        self.record_history = on;
        self
    }

    pub fn with_cap_policy(mut self, policy: OuterCapPolicy) -> Self {
        self.outer_cap_policy = policy;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("gamma", self.gamma),
            ("C1", self.c1),
            ("C2", self.c2),
            ("init_box_radius", self.init_box_radius),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be finite and positive, got {v}"
                )));
            }
        }
        if self.inner_cap_multiplier == 0 {
            return Err(Error::InvalidArgument(
                "inner_cap_multiplier must be at least 1".into(),
            ));
        }
        if self.outer_cap_policy == OuterCapPolicy::Manual(0) {
            return Err(Error::InvalidArgument(
                "manual outer cap must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OuterStop {
    Rule1Met,
    CapReached,
    FixedBudgetDone,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub k: u64,
    pub grad_norm: f64,
    /// `f(x_k, y_hat_k)`, a proxy for `g(x_k)`.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaddleReport {
    pub x_hat: DVector<f64>,
    pub y_hat: DVector<f64>,
    pub gamma: f64,
    pub outer_iterations: u64,
    pub inner_solves: u64,
    pub inner_iterations_total: u64,
    pub inner_iterations_mean: f64,
    pub grad_evals_total: u64,
    pub final_value: f64,
    pub final_gap: Option<f64>,
    /// `|grad_x f(x_hat, y_hat)|` as last evaluated.
    pub final_grad_norm: f64,
    pub stop_reason: OuterStop,
    pub inner_cap_hits: u64,
    pub warnings: Vec<String>,
    pub history: Option<Vec<HistoryEntry>>,
}

/// State handed to an observer once per outer iteration, after the inner
/// solve and before the step.
#[derive(Debug)]
pub struct OuterStep<'a> {
    pub k: u64,
    pub x: &'a DVector<f64>,
    pub inner: &'a InnerResult,
    pub grad_x: &'a DVector<f64>,
    pub grad_norm: f64,
    pub rule_met: bool,
}

/// Independent uniform coordinates on `[-radius, radius]`.
pub fn sample_uniform<R: Rng + ?Sized>(dim: usize, radius: f64, rng: &mut R) -> DVector<f64> {
    let dist = Uniform::new_inclusive(-radius, radius);
    DVector::from_iterator(dim, (0..dim).map(|_| dist.sample(rng)))
}

pub(crate) fn outer_cap(problem: &SaddleProblem, config: &SolverConfig) -> u64 {
    let c = problem.constants();
    match config.outer_cap_policy {
        OuterCapPolicy::Theorem3 => thm3_outer_bound(c, config.gamma, config.c1),
        OuterCapPolicy::Theorem2 => {
            u64::try_from(thm2_outer_bound(c, config.gamma, config.c1)).unwrap_or(u64::MAX)
        }
        OuterCapPolicy::Manual(n) => n,
    }
}

fn gap_of(problem: &SaddleProblem, value: f64) -> Option<f64> {
    problem.known_saddle().map(|s| value - s.value)
}

pub fn solve_saddle(
    problem: &SaddleProblem,
    x0: &DVector<f64>,
    y0: &DVector<f64>,
    config: &SolverConfig,
) -> Result<SaddleReport> {
    solve_saddle_observed(problem, x0, y0, config, |_| {})
}

/// [`solve_saddle`] with a callback invoked at every outer iteration.
pub fn solve_saddle_observed<F>(
    problem: &SaddleProblem,
    x0: &DVector<f64>,
    y0: &DVector<f64>,
    config: &SolverConfig,
    mut observer: F,
) -> Result<SaddleReport>
where
    F: FnMut(&OuterStep<'_>),
{
    config.validate()?;
    problem.check_dims(x0, y0)?;
    let c = *problem.constants();
    let gamma = config.gamma;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let inner_cap =
        default_inner_cap(&c, gamma, config.c2).saturating_mul(config.inner_cap_multiplier);
    let cap = outer_cap(problem, config);
    let step = c.mu2 / (c.l11 * c.mu2 + c.l12 * c.l12);
    let threshold = 6f64.sqrt() * c.l12 * gamma;

    let mut x = x0.clone();
    let mut warm = y0.clone();
    let mut k = 0u64;
    let mut inner_total = 0u64;
    let mut inner_solves = 0u64;
    let mut grad_evals = 0u64;
    let mut cap_hits = 0u64;
    let mut warnings = Vec::new();
    let mut history = config.record_history.then(Vec::new);

    let (inner, grad_norm, stop) = loop {
        let start = match config.init_strategy {
            InitStrategy::RandomY0 => {
                sample_uniform(problem.dim_y(), config.init_box_radius, &mut rng)
            }
            InitStrategy::WarmStart => warm.clone(),
        };
        let inner = solve_inner(problem, &x, &start, gamma, inner_cap)?;
        inner_total += inner.iterations;
        inner_solves += 1;
        grad_evals += inner.grad_evals();
        if inner.stop_reason == InnerStop::CapReached {
            cap_hits += 1;
            if cap_hits == 1 {
                let msg = format!(
                    "inner cap {inner_cap} reached at outer iteration {k} (|grad_y| = {:e})",
                    inner.final_grad_norm
                );
                log::warn!("{msg}");
                warnings.push(msg);
            }
        }

        let gx = problem.grad_x(&x, &inner.y_hat);
        grad_evals += 1;
        let norm = gx.norm();
        if !norm.is_finite() {
            return Err(Error::NonFinite {
                stage: Stage::Outer,
                iteration: k,
                what: "gradient",
            });
        }
        if let Some(h) = history.as_mut() {
            h.push(HistoryEntry {
                k,
                grad_norm: norm,
                value: inner.value,
            });
        }
        let rule_met = norm <= threshold;
        observer(&OuterStep {
            k,
            x: &x,
            inner: &inner,
            grad_x: &gx,
            grad_norm: norm,
            rule_met,
        });
        if rule_met {
            break (inner, norm, OuterStop::Rule1Met);
        }
        if k >= cap {
            break (inner, norm, OuterStop::CapReached);
        }
        x.axpy(-step, &gx, 1.0);
        k += 1;
        if config.init_strategy == InitStrategy::WarmStart {
            warm = inner.y_hat;
        }
    };

    if cap_hits > 1 {
        warnings.push(format!("inner cap reached in {cap_hits} inner solves"));
    }
    if stop == OuterStop::CapReached {
        let msg = format!("outer cap {cap} reached before the stopping rule");
        log::warn!("{msg}");
        warnings.push(msg);
    }

    Ok(SaddleReport {
        final_gap: gap_of(problem, inner.value),
        final_value: inner.value,
        x_hat: x,
        y_hat: inner.y_hat,
        gamma,
        outer_iterations: k,
        inner_solves,
        inner_iterations_total: inner_total,
        inner_iterations_mean: inner_total as f64 / inner_solves as f64,
        grad_evals_total: grad_evals,
        final_grad_norm: grad_norm,
        stop_reason: stop,
        inner_cap_hits: cap_hits,
        warnings,
        history,
    })
}

/// Runs exactly `k` outer steps, each preceded by exactly `p` inner steps,
/// with `k`, `p` the a-priori counts for accuracy `epsilon`. The report's
/// `gamma` is the matched inner accuracy `sqrt(epsilon mu1) / L12`;
/// `config.gamma` is ignored. `y_hat` is the last inner iterate, computed
/// at `x_{k-1}`.
pub fn solve_fixed_budget(
    problem: &SaddleProblem,
    x0: &DVector<f64>,
    y0: &DVector<f64>,
    epsilon: f64,
    config: &SolverConfig,
) -> Result<SaddleReport> {
    if epsilon <= 0.0 || !epsilon.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    config.validate()?;
    problem.check_dims(x0, y0)?;
    let c = *problem.constants();
    let gamma = gamma_for_epsilon(&c, epsilon);
    let counts = classical_bounds(&c, epsilon, config.c1, config.c2);
    let mut warnings = Vec::new();
    if 2.0 * config.c1 <= epsilon || 2.0 * config.c2 <= epsilon * c.mu1 * c.mu2 {
        warnings.push(format!(
            "epsilon {epsilon:e} too large for the a-priori counts; clamped to k = {}, p = {}",
            counts.k, counts.p
        ));
    }
    let step = c.mu2 / (c.l11 * c.mu2 + c.l12 * c.l12);
    let inner_step = 1.0 / c.l22;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut x = x0.clone();
    let mut y = y0.clone();
    let mut grad_evals = 0u64;
    let mut grad_norm = f64::NAN;
    let mut history = config.record_history.then(Vec::new);

    for k in 0..counts.k {
        if config.init_strategy == InitStrategy::RandomY0 {
            y = sample_uniform(problem.dim_y(), config.init_box_radius, &mut rng);
        }
        for m in 0..counts.p {
            let gy = problem.grad_y(&x, &y);
            grad_evals += 1;
            if !gy.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFinite {
                    stage: Stage::Inner,
                    iteration: m,
                    what: "gradient",
                });
            }
            y.axpy(inner_step, &gy, 1.0);
        }
        let gx = problem.grad_x(&x, &y);
        grad_evals += 1;
        grad_norm = gx.norm();
        if !grad_norm.is_finite() {
            return Err(Error::NonFinite {
                stage: Stage::Outer,
                iteration: k,
                what: "gradient",
            });
        }
        if let Some(h) = history.as_mut() {
            h.push(HistoryEntry {
                k,
                grad_norm,
                value: problem.value(&x, &y),
            });
        }
        x.axpy(-step, &gx, 1.0);
    }

    let value = problem.value(&x, &y);
    let inner_total = counts.k * counts.p;
    Ok(SaddleReport {
        final_gap: gap_of(problem, value),
        final_value: value,
        x_hat: x,
        y_hat: y,
        gamma,
        outer_iterations: counts.k,
        inner_solves: counts.k,
        inner_iterations_total: inner_total,
        inner_iterations_mean: counts.p as f64,
        grad_evals_total: grad_evals,
        final_grad_norm: grad_norm,
        stop_reason: OuterStop::FixedBudgetDone,
        inner_cap_hits: 0,
        warnings,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{classical_bounds, epsilon_for_gamma};
    use crate::problem::{make_composed_quadratic, make_experiment_6d};
    use nalgebra::DMatrix;

    fn identity_quadratic() -> SaddleProblem {
        let eye = DMatrix::identity(2, 2);
        make_composed_quadratic(&eye, &eye, 1.0, 1.0).unwrap()
    }

    #[test]
    fn origin_start_stops_immediately() {
        let p = make_experiment_6d();
        let z = DVector::zeros(3);
        let r = solve_saddle(&p, &z, &z, &SolverConfig::new(1e-3)).unwrap();
        assert_eq!(r.outer_iterations, 0);
        assert_eq!(r.stop_reason, OuterStop::Rule1Met);
        assert_eq!(r.inner_iterations_total, 0);
        assert_eq!(r.grad_evals_total, 2);
        assert_eq!(r.final_gap, Some(0.0));
    }

    #[test]
    fn identity_quadratic_argument_guarantee() {
        let p = identity_quadratic();
        let gamma = 1e-4;
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x0 = sample_uniform(2, 5.0, &mut rng);
            let y0 = sample_uniform(2, 5.0, &mut rng);
            let cfg = SolverConfig::new(gamma).with_seed(seed);
            let r = solve_saddle(&p, &x0, &y0, &cfg).unwrap();
            assert_eq!(r.stop_reason, OuterStop::Rule1Met);
            assert!(r.x_hat.norm() <= 14f64.sqrt() * gamma);
        }
    }

    #[test]
    fn mean_matches_total() {
        let p = make_experiment_6d();
        let x0 = DVector::from_vec(vec![0.5, -0.2, 0.1]);
        let y0 = DVector::from_vec(vec![1.0, 1.0, 1.0]);
        let cfg = SolverConfig::new(1e-2).with_strategy(InitStrategy::RandomY0);
        let r = solve_saddle(&p, &x0, &y0, &cfg).unwrap();
        assert_eq!(r.inner_solves, r.outer_iterations + 1);
        let back = r.inner_iterations_mean * r.inner_solves as f64;
        assert!((back - r.inner_iterations_total as f64).abs() < 1e-6);
        assert_eq!(
            r.grad_evals_total,
            r.inner_iterations_total + 2 * r.inner_solves
        );
    }

    #[test]
    fn manual_cap_is_soft() {
        let p = make_experiment_6d();
        let x0 = DVector::from_vec(vec![3.0, -2.0, 1.0]);
        let y0 = DVector::zeros(3);
        let cfg = SolverConfig::new(1e-3).with_cap_policy(OuterCapPolicy::Manual(10));
        let r = solve_saddle(&p, &x0, &y0, &cfg).unwrap();
        assert_eq!(r.stop_reason, OuterStop::CapReached);
        assert_eq!(r.outer_iterations, 10);
        assert!(!r.warnings.is_empty());
        assert!(r.final_value.is_finite());
    }

    #[test]
    fn history_records_every_iteration() {
        let p = make_experiment_6d();
        let x0 = DVector::from_vec(vec![0.05, 0.0, 0.0]);
        let y0 = DVector::zeros(3);
        let cfg = SolverConfig::new(1e-2).with_history(true);
        let r = solve_saddle(&p, &x0, &y0, &cfg).unwrap();
        let h = r.history.unwrap();
        assert_eq!(h.len() as u64, r.outer_iterations + 1);
        assert!(h.windows(2).all(|w| w[1].k == w[0].k + 1));
        assert_eq!(h.last().unwrap().grad_norm, r.final_grad_norm);
    }

    #[test]
    fn invalid_config_rejected() {
        let p = make_experiment_6d();
        let z = DVector::zeros(3);
        let mut cfg = SolverConfig::new(1e-3);
        cfg.c1 = 0.0;
        assert!(solve_saddle(&p, &z, &z, &cfg).is_err());
        assert!(solve_saddle(&p, &z, &z, &SolverConfig::new(-1.0)).is_err());
    }

    #[test]
    fn fixed_budget_accounting() {
        let p = identity_quadratic();
        let x0 = DVector::from_vec(vec![1.0, -2.0]);
        let y0 = DVector::from_vec(vec![0.5, 0.5]);
        let eps = 1e-3;
        let cfg = SolverConfig::new(1.0);
        let r = solve_fixed_budget(&p, &x0, &y0, eps, &cfg).unwrap();
        let counts = classical_bounds(p.constants(), eps, 100.0, 100.0);
        assert_eq!(r.stop_reason, OuterStop::FixedBudgetDone);
        assert_eq!(r.outer_iterations, counts.k);
        assert_eq!(r.inner_iterations_total, counts.total);
        assert_eq!(r.grad_evals_total, counts.k * (counts.p + 1));
        assert!(r.final_gap.unwrap().abs() <= eps);
        assert!((epsilon_for_gamma(p.constants(), r.gamma) - eps).abs() < 1e-15);
    }

    #[test]
    fn fixed_budget_clamps_huge_epsilon() {
        let p = identity_quadratic();
        let z = DVector::from_element(2, 1.0);
        let r = solve_fixed_budget(&p, &z, &z, 1e6, &SolverConfig::new(1.0)).unwrap();
        assert_eq!(r.outer_iterations, 1);
        assert_eq!(r.inner_iterations_total, 1);
        assert!(!r.warnings.is_empty());
    }

    #[test]
    fn sample_uniform_deterministic_and_bounded() {
        let a = sample_uniform(3, 5.0, &mut ChaCha8Rng::seed_from_u64(42));
        let b = sample_uniform(3, 5.0, &mut ChaCha8Rng::seed_from_u64(42));
        assert_eq!(a, b);
        assert!(a.iter().all(|v| v.abs() <= 5.0));
        let tiny = sample_uniform(4, 1e-300, &mut ChaCha8Rng::seed_from_u64(1));
        assert!(tiny.amax() <= 1e-300);
    }

    #[test]
    fn sample_uniform_mean_near_zero() {
        // 3 sigma / sqrt(n) with sigma = 5/sqrt(3), n = 1e5 gives ~0.0274
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 100_000;
        let mut sum = DVector::zeros(3);
        for _ in 0..n {
            sum += sample_uniform(3, 5.0, &mut rng);
        }
        let mean = sum / n as f64;
        assert!(mean.amax() <= 0.03, "{mean}");
    }
}
