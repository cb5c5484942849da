//! Empirical checks of a problem declaration.
//!
//! Each check samples points in a box, computes a ratio that exceeds its
//! threshold only if the declaration is violated, and reports the worst
//! sample. Sampling can falsify a declared constant but never certify it.

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inner::{default_inner_cap, solve_inner, solve_inner_min};
use crate::outer::sample_uniform;
use crate::problem::{Objective, PLConstants, SaddleProblem};

pub const GRADIENT_TOLERANCE: f64 = 1e-5;
pub const LIPSCHITZ_TOLERANCE: f64 = 1e-9;
pub const PL_TOLERANCE: f64 = 1e-6;

/// Relative size of the local partner offset in Lipschitz pairs.
const LOCAL_OFFSET: f64 = 1e-3;
const POWER_STEPS: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_name: String,
    pub passed: bool,
    pub worst_ratio: f64,
    pub threshold: f64,
    pub worst_point: String,
    pub samples: u64,
    pub box_radius: f64,
}

impl CheckReport {
    fn from_samples(
        name: &str,
        threshold: f64,
        box_radius: f64,
        ratios: Vec<(f64, String)>,
    ) -> Self {
        let samples = ratios.len() as u64;
        let (worst_ratio, worst_point) =
            ratios
                .into_iter()
                .fold((f64::NEG_INFINITY, String::new()), |best, cur| {
                    // NaN counts as a violation
                    if cur.0.is_nan() || (!best.0.is_nan() && cur.0 > best.0) {
                        cur
                    } else {
                        best
                    }
                });
        CheckReport {
            check_name: name.to_string(),
            passed: worst_ratio <= threshold,
            worst_ratio,
            threshold,
            worst_point,
            samples,
            box_radius,
        }
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed {
            format!("not falsified at {} samples", self.samples)
        } else {
            format!("FAILED at {}", self.worst_point)
        };
        write!(
            f,
            "{:<4} {:<16} worst {:.6e} (threshold {:.6e}, box radius {}) {}",
            if self.passed { "ok" } else { "FAIL" },
            self.check_name,
            self.worst_ratio,
            self.threshold,
            self.box_radius,
            verdict
        )
    }
}

fn describe(x: &DVector<f64>, y: &DVector<f64>) -> String {
    format!("x={:?} y={:?}", x.as_slice(), y.as_slice())
}

fn random_points(
    problem: &SaddleProblem,
    n: usize,
    radius: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<(DVector<f64>, DVector<f64>)> {
    (0..n)
        .map(|_| {
            let x = sample_uniform(problem.dim_x(), radius, rng);
            let y = sample_uniform(problem.dim_y(), radius, rng);
            (x, y)
        })
        .collect()
}

/// Sample points with the known saddle (if any) in the first slot.
fn anchored_points(
    problem: &SaddleProblem,
    n: usize,
    radius: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<(DVector<f64>, DVector<f64>)> {
    let mut pts = random_points(problem, n, radius, rng);
    if let (Some(s), Some(first)) = (problem.known_saddle(), pts.first_mut()) {
        *first = (s.x.clone(), s.y.clone());
    }
    pts
}

fn check_count(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "sample count must be at least 1".into(),
        ));
    }
    Ok(())
}

/// Central differences of `f` at `(x, y)`, stacked as `[d/dx; d/dy]`.
fn finite_difference(problem: &SaddleProblem, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
    let (n, m) = (x.len(), y.len());
    let scale = (x.norm_squared() + y.norm_squared()).sqrt();
    let h = 1e-6 * (1.0 + scale);
    let mut out = DVector::zeros(n + m);
    let mut xp = x.clone();
    for i in 0..n {
        let orig = xp[i];
        xp[i] = orig + h;
        let fp = problem.value(&xp, y);
        xp[i] = orig - h;
        let fm = problem.value(&xp, y);
        xp[i] = orig;
        out[i] = (fp - fm) / (2.0 * h);
    }
    let mut yp = y.clone();
    for j in 0..m {
        let orig = yp[j];
        yp[j] = orig + h;
        let fp = problem.value(x, &yp);
        yp[j] = orig - h;
        let fm = problem.value(x, &yp);
        yp[j] = orig;
        out[n + j] = (fp - fm) / (2.0 * h);
    }
    out
}

/// Analytic gradients against central differences with step
/// `1e-6 (1 + |(x, y)|)`. The error is `|analytic - fd| / max(|fd|, 1)`.
pub fn check_gradients(
    problem: &SaddleProblem,
    n_samples: usize,
    box_radius: f64,
    seed: u64,
) -> Result<CheckReport> {
    check_count(n_samples)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = anchored_points(problem, n_samples, box_radius, &mut rng);
    let ratios = pts
        .par_iter()
        .map(|(x, y)| {
            let fd = finite_difference(problem, x, y);
            let analytic = DVector::from_iterator(
                x.len() + y.len(),
                problem
                    .grad_x(x, y)
                    .iter()
                    .chain(problem.grad_y(x, y).iter())
                    .cloned(),
            );
            let err = (&analytic - &fd).norm() / fd.norm().max(1.0);
            (err, describe(x, y))
        })
        .collect();
    Ok(CheckReport::from_samples(
        "gradients",
        GRADIENT_TOLERANCE,
        box_radius,
        ratios,
    ))
}

#[derive(Clone, Copy)]
enum Block {
    X,
    Y,
}

fn block_grad(
    problem: &SaddleProblem,
    block: Block,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> DVector<f64> {
    match block {
        Block::X => problem.grad_x(x, y),
        Block::Y => problem.grad_y(x, y),
    }
}

/// `(grad_block(z + t d) - grad_block(z)) / t` with `d` living in `varied`.
fn jvp(
    problem: &SaddleProblem,
    grad_block: Block,
    varied: Block,
    (x, y): (&DVector<f64>, &DVector<f64>),
    d: &DVector<f64>,
    t: f64,
) -> DVector<f64> {
    let shifted = match varied {
        Block::X => block_grad(problem, grad_block, &(x + d * t), y),
        Block::Y => block_grad(problem, grad_block, x, &(y + d * t)),
    };
    (shifted - block_grad(problem, grad_block, x, y)) / t
}

/// Offset direction that maximizes the local gradient change, found by
/// power iteration on `J^T J` with finite-difference products. The
/// transpose of the `(grad_block, varied)` Hessian block is the
/// `(varied, grad_block)` block.
fn steepest_direction(
    problem: &SaddleProblem,
    grad_block: Block,
    varied: Block,
    base: (&DVector<f64>, &DVector<f64>),
    start: &DVector<f64>,
    t: f64,
) -> DVector<f64> {
    let mut d = start.normalize();
    for _ in 0..POWER_STEPS {
        let v = jvp(problem, grad_block, varied, base, &d, t);
        let w = jvp(problem, varied, grad_block, base, &v, t);
        let n = w.norm();
        if !(n > 0.0 && n.is_finite()) {
            break;
        }
        d = w / n;
    }
    d
}

/// The four blockwise Lipschitz inequalities. Pairs alternate between a
/// small local offset (probing the Hessian block at the base point along
/// its steepest direction) and an independent second point. The known
/// saddle, if any, is the first base.
pub fn check_lipschitz(
    problem: &SaddleProblem,
    n_pairs: usize,
    box_radius: f64,
    seed: u64,
) -> Result<Vec<CheckReport>> {
    check_count(n_pairs)?;
    let c = problem.constants();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bases = anchored_points(problem, n_pairs, box_radius, &mut rng);
    // local pairs keep a random start direction, global pairs a second point
    let partners: Vec<_> = bases
        .iter()
        .enumerate()
        .map(|(i, (x, y))| {
            let r = if i % 2 == 0 { 1.0 } else { box_radius };
            (
                sample_uniform(x.len(), r, &mut rng),
                sample_uniform(y.len(), r, &mut rng),
            )
        })
        .collect();
    let offset = box_radius * LOCAL_OFFSET;

    // (name, gradient block, varied block, declared constant)
    let cases = [
        ("lipschitz_L11", Block::X, Block::X, c.l11),
        ("lipschitz_L12", Block::X, Block::Y, c.l12),
        ("lipschitz_L21", Block::Y, Block::X, c.l21),
        ("lipschitz_L22", Block::Y, Block::Y, c.l22),
    ];
    let reports = cases
        .iter()
        .map(|&(name, grad_block, varied, constant)| {
            let ratios = bases
                .par_iter()
                .zip(partners.par_iter())
                .enumerate()
                .map(|(i, ((x1, y1), (px, py)))| {
                    let (x2, y2) = if i % 2 == 0 {
                        let start = match varied {
                            Block::X => px,
                            Block::Y => py,
                        };
                        let d = steepest_direction(
                            problem,
                            grad_block,
                            varied,
                            (x1, y1),
                            start,
                            offset,
                        ) * offset;
                        match varied {
                            Block::X => (x1 + d, y1.clone()),
                            Block::Y => (x1.clone(), y1 + d),
                        }
                    } else {
                        (px.clone(), py.clone())
                    };
                    let (xb, yb, dist) = match varied {
                        Block::X => (&x2, y1, (x1 - &x2).norm()),
                        Block::Y => (x1, &y2, (y1 - &y2).norm()),
                    };
                    if dist == 0.0 {
                        return (0.0, describe(x1, y1));
                    }
                    let diff = (block_grad(problem, grad_block, x1, y1)
                        - block_grad(problem, grad_block, xb, yb))
                    .norm();
                    (
                        diff / (constant * dist),
                        format!("{} / {}", describe(x1, y1), describe(xb, yb)),
                    )
                })
                .collect();
            CheckReport::from_samples(name, 1.0 + LIPSCHITZ_TOLERANCE, box_radius, ratios)
        })
        .collect();
    Ok(reports)
}

/// `2 mu gap / (|grad|^2 + margin)`, or 0 when there is no gap to explain.
fn pl_ratio(mu: f64, gap: f64, grad_sq: f64, margin: f64) -> f64 {
    if gap <= 0.0 {
        0.0
    } else {
        2.0 * mu * gap / (grad_sq + margin)
    }
}

/// Both PL inequalities at sampled points. The inner optimum comes from the
/// objective's closed form when available, otherwise from a first-order
/// solve at accuracy `oracle_gamma`, whose value error `L gamma^2 / 2` is
/// folded into the margin.
pub fn check_pl(
    problem: &SaddleProblem,
    n_samples: usize,
    box_radius: f64,
    seed: u64,
    oracle_gamma: f64,
) -> Result<Vec<CheckReport>> {
    check_count(n_samples)?;
    let c = *problem.constants();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = random_points(problem, n_samples, box_radius, &mut rng);
    let obj = problem.objective();

    let y_block: Vec<Result<(f64, String)>> = pts
        .par_iter()
        .map(|(x, y)| {
            let (best, margin) = match obj.argmax_y(x) {
                Some(ys) => (problem.value(x, &ys), 0.0),
                None => {
                    let cap = default_inner_cap(&c, oracle_gamma, 100.0).saturating_mul(10);
                    let r = solve_inner(problem, x, y, oracle_gamma, cap)?;
                    (r.value, c.mu2 * c.l22 * oracle_gamma * oracle_gamma)
                }
            };
            let gap = best - problem.value(x, y);
            let g = problem.grad_y(x, y).norm_squared();
            Ok((pl_ratio(c.mu2, gap, g, margin), describe(x, y)))
        })
        .collect();
    let x_block: Vec<Result<(f64, String)>> = pts
        .par_iter()
        .map(|(x, y)| {
            let (best, margin) = match obj.argmin_x(y) {
                Some(xs) => (problem.value(&xs, y), 0.0),
                None => {
                    let cap = default_inner_cap(&c, oracle_gamma, 100.0).saturating_mul(10);
                    let r = solve_inner_min(problem, y, x, oracle_gamma, cap)?;
                    (r.value, c.mu1 * c.l11 * oracle_gamma * oracle_gamma)
                }
            };
            let gap = problem.value(x, y) - best;
            let g = problem.grad_x(x, y).norm_squared();
            Ok((pl_ratio(c.mu1, gap, g, margin), describe(x, y)))
        })
        .collect();

    Ok(vec![
        CheckReport::from_samples(
            "pl_x",
            1.0 + PL_TOLERANCE,
            box_radius,
            x_block.into_iter().collect::<Result<_>>()?,
        ),
        CheckReport::from_samples(
            "pl_y",
            1.0 + PL_TOLERANCE,
            box_radius,
            y_block.into_iter().collect::<Result<_>>()?,
        ),
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationOptions {
    pub gradient_samples: usize,
    pub lipschitz_pairs: usize,
    pub pl_samples: usize,
    pub box_radius: f64,
    pub seed: u64,
    pub oracle_gamma: f64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions {
            gradient_samples: 100,
            lipschitz_pairs: 1000,
            pl_samples: 200,
            box_radius: 5.0,
            seed: 0,
            oracle_gamma: 1e-8,
        }
    }
}

/// Runs every check: gradients, the four Lipschitz inequalities, both PL
/// inequalities.
pub fn validate_problem(
    problem: &SaddleProblem,
    opts: &ValidationOptions,
) -> Result<Vec<CheckReport>> {
    let mut out = vec![check_gradients(
        problem,
        opts.gradient_samples,
        opts.box_radius,
        opts.seed,
    )?];
    out.extend(check_lipschitz(
        problem,
        opts.lipschitz_pairs,
        opts.box_radius,
        opts.seed,
    )?);
    out.extend(check_pl(
        problem,
        opts.pl_samples,
        opts.box_radius,
        opts.seed,
        opts.oracle_gamma,
    )?);
    Ok(out)
}

/// A deliberate misdeclaration, for exercising the checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    /// `grad_x` multiplied by the factor.
    ScaledGradX(f64),
    /// Declared `mu2` multiplied by the factor.
    InflatedMu2(f64),
    /// Declared `L22` multiplied by the factor.
    UnderstatedL22(f64),
}

#[derive(Debug)]
struct ScaledGradX {
    inner: Arc<dyn Objective>,
    factor: f64,
}

impl Objective for ScaledGradX {
    fn dim_x(&self) -> usize {
        self.inner.dim_x()
    }
    fn dim_y(&self) -> usize {
        self.inner.dim_y()
    }
    fn value(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        self.inner.value(x, y)
    }
    fn grad_x(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        self.inner.grad_x(x, y) * self.factor
    }
    fn grad_y(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        self.inner.grad_y(x, y)
    }
    fn argmax_y(&self, x: &DVector<f64>) -> Option<DVector<f64>> {
        self.inner.argmax_y(x)
    }
    fn argmin_x(&self, y: &DVector<f64>) -> Option<DVector<f64>> {
        self.inner.argmin_x(y)
    }
}

/// Returns a copy of `problem` carrying the fault. The declared constants
/// of the result may violate `mu <= L`; that is the point.
pub fn inject_fault(problem: &SaddleProblem, fault: Fault) -> Result<SaddleProblem> {
    let c = *problem.constants();
    let faulty = match fault {
        Fault::ScaledGradX(factor) => problem.clone().with_objective(Arc::new(ScaledGradX {
            inner: problem.objective().clone(),
            factor,
        }))?,
        Fault::InflatedMu2(factor) => problem.clone().with_constants_unchecked(PLConstants {
            mu2: c.mu2 * factor,
            ..c
        }),
        Fault::UnderstatedL22(factor) => problem.clone().with_constants_unchecked(PLConstants {
            l22: c.l22 * factor,
            ..c
        }),
    };
    Ok(faulty.with_name(format!("{} (fault {:?})", problem.name(), fault)))
}
