//! Gradient ascent on `y -> f(x, y)` with constant step `1/L22`, stopped as
//! soon as `|grad_y f(x, y)| <= mu2 * gamma`. Under the PL condition in `y`
//! that criterion guarantees `|y - y*(x)| <= gamma`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::bounds::thm1_inner_bound;
use crate::error::{Error, Result, Stage};
use crate::problem::{PLConstants, SaddleProblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InnerStop {
    CriterionMet,
    CapReached,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerResult {
    pub y_hat: DVector<f64>,
    /// Gradient steps taken. The criterion is evaluated `iterations + 1` times.
    pub iterations: u64,
    pub final_grad_norm: f64,
    pub stop_reason: InnerStop,
    /// `f(x, y_hat)`.
    pub value: f64,
}

impl InnerResult {
    /// Number of `grad_y` evaluations spent.
    pub fn grad_evals(&self) -> u64 {
        self.iterations + 1
    }
}

pub(crate) struct LoopOutcome {
    pub point: DVector<f64>,
    pub iterations: u64,
    pub grad_norm: f64,
    pub met: bool,
}

/// `z <- z + step * grad(z)` until `|grad(z)| <= threshold` or `cap` steps.
/// The criterion is checked before every step.
pub(crate) fn gradient_loop<G>(
    start: &DVector<f64>,
    step: f64,
    threshold: f64,
    cap: u64,
    stage: Stage,
    mut grad: G,
) -> Result<LoopOutcome>
where
    G: FnMut(&DVector<f64>) -> DVector<f64>,
{
    let mut z = start.clone();
    let mut m = 0u64;
    loop {
        let g = grad(&z);
        let norm = g.norm();
        if !norm.is_finite() {
            return Err(Error::NonFinite {
                stage,
                iteration: m,
                what: "gradient",
            });
        }
        if norm <= threshold || m == cap {
            return Ok(LoopOutcome {
                point: z,
                iterations: m,
                grad_norm: norm,
                met: norm <= threshold,
            });
        }
        z.axpy(step, &g, 1.0);
        m += 1;
    }
}

fn check_args(gamma: f64, cap: u64) -> Result<()> {
    if gamma <= 0.0 || !gamma.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "gamma must be positive, got {gamma}"
        )));
    }
    if cap == 0 {
        return Err(Error::InvalidArgument(
            "iteration cap must be at least 1".into(),
        ));
    }
    Ok(())
}

/// Approximately maximizes `f(x, .)` starting from `y0`.
pub fn solve_inner(
    problem: &SaddleProblem,
    x: &DVector<f64>,
    y0: &DVector<f64>,
    gamma: f64,
    cap: u64,
) -> Result<InnerResult> {
    check_args(gamma, cap)?;
    problem.check_dims(x, y0)?;
    let c = problem.constants();
    let out = gradient_loop(y0, 1.0 / c.l22, c.mu2 * gamma, cap, Stage::Inner, |y| {
        problem.grad_y(x, y)
    })?;
    let value = problem.value(x, &out.point);
    if !value.is_finite() {
        return Err(Error::NonFinite {
            stage: Stage::Inner,
            iteration: out.iterations,
            what: "objective",
        });
    }
    Ok(InnerResult {
        y_hat: out.point,
        iterations: out.iterations,
        final_grad_norm: out.grad_norm,
        stop_reason: if out.met {
            InnerStop::CriterionMet
        } else {
            InnerStop::CapReached
        },
        value,
    })
}

/// Mirror of [`solve_inner`] for the `x` block: gradient descent on
/// `f(., y)` with step `1/L11`, stopped at `|grad_x f| <= mu1 * gamma`.
/// Used as a minimization oracle by the PL checks.
pub(crate) fn solve_inner_min(
    problem: &SaddleProblem,
    y: &DVector<f64>,
    x0: &DVector<f64>,
    gamma: f64,
    cap: u64,
) -> Result<InnerResult> {
    check_args(gamma, cap)?;
    problem.check_dims(x0, y)?;
    let c = problem.constants();
    let out = gradient_loop(x0, -1.0 / c.l11, c.mu1 * gamma, cap, Stage::Inner, |x| {
        problem.grad_x(x, y)
    })?;
    let value = problem.value(&out.point, y);
    Ok(InnerResult {
        y_hat: out.point,
        iterations: out.iterations,
        final_grad_norm: out.grad_norm,
        stop_reason: if out.met {
            InnerStop::CriterionMet
        } else {
            InnerStop::CapReached
        },
        value,
    })
}

/// Default iteration cap: the inner ceiling evaluated at `C2`.
pub fn default_inner_cap(constants: &PLConstants, gamma: f64, c2: f64) -> u64 {
    thm1_inner_bound(constants, gamma, c2)
}
