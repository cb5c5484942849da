use std::sync::Arc;

use nalgebra::DVector;

use super::{Objective, PLConstants, Saddle, SaddleProblem};

/// Default cross constant `L12 = L21` for the sin-quadratic problems. Only
/// the upper bound `L12, L21 <= L22 = 28` is available for them; the
/// iteration bounds are evaluated at that bound.
pub const SIN_CROSS_DEFAULT: f64 = 28.0;

const L11: f64 = 8.0;
const L22: f64 = 28.0;
const MU1: f64 = 1.0 / 16.0;
const MU2: f64 = 1.0 / 14.0;

/// `f(x, y) = |x|^2 + 3 sin^2(x1) sin^2(y1) - 4 y1^2 - 10 sin^2(y1) - sum_j w_j y_j^2`
/// with `dim_x = dim_y` and the tail weights `w_j` acting on `y_2, y_3, ...`.
///
/// For every `x` the inner maximizer is `y = 0` since the `y1` part is
/// `-4 y1^2 - (10 - 3 sin^2 x1) sin^2 y1 <= 0`; symmetrically the outer
/// minimizer of `f(., y)` is `x = 0`.
#[derive(Debug, Clone)]
pub struct SinQuadratic {
    tail_weights: Vec<f64>,
}

impl SinQuadratic {
    pub fn new(tail_weights: Vec<f64>) -> Self {
        SinQuadratic { tail_weights }
    }

    fn dim(&self) -> usize {
        1 + self.tail_weights.len()
    }
}

impl Objective for SinQuadratic {
    fn dim_x(&self) -> usize {
        self.dim()
    }

    fn dim_y(&self) -> usize {
        self.dim()
    }

    fn value(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        let sx = x[0].sin();
        let sy = y[0].sin();
        let tail: f64 = self
            .tail_weights
            .iter()
            .zip(y.iter().skip(1))
            .map(|(w, yj)| w * yj * yj)
            .sum();
        x.norm_squared() + 3.0 * sx * sx * sy * sy - 4.0 * y[0] * y[0] - 10.0 * sy * sy - tail
    }

    fn grad_x(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let sy = y[0].sin();
        let mut g = x * 2.0;
        g[0] += 3.0 * (2.0 * x[0]).sin() * sy * sy;
        g
    }

    fn grad_y(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let sx = x[0].sin();
        let s2y = (2.0 * y[0]).sin();
        let mut g = DVector::zeros(self.dim());
        g[0] = 3.0 * sx * sx * s2y - 8.0 * y[0] - 10.0 * s2y;
        for (j, w) in self.tail_weights.iter().enumerate() {
            g[j + 1] = -2.0 * w * y[j + 1];
        }
        g
    }

    fn argmax_y(&self, _x: &DVector<f64>) -> Option<DVector<f64>> {
        Some(DVector::zeros(self.dim()))
    }

    fn argmin_x(&self, _y: &DVector<f64>) -> Option<DVector<f64>> {
        Some(DVector::zeros(self.dim()))
    }
}

fn sin_problem(name: &str, tail_weights: Vec<f64>) -> SaddleProblem {
    let objective = SinQuadratic::new(tail_weights);
    let n = objective.dim();
    let constants = PLConstants {
        l11: L11,
        l12: SIN_CROSS_DEFAULT,
        l21: SIN_CROSS_DEFAULT,
        l22: L22,
        mu1: MU1,
        mu2: MU2,
    };
    let saddle = Saddle {
        x: DVector::zeros(n),
        y: DVector::zeros(n),
        value: 0.0,
    };
    SaddleProblem::new(name, Arc::new(objective), constants, Some(saddle))
        .expect("built-in constants are valid")
}

/// `f(x, y) = x^2 + 3 sin^2 x sin^2 y - 4 y^2 - 10 sin^2 y` on scalars.
pub fn make_sin_quadratic_2d() -> SaddleProblem {
    sin_problem("sin_quadratic_2d", Vec::new())
}

/// The three-dimensional experiment problem
/// `|x|^2 + 3 sin^2 x1 sin^2 y1 - 4 y1^2 - 3 y2^2 - 2 y3^2 - 10 sin^2 y1`.
pub fn make_experiment_6d() -> SaddleProblem {
    sin_problem("experiment_6d", vec![3.0, 2.0])
}
