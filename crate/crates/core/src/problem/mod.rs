//! Saddle problems `min_x max_y f(x, y)` together with their smoothness and
//! Polyak–Łojasiewicz constants.
//!
//! A [`SaddleProblem`] bundles an [`Objective`] (value and the two gradient
//! blocks in closed form) with the [`PLConstants`] the solvers rely on, and
//! an optional analytic saddle point. Built-in problems:
//!
//! * [`make_sin_quadratic_2d`], a nonconvex-nonconcave scalar problem,
//! * [`make_experiment_6d`], its three-dimensional extension used by the
//!   experiment harness,
//! * [`make_rls`], robust least squares,
//! * [`make_composed_quadratic`], a strongly-convex-strongly-concave
//!   quadratic composed with linear maps.

mod quadratic;
mod registry;
mod sin;

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use quadratic::{
    make_composed_quadratic, make_rls, quadratic_constants, quadratic_constants_with_floor,
    QuadraticSaddle, DEFAULT_CROSS_FLOOR,
};
pub use registry::{ProblemConfig, BUILTIN_NAMES};
pub use sin::{make_experiment_6d, make_sin_quadratic_2d, SinQuadratic, SIN_CROSS_DEFAULT};

/// Closed-form evaluation of a saddle objective.
///
/// Implementations must be pure: the same inputs always give the same
/// outputs, and nothing is mutated.
pub trait Objective: Send + Sync + fmt::Debug {
    fn dim_x(&self) -> usize;
    fn dim_y(&self) -> usize;
    fn value(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64;
    fn grad_x(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64>;
    fn grad_y(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64>;

    /// A maximizer of `f(x, ·)` when it is known in closed form.
    fn argmax_y(&self, _x: &DVector<f64>) -> Option<DVector<f64>> {
        None
    }

    /// A minimizer of `f(·, y)` when it is known in closed form.
    fn argmin_x(&self, _y: &DVector<f64>) -> Option<DVector<f64>> {
        None
    }
}

/// Blockwise gradient Lipschitz constants and the two PL moduli.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PLConstants {
    pub l11: f64,
    pub l12: f64,
    pub l21: f64,
    pub l22: f64,
    pub mu1: f64,
    pub mu2: f64,
}

impl PLConstants {
    pub fn new(l11: f64, l12: f64, l21: f64, l22: f64, mu1: f64, mu2: f64) -> Result<Self> {
        let c = PLConstants {
            l11,
            l12,
            l21,
            l22,
            mu1,
            mu2,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("L11", self.l11),
            ("L12", self.l12),
            ("L21", self.l21),
            ("L22", self.l22),
            ("mu1", self.mu1),
            ("mu2", self.mu2),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConstants(format!(
                    "{name} must be finite and positive, got {v}"
                )));
            }
        }
        if self.mu1 > self.l11 {
            return Err(Error::InvalidConstants(format!(
                "mu1 = {} exceeds L11 = {}",
                self.mu1, self.l11
            )));
        }
        if self.mu2 > self.l22 {
            return Err(Error::InvalidConstants(format!(
                "mu2 = {} exceeds L22 = {}",
                self.mu2, self.l22
            )));
        }
        if !self.smoothness().is_finite() {
            return Err(Error::InvalidConstants(
                "derived L = L11 + L12^2/mu2 is not finite".into(),
            ));
        }
        Ok(())
    }

    /// Smoothness of `g(x) = max_y f(x, y)`: `L11 + L12^2 / mu2`.
    pub fn smoothness(&self) -> f64 {
        self.l11 + self.l12 * self.l12 / self.mu2
    }
}

/// A saddle point `(x*, y*)` with its value `f* = f(x*, y*)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Saddle {
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    pub value: f64,
}

/// An objective with its declared constants. Cheap to clone; the objective
/// is shared.
#[derive(Debug, Clone)]
pub struct SaddleProblem {
    name: String,
    objective: Arc<dyn Objective>,
    constants: PLConstants,
    known_saddle: Option<Saddle>,
}

impl SaddleProblem {
    pub fn new(
        name: impl Into<String>,
        objective: Arc<dyn Objective>,
        constants: PLConstants,
        known_saddle: Option<Saddle>,
    ) -> Result<Self> {
        constants.validate()?;
        if let Some(s) = &known_saddle {
            if s.x.len() != objective.dim_x() || s.y.len() != objective.dim_y() {
                return Err(Error::Shape(format!(
                    "known saddle has dims ({}, {}), objective has ({}, {})",
                    s.x.len(),
                    s.y.len(),
                    objective.dim_x(),
                    objective.dim_y()
                )));
            }
        }
        Ok(SaddleProblem {
            name: name.into(),
            objective,
            constants,
            known_saddle,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn objective(&self) -> &Arc<dyn Objective> {
        &self.objective
    }

    pub fn constants(&self) -> &PLConstants {
        &self.constants
    }

    pub fn known_saddle(&self) -> Option<&Saddle> {
        self.known_saddle.as_ref()
    }

    pub fn dim_x(&self) -> usize {
        self.objective.dim_x()
    }

    pub fn dim_y(&self) -> usize {
        self.objective.dim_y()
    }

    pub fn value(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        self.objective.value(x, y)
    }

    pub fn grad_x(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        self.objective.grad_x(x, y)
    }

    pub fn grad_y(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        self.objective.grad_y(x, y)
    }

    /// Replaces the declared constants, keeping everything else.
    pub fn with_constants(mut self, constants: PLConstants) -> Result<Self> {
        constants.validate()?;
        self.constants = constants;
        Ok(self)
    }

    /// Fault injection only: skips validation.
    pub(crate) fn with_constants_unchecked(mut self, constants: PLConstants) -> Self {
        self.constants = constants;
        self
    }

    /// Overrides the cross constants `L12 = L21`.
    pub fn with_cross_constant(self, l12: f64) -> Result<Self> {
        let c = PLConstants {
            l12,
            l21: l12,
            ..self.constants
        };
        self.with_constants(c)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Swaps in a different objective of the same dimensions. Used by
    /// fault injection in [`crate::validation`].
    pub fn with_objective(mut self, objective: Arc<dyn Objective>) -> Result<Self> {
        if objective.dim_x() != self.dim_x() || objective.dim_y() != self.dim_y() {
            return Err(Error::Shape(
                "replacement objective changes dimensions".into(),
            ));
        }
        self.objective = objective;
        Ok(self)
    }

    pub(crate) fn check_dims(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<()> {
        if x.len() != self.dim_x() || y.len() != self.dim_y() {
            return Err(Error::Shape(format!(
                "point has dims ({}, {}), problem '{}' expects ({}, {})",
                x.len(),
                y.len(),
                self.name,
                self.dim_x(),
                self.dim_y()
            )));
        }
        Ok(())
    }
}
