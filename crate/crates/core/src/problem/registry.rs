use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{
    make_composed_quadratic, make_experiment_6d, make_rls, make_sin_quadratic_2d, SaddleProblem,
};
use crate::error::{Error, Result};

pub const BUILTIN_NAMES: [&str; 4] = [
    "sin_quadratic_2d",
    "experiment_6d",
    "rls",
    "composed_quadratic",
];

/// A built-in problem by name, plus numeric parameters. Matrices are
/// row-major nested arrays. Missing parameters fall back to each problem's
/// default instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub name: String,
    #[serde(default)]
    pub params: serde_json::Value,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SinParams {
    #[serde(rename = "L12")]
    l12: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RlsParams {
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    #[serde(rename = "M")]
    m: Vec<Vec<f64>>,
    y0: Vec<f64>,
    lambda: f64,
}

impl Default for RlsParams {
    fn default() -> Self {
        RlsParams {
            a: vec![vec![1.0, 2.0], vec![0.0, 1.0], vec![1.0, -1.0]],
            m: vec![
                vec![1.0, 0.0, 0.0],
                vec![0.0, 2.0, 0.0],
                vec![0.0, 0.0, 0.5],
            ],
            y0: vec![1.0, -1.0, 0.5],
            lambda: 2.0,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ComposedParams {
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    b: Vec<Vec<f64>>,
    strong_convexity: f64,
    strong_concavity: f64,
}

impl Default for ComposedParams {
    fn default() -> Self {
        let eye = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        ComposedParams {
            a: eye.clone(),
            b: eye,
            strong_convexity: 1.0,
            strong_concavity: 1.0,
        }
    }
}

fn matrix(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Config(format!(
            "problem.params.{what}: rows have unequal lengths"
        )));
    }
    Ok(DMatrix::from_row_iterator(
        rows.len(),
        ncols,
        rows.iter().flatten().cloned(),
    ))
}

fn params<T: Default + for<'de> Deserialize<'de>>(value: &serde_json::Value) -> Result<T> {
    if value.is_null() {
        return Ok(T::default());
    }
    serde_json::from_value(value.clone()).map_err(|e| Error::Config(format!("problem.params: {e}")))
}

impl ProblemConfig {
    pub fn named(name: impl Into<String>) -> Self {
        ProblemConfig {
            name: name.into(),
            params: serde_json::Value::Null,
        }
    }

    pub fn build(&self) -> Result<SaddleProblem> {
        match self.name.as_str() {
            "sin_quadratic_2d" | "experiment_6d" => {
                let p: SinParams = params(&self.params)?;
                let problem = if self.name == "experiment_6d" {
                    make_experiment_6d()
                } else {
                    make_sin_quadratic_2d()
                };
                match p.l12 {
                    Some(l12) => problem.with_cross_constant(l12),
                    None => Ok(problem),
                }
            }
            "rls" => {
                let p: RlsParams = params(&self.params)?;
                make_rls(
                    &matrix(&p.a, "A")?,
                    &matrix(&p.m, "M")?,
                    &DVector::from_vec(p.y0),
                    p.lambda,
                )
            }
            "composed_quadratic" => {
                let p: ComposedParams = params(&self.params)?;
                make_composed_quadratic(
                    &matrix(&p.a, "A")?,
                    &matrix(&p.b, "B")?,
                    p.strong_convexity,
                    p.strong_concavity,
                )
            }
            other => Err(Error::Config(format!(
                "unknown problem '{other}', expected one of {}",
                BUILTIN_NAMES.join(", ")
            ))),
        }
    }
}
