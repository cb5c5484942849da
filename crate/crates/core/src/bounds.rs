//! Closed-form iteration ceilings and quality guarantees.
//!
//! All logarithms are natural. Counts whose formula evaluates to a
//! non-positive number are clamped to 1 (with a warning).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::problem::PLConstants;

/// Smoothness constant of the outer function `g(x) = max_y f(x, y)`.
pub fn smoothness_l(c: &PLConstants) -> f64 {
    c.l11 + c.l12 * c.l12 / c.mu2
}

fn ceil_count(value: f64, what: &str) -> u64 {
    if value > 0.0 {
        value.ceil() as u64
    } else {
        log::warn!("{what} evaluated to {value}, clamped to 1");
        1
    }
}

/// `factor * ln(arg)`, clamped to 1 when the argument is at most 1.
fn log_count(factor: f64, arg: f64, what: &str) -> u64 {
    if arg <= 1.0 {
        log::warn!("{what}: log argument {arg} <= 1, clamped to 1");
        return 1;
    }
    ceil_count(factor * arg.ln(), what)
}

/// Inner ceiling `ceil((L22/mu2) ln(2 C2 / (L12^2 gamma^2 mu2^2)))`.
pub fn thm1_inner_bound(c: &PLConstants, gamma: f64, c2: f64) -> u64 {
    let denom = c.l12 * c.l12 * gamma * gamma * c.mu2 * c.mu2;
    log_count(c.l22 / c.mu2, 2.0 * c2 / denom, "inner bound")
}

/// Outer ceiling without `mu1`: `ceil(2 C1 L / (L12^2 gamma^2))`.
///
/// Polynomial in `1/gamma`, so it overflows 64 bits for small `gamma`.
pub fn thm2_outer_bound(c: &PLConstants, gamma: f64, c1: f64) -> u128 {
    let v = 2.0 * c1 * smoothness_l(c) / (c.l12 * c.l12 * gamma * gamma);
    if v > 0.0 {
        v.ceil() as u128
    } else {
        log::warn!("outer bound (no mu1) evaluated to {v}, clamped to 1");
        1
    }
}

/// Outer ceiling
/// `ceil(((L11 mu2 + L12^2)/(mu1 mu2)) ln(C1 mu1 / (6 L12^2 gamma^2)))`.
pub fn thm3_outer_bound(c: &PLConstants, gamma: f64, c1: f64) -> u64 {
    let factor = (c.l11 * c.mu2 + c.l12 * c.l12) / (c.mu1 * c.mu2);
    let arg = c1 * c.mu1 / (6.0 * c.l12 * c.l12 * gamma * gamma);
    log_count(factor, arg, "outer bound")
}

/// Same leading factor as [`thm3_outer_bound`] but without `mu1` inside the
/// logarithm: `ceil((L/mu1) ln(C1 / (6 L12^2 gamma^2)))`. This is the
/// variant matching the reference experiment tables.
pub fn table_variant_outer_bound(c: &PLConstants, gamma: f64, c1: f64) -> u64 {
    let factor = smoothness_l(c) / c.mu1;
    let arg = c1 / (6.0 * c.l12 * c.l12 * gamma * gamma);
    log_count(factor, arg, "outer bound (table variant)")
}

/// Iteration counts of the fixed-budget scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassicalCounts {
    pub k: u64,
    pub p: u64,
    pub total: u64,
}

/// `k = ceil((L/mu1) ln(2 C1/eps))`, `p = ceil((L22/mu2) ln(2 C2/(eps mu1 mu2)))`,
/// `total = k p`.
pub fn classical_bounds(c: &PLConstants, epsilon: f64, c1: f64, c2: f64) -> ClassicalCounts {
    let k = log_count(smoothness_l(c) / c.mu1, 2.0 * c1 / epsilon, "classical k");
    let p = log_count(
        c.l22 / c.mu2,
        2.0 * c2 / (epsilon * c.mu1 * c.mu2),
        "classical p",
    );
    ClassicalCounts {
        k,
        p,
        total: k.saturating_mul(p),
    }
}

/// The `epsilon` for which `L12^2 gamma^2 = epsilon mu1`.
pub fn epsilon_for_gamma(c: &PLConstants, gamma: f64) -> f64 {
    c.l12 * c.l12 * gamma * gamma / c.mu1
}

/// Inverse of [`epsilon_for_gamma`].
pub fn gamma_for_epsilon(c: &PLConstants, epsilon: f64) -> f64 {
    (epsilon * c.mu1).sqrt() / c.l12
}

/// `(7 L12^2 gamma^2 / mu1, sqrt(14) L12 gamma / mu1)`: the function-gap and
/// argument-distance guarantees at the outer stopping rule.
pub fn quality_guarantees(c: &PLConstants, gamma: f64) -> (f64, f64) {
    let gap = 7.0 * c.l12 * c.l12 * gamma * gamma / c.mu1;
    let arg = 14f64.sqrt() * c.l12 * gamma / c.mu1;
    (gap, arg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSet {
    pub gamma: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub thm1_inner: u64,
    pub thm2_outer: u128,
    pub thm3_outer: u64,
    pub table_variant_outer: u64,
    /// Fixed-budget accuracy matched to `gamma` via [`epsilon_for_gamma`].
    pub epsilon: f64,
    pub classical_k: u64,
    pub classical_p: u64,
    pub classical_total: u64,
    pub gap_guarantee: f64,
    pub arg_guarantee: f64,
}

impl BoundSet {
    pub fn evaluate(c: &PLConstants, gamma: f64, c1: f64, c2: f64) -> Self {
        let epsilon = epsilon_for_gamma(c, gamma);
        let classical = classical_bounds(c, epsilon, c1, c2);
        let (gap_guarantee, arg_guarantee) = quality_guarantees(c, gamma);
        BoundSet {
            gamma,
            c1,
            c2,
            l: smoothness_l(c),
            thm1_inner: thm1_inner_bound(c, gamma, c2),
            thm2_outer: thm2_outer_bound(c, gamma, c1),
            thm3_outer: thm3_outer_bound(c, gamma, c1),
            table_variant_outer: table_variant_outer_bound(c, gamma, c1),
            epsilon,
            classical_k: classical.k,
            classical_p: classical.p,
            classical_total: classical.total,
            gap_guarantee,
            arg_guarantee,
        }
    }
}

impl fmt::Display for BoundSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: [(&str, String); 14] = [
            ("gamma", format!("{:e}", self.gamma)),
            ("C1", format!("{}", self.c1)),
            ("C2", format!("{}", self.c2)),
            ("L", format!("{}", self.l)),
            ("inner ceiling p", self.thm1_inner.to_string()),
            ("outer ceiling (no mu1)", self.thm2_outer.to_string()),
            ("outer ceiling N*", self.thm3_outer.to_string()),
            ("N* (table variant)", self.table_variant_outer.to_string()),
            ("epsilon", format!("{:e}", self.epsilon)),
            ("classical k", self.classical_k.to_string()),
            ("classical p", self.classical_p.to_string()),
            ("classical k*p", self.classical_total.to_string()),
            ("gap guarantee", format!("{:e}", self.gap_guarantee)),
            ("argument guarantee", format!("{:e}", self.arg_guarantee)),
        ];
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (k, v) in rows {
            writeln!(f, "{k:<width$}  {v}")?;
        }
        Ok(())
    }
}
