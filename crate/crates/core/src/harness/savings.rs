use std::fmt;

use serde::Serialize;

use super::ExperimentRow;
use crate::outer::InitStrategy;

/// Gradient-evaluation savings of one row: the a-priori budget
/// `N* (p + 1)` over the measured `N + sum_p`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SavingsEntry {
    pub gamma: f64,
    pub strategy: InitStrategy,
    pub seed: u64,
    /// With the table-variant `N*`. Infinite when `N + sum_p = 0`.
    pub ratio_table_variant: f64,
    /// With the `mu1`-dependent `N*`.
    pub ratio_thm3: f64,
}

impl SavingsEntry {
    /// `floor(log10(ratio_table_variant))`, `None` when infinite.
    pub fn order_of_magnitude(&self) -> Option<i32> {
        self.ratio_table_variant
            .is_finite()
            .then(|| self.ratio_table_variant.log10().floor() as i32)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SavingsReport {
    pub entries: Vec<SavingsEntry>,
}

fn ratio(nstar: u64, p_bound: u64, spent: u64) -> f64 {
    if spent == 0 {
        f64::INFINITY
    } else {
        nstar as f64 * (p_bound as f64 + 1.0) / spent as f64
    }
}

pub fn compare_savings(rows: &[ExperimentRow]) -> SavingsReport {
    let entries = rows
        .iter()
        .map(|r| {
            let spent = r.n + r.sum_p;
            SavingsEntry {
                gamma: r.gamma,
                strategy: r.strategy,
                seed: r.seed,
                ratio_table_variant: ratio(r.nstar_table_variant, r.p_bound, spent),
                ratio_thm3: ratio(r.nstar_thm3, r.p_bound, spent),
            }
        })
        .collect();
    SavingsReport { entries }
}

fn show(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.1}")
    } else {
        "inf".to_string()
    }
}

impl fmt::Display for SavingsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:>12}  {:>10}  {:>6}  {:>16}  {:>6}  {:>16}",
            "gamma", "strategy", "seed", "savings(table)", "10^k", "savings(N*)"
        )?;
        for e in &self.entries {
            writeln!(
                f,
                "{:>12.5e}  {:>10}  {:>6}  {:>16}  {:>6}  {:>16}",
                e.gamma,
                e.strategy.as_str(),
                e.seed,
                show(e.ratio_table_variant),
                e.order_of_magnitude()
                    .map_or_else(|| "inf".to_string(), |k| k.to_string()),
                show(e.ratio_thm3)
            )?;
        }
        Ok(())
    }
}
