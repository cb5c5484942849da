//! Experiment driver: runs the outer/inner scheme over a grid of
//! `(gamma, strategy, seed)` and collects one row per cell, next to the
//! corresponding a-priori iteration ceilings.

mod savings;
mod table;

use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{table_variant_outer_bound, thm1_inner_bound, thm3_outer_bound};
use crate::error::{Error, Result};
use crate::outer::{
    sample_uniform, solve_saddle, InitStrategy, OuterCapPolicy, OuterStop, SaddleReport,
    SolverConfig,
};
use crate::problem::{ProblemConfig, SaddleProblem};

pub use savings::{compare_savings, SavingsEntry, SavingsReport};
pub use table::{emit_table, format_float, TableFormat, CSV_HEADER};

fn default_c() -> f64 {
    100.0
}

fn default_radius() -> f64 {
    5.0
}

fn default_multiplier() -> u64 {
    1
}

fn default_true() -> bool {
    true
}

fn default_cap() -> OuterCapPolicy {
    OuterCapPolicy::Theorem3
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: TableFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemConfig,
    pub gammas: Vec<f64>,
    pub strategies: Vec<InitStrategy>,
    pub seeds: Vec<u64>,
    #[serde(rename = "C1", default = "default_c")]
    pub c1: f64,
    #[serde(rename = "C2", default = "default_c")]
    pub c2: f64,
    #[serde(default = "default_radius")]
    pub x0_box_radius: f64,
    /// Box for random inner initializations (and the first `y0`).
    #[serde(default = "default_radius")]
    pub y0_box_radius: f64,
    #[serde(default = "default_cap")]
    pub outer_cap: OuterCapPolicy,
    #[serde(default = "default_multiplier")]
    pub inner_cap_multiplier: u64,
    /// When false, `wall_ms` is written as 0 so output is reproducible
    /// byte for byte.
    #[serde(default = "default_true")]
    pub record_wall_time: bool,
    #[serde(default)]
    pub output: Option<OutputConfig>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        for (i, g) in self.gammas.iter().enumerate() {
            if !(*g > 0.0 && g.is_finite()) {
                return Err(Error::Config(format!(
                    "gammas[{i}] must be positive, got {g}"
                )));
            }
        }
        for (name, v) in [
            ("C1", self.c1),
            ("C2", self.c2),
            ("x0_box_radius", self.x0_box_radius),
            ("y0_box_radius", self.y0_box_radius),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.inner_cap_multiplier == 0 {
            return Err(Error::Config(
                "inner_cap_multiplier must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Grid cells in output order: gammas outermost, then strategies, then
    /// seeds.
    pub fn grid(&self) -> Vec<(f64, InitStrategy, u64)> {
        let mut cells = Vec::new();
        for &g in &self.gammas {
            for &s in &self.strategies {
                for &seed in &self.seeds {
                    cells.push((g, s, seed));
                }
            }
        }
        cells
    }
}

/// One output row; field names match the CSV header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub gamma: f64,
    pub strategy: InitStrategy,
    pub seed: u64,
    /// `f(x_hat, y_hat) - f*`; `None` for failed rows.
    pub gap: Option<f64>,
    #[serde(rename = "N")]
    pub n: u64,
    pub sum_p: u64,
    pub avg_p: f64,
    #[serde(rename = "Nstar_thm3")]
    pub nstar_thm3: u64,
    #[serde(rename = "Nstar_table_variant")]
    pub nstar_table_variant: u64,
    pub p_bound: u64,
    pub grad_evals: u64,
    pub wall_ms: u64,
}

/// A row plus solver outcome details that are not part of the table.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub row: ExperimentRow,
    pub stop_reason: Option<OuterStop>,
    pub final_value: Option<f64>,
    pub x_hat: Option<DVector<f64>>,
    pub inner_cap_hits: u64,
    pub warnings: Vec<String>,
    pub error: Option<String>,
}

impl ExperimentRecord {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

// splitmix64 finalizer
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for the starting point. Independent of the strategy so both
/// strategies start from the same `(x0, y0)` at a given seed and gamma.
fn start_seed(seed: u64, gamma: f64) -> u64 {
    mix(mix(seed) ^ gamma.to_bits())
}

fn solver_seed(seed: u64, gamma: f64, strategy: InitStrategy) -> u64 {
    let tag = match strategy {
        InitStrategy::RandomY0 => 1,
        InitStrategy::WarmStart => 2,
    };
    mix(start_seed(seed, gamma) ^ tag)
}

/// Seeded starting point for a grid cell.
pub fn starting_point(
    problem: &SaddleProblem,
    cfg: &ExperimentConfig,
    gamma: f64,
    seed: u64,
) -> (DVector<f64>, DVector<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(start_seed(seed, gamma));
    let x0 = sample_uniform(problem.dim_x(), cfg.x0_box_radius, &mut rng);
    let y0 = sample_uniform(problem.dim_y(), cfg.y0_box_radius, &mut rng);
    (x0, y0)
}

fn run_cell(
    problem: &SaddleProblem,
    cfg: &ExperimentConfig,
    gamma: f64,
    strategy: InitStrategy,
    seed: u64,
) -> ExperimentRecord {
    let c = problem.constants();
    let (x0, y0) = starting_point(problem, cfg, gamma, seed);
    let solver = SolverConfig {
        gamma,
        c1: cfg.c1,
        c2: cfg.c2,
        init_strategy: strategy,
        init_box_radius: cfg.y0_box_radius,
        seed: solver_seed(seed, gamma, strategy),
        outer_cap_policy: cfg.outer_cap,
        record_history: false,
        inner_cap_multiplier: cfg.inner_cap_multiplier,
    };
    let started = Instant::now();
    let outcome = solve_saddle(problem, &x0, &y0, &solver);
    let elapsed = started.elapsed().as_millis() as u64;

    let mut row = ExperimentRow {
        gamma,
        strategy,
        seed,
        gap: None,
        n: 0,
        sum_p: 0,
        avg_p: 0.0,
        nstar_thm3: thm3_outer_bound(c, gamma, cfg.c1),
        nstar_table_variant: table_variant_outer_bound(c, gamma, cfg.c1),
        p_bound: thm1_inner_bound(c, gamma, cfg.c2),
        grad_evals: 0,
        wall_ms: if cfg.record_wall_time { elapsed } else { 0 },
    };
    match outcome {
        Ok(SaddleReport {
            final_gap,
            final_value,
            x_hat,
            outer_iterations,
            inner_iterations_total,
            inner_iterations_mean,
            grad_evals_total,
            stop_reason,
            inner_cap_hits,
            warnings,
            ..
        }) => {
            row.gap = final_gap;
            row.n = outer_iterations;
            row.sum_p = inner_iterations_total;
            row.avg_p = inner_iterations_mean;
            row.grad_evals = grad_evals_total;
            for w in &warnings {
                log::warn!("gamma={gamma:e} {strategy} seed={seed}: {w}");
            }
            ExperimentRecord {
                row,
                stop_reason: Some(stop_reason),
                final_value: Some(final_value),
                x_hat: Some(x_hat),
                inner_cap_hits,
                warnings,
                error: None,
            }
        }
        Err(e) => {
            log::error!("gamma={gamma:e} {strategy} seed={seed}: solver aborted: {e}");
            ExperimentRecord {
                row,
                stop_reason: None,
                final_value: None,
                x_hat: None,
                inner_cap_hits: 0,
                warnings: Vec::new(),
                error: Some(e.to_string()),
            }
        }
    }
}

/// Runs every grid cell (concurrently; results are in grid order). Only
/// configuration problems are errors; a solver abort marks its row failed.
///
/// Without a known saddle the gap column is relative to the lowest final
/// value seen across the run.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    cfg.validate()?;
    let problem = cfg.problem.build()?;
    let mut records: Vec<ExperimentRecord> = cfg
        .grid()
        .into_par_iter()
        .map(|(g, s, seed)| run_cell(&problem, cfg, g, s, seed))
        .collect();
    if problem.known_saddle().is_none() {
        let best = records
            .iter()
            .filter_map(|r| r.final_value)
            .fold(f64::INFINITY, f64::min);
        for r in &mut records {
            r.row.gap = r.final_value.map(|v| v - best);
        }
    }
    Ok(records)
}

/// Loads a config file and runs it.
pub fn run_config_file(path: &Path) -> Result<(ExperimentConfig, Vec<ExperimentRecord>)> {
    let cfg = ExperimentConfig::load(path)?;
    let records = run_experiment(&cfg)?;
    Ok((cfg, records))
}
