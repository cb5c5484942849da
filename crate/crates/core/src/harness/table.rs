use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ExperimentRow;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str =
    "gamma,strategy,seed,gap,N,sum_p,avg_p,Nstar_thm3,Nstar_table_variant,p_bound,grad_evals,wall_ms";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableFormat {
    #[default]
    Csv,
    Json,
    Text,
}

impl FromStr for TableFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(TableFormat::Csv),
            "json" => Ok(TableFormat::Json),
            "text" => Ok(TableFormat::Text),
            other => Err(Error::Config(format!(
                "unknown format '{other}', expected csv, json or text"
            ))),
        }
    }
}

/// Six significant digits in scientific notation, e.g. `1.17520e-3`.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.5e}")
    } else {
        v.to_string()
    }
}

fn cells(row: &ExperimentRow) -> [String; 12] {
    [
        format_float(row.gamma),
        row.strategy.to_string(),
        row.seed.to_string(),
        row.gap.map_or_else(|| "NA".to_string(), format_float),
        row.n.to_string(),
        row.sum_p.to_string(),
        format_float(row.avg_p),
        row.nstar_thm3.to_string(),
        row.nstar_table_variant.to_string(),
        row.p_bound.to_string(),
        row.grad_evals.to_string(),
        row.wall_ms.to_string(),
    ]
}

pub fn emit_table(rows: &[ExperimentRow], format: TableFormat) -> Vec<u8> {
    match format {
        TableFormat::Csv => {
            let mut out = String::new();
            out.push_str(CSV_HEADER);
            out.push('\n');
            for row in rows {
                out.push_str(&cells(row).join(","));
                out.push('\n');
            }
            out.into_bytes()
        }
        TableFormat::Json => {
            let mut out = serde_json::to_vec_pretty(rows).expect("rows serialize");
            out.push(b'\n');
            out
        }
        TableFormat::Text => {
            let header: Vec<&str> = CSV_HEADER.split(',').collect();
            let body: Vec<[String; 12]> = rows.iter().map(cells).collect();
            let widths: Vec<usize> = (0..header.len())
                .map(|i| {
                    body.iter()
                        .map(|r| r[i].len())
                        .chain(std::iter::once(header[i].len()))
                        .max()
                        .unwrap_or(0)
                })
                .collect();
            let mut out = String::new();
            let line = |fields: &mut dyn Iterator<Item = &str>, out: &mut String| {
                let joined: Vec<String> = fields
                    .zip(&widths)
                    .map(|(f, w)| format!("{f:>w$}"))
                    .collect();
                let _ = writeln!(out, "{}", joined.join("  "));
            };
            line(&mut header.iter().copied(), &mut out);
            for r in &body {
                line(&mut r.iter().map(String::as_str), &mut out);
            }
            out.into_bytes()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::outer::InitStrategy;

    pub(crate) fn sample_row() -> ExperimentRow {
        ExperimentRow {
            gamma: 1e-3,
            strategy: InitStrategy::WarmStart,
            seed: 7,
            gap: Some(1.1752e-3),
            n: 45266,
            sum_p: 80367,
            avg_p: 80367.0 / 45267.0,
            nstar_thm3: 1_263_938,
            nstar_table_variant: 1_751_204,
            p_bound: 6950,
            grad_evals: 80367 + 2 * 45267,
            wall_ms: 12,
        }
    }

    #[test]
    fn float_format_is_canonical() {
        assert_eq!(format_float(1.1752e-3), "1.17520e-3");
        assert_eq!(format_float(1e-8), "1.00000e-8");
        assert_eq!(format_float(95.83), "9.58300e1");
        assert_eq!(format_float(0.0), "0.00000e0");
    }

    #[test]
    fn csv_matches_golden() {
        let out = String::from_utf8(emit_table(&[sample_row()], TableFormat::Csv)).unwrap();
        assert_eq!(out.lines().count(), 2);
        assert_eq!(out, include_str!("../../tests/golden/one_row.csv"));
    }

    #[test]
    fn failed_gap_prints_na() {
        let mut row = sample_row();
        row.gap = None;
        let out = String::from_utf8(emit_table(&[row], TableFormat::Csv)).unwrap();
        assert!(out.lines().nth(1).unwrap().split(',').nth(3) == Some("NA"));
    }

    #[test]
    fn json_uses_csv_keys() {
        let out = emit_table(&[sample_row()], TableFormat::Json);
        let v: serde_json::Value = serde_json::from_slice(&out).unwrap();
        let obj = v[0].as_object().unwrap();
        let keys: Vec<&str> = CSV_HEADER.split(',').collect();
        assert_eq!(obj.len(), keys.len());
        for k in keys {
            assert!(obj.contains_key(k), "missing {k}");
        }
        let back: Vec<ExperimentRow> = serde_json::from_slice(&out).unwrap();
        assert_eq!(back, vec![sample_row()]);
    }

    #[test]
    fn text_is_aligned() {
        let out = String::from_utf8(emit_table(&[sample_row(), sample_row()], TableFormat::Text))
            .unwrap();
        let lens: Vec<usize> = out.lines().map(str::len).collect();
        assert_eq!(lens.len(), 3);
        assert!(lens.iter().all(|&l| l == lens[0]));
    }

    #[test]
    fn empty_rows_emit_header_only() {
        let out = String::from_utf8(emit_table(&[], TableFormat::Csv)).unwrap();
        assert_eq!(out, format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn format_parses() {
        assert_eq!("json".parse::<TableFormat>().unwrap(), TableFormat::Json);
        assert!("xml".parse::<TableFormat>().is_err());
    }
}
