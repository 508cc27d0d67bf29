//! Table persistence: CSV/JSON emission with a fixed schema, plus the run
//! manifest.
//!
//! Format contract: UTF-8, "." as the decimal separator, floats at 17
//! significant digits (enough for exact f64 round-trips), infinities as the
//! literal `inf`. The `nu` column uses the shortest exact form (integers
//! print as integers) so grid files stay human-scannable.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::experiment::{BoundRateRow, CellAggregate, LeverageProfile, ResultRow, ResultTable};

pub const RESULTS_HEADER: &str =
    "nu,r,sketch,replication,c_wc,c_pe,c_re,rank_preserved,alpha_min,beta_nullspace,gamma_frobenius,seed_used";
pub const AGGREGATE_HEADER: &str =
    "nu,r,sketch,replications,rank_failure_rate,c_wc_mean,c_pe_mean,c_re_mean,c_wc_median,c_pe_median,c_re_median";
pub const BOUNDS_HEADER: &str =
    "nu,r,sketch,bound_name,draws,satisfied_count,satisfied_fraction,mean_observed,max_observed,rhs";
pub const PROFILE_HEADER: &str = "index,sorted_score,cumulative";

/// Output serialization format for [`emit_tables`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Json,
}

/// Run provenance written next to the tables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: ExperimentConfig,
    pub library_version: String,
    pub master_seed: u64,
}

/// A float at 17 significant digits; `inf` / `-inf` / `nan` literals for
/// the non-finite values.
pub fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{v:.16e}")
    }
}

/// Compact exact form for the ν column (and ν-derived file names):
/// integral values print as integers, infinity as `inf`.
pub fn fmt_nu(nu: f64) -> String {
    if nu.is_infinite() {
        "inf".to_string()
    } else if nu.fract() == 0.0 && nu.abs() < 1e15 {
        format!("{}", nu as i64)
    } else {
        format!("{nu}")
    }
}

fn results_line(row: &ResultRow) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        fmt_nu(row.nu),
        row.r,
        row.sketch,
        row.replication,
        fmt_float(row.c_wc),
        fmt_float(row.c_pe),
        fmt_float(row.c_re),
        row.rank_preserved,
        fmt_float(row.alpha_min),
        fmt_float(row.beta_nullspace),
        fmt_float(row.gamma_frobenius),
        row.seed_used,
    )
}

fn aggregate_line(agg: &CellAggregate) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        fmt_nu(agg.nu),
        agg.r,
        agg.sketch,
        agg.replications,
        fmt_float(agg.rank_failure_rate),
        fmt_float(agg.c_wc_mean),
        fmt_float(agg.c_pe_mean),
        fmt_float(agg.c_re_mean),
        fmt_float(agg.c_wc_median),
        fmt_float(agg.c_pe_median),
        fmt_float(agg.c_re_median),
    )
}

pub fn results_csv(rows: &[ResultRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(RESULTS_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&results_line(row));
        out.push('\n');
    }
    out
}

pub fn aggregate_csv(aggregates: &[CellAggregate]) -> String {
    let mut out = String::new();
    out.push_str(AGGREGATE_HEADER);
    out.push('\n');
    for agg in aggregates {
        out.push_str(&aggregate_line(agg));
        out.push('\n');
    }
    out
}

pub fn profile_csv(profile: &LeverageProfile) -> String {
    let mut out = String::new();
    out.push_str(PROFILE_HEADER);
    out.push('\n');
    for (i, (score, cum)) in
        profile.sorted_scores.iter().zip(&profile.cumulative).enumerate()
    {
        out.push_str(&format!("{},{},{}\n", i + 1, fmt_float(*score), fmt_float(*cum)));
    }
    out
}

pub fn bounds_csv(rows: &[BoundRateRow]) -> String {
    let mut out = String::new();
    out.push_str(BOUNDS_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            fmt_nu(row.nu),
            row.r,
            row.sketch,
            row.bound_name,
            row.draws,
            row.satisfied_count,
            fmt_float(row.satisfied_fraction),
            fmt_float(row.mean_observed),
            fmt_float(row.max_observed),
            fmt_float(row.rhs),
        ));
    }
    out
}

/// Parse a `results.csv` produced by [`results_csv`] back into rows.
pub fn parse_results_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header == RESULTS_HEADER => {}
        other => bail!("unexpected results.csv header: {other:?}"),
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 12 {
                bail!("line {}: expected 12 fields, got {}", i + 2, fields.len());
            }
            let float = |s: &str| -> Result<f64> {
                Ok(s.parse::<f64>().with_context(|| format!("line {}: bad float {s:?}", i + 2))?)
            };
            Ok(ResultRow {
                nu: float(fields[0])?,
                r: fields[1].parse().with_context(|| format!("line {}: bad r", i + 2))?,
                sketch: fields[2].to_string(),
                replication: fields[3]
                    .parse()
                    .with_context(|| format!("line {}: bad replication", i + 2))?,
                c_wc: float(fields[4])?,
                c_pe: float(fields[5])?,
                c_re: float(fields[6])?,
                rank_preserved: fields[7]
                    .parse()
                    .with_context(|| format!("line {}: bad rank_preserved", i + 2))?,
                alpha_min: float(fields[8])?,
                beta_nullspace: float(fields[9])?,
                gamma_frobenius: float(fields[10])?,
                seed_used: fields[11]
                    .parse()
                    .with_context(|| format!("line {}: bad seed_used", i + 2))?,
            })
        })
        .collect()
}

/// JSON value for a float under the same non-finite conventions as the CSV
/// (JSON numbers cannot express infinities, so those become the `"inf"`
/// string).
fn json_float(v: f64) -> serde_json::Value {
    if v.is_finite() {
        serde_json::json!(v)
    } else {
        serde_json::Value::String(fmt_float(v))
    }
}

fn results_json(rows: &[ResultRow]) -> serde_json::Value {
    serde_json::Value::Array(
        rows.iter()
            .map(|row| {
                serde_json::json!({
                    "nu": json_float(row.nu),
                    "r": row.r,
                    "sketch": row.sketch,
                    "replication": row.replication,
                    "c_wc": json_float(row.c_wc),
                    "c_pe": json_float(row.c_pe),
                    "c_re": json_float(row.c_re),
                    "rank_preserved": row.rank_preserved,
                    "alpha_min": json_float(row.alpha_min),
                    "beta_nullspace": json_float(row.beta_nullspace),
                    "gamma_frobenius": json_float(row.gamma_frobenius),
                    "seed_used": row.seed_used,
                })
            })
            .collect(),
    )
}

fn aggregate_json(aggregates: &[CellAggregate]) -> serde_json::Value {
    serde_json::Value::Array(
        aggregates
            .iter()
            .map(|agg| {
                serde_json::json!({
                    "nu": json_float(agg.nu),
                    "r": agg.r,
                    "sketch": agg.sketch,
                    "replications": agg.replications,
                    "rank_failure_rate": json_float(agg.rank_failure_rate),
                    "c_wc_mean": json_float(agg.c_wc_mean),
                    "c_pe_mean": json_float(agg.c_pe_mean),
                    "c_re_mean": json_float(agg.c_re_mean),
                    "c_wc_median": json_float(agg.c_wc_median),
                    "c_pe_median": json_float(agg.c_pe_median),
                    "c_re_median": json_float(agg.c_re_median),
                })
            })
            .collect(),
    )
}

fn write_file(dir: &Path, name: &str, content: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, content)
        .with_context(|| format!("failed to write {}", path.display()))?;
    Ok(path)
}

/// Write a run's tables (results, aggregate, per-ν leverage profiles) plus
/// `manifest.json` into `dir`. Returns the written paths.
pub fn emit_tables(table: &ResultTable, format: TableFormat, dir: &Path) -> Result<Vec<PathBuf>> {
    if table.rows.is_empty() {
        bail!("refusing to emit an empty result table");
    }
    std::fs::create_dir_all(dir)
        .with_context(|| format!("failed to create output directory {}", dir.display()))?;

    let mut written = Vec::new();
    match format {
        TableFormat::Csv => {
            written.push(write_file(dir, "results.csv", &results_csv(&table.rows))?);
            written.push(write_file(dir, "aggregate.csv", &aggregate_csv(&table.aggregates))?);
        }
        TableFormat::Json => {
            let rows = serde_json::to_string_pretty(&results_json(&table.rows))?;
            let aggs = serde_json::to_string_pretty(&aggregate_json(&table.aggregates))?;
            written.push(write_file(dir, "results.json", &(rows + "\n"))?);
            written.push(write_file(dir, "aggregate.json", &(aggs + "\n"))?);
        }
    }
    written.extend(emit_leverage_profiles(&table.profiles, dir)?);
    written.push(emit_manifest(&table.config, dir)?);
    Ok(written)
}

/// Write one `leverage_profile_nu<ν>.csv` per profile into `dir`.
pub fn emit_leverage_profiles(profiles: &[LeverageProfile], dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("failed to create output directory {}", dir.display()))?;
    profiles
        .iter()
        .map(|profile| {
            write_file(dir, &format!("leverage_profile_nu{}.csv", fmt_nu(profile.nu)), &profile_csv(profile))
        })
        .collect()
}

/// Write `bounds.csv` into `dir`.
pub fn emit_bound_rates(rows: &[BoundRateRow], dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("failed to create output directory {}", dir.display()))?;
    write_file(dir, "bounds.csv", &bounds_csv(rows))
}

/// Write `manifest.json` into `dir`.
pub fn emit_manifest(config: &ExperimentConfig, dir: &Path) -> Result<PathBuf> {
    let manifest = Manifest {
        config: config.clone(),
        library_version: sketchls::VERSION.to_string(),
        master_seed: config.master_seed,
    };
    let text = serde_json::to_string_pretty(&manifest)? + "\n";
    write_file(dir, "manifest.json", &text)
}
