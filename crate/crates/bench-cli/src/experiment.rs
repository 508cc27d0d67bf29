//! The grid runner: one fixed design per tail index ν, then `replications`
//! independent sketch draws per (ν, r, kind) cell, evaluated either in
//! closed form (exact noise-averaged criteria per draw) or by Monte Carlo
//! (one realized noise vector per draw, with cell aggregates formed as
//! ratio-of-means so the estimator stays consistent for the mean criteria).
//!
//! Reproducibility contract: every random quantity is a pure function of
//! `master_seed`. The design for tail index ν uses the substream tagged with
//! ν's bit pattern, so it depends on the ν *value* (reordering `nu_list`
//! does not change any design). Replication streams are tagged with the
//! *indices* (ν-index, r-index, kind-index, replication), so each cell is
//! independently reproducible; the tag is recorded per row as `seed_used`.
//! Rows are computed in parallel but collected in replication order, and
//! aggregation uses pairwise summation over that fixed order, so output
//! bytes do not depend on the worker count.

use anyhow::{anyhow, Context, Result};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use sketchls::criteria::{
    design_factors, evaluate_draw, structural_constants, DesignFactors, StructuralConstants,
};
use sketchls::datagen::{generate_design, leverage_profile, SyntheticSpec};
use sketchls::linalg::{norm_sq, thin_svd};
use sketchls::rng::mix_tags;
use sketchls::sketch::{apply_sketch, draw_for_kind};
use sketchls::{DenseMatrix, RealVector, RngStream, SketchDraw, SketchKind};

use crate::config::ExperimentConfig;

/// Domain-separation tags for the runner's substreams.
const DESIGN_TAG: u64 = 0xBE4C_0001;
const SKETCH_TAG: u64 = 0xBE4C_0002;
const NOISE_TAG: u64 = 0xBE4C_0003;
const PROBE_TAG: u64 = 0xBE4C_0004;

/// Random directions probed per draw for the Monte Carlo worst-case lower
/// bound (matches the library's Monte Carlo evaluator).
const WC_PROBES: usize = 4;

/// One replication of one grid cell.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub nu: f64,
    pub r: usize,
    pub sketch: String,
    pub replication: usize,
    /// Worst-case residual inflation; +∞ when the draw loses column rank.
    pub c_wc: f64,
    pub c_pe: f64,
    pub c_re: f64,
    pub rank_preserved: bool,
    pub alpha_min: f64,
    pub beta_nullspace: f64,
    pub gamma_frobenius: f64,
    /// Stream tag of this replication (reproduce with
    /// `RngStream { seed: master_seed, stream_id: seed_used }`).
    pub seed_used: u64,
}

/// Per-cell summary over the replications.
///
/// Rows with `c_wc = +∞` (rank-losing draws) are excluded from the three
/// means and counted in `rank_failure_rate`; medians are taken over all
/// rows. In Monte Carlo mode the `c_pe`/`c_re` means are ratio-of-means
/// (summed numerators over summed denominators), not means of per-row
/// ratios.
#[derive(Clone, Debug, PartialEq)]
pub struct CellAggregate {
    pub nu: f64,
    pub r: usize,
    pub sketch: String,
    pub replications: usize,
    pub rank_failure_rate: f64,
    pub c_wc_mean: f64,
    pub c_pe_mean: f64,
    pub c_re_mean: f64,
    pub c_wc_median: f64,
    pub c_pe_median: f64,
    pub c_re_median: f64,
}

/// Descending leverage profile of one generated design.
#[derive(Clone, Debug, PartialEq)]
pub struct LeverageProfile {
    pub nu: f64,
    pub sorted_scores: RealVector,
    pub cumulative: RealVector,
}

/// Everything a run produces, ready for table emission.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultTable {
    pub config: ExperimentConfig,
    pub rows: Vec<ResultRow>,
    pub aggregates: Vec<CellAggregate>,
    pub profiles: Vec<LeverageProfile>,
}

/// Numerator/denominator pairs behind a Monte Carlo replication, kept so
/// the cell aggregate can honor the ratio-of-means definition.
#[derive(Clone, Copy, Debug)]
struct McPairs {
    num_pe: f64,
    den_pe: f64,
    num_re: f64,
    den_re: f64,
}

#[derive(Clone, Debug)]
struct RepRecord {
    row: ResultRow,
    mc: Option<McPairs>,
}

/// The stream from which the design for tail index `nu` is generated.
fn design_stream(master_seed: u64, nu: f64) -> RngStream {
    RngStream::new(master_seed).substream(mix_tags(&[DESIGN_TAG, nu.to_bits()]))
}

/// The stream driving one replication of one cell.
fn replication_stream(master_seed: u64, cell_tag: u64) -> RngStream {
    RngStream { seed: master_seed, stream_id: cell_tag }
}

fn cell_tag(nu_idx: usize, r_idx: usize, kind_idx: usize, rep: usize) -> u64 {
    mix_tags(&[nu_idx as u64, r_idx as u64, kind_idx as u64, rep as u64])
}

/// Generate the per-ν designs of a config, in `nu_list` order.
fn generate_designs(
    config: &ExperimentConfig,
) -> Result<Vec<(f64, sketchls::datagen::LinearModelInstance)>> {
    config
        .nu_list
        .iter()
        .map(|&nu| {
            let mut spec = SyntheticSpec::new(
                config.n,
                config.p,
                nu,
                design_stream(config.master_seed, nu),
            );
            spec.ar_rho = config.ar_rho;
            let instance = generate_design(&spec)
                .with_context(|| format!("failed to generate the ν={nu} design"))?;
            Ok((nu, instance))
        })
        .collect()
}

/// Sorted leverage profiles for every ν in the config (Figure-1-style data).
pub fn leverage_profiles(config: &ExperimentConfig) -> Result<Vec<LeverageProfile>> {
    config.validate()?;
    generate_designs(config)?
        .into_iter()
        .map(|(nu, instance)| {
            let (sorted_scores, cumulative) =
                leverage_profile(&instance.x).map_err(|e| anyhow!(e))?;
            Ok(LeverageProfile { nu, sorted_scores, cumulative })
        })
        .collect()
}

/// Closed-form evaluation of one replication.
fn closed_form_rep(
    factors: &DesignFactors,
    kind: &SketchKind,
    r: usize,
    stream: RngStream,
) -> Result<(f64, f64, f64, bool, StructuralConstants)> {
    let draw = draw_for_kind(
        kind,
        Some(&factors.leverage),
        r,
        factors.n,
        stream.substream(SKETCH_TAG),
    )?;
    let eval = evaluate_draw(factors, &draw)?;
    Ok((
        eval.report.c_wc,
        eval.report.c_pe,
        eval.report.c_re,
        eval.report.rank_preserved,
        eval.constants,
    ))
}

/// Monte Carlo evaluation of one replication: one sketch draw, one noise
/// vector, realized criteria ratios, and the probed worst-case lower bound.
fn monte_carlo_rep(
    x: &DenseMatrix,
    x_beta: &RealVector,
    factors: &DesignFactors,
    kind: &SketchKind,
    r: usize,
    stream: RngStream,
) -> Result<(f64, f64, f64, bool, StructuralConstants, McPairs)> {
    let (n, p) = (factors.n, factors.p);
    let draw = draw_for_kind(kind, Some(&factors.leverage), r, n, stream.substream(SKETCH_TAG))?;
    let eps = standard_normal_vec(n, stream.substream(NOISE_TAG));
    let y: RealVector = x_beta.iter().zip(&eps).map(|(m, e)| m + e).collect();

    let fit = sketchls::estimators::sketched_solve(x, &y, &draw, -1.0)?;
    let rank_ok = fit.rank_used == p;

    let fitted = x.matvec(&fit.beta_hat);
    let num_pe = x_beta
        .iter()
        .zip(&fitted)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>();
    let num_re = fit.residual_norm_sq;
    let u_t_eps = factors.u.t_matvec(&eps);
    let den_pe = norm_sq(&u_t_eps);
    let den_re = norm_sq(&eps) - den_pe;

    let c_wc = if rank_ok {
        1.0 + best_probe_ratio(x, factors, &draw, stream.substream(PROBE_TAG))?
    } else {
        f64::INFINITY
    };

    let constants = structural_constants(&factors.u, &draw)?;
    let pairs = McPairs { num_pe, den_pe, num_re, den_re };
    Ok((c_wc, num_pe / den_pe, num_re / den_re, rank_ok, constants, pairs))
}

/// Best of [`WC_PROBES`] adversarial probes: random directions in the
/// residual space of X, each giving a lower bound on the worst-case ratio.
fn best_probe_ratio(
    x: &DenseMatrix,
    factors: &DesignFactors,
    draw: &SketchDraw,
    probe_stream: RngStream,
) -> Result<f64> {
    let n = factors.n;
    let sx = apply_sketch(draw, x)?;
    let sx_svd = thin_svd(&sx, -1.0)?;
    let mut best = 0.0f64;
    for probe in 0..WC_PROBES {
        let z = standard_normal_vec(n, probe_stream.substream(probe as u64));
        let u_t_z = factors.u.t_matvec(&z);
        let in_col = factors.u.matvec(&u_t_z);
        let resid: RealVector = z.iter().zip(&in_col).map(|(a, b)| a - b).collect();
        let resid_norm_sq = norm_sq(&resid);
        if resid_norm_sq == 0.0 {
            continue;
        }
        let s_resid = apply_sketch(draw, &DenseMatrix::from_vec(n, 1, resid)?)?;
        let coeffs = sx_svd.pinv_apply(s_resid.data());
        let projected = x.matvec(&coeffs);
        best = best.max(norm_sq(&projected) / resid_norm_sq);
    }
    Ok(best)
}

/// n i.i.d. standard normal samples from the stream's sampler.
fn standard_normal_vec(n: usize, stream: RngStream) -> RealVector {
    let mut rng = stream.sampler();
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// Run the full grid described by `config`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ResultTable> {
    config.validate()?;
    let designs = generate_designs(config)?;

    let mut rows = Vec::new();
    let mut aggregates = Vec::new();
    let mut profiles = Vec::new();

    for (nu_idx, (nu, instance)) in designs.iter().enumerate() {
        let factors = design_factors(&instance.x, &instance.beta_true)
            .with_context(|| format!("failed to factor the ν={nu} design"))?;
        let x_beta = instance.x.matvec(&instance.beta_true);
        let (sorted_scores, cumulative) =
            leverage_profile(&instance.x).map_err(|e| anyhow!(e))?;
        profiles.push(LeverageProfile { nu: *nu, sorted_scores, cumulative });

        for (r_idx, &r) in config.r_list.iter().enumerate() {
            for (kind_idx, kind) in config.sketch_kinds.iter().enumerate() {
                let records: Vec<RepRecord> = (0..config.replications)
                    .into_par_iter()
                    .map(|rep| {
                        let tag = cell_tag(nu_idx, r_idx, kind_idx, rep);
                        let stream = replication_stream(config.master_seed, tag);
                        let (c_wc, c_pe, c_re, rank_preserved, constants, mc) =
                            if config.mc_mode {
                                let (c_wc, c_pe, c_re, ok, constants, pairs) = monte_carlo_rep(
                                    &instance.x,
                                    &x_beta,
                                    &factors,
                                    kind,
                                    r,
                                    stream,
                                )?;
                                (c_wc, c_pe, c_re, ok, constants, Some(pairs))
                            } else {
                                let (c_wc, c_pe, c_re, ok, constants) =
                                    closed_form_rep(&factors, kind, r, stream)?;
                                (c_wc, c_pe, c_re, ok, constants, None)
                            };
                        Ok(RepRecord {
                            row: ResultRow {
                                nu: *nu,
                                r,
                                sketch: kind.label().to_string(),
                                replication: rep,
                                c_wc,
                                c_pe,
                                c_re,
                                rank_preserved,
                                alpha_min: constants.alpha_min,
                                beta_nullspace: constants.beta_nullspace,
                                gamma_frobenius: constants.gamma_frobenius,
                                seed_used: tag,
                            },
                            mc,
                        })
                    })
                    .collect::<Result<Vec<_>>>()
                    .with_context(|| {
                        format!("cell ν={nu}, r={r}, sketch={}", kind.label())
                    })?;

                aggregates.push(aggregate_cell(*nu, r, kind.label(), &records));
                rows.extend(records.into_iter().map(|record| record.row));
            }
        }
    }

    Ok(ResultTable { config: config.clone(), rows, aggregates, profiles })
}

/// Pairwise (cascade) summation: deterministic for a fixed order and far
/// more stable than sequential accumulation on long vectors.
fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        len => {
            let (lo, hi) = values.split_at(len / 2);
            pairwise_sum(lo) + pairwise_sum(hi)
        }
    }
}

fn pairwise_mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        f64::INFINITY
    } else {
        pairwise_sum(values) / values.len() as f64
    }
}

/// Median with the even-length convention (mean of the two middle order
/// statistics); +∞ entries sort last, so the median stays finite while
/// fewer than half the rows fail.
fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    }
}

fn aggregate_cell(nu: f64, r: usize, sketch: &str, records: &[RepRecord]) -> CellAggregate {
    let reps = records.len();
    let included: Vec<&RepRecord> =
        records.iter().filter(|rec| rec.row.c_wc.is_finite()).collect();
    let failures = reps - included.len();

    // Rank-losing draws are excluded from all three means (the mean criteria
    // are about the rank-preserving regime); when every draw fails, fall
    // back to all rows so the finite criteria still aggregate.
    let basis: Vec<&RepRecord> =
        if included.is_empty() { records.iter().collect() } else { included };

    let included_col =
        |f: fn(&ResultRow) -> f64| -> Vec<f64> { basis.iter().map(|rec| f(&rec.row)).collect() };
    let c_wc_mean = pairwise_mean(&included_col(|row| row.c_wc));
    let (c_pe_mean, c_re_mean) = if basis.iter().all(|rec| rec.mc.is_some()) {
        // Ratio of means: summed numerators over summed denominators.
        let mc_col = |f: fn(&McPairs) -> f64| -> Vec<f64> {
            basis.iter().map(|rec| f(rec.mc.as_ref().unwrap())).collect()
        };
        let ratio = |num: fn(&McPairs) -> f64, den: fn(&McPairs) -> f64| {
            pairwise_sum(&mc_col(num)) / pairwise_sum(&mc_col(den))
        };
        (ratio(|m| m.num_pe, |m| m.den_pe), ratio(|m| m.num_re, |m| m.den_re))
    } else {
        (pairwise_mean(&included_col(|row| row.c_pe)), pairwise_mean(&included_col(|row| row.c_re)))
    };

    let all = |f: fn(&ResultRow) -> f64| -> Vec<f64> {
        records.iter().map(|rec| f(&rec.row)).collect()
    };
    CellAggregate {
        nu,
        r,
        sketch: sketch.to_string(),
        replications: reps,
        rank_failure_rate: failures as f64 / reps as f64,
        c_wc_mean,
        c_pe_mean,
        c_re_mean,
        c_wc_median: median(&all(|row| row.c_wc)),
        c_pe_median: median(&all(|row| row.c_pe)),
        c_re_median: median(&all(|row| row.c_re)),
    }
}

/// One theoretical-bound satisfaction summary (one bound, one cell).
#[derive(Clone, Debug, PartialEq)]
pub struct BoundRateRow {
    pub nu: f64,
    pub r: usize,
    pub sketch: String,
    pub bound_name: String,
    pub draws: usize,
    pub satisfied_count: usize,
    pub satisfied_fraction: f64,
    /// Mean of the observed criterion over draws where it is finite.
    pub mean_observed: f64,
    pub max_observed: f64,
    pub rhs: f64,
}

/// For every cell whose sketch kind has probabilistic guarantees, evaluate
/// `replications` draws in closed form and report the fraction satisfying
/// each guarantee. Kinds without stated guarantees (uniform sampling,
/// identity) are skipped. A rank-losing draw counts as a violation of the
/// worst-case and residual bounds it infinitely exceeds.
pub fn bound_rates(config: &ExperimentConfig) -> Result<Vec<BoundRateRow>> {
    use sketchls::criteria::theoretical_bounds;

    config.validate()?;
    let designs = generate_designs(config)?;
    let mut out = Vec::new();

    for (nu_idx, (nu, instance)) in designs.iter().enumerate() {
        let factors = design_factors(&instance.x, &instance.beta_true)
            .with_context(|| format!("failed to factor the ν={nu} design"))?;
        let heavy_k = sketchls::criteria::heavy_hitter_k(&factors.leverage, 0.9)
            .map_err(|e| anyhow!(e))?;

        for (r_idx, &r) in config.r_list.iter().enumerate() {
            for (kind_idx, kind) in config.sketch_kinds.iter().enumerate() {
                let bounds =
                    match theoretical_bounds(kind, config.n, config.p, r, Some(heavy_k)) {
                        Ok(bounds) => bounds,
                        // No stated guarantee for this kind: skip the cell.
                        Err(sketchls::Error::InvalidInput(_)) => continue,
                        Err(e) => return Err(anyhow!(e)),
                    };

                let evals: Vec<(f64, f64, f64)> = (0..config.replications)
                    .into_par_iter()
                    .map(|rep| {
                        let tag = cell_tag(nu_idx, r_idx, kind_idx, rep);
                        let stream = replication_stream(config.master_seed, tag);
                        let (c_wc, c_pe, c_re, _, _) = closed_form_rep(&factors, kind, r, stream)?;
                        Ok((c_wc, c_pe, c_re))
                    })
                    .collect::<Result<Vec<_>>>()?;

                for bound in &bounds {
                    let observed: Vec<f64> = evals
                        .iter()
                        .map(|&(c_wc, c_pe, c_re)| {
                            if bound.name.contains("_wc") {
                                c_wc
                            } else if bound.name.contains("_pe") {
                                c_pe
                            } else {
                                c_re
                            }
                        })
                        .collect();
                    let satisfied_count = observed.iter().filter(|&&v| v <= bound.rhs).count();
                    let finite: Vec<f64> =
                        observed.iter().copied().filter(|v| v.is_finite()).collect();
                    out.push(BoundRateRow {
                        nu: *nu,
                        r,
                        sketch: kind.label().to_string(),
                        bound_name: bound.name.clone(),
                        draws: observed.len(),
                        satisfied_count,
                        satisfied_fraction: satisfied_count as f64 / observed.len() as f64,
                        mean_observed: pairwise_mean(&finite),
                        max_observed: observed
                            .iter()
                            .copied()
                            .fold(f64::NEG_INFINITY, f64::max),
                        rhs: bound.rhs,
                    });
                }
            }
        }
    }
    Ok(out)
}
