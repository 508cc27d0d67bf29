//! Synthetic regression instances with controllable leverage concentration.
//!
//! Design rows are drawn from a multivariate t-like family: row i is
//! Z_i/√(W_i/ν) with Z_i ~ N(0, Σ), W_i ~ χ²_ν independent, and Σ the AR(1)
//! correlation matrix Σ_ab = ρ^|a−b|. Small ν produces occasional very long
//! rows — high-leverage points — while ν = ∞ recovers the Gaussian design
//! whose leverage scores are nearly uniform. Responses follow the standard
//! model Y = Xβ + ε with ε ~ N(0, I).
//!
//! Generation is deterministic per [`RngStream`]: the design depends only on
//! the spec's seed (not on the β choice), so experiments can vary β while
//! holding X fixed.

use crate::error::{invalid, numeric, Result};
use crate::linalg::{leverage_scores, norm_sq, thin_svd, DenseMatrix, RealVector};
use crate::rng::RngStream;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// How to pick the true coefficient vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaChoice {
    /// All-ones vector.
    Ones,
    /// Random direction of unit Euclidean norm.
    UnitRandom,
    /// Caller-supplied coefficients (length must equal p).
    Supplied(RealVector),
}

/// Parameters of a synthetic instance.
///
/// `nu` is the χ² degrees of freedom of the row-scaling variable; pass
/// `f64::INFINITY` for a Gaussian design. `ar_rho` is the AR(1) column
/// correlation.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSpec {
    pub n: usize,
    pub p: usize,
    pub nu: f64,
    pub ar_rho: f64,
    pub beta_choice: BetaChoice,
    pub seed: RngStream,
}

impl SyntheticSpec {
    pub fn new(n: usize, p: usize, nu: f64, seed: RngStream) -> Self {
        SyntheticSpec { n, p, nu, ar_rho: 0.5, beta_choice: BetaChoice::Ones, seed }
    }

    fn validate(&self) -> Result<()> {
        if self.p == 0 || self.n <= self.p {
            return Err(invalid(format!("need n > p ≥ 1, got n = {}, p = {}", self.n, self.p)));
        }
        if !(self.nu > 0.0) {
            return Err(invalid(format!("degrees of freedom must be positive, got {}", self.nu)));
        }
        if !self.ar_rho.is_finite() || self.ar_rho.abs() >= 1.0 {
            return Err(invalid(format!("ar_rho must lie in (−1, 1), got {}", self.ar_rho)));
        }
        if let BetaChoice::Supplied(beta) = &self.beta_choice {
            if beta.len() != self.p {
                return Err(invalid(format!(
                    "supplied beta has length {} but p = {}",
                    beta.len(),
                    self.p
                )));
            }
        }
        Ok(())
    }
}

/// A realized design and true coefficient vector.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearModelInstance {
    pub x: DenseMatrix,
    pub beta_true: RealVector,
}

/// Substream tag for the β draw, kept apart from the design attempts so the
/// design is invariant to the β choice.
const BETA_STREAM_TAG: u64 = 0xBE7A_0001;

const MAX_DESIGN_ATTEMPTS: u64 = 8;

/// Closed-form lower Cholesky factor of the AR(1) correlation matrix:
/// L[a][0] = ρ^a and L[a][b] = ρ^(a−b)·√(1−ρ²) for 1 ≤ b ≤ a.
fn ar1_cholesky_rows(p: usize, rho: f64) -> Vec<RealVector> {
    let tail = (1.0 - rho * rho).sqrt();
    (0..p)
        .map(|a| {
            let mut row = vec![0.0; a + 1];
            row[0] = rho.powi(a as i32);
            for b in 1..=a {
                row[b] = rho.powi((a - b) as i32) * tail;
            }
            row
        })
        .collect()
}

fn draw_design_once(spec: &SyntheticSpec, rng: RngStream) -> Result<DenseMatrix> {
    let (n, p) = (spec.n, spec.p);
    let chol = ar1_cholesky_rows(p, spec.ar_rho);
    let chi2 = if spec.nu.is_finite() {
        Some(ChiSquared::new(spec.nu).map_err(|e| invalid(format!("bad chi-square dof: {e}")))?)
    } else {
        None
    };
    let mut sampler = rng.sampler();
    let mut data = Vec::with_capacity(n * p);
    let mut g = vec![0.0; p];
    for _ in 0..n {
        for gj in g.iter_mut() {
            *gj = StandardNormal.sample(&mut sampler);
        }
        let scale = match &chi2 {
            Some(dist) => {
                let w: f64 = dist.sample(&mut sampler);
                (spec.nu / w).sqrt()
            }
            None => 1.0,
        };
        for row in &chol {
            let z: f64 = row.iter().zip(&g).map(|(l, gj)| l * gj).sum();
            data.push(scale * z);
        }
    }
    if !data.iter().all(|v| v.is_finite()) {
        return Err(numeric("design draw produced a non-finite entry"));
    }
    Ok(DenseMatrix::from_vec_unchecked(n, p, data))
}

fn draw_beta(spec: &SyntheticSpec) -> RealVector {
    match &spec.beta_choice {
        BetaChoice::Ones => vec![1.0; spec.p],
        BetaChoice::Supplied(beta) => beta.clone(),
        BetaChoice::UnitRandom => {
            let mut sampler = spec.seed.substream(BETA_STREAM_TAG).sampler();
            let mut beta: RealVector =
                (0..spec.p).map(|_| StandardNormal.sample(&mut sampler)).collect();
            let norm = norm_sq(&beta).sqrt();
            if norm > 0.0 {
                for b in beta.iter_mut() {
                    *b /= norm;
                }
            } else {
                beta[0] = 1.0;
            }
            beta
        }
    }
}

/// Generate a full-column-rank design and its true β.
///
/// Draws that come out numerically rank-deficient (possible only in
/// pathological corners) are retried on sibling substreams, at most
/// [`MAX_DESIGN_ATTEMPTS`] times, keeping the result a pure function of the
/// spec.
pub fn generate_design(spec: &SyntheticSpec) -> Result<LinearModelInstance> {
    spec.validate()?;
    let mut last_err = None;
    for attempt in 0..MAX_DESIGN_ATTEMPTS {
        match draw_design_once(spec, spec.seed.substream(attempt)) {
            Ok(x) => {
                let svd = thin_svd(&x, -1.0)?;
                if svd.rank == spec.p {
                    return Ok(LinearModelInstance { x, beta_true: draw_beta(spec) });
                }
                last_err = Some(numeric(format!(
                    "design attempt {attempt} had rank {} < {}",
                    svd.rank, spec.p
                )));
            }
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap_or_else(|| numeric("design generation failed")))
}

/// Draw a response Y = Xβ + ε with standard normal noise, on the given
/// stream.
pub fn generate_response(instance: &LinearModelInstance, rng: RngStream) -> RealVector {
    let mut sampler = rng.sampler();
    let mut y = instance.x.matvec(&instance.beta_true);
    for v in y.iter_mut() {
        let eps: f64 = StandardNormal.sample(&mut sampler);
        *v += eps;
    }
    y
}

/// Leverage scores sorted descending, paired with the normalized cumulative
/// mass (running sum divided by the total, ending at 1).
pub fn leverage_profile(x: &DenseMatrix) -> Result<(RealVector, RealVector)> {
    let mut scores = leverage_scores(x)?;
    scores.sort_by(|a, b| b.total_cmp(a));
    let total: f64 = scores.iter().sum();
    let mut running = 0.0;
    let cumulative = scores
        .iter()
        .map(|s| {
            running += s;
            running / total
        })
        .collect();
    Ok((scores, cumulative))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: usize, p: usize, nu: f64, tag: u64) -> SyntheticSpec {
        SyntheticSpec::new(n, p, nu, RngStream::new(0xDA7A).substream(tag))
    }

    #[test]
    fn ar1_cholesky_reconstructs_covariance() {
        let p = 6;
        let rho = 0.5;
        let rows = ar1_cholesky_rows(p, rho);
        for a in 0..p {
            for b in 0..p {
                let len = a.min(b) + 1;
                let dot: f64 = (0..len)
                    .map(|k| {
                        let la = if k < rows[a].len() { rows[a][k] } else { 0.0 };
                        let lb = if k < rows[b].len() { rows[b][k] } else { 0.0 };
                        la * lb
                    })
                    .sum();
                let expect = rho.powi((a as i32 - b as i32).abs());
                assert!((dot - expect).abs() < 1e-12, "Σ[{a}][{b}] = {dot}, expected {expect}");
            }
        }
    }

    #[test]
    fn gaussian_design_moments() {
        // ν = ∞: column variances ≈ 1 and lag-1 correlation ≈ ρ.
        let s = spec(20_000, 3, f64::INFINITY, 1);
        let inst = generate_design(&s).unwrap();
        let n = s.n as f64;
        for j in 0..3 {
            let var: f64 = (0..s.n).map(|i| inst.x.get(i, j).powi(2)).sum::<f64>() / n;
            assert!((var - 1.0).abs() < 0.05, "var[{j}] = {var}");
        }
        let cov01: f64 = (0..s.n).map(|i| inst.x.get(i, 0) * inst.x.get(i, 1)).sum::<f64>() / n;
        assert!((cov01 - 0.5).abs() < 0.05, "lag-1 cov = {cov01}");
    }

    #[test]
    fn heavy_tail_scaling_inflates_variance() {
        // E[ν/W] = ν/(ν−2), so ν = 10 inflates column variances to 1.25.
        let s = spec(20_000, 2, 10.0, 2);
        let inst = generate_design(&s).unwrap();
        let n = s.n as f64;
        let var: f64 = (0..s.n).map(|i| inst.x.get(i, 0).powi(2)).sum::<f64>() / n;
        assert!((var - 1.25).abs() < 0.08, "var = {var}");
    }

    #[test]
    fn small_dof_concentrates_leverage() {
        let heavy = generate_design(&spec(512, 10, 1.0, 3)).unwrap();
        let light = generate_design(&spec(512, 10, f64::INFINITY, 3)).unwrap();
        let (heavy_sorted, _) = leverage_profile(&heavy.x).unwrap();
        let (light_sorted, _) = leverage_profile(&light.x).unwrap();
        // Top leverage score under ν = 1 dwarfs the Gaussian one.
        assert!(
            heavy_sorted[0] > 3.0 * light_sorted[0],
            "top scores: heavy {} vs light {}",
            heavy_sorted[0],
            light_sorted[0]
        );
    }

    #[test]
    fn design_is_deterministic_and_beta_invariant() {
        let a = generate_design(&spec(64, 4, 2.0, 4)).unwrap();
        let b = generate_design(&spec(64, 4, 2.0, 4)).unwrap();
        assert_eq!(a, b);
        let mut with_random_beta = spec(64, 4, 2.0, 4);
        with_random_beta.beta_choice = BetaChoice::UnitRandom;
        let c = generate_design(&with_random_beta).unwrap();
        assert_eq!(a.x, c.x, "design must not depend on the beta choice");
        assert_ne!(a.beta_true, c.beta_true);
        let d = generate_design(&spec(64, 4, 2.0, 5)).unwrap();
        assert_ne!(a.x, d.x, "different seeds must give different designs");
    }

    #[test]
    fn beta_choices() {
        let ones = generate_design(&spec(32, 5, f64::INFINITY, 6)).unwrap();
        assert_eq!(ones.beta_true, vec![1.0; 5]);

        let mut s = spec(32, 5, f64::INFINITY, 6);
        s.beta_choice = BetaChoice::UnitRandom;
        let unit = generate_design(&s).unwrap();
        assert!((norm_sq(&unit.beta_true) - 1.0).abs() < 1e-12);
        let unit2 = generate_design(&s).unwrap();
        assert_eq!(unit.beta_true, unit2.beta_true);

        s.beta_choice = BetaChoice::Supplied(vec![3.0, 0.0, -1.0, 0.5, 2.0]);
        let supplied = generate_design(&s).unwrap();
        assert_eq!(supplied.beta_true, vec![3.0, 0.0, -1.0, 0.5, 2.0]);

        s.beta_choice = BetaChoice::Supplied(vec![1.0; 4]);
        assert!(generate_design(&s).is_err());
    }

    #[test]
    fn response_noise_is_standard_normal() {
        let inst = generate_design(&spec(4096, 3, f64::INFINITY, 7)).unwrap();
        let y = generate_response(&inst, RngStream::new(0xDA7A).substream(8));
        let fitted = inst.x.matvec(&inst.beta_true);
        let eps: Vec<f64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
        let mean: f64 = eps.iter().sum::<f64>() / eps.len() as f64;
        let var: f64 = eps.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / eps.len() as f64;
        assert!(mean.abs() < 0.08, "noise mean = {mean}");
        assert!((var - 1.0).abs() < 0.1, "noise variance = {var}");
        // Distinct response streams share X but differ in noise.
        let y2 = generate_response(&inst, RngStream::new(0xDA7A).substream(9));
        assert_ne!(y, y2);
    }

    #[test]
    fn leverage_profile_shape() {
        let inst = generate_design(&spec(256, 8, 2.0, 10)).unwrap();
        let (sorted, cumulative) = leverage_profile(&inst.x).unwrap();
        assert_eq!(sorted.len(), 256);
        for w in sorted.windows(2) {
            assert!(w[0] >= w[1]);
        }
        for w in cumulative.windows(2) {
            assert!(w[1] >= w[0]);
        }
        assert!((cumulative[255] - 1.0).abs() < 1e-12);
        let total: f64 = sorted.iter().sum();
        assert!((total - 8.0).abs() < 1e-8, "leverage mass = {total}");
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(generate_design(&spec(5, 5, 1.0, 0)).is_err());
        assert!(generate_design(&spec(10, 0, 1.0, 0)).is_err());
        assert!(generate_design(&spec(10, 2, 0.0, 0)).is_err());
        let mut s = spec(10, 2, 1.0, 0);
        s.ar_rho = 1.0;
        assert!(generate_design(&s).is_err());
    }
}
