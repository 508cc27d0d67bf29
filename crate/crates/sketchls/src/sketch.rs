//! Construction and fast application of randomized sketching operators.
//!
//! A sketch is an r×n random operator S applied to tall data (X, Y). Three
//! structural families cover all supported kinds:
//!
//! - **Row sampling**: r rows drawn i.i.d. with replacement from a
//!   probability vector (leverage-based, uniform, or a shrinkage mixture of
//!   the two), optionally rescaled by 1/√(r·p_j) so that E[SᵀS] = I.
//! - **Dense projections**: i.i.d. Gaussian or Rademacher entries scaled by
//!   1/√r.
//! - **SRHT** (subsampled randomized Hadamard transform): S = P·H·D where D
//!   is a random ±1 sign diagonal, H the Walsh–Hadamard matrix on the
//!   zero-padded power-of-two dimension, and P uniform row sampling, scaled
//!   so that E[SᵀS] = I on the padded space.
//!
//! Draws are immutable values produced from an [`RngStream`]; application is
//! pure, so a draw can be shared across threads and replayed exactly.

use crate::error::{invalid, numeric, Result};
use crate::linalg::{ensure_all_finite, fwht_rows, leverage_scores, norm_sq, thin_svd, DenseMatrix, RealVector};
use crate::rng::RngStream;
use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Structural family of a sketch kind.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SketchTag {
    /// Leverage-score sampling with 1/√(r·p_j) rescaling.
    LeverageRescaled,
    /// Leverage-score sampling with unit weights.
    LeverageUnrescaled,
    /// Uniform sampling (rescaled by default; see [`SketchKind::rescale`]).
    Uniform,
    /// Sampling from the shrinkage mixture (1−θ)·ℓ_i/p + θ·q_i, rescaled.
    ShrinkageRescaled,
    /// Dense i.i.d. N(0, 1/r) projection.
    GaussianProjection,
    /// Dense i.i.d. ±1/√r projection.
    RademacherProjection,
    /// Subsampled randomized Hadamard transform.
    Hadamard,
    /// Diagnostic kind: the full n-row identity sample (S = I).
    IdentityFullSample,
}

/// A sketch kind plus its distribution parameters.
///
/// `theta` and `mixture_q` parameterize the shrinkage mixture (ignored by
/// other tags); `rescale` applies to `Uniform` only (all other sampling tags
/// fix their own convention).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SketchKind {
    pub tag: SketchTag,
    pub theta: f64,
    pub mixture_q: Option<RealVector>,
    pub rescale: bool,
}

impl SketchKind {
    fn with_tag(tag: SketchTag) -> Self {
        let theta = if tag == SketchTag::ShrinkageRescaled { 0.1 } else { 0.0 };
        SketchKind { tag, theta, mixture_q: None, rescale: true }
    }

    pub fn leverage_rescaled() -> Self {
        Self::with_tag(SketchTag::LeverageRescaled)
    }

    pub fn leverage_unrescaled() -> Self {
        Self::with_tag(SketchTag::LeverageUnrescaled)
    }

    pub fn uniform() -> Self {
        Self::with_tag(SketchTag::Uniform)
    }

    pub fn uniform_unrescaled() -> Self {
        SketchKind { rescale: false, ..Self::with_tag(SketchTag::Uniform) }
    }

    pub fn shrinkage(theta: f64) -> Self {
        SketchKind { theta, ..Self::with_tag(SketchTag::ShrinkageRescaled) }
    }

    pub fn shrinkage_with_q(theta: f64, q: RealVector) -> Self {
        SketchKind { theta, mixture_q: Some(q), ..Self::with_tag(SketchTag::ShrinkageRescaled) }
    }

    pub fn gaussian() -> Self {
        Self::with_tag(SketchTag::GaussianProjection)
    }

    pub fn rademacher() -> Self {
        Self::with_tag(SketchTag::RademacherProjection)
    }

    pub fn hadamard() -> Self {
        Self::with_tag(SketchTag::Hadamard)
    }

    pub fn identity_full_sample() -> Self {
        Self::with_tag(SketchTag::IdentityFullSample)
    }

    /// Short table label ("S_R", "S_GP", ...), used in benchmark CSV output.
    pub fn label(&self) -> &'static str {
        match self.tag {
            SketchTag::LeverageRescaled => "S_R",
            SketchTag::LeverageUnrescaled => "S_NR",
            SketchTag::Uniform => {
                if self.rescale {
                    "S_Unif"
                } else {
                    "S_Unif_nr"
                }
            }
            SketchTag::ShrinkageRescaled => "S_Shr",
            SketchTag::GaussianProjection => "S_GP",
            SketchTag::RademacherProjection => "S_Rad",
            SketchTag::Hadamard => "S_Had",
            SketchTag::IdentityFullSample => "S_I",
        }
    }

    /// True for the row-sampling tags, which need leverage scores to build
    /// their sampling distribution.
    pub fn needs_leverage(&self) -> bool {
        matches!(
            self.tag,
            SketchTag::LeverageRescaled | SketchTag::LeverageUnrescaled | SketchTag::ShrinkageRescaled
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.theta) {
            return Err(invalid(format!("theta must lie in [0,1), got {}", self.theta)));
        }
        if let Some(q) = &self.mixture_q {
            check_probability_vector(q)?;
        }
        Ok(())
    }
}

impl<'de> Deserialize<'de> for SketchKind {
    fn deserialize<D>(deserializer: D) -> std::result::Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Short(String),
            Full {
                tag: SketchTag,
                theta: Option<f64>,
                mixture_q: Option<RealVector>,
                rescale: Option<bool>,
            },
        }
        match Repr::deserialize(deserializer)? {
            Repr::Short(s) => SketchKind::from_short_name(&s)
                .ok_or_else(|| serde::de::Error::custom(format!("unknown sketch kind '{s}'"))),
            Repr::Full { tag, theta, mixture_q, rescale } => {
                let mut kind = SketchKind::with_tag(tag);
                if let Some(t) = theta {
                    kind.theta = t;
                }
                kind.mixture_q = mixture_q;
                if let Some(r) = rescale {
                    kind.rescale = r;
                }
                Ok(kind)
            }
        }
    }
}

impl SketchKind {
    /// Parse the short table labels (plus a few obvious aliases).
    pub fn from_short_name(name: &str) -> Option<Self> {
        match name {
            "S_R" | "leverage" => Some(Self::leverage_rescaled()),
            "S_NR" => Some(Self::leverage_unrescaled()),
            "S_Unif" | "uniform" => Some(Self::uniform()),
            "S_Unif_nr" => Some(Self::uniform_unrescaled()),
            "S_Shr" | "shrinkage" => Some(Self::shrinkage(0.1)),
            "S_GP" | "gaussian" => Some(Self::gaussian()),
            "S_Rad" | "rademacher" => Some(Self::rademacher()),
            "S_Had" | "hadamard" | "srht" => Some(Self::hadamard()),
            "S_I" | "identity" => Some(Self::identity_full_sample()),
            _ => None,
        }
    }
}

/// A realized sketching operator in structured (fast-apply) form.
#[derive(Clone, Debug, PartialEq)]
pub enum SketchDraw {
    /// r sampled row indices (with replacement) and per-row multipliers.
    RowSample { indices: Vec<usize>, weights: RealVector, n: usize },
    /// Fully materialized r×n matrix.
    DenseProjection { matrix: DenseMatrix },
    /// SRHT triple: sign diagonal on the padded space, r sampled Hadamard
    /// rows, and the isotropy scale √(n_pad/r)/√n_pad.
    Srht { sign_flips: RealVector, sampled_rows: Vec<usize>, scale: f64, n_pad: usize, n: usize },
}

impl SketchDraw {
    /// Number of sketch rows r.
    pub fn r(&self) -> usize {
        match self {
            SketchDraw::RowSample { indices, .. } => indices.len(),
            SketchDraw::DenseProjection { matrix } => matrix.rows(),
            SketchDraw::Srht { sampled_rows, .. } => sampled_rows.len(),
        }
    }

    /// Data dimension n the sketch applies to.
    pub fn n(&self) -> usize {
        match self {
            SketchDraw::RowSample { n, .. } => *n,
            SketchDraw::DenseProjection { matrix } => matrix.cols(),
            SketchDraw::Srht { n, .. } => *n,
        }
    }
}

fn check_probability_vector(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(invalid("probability vector is empty"));
    }
    ensure_all_finite(p, "probability vector")?;
    if p.iter().any(|&x| x < 0.0) {
        return Err(invalid("probability vector has a negative entry"));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > 1e-10 {
        return Err(invalid(format!("probability vector sums to {sum}, expected 1")));
    }
    Ok(())
}

/// Mixture sampling distribution p_i = (1−θ)·ℓ_i/Σℓ + θ·q_i.
///
/// `lev` are leverage scores (nonnegative, summing to the design rank);
/// `q` defaults to uniform 1/n. The output is a probability vector.
pub fn sampling_probabilities(lev: &RealVector, theta: f64, q: Option<&RealVector>) -> Result<RealVector> {
    ensure_all_finite(lev, "leverage scores")?;
    if lev.is_empty() {
        return Err(invalid("leverage vector is empty"));
    }
    if lev.iter().any(|&x| x < 0.0) {
        return Err(invalid("leverage scores must be nonnegative"));
    }
    if !(0.0..1.0).contains(&theta) {
        return Err(invalid(format!("theta must lie in [0,1), got {theta}")));
    }
    let mass: f64 = lev.iter().sum();
    if mass <= 0.0 {
        return Err(invalid("leverage scores sum to zero"));
    }
    let n = lev.len();
    if let Some(qv) = q {
        if qv.len() != n {
            return Err(invalid("mixture q length does not match leverage length"));
        }
        check_probability_vector(qv)?;
    }
    let uniform = 1.0 / n as f64;
    Ok((0..n)
        .map(|i| (1.0 - theta) * lev[i] / mass + theta * q.map_or(uniform, |qv| qv[i]))
        .collect())
}

/// Draw r row indices i.i.d. with replacement from `probs`.
///
/// With `rescale` set, sampled rows carry weights √(1/(r·p_j)) so that
/// E[SᵀS] = I; otherwise all weights are 1.
pub fn draw_sampling_sketch(probs: &RealVector, r: usize, rescale: bool, rng: RngStream) -> Result<SketchDraw> {
    check_probability_vector(probs)?;
    if r == 0 {
        return Err(invalid("sketch size r must be at least 1"));
    }
    let dist = WeightedIndex::new(probs.iter().copied())
        .map_err(|e| invalid(format!("invalid sampling distribution: {e}")))?;
    let mut sampler = rng.sampler();
    let indices: Vec<usize> = (0..r).map(|_| dist.sample(&mut sampler)).collect();
    let weights = if rescale {
        indices.iter().map(|&j| (1.0 / (r as f64 * probs[j])).sqrt()).collect()
    } else {
        vec![1.0; r]
    };
    Ok(SketchDraw::RowSample { indices, weights, n: probs.len() })
}

/// Entry distribution for dense projections.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProjectionFamily {
    Gaussian,
    Rademacher,
}

/// Dense r×n projection with i.i.d. entries scaled by 1/√r, so E[SᵀS] = I.
pub fn draw_dense_projection(family: ProjectionFamily, r: usize, n: usize, rng: RngStream) -> Result<SketchDraw> {
    if r == 0 || n == 0 {
        return Err(invalid("projection dimensions must be at least 1"));
    }
    let inv_sqrt_r = 1.0 / (r as f64).sqrt();
    let mut sampler = rng.sampler();
    let mut data = Vec::with_capacity(r * n);
    match family {
        ProjectionFamily::Gaussian => {
            for _ in 0..r * n {
                let g: f64 = StandardNormal.sample(&mut sampler);
                data.push(g * inv_sqrt_r);
            }
        }
        ProjectionFamily::Rademacher => {
            for _ in 0..r * n {
                let sign = if sampler.gen::<bool>() { 1.0 } else { -1.0 };
                data.push(sign * inv_sqrt_r);
            }
        }
    }
    Ok(SketchDraw::DenseProjection { matrix: DenseMatrix::from_vec_unchecked(r, n, data) })
}

/// SRHT draw on the padded power-of-two dimension n_pad ≥ n.
///
/// Sign flips are drawn first, then the r uniformly sampled Hadamard rows;
/// the scale √(n_pad/r)/√n_pad makes E[SᵀS] = I on the padded space.
pub fn draw_srht_sketch(r: usize, n: usize, rng: RngStream) -> Result<SketchDraw> {
    if r == 0 || n == 0 {
        return Err(invalid("SRHT dimensions must be at least 1"));
    }
    let n_pad = n.next_power_of_two();
    let mut sampler = rng.sampler();
    let sign_flips: Vec<f64> =
        (0..n_pad).map(|_| if sampler.gen::<bool>() { 1.0 } else { -1.0 }).collect();
    let sampled_rows: Vec<usize> = (0..r).map(|_| sampler.gen_range(0..n_pad)).collect();
    let scale = (n_pad as f64 / r as f64).sqrt() / (n_pad as f64).sqrt();
    Ok(SketchDraw::Srht { sign_flips, sampled_rows, scale, n_pad, n })
}

/// The identity draw S = I_n as an n-row unit-weight sample (diagnostic).
pub fn identity_full_sample(n: usize) -> SketchDraw {
    SketchDraw::RowSample { indices: (0..n).collect(), weights: vec![1.0; n], n }
}

/// Draw a sketch of the given kind.
///
/// Sampling kinds require the design's leverage scores; projection kinds and
/// SRHT ignore them. The identity kind ignores `r` (its sketch is always the
/// full n-row sample).
pub fn draw_for_kind(
    kind: &SketchKind,
    leverage: Option<&RealVector>,
    r: usize,
    n: usize,
    rng: RngStream,
) -> Result<SketchDraw> {
    kind.validate()?;
    let lev = || -> Result<&RealVector> {
        leverage.ok_or_else(|| invalid(format!("sketch kind {} requires leverage scores", kind.label())))
    };
    match kind.tag {
        SketchTag::LeverageRescaled => {
            let probs = sampling_probabilities(lev()?, 0.0, None)?;
            draw_sampling_sketch(&probs, r, true, rng)
        }
        SketchTag::LeverageUnrescaled => {
            let probs = sampling_probabilities(lev()?, 0.0, None)?;
            draw_sampling_sketch(&probs, r, false, rng)
        }
        SketchTag::Uniform => {
            let probs = vec![1.0 / n as f64; n];
            draw_sampling_sketch(&probs, r, kind.rescale, rng)
        }
        SketchTag::ShrinkageRescaled => {
            let probs = sampling_probabilities(lev()?, kind.theta, kind.mixture_q.as_ref())?;
            draw_sampling_sketch(&probs, r, true, rng)
        }
        SketchTag::GaussianProjection => draw_dense_projection(ProjectionFamily::Gaussian, r, n, rng),
        SketchTag::RademacherProjection => draw_dense_projection(ProjectionFamily::Rademacher, r, n, rng),
        SketchTag::Hadamard => draw_srht_sketch(r, n, rng),
        SketchTag::IdentityFullSample => Ok(identity_full_sample(n)),
    }
}

/// Apply the sketch: returns S·M with r rows.
///
/// Row samples gather-and-scale rows in O(r·cols); SRHT zero-pads to n_pad
/// rows, sign-flips, runs one Walsh–Hadamard pass down the rows, then
/// gathers the sampled rows, costing O(n_pad·log(n_pad)·cols); dense
/// projections are a plain multiply.
pub fn apply_sketch(draw: &SketchDraw, m: &DenseMatrix) -> Result<DenseMatrix> {
    if m.rows() != draw.n() {
        return Err(invalid(format!(
            "apply_sketch: matrix has {} rows but the sketch expects {}",
            m.rows(),
            draw.n()
        )));
    }
    match draw {
        SketchDraw::RowSample { indices, weights, .. } => {
            let cols = m.cols();
            let mut out = DenseMatrix::zeros(indices.len(), cols);
            for (row_out, (&idx, &w)) in indices.iter().zip(weights).enumerate() {
                let src = m.row(idx);
                let dst = out.row_mut(row_out);
                for (d, &s) in dst.iter_mut().zip(src) {
                    *d = w * s;
                }
            }
            Ok(out)
        }
        SketchDraw::DenseProjection { matrix } => Ok(matrix.matmul(m)),
        SketchDraw::Srht { sign_flips, sampled_rows, scale, n_pad, n } => {
            let cols = m.cols();
            let mut padded = DenseMatrix::zeros(*n_pad, cols);
            for i in 0..*n {
                let sign = sign_flips[i];
                let dst = padded.row_mut(i);
                for (d, &s) in dst.iter_mut().zip(m.row(i)) {
                    *d = sign * s;
                }
            }
            fwht_rows(padded.data_mut(), *n_pad, cols);
            let mut out = DenseMatrix::zeros(sampled_rows.len(), cols);
            for (row_out, &idx) in sampled_rows.iter().enumerate() {
                let src = padded.row(idx);
                let dst = out.row_mut(row_out);
                for (d, &s) in dst.iter_mut().zip(src) {
                    *d = scale * s;
                }
            }
            Ok(out)
        }
    }
}

/// Adjoint application: returns Bᵀ·S as a (cols(B) × n) matrix, where S is
/// the effective r×n operator of the draw.
///
/// This is the workhorse of the closed-form criteria (which need ŨᵀS for the
/// left factor Ũ of SU) and costs the same as [`apply_sketch`] in each
/// variant.
pub fn apply_adjoint(draw: &SketchDraw, b: &DenseMatrix) -> Result<DenseMatrix> {
    if b.rows() != draw.r() {
        return Err(invalid(format!(
            "apply_adjoint: matrix has {} rows but the sketch has r = {}",
            b.rows(),
            draw.r()
        )));
    }
    let k = b.cols();
    match draw {
        SketchDraw::RowSample { indices, weights, n } => {
            let mut out = DenseMatrix::zeros(k, *n);
            for (j, (&idx, &w)) in indices.iter().zip(weights).enumerate() {
                let src = b.row(j);
                for (t, &v) in src.iter().enumerate() {
                    let cur = out.get(t, idx);
                    out.set(t, idx, cur + w * v);
                }
            }
            Ok(out)
        }
        SketchDraw::DenseProjection { matrix } => Ok(b.t_matmul(matrix)),
        SketchDraw::Srht { sign_flips, sampled_rows, scale, n_pad, n } => {
            // (scale·P·H·D)ᵀ·... : accumulate Bᵀ into the sampled Hadamard
            // rows, transform (Hᵀ = H), then sign-flip and truncate.
            let mut acc = DenseMatrix::zeros(*n_pad, k);
            for (j, &idx) in sampled_rows.iter().enumerate() {
                let src = b.row(j);
                let dst = acc.row_mut(idx);
                for (d, &v) in dst.iter_mut().zip(src) {
                    *d += v;
                }
            }
            fwht_rows(acc.data_mut(), *n_pad, k);
            let mut out = DenseMatrix::zeros(k, *n);
            for i in 0..*n {
                let factor = scale * sign_flips[i];
                let src = acc.row(i);
                for (t, &v) in src.iter().enumerate() {
                    out.set(t, i, factor * v);
                }
            }
            Ok(out)
        }
    }
}

/// Materialize the effective r×n sketch matrix (test and diagnostic use).
pub fn materialize_sketch(draw: &SketchDraw) -> DenseMatrix {
    apply_sketch(draw, &DenseMatrix::identity(draw.n())).expect("identity dimensions always match")
}

/// Sketched approximation of leverage scores.
///
/// Sketches X with an SRHT of `sketch_r` rows, factors the sketch, and
/// returns the squared row norms of X·Ṽ·Σ̃⁻¹ — the standard sketched-QR
/// leverage estimator. A sketch at least as tall as X (`sketch_r ≥ rows`)
/// degenerates to the exact computation.
pub fn approx_leverage_scores(x: &DenseMatrix, sketch_r: usize, rng: RngStream) -> Result<RealVector> {
    let (n, p) = (x.rows(), x.cols());
    if sketch_r < p {
        return Err(invalid(format!("sketch_r = {sketch_r} must be at least cols = {p}")));
    }
    if sketch_r >= n {
        return leverage_scores(x);
    }
    let draw = draw_srht_sketch(sketch_r, n, rng)?;
    let sx = apply_sketch(&draw, x)?;
    let svd = thin_svd(&sx, -1.0)?;
    if svd.rank < p {
        return Err(numeric(format!(
            "sketched matrix has rank {} < {p}; increase sketch_r (currently {sketch_r})",
            svd.rank
        )));
    }
    // Basis whiteners: columns of V scaled by 1/σ.
    let mut whitener = svd.v.clone();
    for j in 0..p {
        for (c, &s) in svd.singular_values.iter().enumerate() {
            whitener.set(j, c, whitener.get(j, c) / s);
        }
    }
    let xb = x.matmul(&whitener);
    Ok((0..n).map(|i| norm_sq(xb.row(i))).collect())
}

/// Default sketch size for [`approx_leverage_scores`]: 4·p·ln p (clamped to
/// at least p+1).
pub fn default_leverage_sketch_r(p: usize) -> usize {
    let suggested = (4.0 * p as f64 * (p as f64).ln()).ceil() as usize;
    suggested.max(p + 1)
}
