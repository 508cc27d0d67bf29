//! Randomized sketching for overdetermined least squares.
//!
//! Given a tall design X ∈ R^{n×p} and response Y ∈ R^n, sketch-and-solve
//! replaces the full problem min‖Y − Xβ‖² with the compressed problem
//! min‖SY − SXβ‖² for a random r×n sketching operator S with r ≪ n. This
//! crate provides:
//!
//! - construction and fast application of the standard sketch families
//!   (leverage-score sampling with and without rescaling, uniform sampling,
//!   shrinkage mixtures, Gaussian and Rademacher projections, and the
//!   subsampled randomized Hadamard transform) — [`sketch`];
//! - the full, sketched, and Gram-only-sketched least-squares estimators —
//!   [`estimators`];
//! - exact closed-form and Monte Carlo evaluation of three quality
//!   criteria for a sketch: the worst-case residual ratio, the prediction
//!   efficiency, and the residual efficiency, together with the structural
//!   constants and deterministic/probabilistic upper-bound checks that
//!   explain them — [`criteria`];
//! - heavy-tailed synthetic designs whose leverage-score profiles range from
//!   nearly uniform to extremely concentrated — [`datagen`];
//! - dense kernels (thin SVD, pseudo-inverse solves, leverage scores, fast
//!   Walsh–Hadamard transform) — [`linalg`] — and reproducible splittable
//!   RNG streams — [`rng`].
//!
//! All randomized operations are pure functions of an [`rng::RngStream`],
//! so every result in the companion benchmark harness is exactly
//! reproducible from a master seed.

pub mod criteria;
pub mod datagen;
pub mod error;
pub mod estimators;
pub mod linalg;
pub mod rng;
pub mod sketch;

pub use error::{Error, Result};
pub use linalg::{DenseMatrix, RealVector, ThinSVD};
pub use rng::RngStream;
pub use sketch::{SketchDraw, SketchKind, SketchTag};

/// Crate version, embedded in benchmark manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
