//! Least-squares estimators: exact, fully sketched, and partially sketched.
//!
//! For an n×p design X and response Y:
//!
//! - [`ols_solve`] computes the minimum-norm least-squares solution
//!   β̂ = X†Y.
//! - [`sketched_solve`] computes β̂_S = (SX)†(SY): both sides of the problem
//!   pass through the sketch, and the solve runs on the r-row compressed
//!   problem.
//! - [`partial_sketch_solve`] sketches only the Gram matrix:
//!   β̃ = ((SX)ᵀSX)† XᵀY. The data term XᵀY stays exact, which changes the
//!   statistical behavior qualitatively (the estimator is no longer a
//!   perturbation of the sketched normal equations but of the exact ones).
//!
//! All solvers use the same rank-revealing SVD route with a shared rank
//! tolerance convention (`rank_tol < 0` selects the default), and all report
//! the residual in the **original** n-dimensional space, which is the
//! quantity the relative-efficiency criteria consume.

use crate::error::{invalid, Result};
use crate::linalg::{norm_sq, thin_svd, DenseMatrix, RealVector};
use crate::sketch::{apply_sketch, SketchDraw};

/// Output of a least-squares solve.
///
/// `rank_used` is the numerical rank of the matrix actually factored (X or
/// SX); `residual_norm_sq` is ‖Y − Xβ̂‖² in the original space.
#[derive(Clone, Debug, PartialEq)]
pub struct FitResult {
    pub beta_hat: RealVector,
    pub rank_used: usize,
    pub residual_norm_sq: f64,
}

fn check_response(x: &DenseMatrix, y: &RealVector) -> Result<()> {
    if y.len() != x.rows() {
        return Err(invalid(format!(
            "response has length {} but the design has {} rows",
            y.len(),
            x.rows()
        )));
    }
    Ok(())
}

fn residual_in_original_space(x: &DenseMatrix, y: &RealVector, beta: &RealVector) -> f64 {
    let fitted = x.matvec(beta);
    norm_sq(&y.iter().zip(&fitted).map(|(a, b)| a - b).collect::<Vec<_>>())
}

/// Minimum-norm ordinary least squares: β̂ = X†Y.
pub fn ols_solve(x: &DenseMatrix, y: &RealVector, rank_tol: f64) -> Result<FitResult> {
    check_response(x, y)?;
    let svd = thin_svd(x, rank_tol)?;
    let beta_hat = svd.pinv_apply(y);
    let residual_norm_sq = residual_in_original_space(x, y, &beta_hat);
    Ok(FitResult { beta_hat, rank_used: svd.rank, residual_norm_sq })
}

/// Fully sketched least squares: β̂_S = (SX)†(SY).
///
/// When rank(SX) < rank(X) the compressed problem no longer determines all
/// coordinates and the minimum-norm pseudoinverse resolves the ambiguity;
/// `rank_used` exposes this so callers can detect rank-degenerate draws.
pub fn sketched_solve(x: &DenseMatrix, y: &RealVector, draw: &SketchDraw, rank_tol: f64) -> Result<FitResult> {
    check_response(x, y)?;
    let sx = apply_sketch(draw, x)?;
    let y_mat = DenseMatrix::from_vec_unchecked(y.len(), 1, y.clone());
    let sy_mat = apply_sketch(draw, &y_mat)?;
    let sy: RealVector = sy_mat.data().to_vec();
    let svd = thin_svd(&sx, rank_tol)?;
    let beta_hat = svd.pinv_apply(&sy);
    let residual_norm_sq = residual_in_original_space(x, y, &beta_hat);
    Ok(FitResult { beta_hat, rank_used: svd.rank, residual_norm_sq })
}

/// Partially sketched least squares: β̃ = ((SX)ᵀSX)† XᵀY.
///
/// Implemented through the SVD of SX: with SX = Ũ Σ̃ Ṽᵀ of rank k,
/// ((SX)ᵀSX)† = Ṽ Σ̃⁻² Ṽᵀ, so the Gram matrix is never formed and its
/// squared condition number never materializes in the factorization.
pub fn partial_sketch_solve(
    x: &DenseMatrix,
    y: &RealVector,
    draw: &SketchDraw,
    rank_tol: f64,
) -> Result<FitResult> {
    check_response(x, y)?;
    let sx = apply_sketch(draw, x)?;
    let svd = thin_svd(&sx, rank_tol)?;
    let xty = x.t_matvec(y);
    // Ṽ Σ̃⁻² Ṽᵀ · XᵀY
    let mut coeffs = svd.v.t_matvec(&xty);
    for (c, &s) in coeffs.iter_mut().zip(&svd.singular_values) {
        *c /= s * s;
    }
    let beta_hat = svd.v.matvec(&coeffs);
    let residual_norm_sq = residual_in_original_space(x, y, &beta_hat);
    Ok(FitResult { beta_hat, rank_used: svd.rank, residual_norm_sq })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use crate::sketch::{draw_sampling_sketch, identity_full_sample, materialize_sketch};
    use rand::Rng;

    fn random_matrix(rows: usize, cols: usize, tag: u64) -> DenseMatrix {
        let mut sampler = RngStream::new(0xE57).substream(tag).sampler();
        DenseMatrix::from_vec_unchecked(
            rows,
            cols,
            (0..rows * cols).map(|_| sampler.gen_range(-1.0..1.0)).collect(),
        )
    }

    /// Gaussian elimination with partial pivoting — the independent oracle
    /// for full-rank solves. Solves A z = b for square well-conditioned A.
    fn gauss_solve(a: &DenseMatrix, b: &[f64]) -> Vec<f64> {
        let n = a.rows();
        assert_eq!(a.cols(), n);
        let mut m: Vec<Vec<f64>> = (0..n).map(|i| a.row(i).to_vec()).collect();
        let mut rhs = b.to_vec();
        for col in 0..n {
            let pivot = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs())).unwrap();
            m.swap(col, pivot);
            rhs.swap(col, pivot);
            assert!(m[col][col].abs() > 1e-12, "oracle needs a nonsingular system");
            for row in col + 1..n {
                let f = m[row][col] / m[col][col];
                for k in col..n {
                    m[row][k] -= f * m[col][k];
                }
                rhs[row] -= f * rhs[col];
            }
        }
        let mut z = vec![0.0; n];
        for row in (0..n).rev() {
            let mut acc = rhs[row];
            for k in row + 1..n {
                acc -= m[row][k] * z[k];
            }
            z[row] = acc / m[row][row];
        }
        z
    }

    /// Normal-equations oracle for full-column-rank OLS.
    fn normal_equations_oracle(x: &DenseMatrix, y: &[f64]) -> Vec<f64> {
        let gram = x.t_matmul(x);
        let xty = x.t_matvec(&y.to_vec());
        gauss_solve(&gram, &xty)
    }

    #[test]
    fn ols_exact_on_consistent_system() {
        let x = DenseMatrix::from_vec(3, 2, vec![1.0, 0.0, 0.0, 1.0, 1.0, 1.0]).unwrap();
        let beta_true = vec![2.0, -1.0];
        let y = x.matvec(&beta_true);
        let fit = ols_solve(&x, &y, -1.0).unwrap();
        assert_eq!(fit.rank_used, 2);
        assert!(fit.residual_norm_sq < 1e-24);
        for (b, t) in fit.beta_hat.iter().zip(&beta_true) {
            assert!((b - t).abs() < 1e-12);
        }
    }

    #[test]
    fn ols_matches_normal_equations_oracle() {
        let x = random_matrix(40, 5, 1);
        let mut sampler = RngStream::new(0xE57).substream(2).sampler();
        let y: Vec<f64> = (0..40).map(|_| sampler.gen_range(-2.0..2.0)).collect();
        let fit = ols_solve(&x, &y, -1.0).unwrap();
        let oracle = normal_equations_oracle(&x, &y);
        for (b, o) in fit.beta_hat.iter().zip(&oracle) {
            assert!((b - o).abs() < 1e-9);
        }
        // Residual is orthogonal to the column space: ‖Y‖² = ‖Xβ̂‖² + ‖r‖².
        let fitted_norm_sq = norm_sq(&x.matvec(&fit.beta_hat));
        let y_norm_sq = norm_sq(&y);
        assert!((fitted_norm_sq + fit.residual_norm_sq - y_norm_sq).abs() < 1e-9 * y_norm_sq);
    }

    #[test]
    fn ols_minimum_norm_on_rank_deficient_design() {
        // Duplicate column: solutions form a line; the pinv picks the one in
        // the row space of X.
        let x = DenseMatrix::from_vec(4, 2, vec![1.0, 1.0, 2.0, 2.0, -1.0, -1.0, 0.5, 0.5]).unwrap();
        let y = vec![2.0, 4.0, -2.0, 1.0];
        let fit = ols_solve(&x, &y, -1.0).unwrap();
        assert_eq!(fit.rank_used, 1);
        // Row space is span{(1,1)}: both coordinates equal, each 1/2 of the
        // consistent solution β₁+β₂ = 2.
        assert!((fit.beta_hat[0] - 1.0).abs() < 1e-12);
        assert!((fit.beta_hat[1] - 1.0).abs() < 1e-12);
        assert!(fit.residual_norm_sq < 1e-20);
    }

    #[test]
    fn sketched_solve_with_identity_draw_is_ols() {
        let x = random_matrix(30, 4, 3);
        let mut sampler = RngStream::new(0xE57).substream(4).sampler();
        let y: Vec<f64> = (0..30).map(|_| sampler.gen_range(-2.0..2.0)).collect();
        let ols = ols_solve(&x, &y, -1.0).unwrap();
        let sketched = sketched_solve(&x, &y, &identity_full_sample(30), -1.0).unwrap();
        assert_eq!(sketched.rank_used, ols.rank_used);
        for (a, b) in sketched.beta_hat.iter().zip(&ols.beta_hat) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn sketched_solve_matches_materialized_oracle() {
        let x = random_matrix(24, 3, 5);
        let mut sampler = RngStream::new(0xE57).substream(6).sampler();
        let y: Vec<f64> = (0..24).map(|_| sampler.gen_range(-2.0..2.0)).collect();
        let probs = vec![1.0 / 24.0; 24];
        let draw = draw_sampling_sketch(&probs, 12, true, RngStream::new(0xE57).substream(7)).unwrap();
        let fit = sketched_solve(&x, &y, &draw, -1.0).unwrap();

        let s = materialize_sketch(&draw);
        let sx = s.matmul(&x);
        let sy = s.matvec(&y.clone());
        let oracle = normal_equations_oracle(&sx, &sy);
        for (a, b) in fit.beta_hat.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn sketched_solve_reports_degenerate_rank() {
        let x = random_matrix(20, 4, 8);
        let y = vec![1.0; 20];
        // Two distinct sampled rows cannot carry rank 4.
        let mut probs = vec![0.0; 20];
        probs[3] = 0.5;
        probs[11] = 0.5;
        let draw = draw_sampling_sketch(&probs, 6, true, RngStream::new(0xE57).substream(9)).unwrap();
        let fit = sketched_solve(&x, &y, &draw, -1.0).unwrap();
        assert!(fit.rank_used <= 2, "rank_used = {}", fit.rank_used);
    }

    #[test]
    fn partial_sketch_with_identity_draw_is_ols() {
        let x = random_matrix(25, 4, 10);
        let mut sampler = RngStream::new(0xE57).substream(11).sampler();
        let y: Vec<f64> = (0..25).map(|_| sampler.gen_range(-2.0..2.0)).collect();
        let ols = ols_solve(&x, &y, -1.0).unwrap();
        let partial = partial_sketch_solve(&x, &y, &identity_full_sample(25), -1.0).unwrap();
        for (a, b) in partial.beta_hat.iter().zip(&ols.beta_hat) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn partial_sketch_matches_materialized_oracle() {
        let x = random_matrix(24, 3, 12);
        let mut sampler = RngStream::new(0xE57).substream(13).sampler();
        let y: Vec<f64> = (0..24).map(|_| sampler.gen_range(-2.0..2.0)).collect();
        let probs = vec![1.0 / 24.0; 24];
        let draw = draw_sampling_sketch(&probs, 14, true, RngStream::new(0xE57).substream(14)).unwrap();
        let fit = partial_sketch_solve(&x, &y, &draw, -1.0).unwrap();

        // Oracle: solve ((SX)ᵀSX) β = XᵀY by Gaussian elimination.
        let s = materialize_sketch(&draw);
        let sx = s.matmul(&x);
        let gram = sx.t_matmul(&sx);
        let xty = x.t_matvec(&y);
        let oracle = gauss_solve(&gram, &xty);
        for (a, b) in fit.beta_hat.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn solvers_reject_mismatched_response() {
        let x = random_matrix(10, 2, 15);
        let y = vec![0.0; 9];
        assert!(ols_solve(&x, &y, -1.0).is_err());
        assert!(sketched_solve(&x, &y, &identity_full_sample(10), -1.0).is_err());
        assert!(partial_sketch_solve(&x, &y, &identity_full_sample(10), -1.0).is_err());
    }
}
