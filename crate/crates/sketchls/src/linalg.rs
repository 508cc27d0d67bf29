//! Dense linear-algebra kernels: row-major matrices, thin SVD, minimum-norm
//! pseudo-inverse solves, leverage scores, and the fast Walsh–Hadamard
//! transform.
//!
//! Matrices are stored row-major so that row gathering (the hot path of
//! sampling sketches) and per-row SIMD-friendly loops are contiguous. The
//! SVD is delegated to `nalgebra`; everything layered on top of the factors
//! (pseudo-inverse application, leverage scores, projections) is implemented
//! here and cross-checked in tests against brute-force oracles, including an
//! independent Jacobi eigensolver on the Gram matrix.

use crate::error::{invalid, numeric, Result};

/// Vector of finite reals. Finiteness is enforced where external data enters
/// the public API.
pub type RealVector = Vec<f64>;

/// Row-major dense matrix of finite reals.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

pub(crate) fn ensure_all_finite(entries: &[f64], what: &str) -> Result<()> {
    if entries.iter().any(|x| !x.is_finite()) {
        return Err(invalid(format!("{what} contains a non-finite entry")));
    }
    Ok(())
}

impl DenseMatrix {
    /// Build from row-major data, rejecting non-finite entries and length
    /// mismatches.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(invalid(format!(
                "matrix data length {} does not equal rows*cols = {}",
                data.len(),
                rows * cols
            )));
        }
        ensure_all_finite(&data, "matrix")?;
        Ok(DenseMatrix { rows, cols, data })
    }

    /// Internal constructor for data already known to be finite.
    pub(crate) fn from_vec_unchecked(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        DenseMatrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = DenseMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    /// C = self · other.
    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let (m, k, n) = (self.rows, self.cols, other.cols);
        let mut c = DenseMatrix::zeros(m, n);
        for i in 0..m {
            let a_row = self.row(i);
            let c_row = c.row_mut(i);
            for (l, &a_il) in a_row.iter().enumerate().take(k) {
                if a_il == 0.0 {
                    continue;
                }
                let b_row = other.row(l);
                for (c_v, &b_v) in c_row.iter_mut().zip(b_row) {
                    *c_v += a_il * b_v;
                }
            }
        }
        c
    }

    /// C = selfᵀ · other, accumulated row-by-row so both operands stream
    /// contiguously.
    pub fn t_matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.rows, other.rows, "t_matmul dimension mismatch");
        let (k, m, n) = (self.rows, self.cols, other.cols);
        let mut c = DenseMatrix::zeros(m, n);
        for l in 0..k {
            let a_row = self.row(l);
            let b_row = other.row(l);
            for (i, &a_li) in a_row.iter().enumerate() {
                if a_li == 0.0 {
                    continue;
                }
                let c_row = c.row_mut(i);
                for (c_v, &b_v) in c_row.iter_mut().zip(b_row) {
                    *c_v += a_li * b_v;
                }
            }
        }
        c
    }

    /// C = self · otherᵀ, computed as row-by-row dot products.
    pub fn matmul_t(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.cols, "matmul_t dimension mismatch");
        let (m, n) = (self.rows, other.rows);
        let mut c = DenseMatrix::zeros(m, n);
        for i in 0..m {
            let a_row = self.row(i);
            let c_row = c.row_mut(i);
            for (j, c_v) in c_row.iter_mut().enumerate() {
                *c_v = dot(a_row, other.row(j));
            }
        }
        c
    }

    /// self · v.
    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "matvec dimension mismatch");
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// selfᵀ · v.
    pub fn t_matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.rows, v.len(), "t_matvec dimension mismatch");
        let mut out = vec![0.0; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0.0 {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += vi * a;
            }
        }
        out
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }

    /// Largest |entry|.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Squared Euclidean norm Σ vᵢ².
pub fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Thin singular value decomposition M = U · diag(σ) · Vᵀ truncated to the
/// numerical rank.
///
/// Properties, verified by tests:
/// - U (rows×k) and V (cols×k) have orthonormal columns;
/// - singular values are sorted descending and all exceed the rank cutoff;
/// - U·diag(σ)·Vᵀ reconstructs M to factorization accuracy.
#[derive(Clone, Debug)]
pub struct ThinSVD {
    pub u: DenseMatrix,
    pub singular_values: RealVector,
    pub v: DenseMatrix,
    pub rank: usize,
}

impl ThinSVD {
    /// Minimum-norm least-squares solution via the factors: V·Σ⁻¹·Uᵀ·b.
    pub fn pinv_apply(&self, b: &[f64]) -> Vec<f64> {
        let mut coeffs = self.u.t_matvec(b);
        for (c, s) in coeffs.iter_mut().zip(&self.singular_values) {
            *c /= s;
        }
        self.v.matvec(&coeffs)
    }

    /// Largest singular value, or 0 for a zero matrix.
    pub fn sigma_max(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    /// Smallest retained (nonzero) singular value, or 0 for a zero matrix.
    pub fn sigma_min_nonzero(&self) -> f64 {
        self.singular_values.last().copied().unwrap_or(0.0)
    }
}

/// Default relative rank tolerance: max(rows, cols) × machine epsilon.
/// Singular values at or below `tol × σ_max` are treated as zero.
pub fn default_rank_tol(rows: usize, cols: usize) -> f64 {
    rows.max(cols) as f64 * f64::EPSILON
}

/// Thin SVD of `m` with relative rank tolerance `rank_tol` (pass a negative
/// value to use [`default_rank_tol`]).
pub fn thin_svd(m: &DenseMatrix, rank_tol: f64) -> Result<ThinSVD> {
    ensure_all_finite(m.data(), "matrix")?;
    let tol = if rank_tol < 0.0 { default_rank_tol(m.rows(), m.cols()) } else { rank_tol };
    let (rows, cols) = (m.rows(), m.cols());
    if rows == 0 || cols == 0 {
        return Err(invalid("thin_svd requires a non-empty matrix"));
    }
    let na = nalgebra::DMatrix::from_row_slice(rows, cols, m.data());
    // max_niter = 0 lets the iteration run until convergence.
    let svd = nalgebra::linalg::SVD::try_new(na, true, true, f64::EPSILON, 0)
        .ok_or_else(|| numeric(format!("SVD failed to converge on a {rows}x{cols} matrix")))?;
    let u_na = svd.u.as_ref().expect("U requested");
    let v_t_na = svd.v_t.as_ref().expect("Vᵀ requested");
    let k_full = svd.singular_values.len();

    // Sort descending defensively; nalgebra's ordering contract has varied
    // across versions.
    let mut order: Vec<usize> = (0..k_full).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .expect("singular values are finite")
    });
    let sigma_max = svd.singular_values[order[0]].max(0.0);
    let cutoff = tol * sigma_max;
    let rank = order
        .iter()
        .take_while(|&&i| svd.singular_values[i] > cutoff && svd.singular_values[i] > 0.0)
        .count();
    if rank == 0 {
        // Zero matrix: represent with empty factors so downstream code can
        // treat rank uniformly.
        return Ok(ThinSVD {
            u: DenseMatrix::zeros(rows, 0),
            singular_values: Vec::new(),
            v: DenseMatrix::zeros(cols, 0),
            rank: 0,
        });
    }

    let mut u = DenseMatrix::zeros(rows, rank);
    let mut v = DenseMatrix::zeros(cols, rank);
    let mut singular_values = Vec::with_capacity(rank);
    for (out_col, &src_col) in order[..rank].iter().enumerate() {
        singular_values.push(svd.singular_values[src_col]);
        for i in 0..rows {
            u.set(i, out_col, u_na[(i, src_col)]);
        }
        for j in 0..cols {
            v.set(j, out_col, v_t_na[(src_col, j)]);
        }
    }
    Ok(ThinSVD { u, singular_values, v, rank })
}

/// Minimum-norm least-squares solution x = A†b.
///
/// For full-column-rank A this equals the normal-equation solution
/// (AᵀA)⁻¹Aᵀb; for rank-deficient A it is the unique least-squares solution
/// of smallest Euclidean norm. The residual A·x − b is orthogonal to the
/// column space of A.
pub fn pinv_solve(a: &DenseMatrix, b: &RealVector, rank_tol: f64) -> Result<RealVector> {
    if a.rows() != b.len() {
        return Err(invalid(format!(
            "pinv_solve: A has {} rows but b has length {}",
            a.rows(),
            b.len()
        )));
    }
    ensure_all_finite(b, "right-hand side")?;
    let svd = thin_svd(a, rank_tol)?;
    Ok(svd.pinv_apply(b))
}

/// Leverage scores ℓ_i = Σ_j U_{ij}²: the diagonal of the hat matrix
/// X(XᵀX)⁻¹Xᵀ (computed from the rank-k thin factor when X is column-rank
/// deficient).
///
/// Each ℓ_i ∈ [0, 1] and Σ_i ℓ_i = rank(X).
pub fn leverage_scores(x: &DenseMatrix) -> Result<RealVector> {
    if x.rows() < x.cols() {
        return Err(invalid("leverage_scores expects rows >= cols"));
    }
    let svd = thin_svd(x, -1.0)?;
    Ok((0..x.rows()).map(|i| norm_sq(svd.u.row(i))).collect())
}

/// Entry (i, j) of the cross-leverage matrix UUᵀ; the diagonal reproduces
/// [`leverage_scores`].
pub fn cross_leverage(x: &DenseMatrix, i: usize, j: usize) -> Result<f64> {
    if i >= x.rows() || j >= x.rows() {
        return Err(invalid(format!(
            "cross_leverage index ({i}, {j}) out of range for {} rows",
            x.rows()
        )));
    }
    let svd = thin_svd(x, -1.0)?;
    Ok(dot(svd.u.row(i), svd.u.row(j)))
}

/// In-place unnormalized Walsh–Hadamard butterflies applied down the rows of
/// a row-major (n_rows × n_cols) buffer; each column is transformed
/// independently. `n_rows` must be a power of two.
pub(crate) fn fwht_rows(data: &mut [f64], n_rows: usize, n_cols: usize) {
    debug_assert!(n_rows.is_power_of_two());
    debug_assert_eq!(data.len(), n_rows * n_cols);
    let mut h = 1;
    while h < n_rows {
        let span = 2 * h;
        for block in (0..n_rows).step_by(span) {
            for j in block..block + h {
                let (top, bottom) = data.split_at_mut((j + h) * n_cols);
                let a = &mut top[j * n_cols..j * n_cols + n_cols];
                let b = &mut bottom[..n_cols];
                for (x, y) in a.iter_mut().zip(b.iter_mut()) {
                    let s = *x + *y;
                    let d = *x - *y;
                    *x = s;
                    *y = d;
                }
            }
        }
        h = span;
    }
}

/// Fast Walsh–Hadamard transform: returns H·v where H is the unnormalized
/// ±1 Hadamard matrix of order len(v).
///
/// Applying the transform twice scales by the length: fwht(fwht(v)) = n·v.
/// Cost O(n log n). The length must be a power of two (callers needing other
/// lengths zero-pad; see the sketch module).
pub fn fwht(v: &RealVector) -> Result<RealVector> {
    if v.is_empty() || !v.len().is_power_of_two() {
        return Err(invalid(format!("fwht requires a power-of-two length, got {}", v.len())));
    }
    ensure_all_finite(v, "vector")?;
    let mut out = v.clone();
    fwht_rows(&mut out, v.len(), 1);
    Ok(out)
}
