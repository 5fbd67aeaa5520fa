//! Dense least-squares kernels shared by every solver.
//!
//! All routines go through a singular value decomposition computed by
//! `faer`; nalgebra's own SVD loses accuracy on some exactly rank-deficient
//! inputs, which the greedy iterations produce routinely. A singular value
//! `σᵢ` counts toward the numerical rank iff
//! `σᵢ > max(rows, cols) · σ_max · ε` with `ε` the `f64` unit roundoff.
//! Zero-column matrices are valid inputs and behave as an empty range.
//!
//! The incremental structure of the greedy solver would allow QR
//! updating/downdating between iterations; every call here refactors from
//! scratch.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Rank cutoff for a `rows × cols` matrix whose largest singular value is `sigma_max`.
pub fn rank_threshold(rows: usize, cols: usize, sigma_max: f64) -> f64 {
    rows.max(cols) as f64 * sigma_max * f64::EPSILON
}

fn check_finite_matrix(a: &Matrix, what: &str) -> Result<()> {
    if a.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::invalid(format!("{what} has non-finite entries")))
    }
}

fn check_finite_vector(v: &Vector, what: &str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::invalid(format!("{what} has non-finite entries")))
    }
}

/// Thin SVD `A = U·diag(σ)·Vᵀ` with `σ` descending; `U` is `m × k`, `V` is
/// `n × k`, `k = min(m, n)`.
pub fn thin_svd(a: &Matrix) -> Result<(Matrix, Vec<f64>, Matrix)> {
    check_finite_matrix(a, "svd input")?;
    let (m, n) = a.shape();
    let k = m.min(n);
    if k == 0 {
        return Ok((Matrix::zeros(m, 0), Vec::new(), Matrix::zeros(n, 0)));
    }
    let fa = faer::Mat::<f64>::from_fn(m, n, |i, j| a[(i, j)]);
    let svd = fa
        .thin_svd()
        .map_err(|e| Error::Domain(format!("singular value decomposition failed: {e:?}")))?;
    let (fu, fv) = (svd.U(), svd.V());
    let sigma = svd.S().column_vector();
    Ok((
        Matrix::from_fn(m, k, |i, j| fu[(i, j)]),
        (0..k).map(|i| sigma[i]).collect(),
        Matrix::from_fn(n, k, |i, j| fv[(i, j)]),
    ))
}

/// Truncated SVD: the singular triplets above the rank threshold.
struct RankRevealed {
    u: Matrix,
    sigma: Vec<f64>,
    v: Matrix,
}

impl RankRevealed {
    /// `a` must be finite.
    fn new(a: &Matrix) -> Self {
        let (u, sigma, v) = thin_svd(a).expect("finite input");
        let smax = sigma.first().copied().unwrap_or(0.0);
        let cutoff = rank_threshold(a.nrows(), a.ncols(), smax);
        let rank = sigma.iter().filter(|&&s| s > cutoff).count();
        Self {
            u: u.columns(0, rank).into_owned(),
            sigma: sigma[..rank].to_vec(),
            v: v.columns(0, rank).into_owned(),
        }
    }

    fn rank(&self) -> usize {
        self.sigma.len()
    }

    fn pinv_apply(&self, b: &Vector) -> Vector {
        let mut coef = self.u.tr_mul(b);
        for (c, s) in coef.iter_mut().zip(&self.sigma) {
            *c /= s;
        }
        &self.v * coef
    }
}

/// Minimum-norm least-squares solution `x = A⁺b`.
pub fn min_norm_lstsq(a: &Matrix, b: &Vector) -> Result<Vector> {
    if a.nrows() != b.len() {
        return Err(Error::invalid(format!(
            "lstsq: matrix has {} rows but rhs has length {}",
            a.nrows(),
            b.len()
        )));
    }
    check_finite_matrix(a, "lstsq matrix")?;
    check_finite_vector(b, "lstsq rhs")?;
    Ok(RankRevealed::new(a).pinv_apply(b))
}

/// `(I − LL⁺)v`: the part of `v` orthogonal to `range(L)`.
pub fn residual_projection(l: &Matrix, v: &Vector) -> Result<Vector> {
    if l.nrows() != v.len() {
        return Err(Error::invalid(format!(
            "projection: matrix has {} rows but vector has length {}",
            l.nrows(),
            v.len()
        )));
    }
    check_finite_vector(v, "projected vector")?;
    Ok(RangeBasis::new(l)?.project_out(v))
}

/// Number of singular values above the rank threshold.
pub fn numerical_rank(a: &Matrix) -> Result<usize> {
    check_finite_matrix(a, "rank matrix")?;
    Ok(RankRevealed::new(a).rank())
}

/// Orthonormal basis of `range(L)`, reusable for projecting many vectors.
#[derive(Debug, Clone)]
pub struct RangeBasis {
    basis: Matrix,
}

impl RangeBasis {
    pub fn new(l: &Matrix) -> Result<Self> {
        check_finite_matrix(l, "range matrix")?;
        Ok(Self {
            basis: RankRevealed::new(l).u,
        })
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    /// `(I − LL⁺)v`. Panics if `v` has the wrong length.
    pub fn project_out(&self, v: &Vector) -> Vector {
        assert_eq!(v.len(), self.dim(), "projection length mismatch");
        if self.rank() == 0 {
            return v.clone();
        }
        v - &self.basis * self.basis.tr_mul(v)
    }

    /// `(I − LL⁺)M` applied to every column of `m`.
    pub fn project_out_columns(&self, m: &Matrix) -> Matrix {
        assert_eq!(m.nrows(), self.dim(), "projection length mismatch");
        if self.rank() == 0 {
            return m.clone();
        }
        m - &self.basis * self.basis.tr_mul(m)
    }

    /// `LL⁺v`, the projection onto `range(L)`.
    pub fn project_onto(&self, v: &Vector) -> Vector {
        v - self.project_out(v)
    }
}

/// Columns of `a` listed in `cols`, in that order.
pub fn select_columns(a: &Matrix, cols: &[usize]) -> Matrix {
    Matrix::from_fn(a.nrows(), cols.len(), |i, j| a[(i, cols[j])])
}
