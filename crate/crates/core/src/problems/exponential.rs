//! Seeded exponential systems `f(x) = A·exp(Bx) − b`.
//!
//! `A` (`m × N`) is truncated to rank `m − p` and the leading `n + s`
//! columns of `B` (`N × N`) to rank `n`, both by zeroing trailing singular
//! values and recomposing. With `x̄ = (z̄, 0)` and `b = A·exp(Bx̄)`, every
//! `x̄ + (V₂y; 0)` with `range(V₂) = null(B(:, 1:n+s))` is a root.

use serde::{Deserialize, Serialize};

use super::{
    seeded_rng, uniform_matrix, uniform_vector, NonlinearSystem, ProblemKind, ProblemMeta,
    SolutionFamily,
};
use crate::numlin::{thin_svd, Matrix, Vector};
use crate::{Error, Result};

/// Evaluators refuse points where some `|(Bx)ᵢ|` exceeds this.
pub const EXP_DOMAIN_LIMIT: f64 = 700.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentialSpec {
    pub n_vars: usize,
    pub n_eqs: usize,
    pub sparsity: usize,
    pub extra: usize,
    pub rank_drop: usize,
    pub seed: u64,
    #[serde(with = "super::io::matrix_serde")]
    pub a: Matrix,
    #[serde(with = "super::io::matrix_serde")]
    pub b_mat: Matrix,
    #[serde(with = "super::io::vector_serde")]
    pub b_vec: Vector,
    #[serde(with = "super::io::vector_serde")]
    pub x_bar: Vector,
    /// `(n + s) × s` basis of `null(B(:, 1:n+s))`.
    #[serde(with = "super::io::matrix_serde")]
    pub v2: Matrix,
}

impl ExponentialSpec {
    pub fn family(&self) -> SolutionFamily {
        SolutionFamily::new(self.x_bar.clone(), &self.v2, self.sparsity)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExponentialProblem {
    spec: ExponentialSpec,
}

impl ExponentialProblem {
    pub fn spec(&self) -> &ExponentialSpec {
        &self.spec
    }

    pub fn from_spec(spec: ExponentialSpec) -> Result<Self> {
        validate(spec.n_vars, spec.n_eqs, spec.sparsity, spec.extra, spec.rank_drop)?;
        let (n_vars, m) = (spec.n_vars, spec.n_eqs);
        if spec.a.shape() != (m, n_vars)
            || spec.b_mat.shape() != (n_vars, n_vars)
            || spec.b_vec.len() != m
            || spec.x_bar.len() != n_vars
            || spec.v2.shape() != (spec.sparsity + spec.extra, spec.extra)
        {
            return Err(Error::invalid("exponential spec: inconsistent dimensions"));
        }
        Ok(Self { spec })
    }

    /// `exp(Bx)`, or a domain error when some exponent exceeds the limit.
    fn exp_bx(&self, x: &Vector) -> Result<Vector> {
        if x.len() != self.spec.n_vars {
            return Err(Error::invalid(format!(
                "expected {} variables, got {}",
                self.spec.n_vars,
                x.len()
            )));
        }
        let bx = &self.spec.b_mat * x;
        if let Some(v) = bx.iter().find(|v| !(v.abs() <= EXP_DOMAIN_LIMIT)) {
            return Err(Error::Domain(format!("exponent {v} outside ±{EXP_DOMAIN_LIMIT}")));
        }
        Ok(bx.map(f64::exp))
    }
}

fn validate(n_vars: usize, m: usize, n: usize, s: usize, p: usize) -> Result<()> {
    if n < 1 || s < 1 || n + s >= m {
        return Err(Error::invalid(format!(
            "exponential: need n, s >= 1 and n+s < m, got n={n} s={s} m={m}"
        )));
    }
    if p >= m {
        return Err(Error::invalid(format!("exponential: need p < m, got p={p} m={m}")));
    }
    if m >= n_vars {
        return Err(Error::invalid(format!("exponential: need m < N, got m={m} N={n_vars}")));
    }
    Ok(())
}

/// Recomposes `u·diag(σ)·vᵀ` keeping only the leading `rank` singular values;
/// also returns the right singular vectors as columns.
fn truncate_rank(m: &Matrix, rank: usize) -> Result<(Matrix, Matrix)> {
    let (u, mut sigma, v) = thin_svd(m)?;
    for s in sigma.iter_mut().skip(rank) {
        *s = 0.0;
    }
    let recomposed = &u * Matrix::from_diagonal(&Vector::from_vec(sigma)) * v.transpose();
    Ok((recomposed, v))
}

/// Builds a seeded exponential instance and its solution family.
pub fn make_exponential(
    n_vars: usize,
    m: usize,
    n: usize,
    s: usize,
    p: usize,
    seed: u64,
) -> Result<(ExponentialProblem, SolutionFamily)> {
    validate(n_vars, m, n, s, p)?;
    let k = n + s;
    let mut rng = seeded_rng(seed);

    let (a, _) = truncate_rank(&uniform_matrix(&mut rng, m, n_vars), m - p)?;

    let mut b_mat = uniform_matrix(&mut rng, n_vars, n_vars);
    let (lead, v) = truncate_rank(&b_mat.columns(0, k).into_owned(), n)?;
    b_mat.columns_mut(0, k).copy_from(&lead);
    let v2 = v.columns(n, s).into_owned();

    let mut x_bar = Vector::zeros(n_vars);
    x_bar.rows_mut(0, k).copy_from(&uniform_vector(&mut rng, k));
    let b_vec = &a * (&b_mat * &x_bar).map(f64::exp);

    let spec = ExponentialSpec {
        n_vars,
        n_eqs: m,
        sparsity: n,
        extra: s,
        rank_drop: p,
        seed,
        a,
        b_mat,
        b_vec,
        x_bar,
        v2,
    };
    let family = spec.family();
    Ok((ExponentialProblem { spec }, family))
}

impl NonlinearSystem for ExponentialProblem {
    fn n_vars(&self) -> usize {
        self.spec.n_vars
    }

    fn n_eqs(&self) -> usize {
        self.spec.n_eqs
    }

    fn eval(&self, x: &Vector) -> Result<Vector> {
        Ok(&self.spec.a * self.exp_bx(x)? - &self.spec.b_vec)
    }

    /// Chain rule: `J(x) = A·diag(exp(Bx))·B`.
    fn jacobian(&self, x: &Vector) -> Result<Matrix> {
        let e = self.exp_bx(x)?;
        let mut scaled = self.spec.a.clone();
        for (mut col, w) in scaled.column_iter_mut().zip(e.iter()) {
            col *= *w;
        }
        Ok(scaled * &self.spec.b_mat)
    }

    fn meta(&self) -> ProblemMeta {
        let s = &self.spec;
        ProblemMeta {
            kind: ProblemKind::Exponential,
            label: format!(
                "exponential N={} m={} n={} s={} p={}",
                s.n_vars, s.n_eqs, s.sparsity, s.extra, s.rank_drop
            ),
            seed: Some(s.seed),
        }
    }
}
