//! Seeded quadratic systems `f(x) = A(x − x̄) + ½[(x − x̄)ᵀHᵢ(x − x̄)]ᵢ`.
//!
//! With `Q = (Q₁, Q₂)` orthogonal of order `n + s`, the data are
//!
//! ```text
//! A  = (B Q₁ᵀ, C)
//! Hᵢ = ( Q₁TᵢQ₁ᵀ  Sᵢ )
//!      ( Sᵢᵀ      Rᵢ )
//! ```
//!
//! so every `x = x̄ + (Q₂y; 0)` is a root, and some members of that family
//! are `n`-sparse. `B, C, Tᵢ, Sᵢ, Rᵢ` have entries uniform in `(−1, 1)`;
//! `Tᵢ` and `Rᵢ` are drawn symmetric (upper triangle, mirrored).

use serde::{Deserialize, Serialize};

use super::{
    seeded_rng, uniform_matrix, uniform_symmetric, uniform_vector, NonlinearSystem, ProblemKind,
    ProblemMeta, SolutionFamily,
};
use crate::numlin::{Matrix, Vector};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticSpec {
    pub n_vars: usize,
    pub n_eqs: usize,
    pub sparsity: usize,
    pub extra: usize,
    pub seed: u64,
    #[serde(with = "super::io::matrix_serde")]
    pub a: Matrix,
    #[serde(with = "super::io::matrix_list_serde")]
    pub h: Vec<Matrix>,
    #[serde(with = "super::io::vector_serde")]
    pub x_bar: Vector,
    /// `(Q₁, Q₂)`, order `n + s`.
    #[serde(with = "super::io::matrix_serde")]
    pub q: Matrix,
    #[serde(with = "super::io::matrix_serde")]
    pub b: Matrix,
    #[serde(with = "super::io::matrix_serde")]
    pub c: Matrix,
    #[serde(with = "super::io::matrix_list_serde")]
    pub t: Vec<Matrix>,
}

impl QuadraticSpec {
    fn block(&self) -> usize {
        self.sparsity + self.extra
    }

    pub fn q1(&self) -> Matrix {
        self.q.columns(0, self.sparsity).into_owned()
    }

    pub fn q2(&self) -> Matrix {
        self.q.columns(self.sparsity, self.extra).into_owned()
    }

    /// Off-diagonal block `Sᵢ` of `Hᵢ`.
    pub fn s_block(&self, i: usize) -> Matrix {
        let k = self.block();
        self.h[i].view((0, k), (k, self.n_vars - k)).into_owned()
    }

    /// Trailing block `Rᵢ` of `Hᵢ`.
    pub fn r_block(&self, i: usize) -> Matrix {
        let k = self.block();
        self.h[i].view((k, k), (self.n_vars - k, self.n_vars - k)).into_owned()
    }

    pub fn family(&self) -> SolutionFamily {
        SolutionFamily::new(self.x_bar.clone(), &self.q2(), self.sparsity)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QuadraticProblem {
    spec: QuadraticSpec,
}

impl QuadraticProblem {
    pub fn spec(&self) -> &QuadraticSpec {
        &self.spec
    }

    pub fn from_spec(spec: QuadraticSpec) -> Result<Self> {
        validate(spec.n_vars, spec.n_eqs, spec.sparsity, spec.extra)?;
        let (n_vars, m) = (spec.n_vars, spec.n_eqs);
        if spec.a.shape() != (m, n_vars)
            || spec.h.len() != m
            || spec.h.iter().any(|h| h.shape() != (n_vars, n_vars))
            || spec.x_bar.len() != n_vars
        {
            return Err(Error::invalid("quadratic spec: inconsistent dimensions"));
        }
        Ok(Self { spec })
    }

    fn offset(&self, x: &Vector) -> Result<Vector> {
        if x.len() != self.spec.n_vars {
            return Err(Error::invalid(format!(
                "expected {} variables, got {}",
                self.spec.n_vars,
                x.len()
            )));
        }
        Ok(x - &self.spec.x_bar)
    }
}

fn validate(n_vars: usize, m: usize, n: usize, s: usize) -> Result<()> {
    if s < 1 || n < 1 || n + s > n_vars {
        return Err(Error::invalid(format!(
            "quadratic: need 1 <= s < n+s <= N, got N={n_vars} n={n} s={s}"
        )));
    }
    if m < 1 || m >= n_vars {
        return Err(Error::invalid(format!("quadratic: need 1 <= m < N, got m={m} N={n_vars}")));
    }
    Ok(())
}

/// Builds a seeded quadratic instance and its solution family.
pub fn make_quadratic(
    n_vars: usize,
    m: usize,
    n: usize,
    s: usize,
    seed: u64,
) -> Result<(QuadraticProblem, SolutionFamily)> {
    validate(n_vars, m, n, s)?;
    let k = n + s;
    let rest = n_vars - k;
    let mut rng = seeded_rng(seed);

    let q = uniform_matrix(&mut rng, k, k).qr().q();
    let b = uniform_matrix(&mut rng, m, n);
    let c = uniform_matrix(&mut rng, m, rest);
    let q1 = q.columns(0, n);

    let mut a = Matrix::zeros(m, n_vars);
    a.view_mut((0, 0), (m, k)).copy_from(&(&b * q1.transpose()));
    a.view_mut((0, k), (m, rest)).copy_from(&c);

    let mut h = Vec::with_capacity(m);
    let mut t = Vec::with_capacity(m);
    for _ in 0..m {
        let ti = uniform_symmetric(&mut rng, n);
        let si = uniform_matrix(&mut rng, k, rest);
        let ri = uniform_symmetric(&mut rng, rest);
        let mut hi = Matrix::zeros(n_vars, n_vars);
        let lead = &q1 * &ti * q1.transpose();
        // symmetrize the product so Hᵢ is exactly symmetric
        let lead = (&lead + lead.transpose()) * 0.5;
        hi.view_mut((0, 0), (k, k)).copy_from(&lead);
        hi.view_mut((0, k), (k, rest)).copy_from(&si);
        hi.view_mut((k, 0), (rest, k)).copy_from(&si.transpose());
        hi.view_mut((k, k), (rest, rest)).copy_from(&ri);
        h.push(hi);
        t.push(ti);
    }

    let mut x_bar = Vector::zeros(n_vars);
    x_bar.rows_mut(0, k).copy_from(&uniform_vector(&mut rng, k));

    let spec = QuadraticSpec {
        n_vars,
        n_eqs: m,
        sparsity: n,
        extra: s,
        seed,
        a,
        h,
        x_bar,
        q,
        b,
        c,
        t,
    };
    let family = spec.family();
    Ok((QuadraticProblem { spec }, family))
}

impl NonlinearSystem for QuadraticProblem {
    fn n_vars(&self) -> usize {
        self.spec.n_vars
    }

    fn n_eqs(&self) -> usize {
        self.spec.n_eqs
    }

    fn eval(&self, x: &Vector) -> Result<Vector> {
        let d = self.offset(x)?;
        let mut f = &self.spec.a * &d;
        for (fi, hi) in f.iter_mut().zip(&self.spec.h) {
            *fi += 0.5 * d.dot(&(hi * &d));
        }
        Ok(f)
    }

    fn jacobian(&self, x: &Vector) -> Result<Matrix> {
        let d = self.offset(x)?;
        let mut jac = self.spec.a.clone();
        for (i, hi) in self.spec.h.iter().enumerate() {
            let g = hi * &d;
            for j in 0..self.spec.n_vars {
                jac[(i, j)] += g[j];
            }
        }
        Ok(jac)
    }

    fn meta(&self) -> ProblemMeta {
        let s = &self.spec;
        ProblemMeta {
            kind: ProblemKind::Quadratic,
            label: format!(
                "quadratic N={} m={} n={} s={}",
                s.n_vars, s.n_eqs, s.sparsity, s.extra
            ),
            seed: Some(s.seed),
        }
    }
}
