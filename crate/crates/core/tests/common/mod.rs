//! Random fixtures and independent oracles shared by the integration tests.
//!
//! The oracles use nalgebra's QR and LU directly, never the crate's
//! SVD-based routines.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparse_gn::greedy_gn::SupportSet;

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

pub fn uniform_vector(rng: &mut ChaCha8Rng, len: usize) -> Vector {
    Vector::from_fn(len, |_, _| rng.random_range(-1.0..1.0))
}

/// A random `(J, f, Ω)` with `m ≤ 12`, `N ≤ 40` and `|Ω| < m`.
pub struct Triple {
    pub jac: Matrix,
    pub f: Vector,
    pub support: SupportSet,
}

pub fn random_triple(seed: u64) -> Triple {
    let mut r = rng(seed);
    let m = r.random_range(2..=12);
    let n_vars = r.random_range(m + 1..=40);
    let size = r.random_range(0..m);
    let mut idx: Vec<usize> = (0..n_vars).collect();
    for i in 0..size {
        let j = r.random_range(i..n_vars);
        idx.swap(i, j);
    }
    Triple {
        jac: uniform_matrix(&mut r, m, n_vars),
        f: uniform_vector(&mut r, m),
        support: SupportSet::from_indices(n_vars, idx[..size].iter().copied()).unwrap(),
    }
}

pub fn columns(a: &Matrix, cols: &[usize]) -> Matrix {
    Matrix::from_fn(a.nrows(), cols.len(), |i, k| a[(i, cols[k])])
}

/// Orthonormal basis of `range(L)` for full-column-rank `L`, via thin QR.
pub fn qr_basis(l: &Matrix) -> Matrix {
    if l.ncols() == 0 {
        return Matrix::zeros(l.nrows(), 0);
    }
    l.clone().qr().q()
}

/// `v − QQᵀv`.
pub fn project_out(q: &Matrix, v: &Vector) -> Vector {
    v - q * (q.transpose() * v)
}

/// Least-squares coefficients for full-column-rank `L` from the normal equations via QR.
pub fn qr_lstsq(l: &Matrix, b: &Vector) -> Vector {
    if l.ncols() == 0 {
        return Vector::zeros(0);
    }
    let qr = l.clone().qr();
    let qtb = qr.q().transpose() * b;
    qr.r().solve_upper_triangular(&qtb).expect("full column rank")
}

/// `‖f + J p_t‖` where `p_t` is the joint least-squares step on `Ω ∪ {t}`.
pub fn joint_residual(jac: &Matrix, f: &Vector, support: &[usize], t: usize) -> f64 {
    let mut cols = support.to_vec();
    cols.push(t);
    let l = columns(jac, &cols);
    let coef = qr_lstsq(&l, f);
    (f - l * coef).norm()
}

/// `min_δ ‖Pf + δ a_t‖` with the front residual `Pf` held fixed.
pub fn fixed_front_residual(jac: &Matrix, f: &Vector, support: &[usize], t: usize) -> f64 {
    let q = qr_basis(&columns(jac, support));
    let r = project_out(&q, f);
    let a = jac.column(t).into_owned();
    let delta = -a.dot(&r) / a.norm_squared();
    (r + a * delta).norm()
}

/// Index minimizing `value`, smallest index on ties.
pub fn argmin_by(candidates: &[usize], mut value: impl FnMut(usize) -> f64) -> usize {
    let mut best = (candidates[0], value(candidates[0]));
    for &t in &candidates[1..] {
        let v = value(t);
        if v < best.1 {
            best = (t, v);
        }
    }
    best.0
}

/// `min cᵀw` over basic feasible solutions by enumerating all `m`-column bases.
pub fn basis_enumeration(c: &Vector, a: &Matrix, b: &Vector) -> Option<f64> {
    let (m, n) = a.shape();
    let mut best: Option<f64> = None;
    let mut subset: Vec<usize> = (0..m).collect();
    loop {
        let basis = columns(a, &subset);
        let lu = basis.clone().lu();
        if lu.determinant().abs() > 1e-10 {
            if let Some(w) = lu.solve(b) {
                if w.iter().all(|v| *v >= -1e-12) {
                    let obj: f64 = subset.iter().zip(w.iter()).map(|(&j, v)| c[j] * v).sum();
                    best = Some(best.map_or(obj, |b: f64| b.min(obj)));
                }
            }
        }
        // next combination in lexicographic order
        let mut i = m;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if subset[i] < n - m + i {
                break;
            }
        }
        subset[i] += 1;
        for k in i + 1..m {
            subset[k] = subset[k - 1] + 1;
        }
    }
}
