//! The fixed 8-variable, 5-equation system `f(x) = Ax + φ(x) − y`.

use super::{NonlinearSystem, ProblemKind, ProblemMeta};
use crate::numlin::{Matrix, Vector};
use crate::{Error, Result};

const ROWS: usize = 5;
const COLS: usize = 8;

#[rustfmt::skip]
const A: [[f64; COLS]; ROWS] = [
    [-3.933,  0.107,  0.126,   0.0,   -9.99,   0.0,   -48.83,  -7.64],
    [ 0.0,   -0.987,  0.0,   -22.95,   0.0,  -28.37,    0.0,    0.0 ],
    [ 0.0002, 0.0,   -0.235,   0.0,    5.67,   0.0,    -0.921, -6.51],
    [ 0.0,    1.0,    0.0,    -1.0,    0.0,   -0.168,   0.0,    0.0 ],
    [ 0.0,    0.0,   -1.0,     0.0,   -0.196,  0.0,    -0.0071, 0.0 ],
];

const Y: [f64; ROWS] = [0.999, -1.4185, -0.5670, -0.0084, 0.0196];

/// `(row, coefficient, i, j)`: the term `coefficient · x(i) · x(j)` in `φ(row)`, 0-based.
#[rustfmt::skip]
const BILINEAR: [(usize, f64, usize, usize); 12] = [
    (0, -0.727, 1, 2), (0, 8.39, 2, 3), (0, -684.4, 3, 4), (0, 63.5, 3, 6),
    (1, 0.949, 0, 1), (1, -1.578, 0, 3), (1, -1.132, 3, 6),
    (2, -0.716, 0, 1), (2, -1.578, 0, 3), (2, 1.132, 3, 6),
    (3, -1.0, 0, 4),
    (4, 1.0, 0, 3),
];

/// The known sparse solution `(0, 0, 0, 0, −0.1, 0.05, 0, 0)`.
pub const SMALL_SOLUTION: [f64; COLS] = [0.0, 0.0, 0.0, 0.0, -0.1, 0.05, 0.0, 0.0];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SmallProblem;

pub fn small_problem() -> SmallProblem {
    SmallProblem
}

impl SmallProblem {
    pub fn linear_part() -> Matrix {
        Matrix::from_fn(ROWS, COLS, |i, j| A[i][j])
    }

    pub fn rhs() -> Vector {
        Vector::from_column_slice(&Y)
    }
}

impl NonlinearSystem for SmallProblem {
    fn n_vars(&self) -> usize {
        COLS
    }

    fn n_eqs(&self) -> usize {
        ROWS
    }

    fn eval(&self, x: &Vector) -> Result<Vector> {
        if x.len() != COLS {
            return Err(Error::invalid(format!("expected {COLS} variables, got {}", x.len())));
        }
        let mut f = Self::linear_part() * x - Self::rhs();
        for &(row, c, i, j) in &BILINEAR {
            f[row] += c * x[i] * x[j];
        }
        Ok(f)
    }

    fn jacobian(&self, x: &Vector) -> Result<Matrix> {
        if x.len() != COLS {
            return Err(Error::invalid(format!("expected {COLS} variables, got {}", x.len())));
        }
        let mut jac = Self::linear_part();
        for &(row, c, i, j) in &BILINEAR {
            jac[(row, i)] += c * x[j];
            jac[(row, j)] += c * x[i];
        }
        Ok(jac)
    }

    fn meta(&self) -> ProblemMeta {
        ProblemMeta {
            kind: ProblemKind::Small,
            label: "small bilinear system (N=8, m=5)".into(),
            seed: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{check_jacobian, seeded_rng, uniform_vector};

    #[test]
    fn known_solution_is_a_root() {
        let f = small_problem().eval(&Vector::from_column_slice(&SMALL_SOLUTION)).unwrap();
        assert!(f.norm() <= 1e-13, "‖f(x̂)‖ = {}", f.norm());
    }

    #[test]
    fn value_at_origin_is_minus_y() {
        let f = small_problem().eval(&Vector::zeros(8)).unwrap();
        let expected = [-0.999, 1.4185, 0.5670, 0.0084, -0.0196];
        for (a, b) in f.iter().zip(expected) {
            assert_eq!(*a, b);
        }
    }

    #[test]
    fn jacobian_at_origin_is_linear_part() {
        assert_eq!(small_problem().jacobian(&Vector::zeros(8)).unwrap(), SmallProblem::linear_part());
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut rng = seeded_rng(17);
        for _ in 0..5 {
            let x = uniform_vector(&mut rng, 8);
            let err = check_jacobian(&small_problem(), &x, 1e-6).unwrap();
            assert!(err <= 1e-6, "relative error {err}");
        }
    }

    #[test]
    fn wrong_length_is_rejected() {
        assert!(small_problem().eval(&Vector::zeros(3)).is_err());
        assert!(small_problem().jacobian(&Vector::zeros(9)).is_err());
    }
}
