use serde::{Deserialize, Serialize};

use super::{NonlinearSystem, ProblemKind, ProblemMeta};
use crate::numlin::{Matrix, Vector};
use crate::{Error, Result};

/// `f(x) = Mx − b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSystem {
    #[serde(with = "super::io::matrix_serde")]
    pub matrix: Matrix,
    #[serde(with = "super::io::vector_serde")]
    pub rhs: Vector,
}

impl LinearSystem {
    pub fn new(matrix: Matrix, rhs: Vector) -> Result<Self> {
        if matrix.nrows() != rhs.len() {
            return Err(Error::invalid("linear system: rhs length differs from row count"));
        }
        if matrix.nrows() == 0 || matrix.ncols() == 0 {
            return Err(Error::invalid("linear system: empty matrix"));
        }
        Ok(Self { matrix, rhs })
    }
}

impl NonlinearSystem for LinearSystem {
    fn n_vars(&self) -> usize {
        self.matrix.ncols()
    }

    fn n_eqs(&self) -> usize {
        self.matrix.nrows()
    }

    fn eval(&self, x: &Vector) -> Result<Vector> {
        if x.len() != self.n_vars() {
            return Err(Error::invalid("linear system: wrong argument length"));
        }
        Ok(&self.matrix * x - &self.rhs)
    }

    fn jacobian(&self, x: &Vector) -> Result<Matrix> {
        if x.len() != self.n_vars() {
            return Err(Error::invalid("linear system: wrong argument length"));
        }
        Ok(self.matrix.clone())
    }

    fn meta(&self) -> ProblemMeta {
        ProblemMeta {
            kind: ProblemKind::Linear,
            label: format!("linear system ({}x{})", self.n_eqs(), self.n_vars()),
            seed: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::check_jacobian;

    #[test]
    fn constant_jacobian_passes_fd_check() {
        let m = Matrix::from_row_slice(2, 3, &[1.0, -2.0, 0.5, 3.0, 0.25, -1.0]);
        let sys = LinearSystem::new(m, Vector::from_vec(vec![1.0, 2.0])).unwrap();
        // cancellation noise grows like ε‖f‖/h, so keep ‖f‖ of order one
        for x in [Vector::zeros(3), Vector::from_vec(vec![0.3, -0.2, 0.1])] {
            let err = check_jacobian(&sys, &x, 1e-6).unwrap();
            assert!(err <= 1e-9, "relative error {err}");
        }
    }
}
