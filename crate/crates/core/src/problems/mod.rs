//! Nonlinear test systems with known sparse solution families.
//!
//! Three constructions are provided: a fixed 5×8 bilinear system
//! ([`small_problem`]), a seeded quadratic family ([`make_quadratic`]) and a
//! seeded exponential family ([`make_exponential`]). [`LinearSystem`] is a
//! plain `Mx − b` system used as a fixture. All generators draw from
//! [`seeded_rng`], so identical parameters and seed give bitwise-identical
//! instances on every platform.

mod exponential;
mod io;
mod linear;
mod quadratic;
mod small;

pub use exponential::{make_exponential, ExponentialProblem, ExponentialSpec, EXP_DOMAIN_LIMIT};
pub use io::{instance_to_string, read_instance, write_instance, Instance};
pub(crate) use io::vector_serde;
pub use linear::LinearSystem;
pub use quadratic::{make_quadratic, QuadraticProblem, QuadraticSpec};
pub use small::{small_problem, SmallProblem, SMALL_SOLUTION};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::numlin::{numerical_rank, Matrix, Vector};
use crate::Result;

/// Which construction produced a system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Small,
    Linear,
    Quadratic,
    Exponential,
}

/// Descriptive label plus generation parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemMeta {
    pub kind: ProblemKind,
    pub label: String,
    pub seed: Option<u64>,
}

/// A system `f: Rᴺ → Rᵐ`, `m < N`, with an analytic Jacobian.
pub trait NonlinearSystem: Sync {
    fn n_vars(&self) -> usize;
    fn n_eqs(&self) -> usize;
    /// `f(x)`; fails with [`crate::Error::Domain`] outside the evaluator's domain.
    fn eval(&self, x: &Vector) -> Result<Vector>;
    /// `J(x)`, an `m × N` matrix.
    fn jacobian(&self, x: &Vector) -> Result<Matrix>;
    fn meta(&self) -> ProblemMeta;
}

/// Known solutions `x̄ + basis·y` of a generated system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFamily {
    pub x_bar: Vector,
    /// `N × s`, zero outside the leading `n + s` rows.
    pub basis: Matrix,
    /// Target sparsity `n`.
    pub sparsity: usize,
    /// A family member with exactly `n` nonzeros in the leading block.
    pub sparse_solution: Vector,
}

impl SolutionFamily {
    pub fn member(&self, y: &Vector) -> Vector {
        &self.x_bar + &self.basis * y
    }

    pub(crate) fn new(x_bar: Vector, block_basis: &Matrix, sparsity: usize) -> Self {
        let n_vars = x_bar.len();
        let (block, s) = block_basis.shape();
        let mut basis = Matrix::zeros(n_vars, s);
        basis.view_mut((0, 0), (block, s)).copy_from(block_basis);
        let zero_rows = pivot_rows(block_basis);
        let mut lhs = Matrix::zeros(s, s);
        let mut rhs = Vector::zeros(s);
        for (r, &row) in zero_rows.iter().enumerate() {
            lhs.set_row(r, &block_basis.row(row));
            rhs[r] = -x_bar[row];
        }
        let y = lhs.lu().solve(&rhs).unwrap_or_else(|| Vector::zeros(s));
        let mut sparse_solution = &x_bar + &basis * y;
        for &row in &zero_rows {
            sparse_solution[row] = 0.0;
        }
        Self {
            x_bar,
            basis,
            sparsity,
            sparse_solution,
        }
    }
}

/// Rows of a tall matrix chosen by Gaussian elimination with partial pivoting.
fn pivot_rows(m: &Matrix) -> Vec<usize> {
    let mut work = m.clone();
    let mut free: Vec<usize> = (0..m.nrows()).collect();
    let mut chosen = Vec::with_capacity(m.ncols());
    for col in 0..m.ncols() {
        let (pos, &row) = free
            .iter()
            .enumerate()
            .max_by(|a, b| work[(*a.1, col)].abs().total_cmp(&work[(*b.1, col)].abs()))
            .expect("tall matrix");
        free.remove(pos);
        chosen.push(row);
        let pivot = work[(row, col)];
        if pivot == 0.0 {
            continue;
        }
        for &other in &free {
            let factor = work[(other, col)] / pivot;
            for c in col..m.ncols() {
                let v = work[(row, c)];
                work[(other, c)] -= factor * v;
            }
        }
    }
    chosen
}

/// The generator used everywhere: ChaCha8 seeded from a `u64`.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn uniform_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Matrix {
    // row-major draw order, independent of storage layout
    let mut m = Matrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = rng.random_range(-1.0..1.0);
        }
    }
    m
}

pub(crate) fn uniform_symmetric<R: Rng>(rng: &mut R, n: usize) -> Matrix {
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = rng.random_range(-1.0..1.0);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

pub(crate) fn uniform_vector<R: Rng>(rng: &mut R, len: usize) -> Vector {
    Vector::from_iterator(len, (0..len).map(|_| rng.random_range(-1.0..1.0)))
}

/// Central-difference check of `sys.jacobian` at `x`.
///
/// Returns the largest error `|fd − J| / max(|J|, 1)` over entries with
/// `|J| > 1e-8`: relative for entries of magnitude above one, absolute
/// below, so cancellation noise of order `ε‖f‖/h` does not swamp tiny
/// entries.
pub fn check_jacobian(sys: &dyn NonlinearSystem, x: &Vector, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(crate::Error::invalid("finite-difference step must be positive"));
    }
    let jac = sys.jacobian(x)?;
    let mut worst: f64 = 0.0;
    let mut xp = x.clone();
    for j in 0..sys.n_vars() {
        let orig = xp[j];
        xp[j] = orig + h;
        let fp = sys.eval(&xp)?;
        xp[j] = orig - h;
        let fm = sys.eval(&xp)?;
        xp[j] = orig;
        for i in 0..sys.n_eqs() {
            let analytic = jac[(i, j)];
            if analytic.abs() > 1e-8 {
                let fd = (fp[i] - fm[i]) / (2.0 * h);
                worst = worst.max((fd - analytic).abs() / analytic.abs().max(1.0));
            }
        }
    }
    Ok(worst)
}

/// Self-checks printed by the `gen` command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationSummary {
    pub jacobian_rank_at_x_bar: usize,
    pub residual_at_x_bar: f64,
    /// Largest `‖f‖` over ten random family members.
    pub max_family_residual: f64,
    pub sparse_solution_residual: f64,
    pub sparse_solution_nnz: usize,
}

/// Evaluates the family invariants of a generated instance.
pub fn verify_family(
    sys: &dyn NonlinearSystem,
    family: &SolutionFamily,
    seed: u64,
) -> Result<VerificationSummary> {
    let mut rng = seeded_rng(seed ^ 0x5eed_fa31_1e57_0001);
    let s = family.basis.ncols();
    let mut max_family_residual: f64 = 0.0;
    for _ in 0..10 {
        let y = uniform_vector(&mut rng, s);
        max_family_residual = max_family_residual.max(sys.eval(&family.member(&y))?.norm());
    }
    Ok(VerificationSummary {
        jacobian_rank_at_x_bar: numerical_rank(&sys.jacobian(&family.x_bar)?)?,
        residual_at_x_bar: sys.eval(&family.x_bar)?.norm(),
        max_family_residual,
        sparse_solution_residual: sys.eval(&family.sparse_solution)?.norm(),
        sparse_solution_nnz: family.sparse_solution.iter().filter(|v| **v != 0.0).count(),
    })
}
