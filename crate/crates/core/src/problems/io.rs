//! Instance files.
//!
//! An instance is stored as a single JSON document:
//!
//! ```text
//! {
//!   "format": "sparse-gn-instance",
//!   "version": 1,
//!   "problem": { "kind": "quadratic" | "exponential" | "linear" | "small", ...fields }
//! }
//! ```
//!
//! Matrices are objects `{"rows": r, "cols": c, "data": [...]}` with `data`
//! in row-major order; vectors are plain arrays. Numbers are written in the
//! shortest form that round-trips exactly, so a read/write cycle is lossless.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    ExponentialProblem, LinearSystem, NonlinearSystem, ProblemMeta, QuadraticProblem,
    SmallProblem,
};
use crate::numlin::{Matrix, Vector};
use crate::{Error, Result};

const FORMAT: &str = "sparse-gn-instance";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Instance {
    Small,
    Linear(LinearSystem),
    Quadratic(QuadraticProblem),
    Exponential(ExponentialProblem),
}

impl Instance {
    fn system(&self) -> &dyn NonlinearSystem {
        match self {
            Instance::Small => &SmallProblem,
            Instance::Linear(s) => s,
            Instance::Quadratic(s) => s,
            Instance::Exponential(s) => s,
        }
    }

    fn validate(self) -> std::result::Result<Self, Error> {
        Ok(match self {
            Instance::Quadratic(p) => {
                Instance::Quadratic(QuadraticProblem::from_spec(p.spec().clone())?)
            }
            Instance::Exponential(p) => {
                Instance::Exponential(ExponentialProblem::from_spec(p.spec().clone())?)
            }
            Instance::Linear(l) => Instance::Linear(LinearSystem::new(l.matrix, l.rhs)?),
            Instance::Small => Instance::Small,
        })
    }
}

impl NonlinearSystem for Instance {
    fn n_vars(&self) -> usize {
        self.system().n_vars()
    }
    fn n_eqs(&self) -> usize {
        self.system().n_eqs()
    }
    fn eval(&self, x: &Vector) -> Result<Vector> {
        self.system().eval(x)
    }
    fn jacobian(&self, x: &Vector) -> Result<Matrix> {
        self.system().jacobian(x)
    }
    fn meta(&self) -> ProblemMeta {
        self.system().meta()
    }
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    format: String,
    version: u32,
    problem: Instance,
}

/// Serializes an instance to its JSON text.
pub fn instance_to_string(instance: &Instance) -> String {
    let env = Envelope {
        format: FORMAT.into(),
        version: VERSION,
        problem: instance.clone(),
    };
    serde_json::to_string(&env).expect("instances always serialize")
}

pub fn write_instance(instance: &Instance, path: &Path) -> Result<()> {
    fs::write(path, instance_to_string(instance) + "\n").map_err(|e| Error::io(path, e))
}

pub fn read_instance(path: &Path) -> Result<Instance> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bad = |reason: String| Error::Format {
        path: path.to_path_buf(),
        reason,
    };
    let env: Envelope = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
    if env.format != FORMAT || env.version != VERSION {
        return Err(bad(format!(
            "expected {FORMAT} v{VERSION}, found {} v{}",
            env.format, env.version
        )));
    }
    env.problem.validate().map_err(|e| bad(e.to_string()))
}

pub(crate) mod matrix_serde {
    use super::Matrix;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    pub(super) struct Dense {
        rows: usize,
        cols: usize,
        data: Vec<f64>,
    }

    pub(super) fn to_dense(m: &Matrix) -> Dense {
        Dense {
            rows: m.nrows(),
            cols: m.ncols(),
            data: m.transpose().as_slice().to_vec(),
        }
    }

    pub(super) fn from_dense<E: serde::de::Error>(d: Dense) -> Result<Matrix, E> {
        if d.rows * d.cols != d.data.len() {
            return Err(E::custom(format!(
                "matrix {}x{} carries {} entries",
                d.rows,
                d.cols,
                d.data.len()
            )));
        }
        Ok(Matrix::from_row_slice(d.rows, d.cols, &d.data))
    }

    pub fn serialize<S: Serializer>(m: &Matrix, s: S) -> Result<S::Ok, S::Error> {
        to_dense(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Matrix, D::Error> {
        from_dense(Dense::deserialize(d)?)
    }
}

pub(crate) mod matrix_list_serde {
    use super::matrix_serde::{from_dense, to_dense, Dense};
    use super::Matrix;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(ms: &[Matrix], s: S) -> Result<S::Ok, S::Error> {
        ms.iter().map(to_dense).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Matrix>, D::Error> {
        Vec::<Dense>::deserialize(d)?.into_iter().map(from_dense).collect()
    }
}

pub(crate) mod vector_serde {
    use super::Vector;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Vector, s: S) -> Result<S::Ok, S::Error> {
        v.as_slice().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vector, D::Error> {
        Ok(Vector::from_vec(Vec::<f64>::deserialize(d)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{make_exponential, make_quadratic};

    #[test]
    fn round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let (q, _) = make_quadratic(20, 6, 3, 2, 8).unwrap();
        let (e, _) = make_exponential(20, 8, 3, 2, 2, 8).unwrap();
        for inst in [Instance::Quadratic(q), Instance::Exponential(e), Instance::Small] {
            let path = dir.path().join("inst.json");
            write_instance(&inst, &path).unwrap();
            assert_eq!(read_instance(&path).unwrap(), inst);
        }
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        std::fs::write(&path, "{\"format\":\"other\",\"version\":1,\"problem\":{\"kind\":\"small\"}}")
            .unwrap();
        assert!(matches!(read_instance(&path), Err(Error::Format { .. })));
        std::fs::write(&path, "not json").unwrap();
        assert!(matches!(read_instance(&path), Err(Error::Format { .. })));
        assert!(matches!(
            read_instance(&dir.path().join("missing.json")),
            Err(Error::Io { .. })
        ));
    }
}
