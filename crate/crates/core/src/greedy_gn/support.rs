use serde::{Deserialize, Serialize};

use crate::numlin::Vector;
use crate::{Error, Result};

/// Active column indices `Ω` (0-based), kept in insertion order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportSet {
    active: Vec<usize>,
    n_vars: usize,
}

impl SupportSet {
    pub fn empty(n_vars: usize) -> Self {
        Self {
            active: Vec::new(),
            n_vars,
        }
    }

    pub fn from_indices(n_vars: usize, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut set = Self::empty(n_vars);
        for i in indices {
            if !set.insert(i)? {
                return Err(Error::invalid(format!("duplicate support index {i}")));
            }
        }
        Ok(set)
    }

    /// `{i : |x(i)| > threshold}` in ascending order.
    pub fn from_threshold(x: &Vector, threshold: f64) -> Self {
        Self {
            active: (0..x.len()).filter(|&i| x[i].abs() > threshold).collect(),
            n_vars: x.len(),
        }
    }

    /// Adds `index`; returns `false` if it was already active.
    pub fn insert(&mut self, index: usize) -> Result<bool> {
        if index >= self.n_vars {
            return Err(Error::invalid(format!(
                "support index {index} out of range for N = {}",
                self.n_vars
            )));
        }
        if self.contains(index) {
            return Ok(false);
        }
        self.active.push(index);
        Ok(true)
    }

    pub fn contains(&self, index: usize) -> bool {
        self.active.contains(&index)
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn len(&self) -> usize {
        self.active.len()
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }

    /// Inactive indices in ascending order.
    pub fn complement(&self) -> Vec<usize> {
        let mut mask = vec![true; self.n_vars];
        for &i in &self.active {
            mask[i] = false;
        }
        (0..self.n_vars).filter(|&i| mask[i]).collect()
    }

    /// Active indices in ascending order.
    pub fn sorted(&self) -> Vec<usize> {
        let mut v = self.active.clone();
        v.sort_unstable();
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complement_and_insert() {
        let mut s = SupportSet::from_indices(5, [3, 1]).unwrap();
        assert_eq!(s.complement(), vec![0, 2, 4]);
        assert!(!s.insert(3).unwrap());
        assert!(s.insert(0).unwrap());
        assert_eq!(s.active(), &[3, 1, 0]);
        assert_eq!(s.sorted(), vec![0, 1, 3]);
        assert!(s.insert(5).is_err());
        assert!(SupportSet::from_indices(3, [1, 1]).is_err());
    }

    #[test]
    fn threshold() {
        let x = Vector::from_vec(vec![0.0, 1e-9, -0.5, 2e-8]);
        assert_eq!(SupportSet::from_threshold(&x, 1e-8).active(), &[2, 3]);
    }
}
