use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerance::{DEFAULT_DIM, DEFAULT_TAIL_TOLERANCE};

/// A truncated Fock space holding the levels `|0⟩ … |dim−1⟩`.
///
/// `tail_tolerance` is the largest probability mass a state constructor or a
/// channel may push above the truncation before it refuses to proceed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FockSpace {
    dim: usize,
    tail_tolerance: f64,
}

impl FockSpace {
    pub fn new(dim: usize, tail_tolerance: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidSpace(format!("dim must be at least 2, got {dim}")));
        }
        if !(0.0..1.0).contains(&tail_tolerance) {
            return Err(Error::InvalidSpace(format!(
                "tail tolerance must lie in [0, 1), got {tail_tolerance}"
            )));
        }
        Ok(Self { dim, tail_tolerance })
    }

    pub fn with_dim(dim: usize) -> Result<Self> {
        Self::new(dim, DEFAULT_TAIL_TOLERANCE)
    }

    /// A finite carrier with exactly `dim` levels and no truncation (spins,
    /// spin pairs).
    pub fn finite_level(dim: usize) -> Result<Self> {
        Self::new(dim, 0.0)
    }

    pub fn two_level() -> Self {
        Self { dim: 2, tail_tolerance: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tail_tolerance(&self) -> f64 {
        self.tail_tolerance
    }

    /// Same tolerance, more levels.
    pub fn enlarged(&self, extra: usize) -> Self {
        Self { dim: self.dim + extra, tail_tolerance: self.tail_tolerance }
    }

    pub(crate) fn check_tail(&self, tail: f64, required_dim: usize) -> Result<()> {
        if tail > self.tail_tolerance {
            Err(Error::Truncation { tail, tolerance: self.tail_tolerance, required_dim })
        } else {
            Ok(())
        }
    }
}

impl Default for FockSpace {
    fn default() -> Self {
        Self { dim: DEFAULT_DIM, tail_tolerance: DEFAULT_TAIL_TOLERANCE }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_spaces() {
        assert!(FockSpace::new(1, 1e-8).is_err());
        assert!(FockSpace::new(4, 1.0).is_err());
        assert!(FockSpace::new(4, -1e-3).is_err());
        assert_eq!(FockSpace::default().dim(), 40);
    }
}
