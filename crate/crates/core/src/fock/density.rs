use serde::Serialize;

use super::{ComplexOperator, FockSpace, StateVector};
use crate::error::{Error, Result};
use crate::tolerance::{EIG_FLOOR, HERM_TOL, TRACE_TOL};

/// Hermitian, positive semidefinite, unit-trace operator tagged with the
/// transmitter setting that produced it.
///
/// `tail_mass` is probability that a channel pushed above the truncation.
/// The retained block then has trace `1 − tail_mass`, and the unit-trace
/// check is applied to the sum.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    op: ComplexOperator,
    label: String,
    tail_mass: f64,
}

/// Outcome of the density-operator checks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DensityReport {
    pub trace_defect: f64,
    pub hermiticity_defect: f64,
    pub min_eigenvalue: f64,
    pub tail_mass: f64,
}

impl DensityReport {
    pub fn passed(&self) -> bool {
        self.trace_defect < TRACE_TOL && self.hermiticity_defect < HERM_TOL && self.min_eigenvalue > -EIG_FLOOR
    }
}

impl DensityOperator {
    pub fn new(op: ComplexOperator, label: impl Into<String>) -> Result<Self> {
        Self::with_tail_mass(op, label, 0.0)
    }

    pub fn with_tail_mass(op: ComplexOperator, label: impl Into<String>, tail_mass: f64) -> Result<Self> {
        let rho = Self { op, label: label.into(), tail_mass };
        let report = rho.report();
        if report.hermiticity_defect >= HERM_TOL {
            return Err(Error::NotHermitian { defect: report.hermiticity_defect });
        }
        if report.trace_defect >= TRACE_TOL {
            return Err(Error::NotNormalized { trace: rho.op.trace().re });
        }
        if report.min_eigenvalue <= -EIG_FLOOR {
            return Err(Error::NotPositive { min_eigenvalue: report.min_eigenvalue });
        }
        Ok(rho)
    }

    /// `|ψ⟩⟨ψ|` for a normalized ket.
    pub fn pure(psi: &StateVector, label: impl Into<String>) -> Result<Self> {
        Self::new(ComplexOperator::projector(psi), label)
    }

    /// Number-diagonal state with the given level probabilities.
    pub fn diagonal(space: FockSpace, probabilities: &[f64], label: impl Into<String>) -> Result<Self> {
        Self::new(ComplexOperator::from_diagonal(space, probabilities)?, label)
    }

    pub fn op(&self) -> &ComplexOperator {
        &self.op
    }

    pub fn space(&self) -> FockSpace {
        self.op.space()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn relabel(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn report(&self) -> DensityReport {
        DensityReport {
            trace_defect: (self.op.trace().re + self.tail_mass - 1.0).abs(),
            hermiticity_defect: self.op.hermiticity_defect(),
            min_eigenvalue: self.op.min_eigenvalue(),
            tail_mass: self.tail_mass,
        }
    }

    /// Diagonal in the number basis.
    pub fn populations(&self) -> Vec<f64> {
        (0..self.op.dim()).map(|n| self.op.get(n, n).re).collect()
    }

    pub fn mean_number(&self) -> f64 {
        self.populations().iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn fidelity_with(&self, psi: &StateVector) -> Result<f64> {
        Ok(self.op.expectation(psi)?.re)
    }

    /// Restriction to a smaller space; the discarded diagonal mass joins the
    /// tail.
    pub fn restrict(&self, space: FockSpace) -> Result<Self> {
        let op = self.op.restrict(space)?;
        let lost = self.op.trace().re - op.trace().re;
        Ok(Self { op, label: self.label.clone(), tail_mass: self.tail_mass + lost })
    }

    pub fn embed(&self, space: FockSpace) -> Result<Self> {
        Ok(Self { op: self.op.embed(space)?, label: self.label.clone(), tail_mass: self.tail_mass })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent_state, number_state};
    use num_complex::Complex64 as C64;

    #[test]
    fn pure_states_pass_checks() {
        let s = FockSpace::with_dim(30).unwrap();
        let rho = DensityOperator::pure(&coherent_state(s, C64::new(1.0, 1.0)).unwrap(), "a").unwrap();
        assert!(rho.report().passed());
        assert_eq!(rho.label(), "a");
    }

    #[test]
    fn invalid_operators_are_rejected() {
        let s = FockSpace::with_dim(3).unwrap();
        let half = ComplexOperator::from_diagonal(s, &[0.5, 0.0, 0.0]).unwrap();
        assert!(matches!(DensityOperator::new(half, "t"), Err(Error::NotNormalized { .. })));
        let neg = ComplexOperator::from_diagonal(s, &[1.1, -0.1, 0.0]).unwrap();
        assert!(matches!(DensityOperator::new(neg, "t"), Err(Error::NotPositive { .. })));
        let mut m = ComplexOperator::identity(s).scale(1.0 / 3.0).into_entries();
        m[(0, 1)] = C64::new(0.1, 0.0);
        let skew = ComplexOperator::new(s, m).unwrap();
        assert!(matches!(DensityOperator::new(skew, "t"), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn restriction_moves_mass_to_tail() {
        let s = FockSpace::with_dim(6).unwrap();
        let rho = DensityOperator::pure(&number_state(s, 5).unwrap(), "n5").unwrap();
        let r = rho.restrict(FockSpace::with_dim(4).unwrap()).unwrap();
        assert!((r.tail_mass() - 1.0).abs() < 1e-15);
        assert!(r.report().trace_defect < 1e-15);
    }
}
